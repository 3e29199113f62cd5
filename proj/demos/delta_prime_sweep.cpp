// Approximation of a delta'_s star vertex by a central delta plus satellite deltas at distance a.

#include "qgraph/qgraph.hpp"

#include <array>
#include <cstdio>

using namespace qgraph;

int main() {
    const int n = 3;
    const double beta = 1.0, kappa = 1.0;
    const std::array<double, 5> as{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

    for (const TargetFamily f : {TargetFamily::delta_prime_s, TargetFamily::delta_prime}) {
        const ConvergenceReport r = convergence_sweep(f, beta, n, kappa, as, GridSpec{}, 4);
        std::printf("%s  n=%d beta=%.1f kappa=%.1f\n", std::string(to_string(f)).c_str(), n, beta, kappa);
        std::printf("%10s %14s %12s %12s %12s %12s %12s\n", "a", "b", "c", "norm_sym", "norm_comp", "norm_total",
                    "outer");
        for (const auto& s : r.stages)
            std::printf("%10.1e %14.6g %12.6g %12.4e %12.4e %12.4e %12.4e\n", s.stage.a, s.stage.b, s.stage.c,
                        s.norm_sym, s.norm_comp, s.norm_total, s.norm_total_outer);
        if (r.fit) std::printf("log-log slope: full %.4f, outer region %.4f\n", r.fit->slope, r.outer_fit->slope);

        // Pointwise picture at (1, 1) in the symmetric sector.
        const auto target = sector_decompose(target_model(f, n, beta));
        for (const double a : as) {
            const auto approx = sector_decompose(approximant_model(schedule(f, beta, n, a), n));
            std::printf("  a=%.0e  |dG_0(1,1)| = %.3e\n", a,
                        std::abs(approx[0].kernel(kappa, 1.0, 1.0) - target[0].kernel(kappa, 1.0, 1.0)));
        }
        std::printf("\n");
    }
    return 0;
}
