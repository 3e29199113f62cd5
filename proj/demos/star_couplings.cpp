// Vertex couplings on a three-edge star: matrices, scattering at one momentum, bound states.

#include "qgraph/qgraph.hpp"

#include <cstdio>

using namespace qgraph;

int main() {
    const int n = 3;
    const double k = 1.5;
    for (const Family f : {Family::delta, Family::delta_prime_s, Family::delta_p, Family::delta_prime}) {
        const VertexCoupling c = make_coupling(f, n, -1.2);
        const Matrix s = s_matrix(c, k);
        std::printf("%s (param -1.2), n = %d\n", std::string(to_string(f)).c_str(), n);
        std::printf("  unitarity defect of U  %.2e\n", linalg::unitarity_defect(c.u()));
        std::printf("  S(%.1f) diagonal       % .6f %+.6fi\n", k, s(0, 0).real(), s(0, 0).imag());
        std::printf("  S(%.1f) off-diagonal   % .6f %+.6fi\n", k, s(0, 1).real(), s(0, 1).imag());
        for (const auto& b : bound_states(c, 20.0))
            std::printf("  bound state kappa = %.10f, energy %.6f, multiplicity %d\n", b.kappa, b.energy(), b.multiplicity);
        std::printf("\n");
    }

    // The same vertex seen on edges of length 1 rescaled to length 2.
    const VertexCoupling c = make_coupling(Family::delta, n, 2.0);
    const Matrix u2 = rescale_length(c, 1.0, 2.0).u();
    std::printf("delta(2) rescaled 1 -> 2: U'(0,0) = %.6f %+.6fi\n", u2(0, 0).real(), u2(0, 0).imag());
    return 0;
}
