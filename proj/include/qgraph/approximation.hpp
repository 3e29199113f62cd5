#pragma once

// Approximation of the δ'_s and δ' star couplings by scaled δ-type couplings.
//
// The approximant keeps a δ (δ'_s case) or δ_p (δ' case) coupling at the centre and adds a δ
// interaction of strength c at distance a on every edge. With
//
//     δ'_s:  b(a) = -β/(n a²),  c(a) = -1/a
//     δ'  :  b(a) = -β/a²,      c(a) = -1/a
//
// the resolvent kernels converge to those of the target coupling as a → 0+. This header
// measures that: sector by sector kernel differences, their Hilbert–Schmidt norms, and
// a log-log fit of the combined norm against a.

#include "qgraph/error.hpp"
#include "qgraph/greens.hpp"
#include "qgraph/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

namespace qgraph {

enum class TargetFamily { delta_prime_s, delta_prime };

inline std::string_view to_string(TargetFamily f) {
    return f == TargetFamily::delta_prime_s ? "delta-prime-s" : "delta-prime";
}

struct ApproximationStage {
    double a = 0.0;
    double b = 0.0;              ///< central coupling constant
    double c = 0.0;              ///< satellite δ strength, -1/a
    double per_channel_b = 0.0;  ///< Robin constant seen by the nontrivial sectors at the origin
    TargetFamily family = TargetFamily::delta_prime_s;
};

inline ApproximationStage schedule(TargetFamily family, double beta, int n, double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("schedule: a must be positive");
    if (n < 1) throw InvalidArgument("schedule: n must be >= 1");
    if (!std::isfinite(beta)) throw InvalidArgument("schedule: beta must be finite");
    ApproximationStage s;
    s.a = a;
    s.c = -1.0 / a;
    s.family = family;
    if (family == TargetFamily::delta_prime_s) {
        s.b = -beta / (n * a * a);
        s.per_channel_b = s.b;
    } else {
        s.b = -beta / (a * a);
        s.per_channel_b = s.b / n;
    }
    return s;
}

/// Leading-order Robin constant at x = a+ produced by ψ'(0+) = bψ(0) and a δ of strength c at a:
/// B(a) = c + b/(1 + ab).
inline double effective_robin(double b, double c, double a) {
    if (!(a > 0.0)) throw InvalidArgument("effective_robin: a must be positive");
    const double d = 1.0 + a * b;
    if (std::abs(d) < 1e-14) throw InvalidArgument("effective_robin: degenerate stage, 1 + ab = 0");
    return c + b / d;
}

inline StarModel target_model(TargetFamily family, int n, double beta) {
    return family == TargetFamily::delta_prime_s ? StarModel::delta_prime_s(n, beta) : StarModel::delta_prime(n, beta);
}

inline StarModel approximant_model(const ApproximationStage& s, int n) {
    const PointInteraction p{s.a, s.c};
    return s.family == TargetFamily::delta_prime_s ? StarModel::central_delta(n, s.b, p)
                                                   : StarModel::central_delta_p(n, s.b, p);
}

/// Tensor-product quadrature nodes on [0, L] with composite Simpson weights. When a kink
/// position is given it is a node; [0, a] gets its own sub-grid and [a, L] a uniform one.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> outer_weights;  ///< weights of the [a, L] segment only (zero below a)
};

namespace detail {

inline void append_simpson(QuadratureRule& q, double lo, double hi, int panels, bool outer) {
    if (panels % 2) ++panels;
    const double h = (hi - lo) / panels;
    const std::size_t start = q.nodes.size();
    if (start == 0) {
        q.nodes.push_back(lo);
        q.weights.push_back(0.0);
        q.outer_weights.push_back(0.0);
    }
    const std::size_t first = q.nodes.size() - 1;
    for (int i = 1; i <= panels; ++i) {
        q.nodes.push_back(i == panels ? hi : lo + i * h);
        q.weights.push_back(0.0);
        q.outer_weights.push_back(0.0);
    }
    for (int i = 0; i <= panels; ++i) {
        const double w = h / 3.0 * (i == 0 || i == panels ? 1.0 : (i % 2 ? 4.0 : 2.0));
        q.weights[first + i] += w;
        if (outer) q.outer_weights[first + i] += w;
    }
}

} // namespace detail

inline QuadratureRule kink_aligned_rule(const GridSpec& grid, std::optional<double> kink = std::nullopt) {
    grid.validate();
    const double L = grid.length;
    const double h = grid.step();
    QuadratureRule q;
    if (!kink) {
        detail::append_simpson(q, 0.0, L, grid.interior + 1, true);
        return q;
    }
    const double a = *kink;
    if (!(a > 0.0) || !(a < L)) throw InvalidArgument("quadrature: kink must lie inside (0, L)");
    const int strip = std::max(16, 2 * static_cast<int>(std::ceil(a / (2.0 * h))));
    const int rest = std::max(2, static_cast<int>(std::ceil((L - a) / h)));
    detail::append_simpson(q, 0.0, a, strip, false);
    detail::append_simpson(q, a, L, rest, true);
    return q;
}

/// Kernel samples on the tensor grid of a quadrature rule.
struct KernelGrid {
    QuadratureRule rule;
    Eigen::MatrixXd values;
};

/// Sample f(x, y) on rule.nodes², rows spread over `threads` workers.
template <class Kernel>
KernelGrid sample_kernel(const Kernel& f, QuadratureRule rule, int threads = 1) {
    const auto m = static_cast<Eigen::Index>(rule.nodes.size());
    KernelGrid g{std::move(rule), Eigen::MatrixXd(m, m)};
    const int workers = std::clamp(threads, 1, static_cast<int>(std::max<Eigen::Index>(m, 1)));
    std::vector<std::exception_ptr> errors(workers);
    auto run = [&](int w) {
        try {
            for (Eigen::Index i = w; i < m; i += workers)
                for (Eigen::Index j = 0; j < m; ++j) g.values(i, j) = f(g.rule.nodes[i], g.rule.nodes[j]);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return g;
}

/// Samples of approx.kernel - target.kernel over [0, L]², with a as a quadrature node.
inline KernelGrid sector_difference(const SectorSpec& target, const SectorSpec& approx, double kappa, double a,
                                    const GridSpec& grid, int threads = 1) {
    if (target.index != approx.index || target.multiplicity != approx.multiplicity)
        throw InvalidArgument("sector_difference: sectors do not correspond");
    auto diff = [&](double x, double y) { return approx.kernel(kappa, x, y) - target.kernel(kappa, x, y); };
    return sample_kernel(diff, kink_aligned_rule(grid, a), threads);
}

/// Hilbert–Schmidt norm sqrt(∫∫ |K(x,y)|² dx dy) by the tensor quadrature of the grid.
inline double hs_norm(const KernelGrid& k) {
    const Eigen::Map<const Eigen::VectorXd> w(k.rule.weights.data(), static_cast<Eigen::Index>(k.rule.weights.size()));
    return std::sqrt(std::max(0.0, w.dot(k.values.cwiseAbs2() * w)));
}

/// Same norm restricted to [a, L]².
inline double hs_norm_outer(const KernelGrid& k) {
    const auto& ow = k.rule.outer_weights;
    const Eigen::Map<const Eigen::VectorXd> w(ow.data(), static_cast<Eigen::Index>(ow.size()));
    return std::sqrt(std::max(0.0, w.dot(k.values.cwiseAbs2() * w)));
}

struct StageResult {
    ApproximationStage stage;
    double norm_sym = 0.0;   ///< symmetric (δ'_s) or r = 0 (δ') sector
    double norm_comp = 0.0;  ///< complement (δ'_s) or any r ≥ 1 (δ') sector, per copy
    double norm_total = 0.0;
    double norm_total_outer = 0.0;  ///< combined norm over [a, L]² only
    bool valid = true;
    std::string error;
};

struct LinearFit {
    double slope;
    double intercept;
};

struct ConvergenceReport {
    TargetFamily family = TargetFamily::delta_prime_s;
    int n = 0;
    double beta = 0.0;
    double kappa = 1.0;
    std::vector<StageResult> stages;
    std::optional<LinearFit> fit;        ///< log(norm_total) against log(a)
    std::optional<LinearFit> outer_fit;  ///< log(norm_total_outer) against log(a)

    bool all_valid() const {
        return std::all_of(stages.begin(), stages.end(), [](const StageResult& s) { return s.valid; });
    }
};

/// Least-squares line through (log x, log y).
inline std::optional<LinearFit> fit_log_log(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = m * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    const double slope = (m * sxy - sx * sy) / den;
    return LinearFit{slope, (sy - slope * sx) / m};
}

inline constexpr double target_pole_guard = 1e-6;
inline constexpr double krein_pole_guard = 1e-10;

/// Reason the stage cannot be evaluated at κ, or nullopt when every pole guard passes.
inline std::optional<std::string> preflight(const StarModel& target, const StarModel& approx, double kappa) {
    for (const auto& s : sector_decompose(target)) {
        if (const auto* r = std::get_if<RobinScaled>(&s.bc); r && std::isfinite(r->beta)
            && std::abs(r->n + r->beta * kappa) <= target_pole_guard)
            return "target kernel pole: n + beta*kappa = " + std::to_string(r->n + r->beta * kappa);
    }
    for (const auto& s : sector_decompose(approx)) {
        if (const auto* r = std::get_if<Robin>(&s.bc); r && std::abs(r->b + kappa) <= near_pole_tolerance)
            return "approximant origin pole: b + kappa = " + std::to_string(r->b + kappa);
        if (s.point) {
            const double den = krein_denominator(s.bc, *s.point, kappa);
            if (std::abs(den) <= krein_pole_guard) return "krein denominator vanishes: " + std::to_string(den);
        }
    }
    return std::nullopt;
}

/// Run the approximation at every a of `a_list` (strictly decreasing) and fit the rate.
inline ConvergenceReport convergence_sweep(TargetFamily family, double beta, int n, double kappa,
                                           std::span<const double> a_list, const GridSpec& grid, int threads = 1) {
    detail::check_kappa(kappa);
    grid.validate();
    if (a_list.empty()) throw InvalidArgument("convergence_sweep: empty a list");
    for (std::size_t i = 0; i < a_list.size(); ++i) {
        if (!(a_list[i] > 0.0) || !(a_list[i] < grid.length))
            throw InvalidArgument("convergence_sweep: every a must lie in (0, L)");
        if (i > 0 && !(a_list[i] < a_list[i - 1]))
            throw InvalidArgument("convergence_sweep: a list must be strictly decreasing");
    }

    ConvergenceReport report;
    report.family = family;
    report.n = n;
    report.beta = beta;
    report.kappa = kappa;

    const StarModel target = target_model(family, n, beta);
    const auto target_sectors = sector_decompose(target);

    for (const double a : a_list) {
        StageResult r;
        r.stage = schedule(family, beta, n, a);
        const StarModel approx = approximant_model(r.stage, n);
        if (auto why = preflight(target, approx, kappa)) {
            r.valid = false;
            r.error = *why;
            report.stages.push_back(std::move(r));
            continue;
        }
        try {
            const auto approx_sectors = sector_decompose(approx);
            double outer_sym = 0.0, outer_comp = 0.0;
            {
                const KernelGrid d = sector_difference(target_sectors[0], approx_sectors[0], kappa, a, grid, threads);
                r.norm_sym = hs_norm(d);
                outer_sym = hs_norm_outer(d);
            }
            if (n > 1) {
                const KernelGrid d = sector_difference(target_sectors[1], approx_sectors[1], kappa, a, grid, threads);
                r.norm_comp = hs_norm(d);
                outer_comp = hs_norm_outer(d);
            }
            r.norm_total = std::sqrt(r.norm_sym * r.norm_sym + (n - 1) * r.norm_comp * r.norm_comp);
            r.norm_total_outer = std::sqrt(outer_sym * outer_sym + (n - 1) * outer_comp * outer_comp);
        } catch (const PoleError& e) {
            r.valid = false;
            r.error = e.what();
        }
        report.stages.push_back(std::move(r));
    }

    // Fit over the three smallest valid a.
    std::vector<double> xs, ys, yo;
    for (auto it = report.stages.rbegin(); it != report.stages.rend() && xs.size() < 3; ++it) {
        if (!it->valid) continue;
        xs.push_back(it->stage.a);
        ys.push_back(it->norm_total);
        yo.push_back(it->norm_total_outer);
    }
    report.fit = fit_log_log(xs, ys);
    report.outer_fit = fit_log_log(xs, yo);
    return report;
}

} // namespace qgraph
