#pragma once

// Resolvent kernels of -d²/dx² at the energy -κ² (κ > 0):
//   * half-line kernels for Dirichlet, Neumann and Robin conditions at the origin,
//   * Krein's rank-one insertion of a point δ interaction,
//   * star-graph kernels assembled from symmetry sectors.

#include "qgraph/coupling.hpp"
#include "qgraph/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qgraph {

struct Dirichlet {};
struct Neumann {};

/// ψ'(0) = b ψ(0)
struct Robin {
    double b;
};

/// ψ(0) = (β/n) ψ'(0)
struct RobinScaled {
    int n;
    double beta;
};

using HalflineBC = std::variant<Dirichlet, Neumann, Robin, RobinScaled>;

inline std::string describe(const HalflineBC& bc) {
    struct V {
        std::string operator()(Dirichlet) const { return "dirichlet"; }
        std::string operator()(Neumann) const { return "neumann"; }
        std::string operator()(Robin r) const { return "robin(" + std::to_string(r.b) + ")"; }
        std::string operator()(RobinScaled r) const {
            return "robin-scaled(" + std::to_string(r.n) + "," + std::to_string(r.beta) + ")";
        }
    };
    return std::visit(V{}, bc);
}

/// δ interaction of strength c at distance a from the origin: ψ'(a+) - ψ'(a-) = c ψ(a).
struct PointInteraction {
    double a;
    double c;
};

inline constexpr double near_pole_tolerance = 1e-10;
inline constexpr double krein_pole_tolerance = 1e-12;

namespace detail {

// sinh(κ x<) e^{-κ x>} and cosh(κ x<) e^{-κ x>} without overflow for large arguments.
inline double sinh_decay(double kappa, double lo, double hi) {
    return 0.5 * (std::exp(-kappa * (hi - lo)) - std::exp(-kappa * (hi + lo)));
}
inline double cosh_decay(double kappa, double lo, double hi) {
    return 0.5 * (std::exp(-kappa * (hi - lo)) + std::exp(-kappa * (hi + lo)));
}

inline double robin_kernel(double b, double kappa, double lo, double hi) {
    if (std::isinf(b)) return sinh_decay(kappa, lo, hi) / kappa;
    if (std::abs(b + kappa) < near_pole_tolerance)
        throw PoleError("robin kernel: b + kappa vanishes (bound state at -kappa^2)", Complex{-b, 0.0});
    return (b * sinh_decay(kappa, lo, hi) + kappa * cosh_decay(kappa, lo, hi)) / (kappa * (b + kappa));
}

inline void check_kappa(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive and finite");
}

} // namespace detail

/// Kernel of (-d²/dx² + κ²)^{-1} on the half-line with the given origin condition.
inline double halfline_green(const HalflineBC& bc, double kappa, double x, double y) {
    detail::check_kappa(kappa);
    if (!(x >= 0.0) || !(y >= 0.0)) throw InvalidArgument("halfline_green: x, y must be >= 0");
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);

    struct V {
        double kappa, lo, hi;
        double operator()(Dirichlet) const { return detail::sinh_decay(kappa, lo, hi) / kappa; }
        double operator()(Neumann) const { return detail::cosh_decay(kappa, lo, hi) / kappa; }
        double operator()(Robin r) const { return detail::robin_kernel(r.b, kappa, lo, hi); }
        double operator()(RobinScaled r) const {
            if (r.n < 1) throw InvalidArgument("robin-scaled: n must be >= 1");
            if (std::isinf(r.beta)) return detail::cosh_decay(kappa, lo, hi) / kappa;
            const double n = r.n;
            const double den = n + r.beta * kappa;
            if (std::abs(den) < near_pole_tolerance)
                throw PoleError("robin-scaled kernel: n + beta*kappa vanishes", Complex{-n / r.beta, 0.0});
            return (n * detail::sinh_decay(kappa, lo, hi) + r.beta * kappa * detail::cosh_decay(kappa, lo, hi))
                   / (kappa * den);
        }
    };
    return std::visit(V{kappa, lo, hi}, bc);
}

/// Krein's formula: G^c(x,y) = G(x,y) + G(x,a) G(a,y) / (-1/c - G(a,a)) for any base kernel G.
template <class Kernel>
double krein_insert(const Kernel& base, const PointInteraction& p, double x, double y) {
    if (!(p.a > 0.0)) throw InvalidArgument("point interaction position must be > 0");
    if (p.c == 0.0) return base(x, y);
    const double gaa = base(p.a, p.a);
    const double den = (std::isinf(p.c) ? 0.0 : -1.0 / p.c) - gaa;
    if (std::abs(den) < krein_pole_tolerance)
        throw PoleError("krein_insert: energy hits an eigenvalue of the perturbed operator", Complex{den, 0.0});
    return base(x, y) + base(x, p.a) * base(p.a, y) / den;
}

inline double krein_insert(const HalflineBC& bc, const PointInteraction& p, double kappa, double x, double y) {
    auto base = [&](double s, double t) { return halfline_green(bc, kappa, s, t); };
    return krein_insert(base, p, x, y);
}

/// Kernel with several point interactions, inserted one after another.
inline double krein_insert_all(const HalflineBC& bc, std::span<const PointInteraction> points, double kappa,
                               double x, double y) {
    if (points.empty()) return halfline_green(bc, kappa, x, y);
    auto base = [&](double s, double t) { return krein_insert_all(bc, points.first(points.size() - 1), kappa, s, t); };
    return krein_insert(base, points.back(), x, y);
}

/// Magnitude of the Krein denominator -1/c - G(a,a); used by pole pre-flight checks.
inline double krein_denominator(const HalflineBC& bc, const PointInteraction& p, double kappa) {
    const double gaa = halfline_green(bc, kappa, p.a, p.a);
    return (std::isinf(p.c) ? 0.0 : (p.c == 0.0 ? infinity : -1.0 / p.c)) - gaa;
}

/// A star of n half-lines: either a singular target coupling (δ'_s or δ' with parameter β)
/// or an approximant whose central vertex carries δ (or δ_p) and every edge carries the
/// same point interaction.
class StarModel {
public:
    enum class Kind { delta_prime_s, delta_prime, central_delta, central_delta_p };

    static StarModel delta_prime_s(int n, double beta) { return StarModel(Kind::delta_prime_s, n, beta, 0.0, {}); }
    static StarModel delta_prime(int n, double beta) { return StarModel(Kind::delta_prime, n, beta, 0.0, {}); }

    /// Central δ with ψ'_j(0+) = b ψ(0) per channel in the symmetric sector (total strength n·b).
    static StarModel central_delta(int n, double b, PointInteraction p) {
        return StarModel(Kind::central_delta, n, 0.0, b, p);
    }
    /// Central δ_p with parameter b; its twisted sectors see ψ'(0) = (b/n) ψ(0).
    static StarModel central_delta_p(int n, double b, PointInteraction p) {
        return StarModel(Kind::central_delta_p, n, 0.0, b, p);
    }

    int edges() const noexcept { return n_; }
    Kind kind() const noexcept { return kind_; }
    double beta() const noexcept { return beta_; }
    double b() const noexcept { return b_; }
    const std::optional<PointInteraction>& point() const noexcept { return point_; }
    bool is_target() const noexcept { return kind_ == Kind::delta_prime_s || kind_ == Kind::delta_prime; }

    /// The central vertex as a unitary coupling.
    VertexCoupling central_coupling() const {
        switch (kind_) {
        case Kind::delta_prime_s: return make_coupling(Family::delta_prime_s, n_, beta_);
        case Kind::delta_prime: return make_coupling(Family::delta_prime, n_, beta_);
        case Kind::central_delta: return make_coupling(Family::delta, n_, n_ * b_);
        case Kind::central_delta_p: return make_coupling(Family::delta_p, n_, b_);
        }
        throw InvalidArgument("unknown star model");
    }

private:
    StarModel(Kind kind, int n, double beta, double b, std::optional<PointInteraction> p)
        : kind_(kind), n_(n), beta_(beta), b_(b), point_(p) {
        if (n < 1) throw InvalidArgument("star model: n must be >= 1");
        if (std::isnan(beta) || std::isnan(b)) throw InvalidArgument("star model: NaN parameter");
        if (point_ && !(point_->a > 0.0)) throw InvalidArgument("star model: point position must be > 0");
        if (!is_target() && !point_) throw InvalidArgument("approximant needs a point interaction");
    }

    Kind kind_;
    int n_;
    double beta_;
    double b_;
    std::optional<PointInteraction> point_;
};

/// One invariant subspace of a permutation-symmetric star operator, reduced to a half-line.
struct SectorSpec {
    enum class Basis { symmetric, complement, fourier };

    int index = 0;                   ///< 0 for the symmetric / r = 0 sector
    Basis basis = Basis::symmetric;
    Complex phase{1.0, 0.0};         ///< ε^r with ε = e^{2πi/n} for fourier sectors
    HalflineBC bc = Neumann{};
    std::optional<PointInteraction> point;
    int multiplicity = 1;

    double kernel(double kappa, double x, double y) const {
        if (point) return krein_insert(bc, *point, kappa, x, y);
        return halfline_green(bc, kappa, x, y);
    }
};

/// Reduce a star model to its half-line sectors.
///
/// δ'_s and its central-δ approximant split into the permutation-symmetric line (multiplicity 1)
/// and its complement (multiplicity n-1). δ' and the central-δ_p approximant split into the n
/// Fourier sectors G_r = {(ψ, ε^r ψ, ..., ε^{r(n-1)} ψ)}, each of multiplicity 1.
inline std::vector<SectorSpec> sector_decompose(const StarModel& m) {
    const int n = m.edges();
    const auto& pt = m.point();
    std::vector<SectorSpec> out;

    switch (m.kind()) {
    case StarModel::Kind::delta_prime_s:
    case StarModel::Kind::central_delta: {
        const bool target = m.kind() == StarModel::Kind::delta_prime_s;
        SectorSpec sym;
        sym.index = 0;
        sym.basis = SectorSpec::Basis::symmetric;
        sym.bc = target ? HalflineBC{RobinScaled{n, m.beta()}} : HalflineBC{Robin{m.b()}};
        sym.point = pt;
        sym.multiplicity = 1;
        out.push_back(sym);
        if (n > 1) {
            SectorSpec comp;
            comp.index = 1;
            comp.basis = SectorSpec::Basis::complement;
            comp.phase = std::polar(1.0, 2.0 * std::numbers::pi / n);
            comp.bc = target ? HalflineBC{Neumann{}} : HalflineBC{Dirichlet{}};
            comp.point = pt;
            comp.multiplicity = n - 1;
            out.push_back(comp);
        }
        break;
    }
    case StarModel::Kind::delta_prime:
    case StarModel::Kind::central_delta_p: {
        const bool target = m.kind() == StarModel::Kind::delta_prime;
        for (int r = 0; r < n; ++r) {
            SectorSpec s;
            s.index = r;
            s.basis = SectorSpec::Basis::fourier;
            s.phase = std::polar(1.0, 2.0 * std::numbers::pi * r / n);
            if (r == 0)
                s.bc = target ? HalflineBC{Neumann{}} : HalflineBC{Dirichlet{}};
            else
                s.bc = target ? HalflineBC{RobinScaled{n, m.beta()}} : HalflineBC{Robin{m.b() / n}};
            s.point = pt;
            s.multiplicity = 1;
            out.push_back(s);
        }
        break;
    }
    }
    return out;
}

/// Edge-indexed kernel G_{jl}(x, y) of the star model (edges numbered from 0).
///
/// Uses Σ_{r=1}^{n-1} ε^{r(j-l)} = nδ_{jl} - 1, so
/// G_{jl} = G_0 / n + (nδ_{jl} - 1)/n · G_{r≥1}.
inline double star_green(const StarModel& m, double kappa, int edge_j, double x, int edge_l, double y) {
    const int n = m.edges();
    if (edge_j < 0 || edge_j >= n || edge_l < 0 || edge_l >= n) throw InvalidArgument("star_green: edge out of range");
    const auto sectors = sector_decompose(m);
    const double g0 = sectors[0].kernel(kappa, x, y);
    if (n == 1) return g0;
    const double g1 = sectors[1].kernel(kappa, x, y);
    const double nd = n;
    const double weight = (edge_j == edge_l ? nd - 1.0 : -1.0) / nd;
    return g0 / nd + weight * g1;
}

} // namespace qgraph
