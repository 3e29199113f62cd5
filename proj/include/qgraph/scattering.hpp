#pragma once

#include "qgraph/coupling.hpp"
#include "qgraph/error.hpp"
#include "qgraph/linalg.hpp"

#include <cmath>
#include <vector>

namespace qgraph {

/// Momentum on the physical sheet: real k > 0 (energy k²) or k = iκ, κ > 0 (energy -κ²).
struct SpectralParameter {
    enum class Kind { real_momentum, imaginary_momentum };

    Kind kind;
    double value;

    static SpectralParameter real(double k) { return make(Kind::real_momentum, k); }
    static SpectralParameter imaginary(double kappa) { return make(Kind::imaginary_momentum, kappa); }

    double energy() const { return kind == Kind::real_momentum ? value * value : -value * value; }
    Complex momentum() const { return kind == Kind::real_momentum ? Complex{value, 0.0} : Complex{0.0, value}; }

private:
    static SpectralParameter make(Kind kind, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("spectral parameter must be positive and finite");
        return {kind, v};
    }
};

namespace detail {

/// (k+1)I + (k-1)U and (k-1)I + (k+1)U for complex k.
inline Matrix s_matrix_denominator(const Matrix& u, Complex k) {
    return (k + 1.0) * Matrix::Identity(u.rows(), u.rows()) + (k - 1.0) * u;
}

} // namespace detail

/// On-shell S-matrix of the star graph of n half-lines,
/// S(k) = ((k-1)I + (k+1)U) ((k+1)I + (k-1)U)^{-1}.
inline Matrix s_matrix(const VertexCoupling& c, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("s_matrix: k must be positive and finite");
    const Matrix& u = c.u();
    const Matrix id = Matrix::Identity(c.size(), c.size());
    const Matrix den = detail::s_matrix_denominator(u, k);
    if (linalg::condition_number(den) > 1e12) {
        // Only an eigenvalue λ = -(k+1)/(k-1) of U can make the factor singular.
        const Complex target = -(k + 1.0) / (k - 1.0);
        Eigen::ComplexEigenSolver<Matrix> es(u);
        Complex worst = es.eigenvalues()(0);
        for (Eigen::Index j = 1; j < es.eigenvalues().size(); ++j)
            if (std::abs(es.eigenvalues()(j) - target) < std::abs(worst - target)) worst = es.eigenvalues()(j);
        throw PoleError("s_matrix: pole at k = " + std::to_string(k), worst);
    }
    // Numerator and denominator are polynomials in U and commute.
    return den.fullPivLu().solve((k - 1.0) * id + (k + 1.0) * u);
}

inline Matrix s_matrix(const VertexCoupling& c, SpectralParameter k) {
    if (k.kind != SpectralParameter::Kind::real_momentum)
        throw InvalidArgument("s_matrix: on-shell S-matrix needs a real momentum");
    return s_matrix(c, k.value);
}

struct BoundState {
    double kappa;
    int multiplicity;

    double energy() const { return -kappa * kappa; }
};

namespace detail {

/// Singular values of (iκ+1)I + (iκ-1)U divided by |1 + iκ|, ascending.
inline Eigen::VectorXd pole_singular_values(const Matrix& u, double kappa) {
    const Complex k{0.0, kappa};
    Eigen::VectorXd sv = linalg::singular_values(s_matrix_denominator(u, k)) / std::hypot(1.0, kappa);
    std::sort(sv.data(), sv.data() + sv.size());
    return sv;
}

inline double pole_indicator(const Matrix& u, double kappa) { return pole_singular_values(u, kappa)(0); }

} // namespace detail

inline constexpr double pole_threshold = 1e-8;

/// Bound states of the star graph with energies in [-kappa_max², 0): poles of the continued
/// S-matrix at k = iκ, i.e. zeros of det((iκ+1)I + (iκ-1)U) with κ ∈ (0, kappa_max].
inline std::vector<BoundState> bound_states(const VertexCoupling& c, double kappa_max) {
    if (!(kappa_max > 0.0) || !std::isfinite(kappa_max))
        throw InvalidArgument("bound_states: kappa_max must be positive and finite");

    constexpr int grid_points = 4000;
    constexpr double lowest = 1e-8;  // relative to kappa_max
    const Matrix& u = c.u();

    std::vector<double> kappa(grid_points);
    std::vector<double> f(grid_points);
    for (int j = 0; j < grid_points; ++j) {
        const double t = static_cast<double>(j) / (grid_points - 1);
        kappa[j] = kappa_max * std::pow(lowest, 1.0 - t);
        f[j] = detail::pole_indicator(u, kappa[j]);
    }
    kappa.back() = kappa_max;

    auto refine = [&](double lo, double hi) {
        // Golden-section search; the indicator is V-shaped, ~|κ - κ0|, near a root.
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo);
        double x2 = lo + g * (hi - lo);
        double f1 = detail::pole_indicator(u, x1);
        double f2 = detail::pole_indicator(u, x2);
        for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = detail::pole_indicator(u, x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = detail::pole_indicator(u, x2);
            }
        }
        return f1 <= f2 ? x1 : x2;
    };

    std::vector<BoundState> out;
    auto accept = [&](double k) {
        const Eigen::VectorXd sv = detail::pole_singular_values(u, k);
        if (sv(0) >= pole_threshold) return;
        const int mult = static_cast<int>((sv.array() < pole_threshold).count());
        if (!out.empty() && std::abs(out.back().kappa - k) <= 1e-9 * k) return;
        out.push_back({k, mult});
    };

    for (int j = 1; j + 1 < grid_points; ++j)
        if (f[j] <= f[j - 1] && f[j] < f[j + 1]) accept(refine(kappa[j - 1], kappa[j + 1]));
    if (f.back() < f[grid_points - 2]) accept(refine(kappa[grid_points - 2], kappa_max));

    return out;
}

} // namespace qgraph
