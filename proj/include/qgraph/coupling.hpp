#pragma once

// Vertex couplings of a star graph in the unitary parametrization
//
//     (U - I) Ψ(0) + i (U + I) Ψ'(0) = 0,
//
// with conversions to and from general boundary-condition pairs
// A Ψ(0) + B Ψ'(0) = 0.  Derivatives are taken in the outgoing direction.

#include "qgraph/error.hpp"
#include "qgraph/linalg.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace qgraph {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class Family { delta, delta_prime_s, delta_p, delta_prime, custom };

inline std::string_view to_string(Family f) {
    switch (f) {
    case Family::delta: return "delta";
    case Family::delta_prime_s: return "delta-prime-s";
    case Family::delta_p: return "delta-p";
    case Family::delta_prime: return "delta-prime";
    case Family::custom: return "custom";
    }
    return "custom";
}

inline std::optional<Family> parse_family(std::string_view s) {
    if (s == "delta") return Family::delta;
    if (s == "delta-prime-s") return Family::delta_prime_s;
    if (s == "delta-p") return Family::delta_p;
    if (s == "delta-prime") return Family::delta_prime;
    if (s == "custom") return Family::custom;
    return std::nullopt;
}

inline constexpr double unitarity_tolerance = 1e-12;
inline constexpr double minus_one_cluster_tolerance = 1e-9;

/// An n-edge vertex coupling held as its unitary matrix U.
class VertexCoupling {
public:
    /// Throws InvalidArgument unless `u` is square, non-empty and unitary within 1e-12.
    explicit VertexCoupling(Matrix u, Family family = Family::custom,
                            double parameter = std::numeric_limits<double>::quiet_NaN())
        : u_(std::move(u)), family_(family), parameter_(parameter) {
        if (u_.rows() < 1 || u_.rows() != u_.cols())
            throw InvalidArgument("coupling matrix must be square with n >= 1");
        const double defect = linalg::unitarity_defect(u_);
        if (!(defect < unitarity_tolerance))
            throw InvalidArgument("coupling matrix is not unitary (defect " + std::to_string(defect) + ")");
    }

    int size() const noexcept { return static_cast<int>(u_.rows()); }
    const Matrix& u() const noexcept { return u_; }
    Family family() const noexcept { return family_; }
    /// α or β of the family; NaN for custom couplings.
    double parameter() const noexcept { return parameter_; }

private:
    Matrix u_;
    Family family_;
    double parameter_;
};

/// Boundary-condition pair for A Ψ(0) + B Ψ'(0) = 0.
struct ABPair {
    Matrix a;
    Matrix b;
};

/// Ψ(0) and the outgoing derivatives Ψ'(0).
struct BoundaryValues {
    Vector psi;
    Vector dpsi;
};

/// Build U for one of the four symmetric coupling families.
///
/// delta         U = 2/(n+iα) J - I
/// delta-prime-s U = I - 2/(n-iβ) J
/// delta-p       U = (n-iα)/(n+iα) I - 2/(n+iα) J
/// delta-prime   U = -(n+iβ)/(n-iβ) I + 2/(n-iβ) J
///
/// An infinite parameter gives the decoupled limit: Dirichlet (U = -I) for
/// delta and delta-p, Neumann (U = I) for delta-prime-s and delta-prime.
inline VertexCoupling make_coupling(Family family, int n, double param) {
    if (n < 1) throw InvalidArgument("edge count n must be >= 1");
    if (std::isnan(param)) throw InvalidArgument("coupling parameter is NaN");

    const Matrix id = Matrix::Identity(n, n);
    const Matrix ones = linalg::all_ones(n);
    const double nd = static_cast<double>(n);
    const Complex i{0.0, 1.0};
    const bool inf = std::isinf(param);

    Matrix u;
    switch (family) {
    case Family::delta:
        u = inf ? Matrix(-id) : Matrix(2.0 / (nd + i * param) * ones - id);
        break;
    case Family::delta_prime_s:
        u = inf ? id : Matrix(id - 2.0 / (nd - i * param) * ones);
        break;
    case Family::delta_p:
        u = inf ? Matrix(-id)
                : Matrix((nd - i * param) / (nd + i * param) * id - 2.0 / (nd + i * param) * ones);
        break;
    case Family::delta_prime:
        u = inf ? id
                : Matrix(-(nd + i * param) / (nd - i * param) * id + 2.0 / (nd - i * param) * ones);
        break;
    case Family::custom:
        throw InvalidArgument("make_coupling: the custom family has no closed form");
    }
    return VertexCoupling(std::move(u), family, param);
}

/// A = U - I, B = i(U + I).
inline ABPair to_ab(const VertexCoupling& c) {
    const Matrix id = Matrix::Identity(c.size(), c.size());
    return {c.u() - id, Complex{0.0, 1.0} * (c.u() + id)};
}

struct ABDiagnostics {
    int rank = 0;                   ///< rank of the n×2n block (A, B)
    double hermiticity_defect = 0;  ///< max |AB* - BA*|
    double min_eigenvalue = 0;      ///< smallest eigenvalue of AA* + BB*
    bool admissible = false;
};

namespace detail {

inline double hermiticity_tolerance(const ABPair& ab) {
    const double scale = ab.a.operatorNorm() * ab.b.operatorNorm();
    return 1e-12 * std::max(1.0, scale);
}

} // namespace detail

inline ABDiagnostics validate_ab(const ABPair& ab) {
    if (ab.a.rows() != ab.a.cols() || ab.b.rows() != ab.b.cols() || ab.a.rows() != ab.b.rows())
        throw InvalidArgument("validate_ab: A and B must be square of equal size");
    const auto n = ab.a.rows();

    Matrix block(n, 2 * n);
    block << ab.a, ab.b;

    ABDiagnostics d;
    d.rank = linalg::numerical_rank(block);
    const Matrix abs = ab.a * ab.b.adjoint();
    d.hermiticity_defect = linalg::max_abs(abs - abs.adjoint());
    const Matrix gram = ab.a * ab.a.adjoint() + ab.b * ab.b.adjoint();
    d.min_eigenvalue = n == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues()(0);
    d.admissible = n > 0 && d.rank == n && d.hermiticity_defect <= detail::hermiticity_tolerance(ab)
                   && d.min_eigenvalue > 0.0;
    return d;
}

/// U = -(A + iB)^{-1} (A - iB); the unitary whose condition set equals that of (A, B).
inline VertexCoupling from_ab(const ABPair& ab) {
    const ABDiagnostics d = validate_ab(ab);
    if (!d.admissible)
        throw SingularMatrix("from_ab: invalid pair (rank " + std::to_string(d.rank) + ", hermiticity defect "
                             + std::to_string(d.hermiticity_defect) + ")");
    const Complex i{0.0, 1.0};
    const Matrix plus = ab.a + i * ab.b;
    if (linalg::condition_number(plus) > 1e12)
        throw SingularMatrix("from_ab: A + iB is numerically singular, invalid pair");
    Matrix u = -plus.fullPivLu().solve(ab.a - i * ab.b);
    return VertexCoupling(std::move(u));
}

/// Change of the length scale ℓ → ℓ' in the parametrization.
inline VertexCoupling rescale_length(const VertexCoupling& c, double ell, double ell_prime) {
    if (!(ell > 0.0) || !(ell_prime > 0.0)) throw InvalidArgument("rescale_length: lengths must be positive");
    const Matrix id = Matrix::Identity(c.size(), c.size());
    const Matrix num = (ell + ell_prime) * c.u() + (ell - ell_prime) * id;
    const Matrix den = (ell - ell_prime) * c.u() + (ell + ell_prime) * id;
    if (linalg::condition_number(den) > 1e12) throw SingularMatrix("rescale_length: singular denominator");
    // num and den are polynomials in U and commute.
    Matrix u = den.fullPivLu().solve(num);
    return VertexCoupling(std::move(u), c.family(), c.parameter());
}

/// Residual test of (U - I)Ψ + i(U + I)Ψ' = 0, cross-checked against ‖Ψ + iΨ'‖ = ‖Ψ - iΨ'‖.
inline bool satisfies_vertex_condition(const VertexCoupling& c, const BoundaryValues& bv, double tol) {
    if (bv.psi.size() != c.size() || bv.dpsi.size() != c.size())
        throw InvalidArgument("satisfies_vertex_condition: boundary vectors must have length n");
    const Complex i{0.0, 1.0};
    const Matrix id = Matrix::Identity(c.size(), c.size());
    const double scale = tol * (bv.psi.norm() + bv.dpsi.norm() + std::numeric_limits<double>::epsilon());
    const double residual = ((c.u() - id) * bv.psi + i * (c.u() + id) * bv.dpsi).norm();
    if (residual > scale) return false;
    const double current = (bv.psi + i * bv.dpsi).norm() - (bv.psi - i * bv.dpsi).norm();
    return std::abs(current) <= scale;
}

/// Orthogonal projection onto the eigenspace of U for the eigenvalue -1 (the Dirichlet part).
inline Matrix decoupled_projection(const VertexCoupling& c) {
    // U + I is normal, so its singular values are |λ + 1| over the eigenvalues λ of U.
    const int n = c.size();
    Eigen::JacobiSVD<Matrix> svd(c.u() + Matrix::Identity(n, n), Eigen::ComputeFullV);
    Matrix p = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        if (svd.singularValues()(k) < minus_one_cluster_tolerance) {
            const Vector v = svd.matrixV().col(k);
            p += v * v.adjoint();
        }
    }
    return p;
}

} // namespace qgraph
