#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <limits>

namespace qgraph {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace linalg {

/// The n×n matrix with every entry equal to one.
inline Matrix all_ones(int n) { return Matrix::Ones(n, n); }

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// max |U U* - I|
inline double unitarity_defect(const Matrix& u) {
    return max_abs(u * u.adjoint() - Matrix::Identity(u.rows(), u.rows()));
}

inline Eigen::VectorXd singular_values(const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

/// Numerical rank with threshold rows·eps·σ_max.
inline int numerical_rank(const Matrix& m) {
    const Eigen::VectorXd sv = singular_values(m);
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double tol = static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon() * sv(0);
    return static_cast<int>((sv.array() > tol).count());
}

/// σ_max / σ_min; infinity for an exactly singular matrix.
inline double condition_number(const Matrix& m) {
    const Eigen::VectorXd sv = singular_values(m);
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

} // namespace linalg
} // namespace qgraph
