#pragma once

#include "qgraph/linalg.hpp"

#include <random>

namespace qgraph::testing {

inline Matrix random_complex(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex{g(rng), g(rng)};
    return m;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's diagonal removed.
inline Matrix random_unitary(int n, std::mt19937_64& rng) {
    const Matrix z = random_complex(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        q.col(j) *= d / std::abs(d);
    }
    return q;
}

} // namespace qgraph::testing
