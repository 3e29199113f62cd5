#pragma once

// Brute-force finite-difference resolvents used to cross-check the closed-form kernels.
//
// Second-order three-point Laplacian on a uniform grid x_i = i h, h = L/(N+1), with a
// Dirichlet wall at L. The origin condition enters through a ghost node; the origin
// row is halved so the discrete operator is symmetric, and kernel samples are
// G(x_i, x_j) = (K^{-1})_{ij} / h.

#include "qgraph/coupling.hpp"
#include "qgraph/error.hpp"
#include "qgraph/greens.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <algorithm>
#include <memory>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace qgraph {

struct GridSpec {
    double length = 12.0;  ///< truncation length L
    int interior = 400;    ///< interior point count N

    double step() const { return length / (interior + 1); }

    void validate() const {
        if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("grid: length must be positive");
        if (interior < 16) throw InvalidArgument("grid: need at least 16 interior points");
    }

    /// Grid with step exactly h covering at least [0, min_length].
    static GridSpec with_step(double h, double min_length) {
        if (!(h > 0.0)) throw InvalidArgument("grid: step must be positive");
        const int cells = static_cast<int>(std::ceil(min_length / h - 1e-9));
        return GridSpec{cells * h, cells - 1};
    }
};

/// Thomas algorithm for a tridiagonal system; the factorization is reused across right-hand sides.
class TridiagonalSolver {
public:
    TridiagonalSolver(std::vector<double> sub, std::vector<double> diag, std::vector<double> super)
        : sub_(std::move(sub)), super_(std::move(super)), pivot_(std::move(diag)) {
        const std::size_t n = pivot_.size();
        if (n == 0 || sub_.size() != n || super_.size() != n) throw InvalidArgument("tridiagonal: size mismatch");
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            scale = std::max({scale, std::abs(pivot_[i]), std::abs(sub_[i]), std::abs(super_[i])});
        ratio_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) {
                ratio_[i] = sub_[i] / pivot_[i - 1];
                pivot_[i] -= ratio_[i] * super_[i - 1];
            }
            if (std::abs(pivot_[i]) < 1e-14 * scale)
                throw SingularMatrix("finite-difference resolvent: matrix is singular (energy on the spectrum)");
        }
    }

    std::size_t size() const noexcept { return pivot_.size(); }

    Eigen::VectorXd solve(Eigen::VectorXd rhs) const {
        const auto n = static_cast<Eigen::Index>(pivot_.size());
        for (Eigen::Index i = 1; i < n; ++i) rhs(i) -= ratio_[i] * rhs(i - 1);
        rhs(n - 1) /= pivot_[n - 1];
        for (Eigen::Index i = n - 2; i >= 0; --i) rhs(i) = (rhs(i) - super_[i] * rhs(i + 1)) / pivot_[i];
        return rhs;
    }

private:
    std::vector<double> sub_;
    std::vector<double> super_;
    std::vector<double> pivot_;
    std::vector<double> ratio_;
};

namespace detail {

/// Robin constant of the origin condition, or nullopt for Dirichlet.
inline std::optional<double> origin_robin(const HalflineBC& bc) {
    struct V {
        std::optional<double> operator()(Dirichlet) const { return std::nullopt; }
        std::optional<double> operator()(Neumann) const { return 0.0; }
        std::optional<double> operator()(Robin r) const {
            if (std::isinf(r.b)) return std::nullopt;
            return r.b;
        }
        std::optional<double> operator()(RobinScaled r) const {
            if (r.n < 1) throw InvalidArgument("robin-scaled: n must be >= 1");
            if (r.beta == 0.0) return std::nullopt;
            if (std::isinf(r.beta)) return 0.0;
            return r.n / r.beta;
        }
    };
    return std::visit(V{}, bc);
}

inline int nearest_node(double x, double h) { return static_cast<int>(std::lround(x / h)); }

/// Linear interpolation weights of x on the node lattice i h: (i, 1 - t), (i + 1, t).
inline std::pair<int, double> locate(double x, double h) {
    const double s = x / h;
    const double r = std::round(s);
    if (std::abs(s - r) < 1e-9) return {static_cast<int>(r), 0.0};
    const double f = std::floor(s);
    return {static_cast<int>(f), s - f};
}

} // namespace detail

/// Discrete resolvent of one half-line with origin condition `bc` and δ bumps c/h at the
/// nodes nearest to each point interaction.
class FdHalflineResolvent {
public:
    FdHalflineResolvent(const HalflineBC& bc, std::span<const PointInteraction> points, double kappa, GridSpec grid)
        : grid_(grid), h_(grid.step()) {
        grid_.validate();
        detail::check_kappa(kappa);
        const auto robin = detail::origin_robin(bc);
        first_ = robin ? 0 : 1;
        const int unknowns = grid_.interior + 1 - first_;
        const double ih2 = 1.0 / (h_ * h_);

        std::vector<double> sub(unknowns, -ih2), diag(unknowns, 2.0 * ih2 + kappa * kappa), super(unknowns, -ih2);
        sub[0] = 0.0;
        super[unknowns - 1] = 0.0;
        if (robin) diag[0] = (1.0 + h_ * *robin) * ih2 + 0.5 * kappa * kappa;

        for (const auto& p : points) {
            if (!std::isfinite(p.c)) throw InvalidArgument("oracle: point strength must be finite");
            const int node = detail::nearest_node(p.a, h_);
            if (node < 1 || node > grid_.interior) throw InvalidArgument("oracle: point interaction outside (0, L)");
            diag[node - first_] += p.c / h_;
        }
        solver_ = std::make_shared<TridiagonalSolver>(std::move(sub), std::move(diag), std::move(super));
    }

    const GridSpec& grid() const noexcept { return grid_; }
    double step() const noexcept { return h_; }

    /// Kernel column G(x_i, x_j) for every node i = 0..N+1 (zeros at Dirichlet nodes).
    Eigen::VectorXd column(int j) const {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(grid_.interior + 2);
        if (j < first_ || j > grid_.interior) return col;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(solver_->size()));
        rhs(j - first_) = 1.0;
        const Eigen::VectorXd u = solver_->solve(std::move(rhs));
        col.segment(first_, u.size()) = u / h_;
        return col;
    }

    /// Kernel value, bilinear between nodes.
    double operator()(double x, double y) const {
        if (x < 0.0 || y < 0.0) throw InvalidArgument("oracle: coordinates must be >= 0");
        const double L = (grid_.interior + 1) * h_;
        if (x >= L || y >= L) return 0.0;
        const auto [iy, ty] = detail::locate(y, h_);
        const auto [ix, tx] = detail::locate(x, h_);
        auto sample = [&](const Eigen::VectorXd& col) {
            const double v0 = col(ix);
            return tx == 0.0 ? v0 : (1.0 - tx) * v0 + tx * col(ix + 1);
        };
        const double v = sample(column(iy));
        return ty == 0.0 ? v : (1.0 - ty) * v + ty * sample(column(iy + 1));
    }

private:
    GridSpec grid_;
    double h_;
    int first_ = 0;
    std::shared_ptr<const TridiagonalSolver> solver_;
};

inline FdHalflineResolvent fd_resolvent_halfline(const HalflineBC& bc, std::span<const PointInteraction> points,
                                                 double kappa, GridSpec grid) {
    return FdHalflineResolvent(bc, points, kappa, grid);
}

/// Discrete resolvent of a star graph. The n edge blocks meet at the origin nodes, where the
/// vertex condition A Ψ(0) + B Ψ'(0) = 0 of the central coupling closes the ghost-node system.
class FdStarResolvent {
public:
    FdStarResolvent(const StarModel& m, double kappa, GridSpec grid)
        : n_(m.edges()), grid_(grid), h_(grid.step()) {
        grid_.validate();
        detail::check_kappa(kappa);
        const ABPair ab = to_ab(m.central_coupling());
        const int per_edge = grid_.interior + 1;  // nodes 0..N on each edge
        const int size = n_ * per_edge + n_;      // plus one derivative unknown per edge
        const double ih2 = 1.0 / (h_ * h_);

        int point_node = -1;
        double point_bump = 0.0;
        if (m.point()) {
            if (!std::isfinite(m.point()->c)) throw InvalidArgument("oracle: point strength must be finite");
            point_node = detail::nearest_node(m.point()->a, h_);
            if (point_node < 1 || point_node > grid_.interior)
                throw InvalidArgument("oracle: point interaction outside (0, L)");
            point_bump = m.point()->c / h_;
        }

        using Triplet = Eigen::Triplet<Complex>;
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(3 * size + 2 * n_ * n_));
        for (int e = 0; e < n_; ++e) {
            const int base = e * per_edge;
            // Origin row, halved: (ψ0 - ψ1)/h² + ψ'/h + κ²ψ0/2.
            t.emplace_back(base, base, ih2 + 0.5 * kappa * kappa);
            t.emplace_back(base, base + 1, -ih2);
            t.emplace_back(base, derivative_index(e), 1.0 / h_);
            for (int i = 1; i <= grid_.interior; ++i) {
                const int row = base + i;
                t.emplace_back(row, row, 2.0 * ih2 + kappa * kappa + (i == point_node ? point_bump : 0.0));
                t.emplace_back(row, row - 1, -ih2);
                if (i < grid_.interior) t.emplace_back(row, row + 1, -ih2);
            }
        }
        for (int k = 0; k < n_; ++k) {
            const int row = derivative_index(k);
            for (int e = 0; e < n_; ++e) {
                if (ab.a(k, e) != Complex{}) t.emplace_back(row, e * per_edge, ab.a(k, e));
                if (ab.b(k, e) != Complex{}) t.emplace_back(row, derivative_index(e), ab.b(k, e));
            }
        }
        Eigen::SparseMatrix<Complex> k(size, size);
        k.setFromTriplets(t.begin(), t.end());
        k.makeCompressed();

        solver_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<Complex>>>();
        solver_->compute(k);
        if (solver_->info() != Eigen::Success)
            throw SingularMatrix("finite-difference star resolvent: matrix is singular (energy on the spectrum)");
        size_ = size;
    }

    int edges() const noexcept { return n_; }
    double step() const noexcept { return h_; }

    /// Kernel column G_{e l}(x_i, x_j) over all edges e and nodes i = 0..N+1, as an (N+2)×n matrix.
    Eigen::MatrixXd column(int edge_l, int j) const {
        Eigen::MatrixXd col = Eigen::MatrixXd::Zero(grid_.interior + 2, n_);
        if (j < 0 || j > grid_.interior) return col;
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(size_);
        rhs(edge_l * (grid_.interior + 1) + j) = 1.0;
        const Eigen::VectorXcd u = solver_->solve(rhs);
        for (int e = 0; e < n_; ++e)
            col.col(e).head(grid_.interior + 1) = u.segment(e * (grid_.interior + 1), grid_.interior + 1).real() / h_;
        return col;
    }

    double operator()(int edge_j, double x, int edge_l, double y) const {
        if (edge_j < 0 || edge_j >= n_ || edge_l < 0 || edge_l >= n_) throw InvalidArgument("oracle: edge out of range");
        if (x < 0.0 || y < 0.0) throw InvalidArgument("oracle: coordinates must be >= 0");
        const double L = (grid_.interior + 1) * h_;
        if (x >= L || y >= L) return 0.0;
        const auto [iy, ty] = detail::locate(y, h_);
        const auto [ix, tx] = detail::locate(x, h_);
        auto sample = [&](const Eigen::MatrixXd& col) {
            const double v0 = col(ix, edge_j);
            return tx == 0.0 ? v0 : (1.0 - tx) * v0 + tx * col(ix + 1, edge_j);
        };
        const double v = sample(column(edge_l, iy));
        return ty == 0.0 ? v : (1.0 - ty) * v + ty * sample(column(edge_l, iy + 1));
    }

private:
    int derivative_index(int e) const { return n_ * (grid_.interior + 1) + e; }

    int n_;
    GridSpec grid_;
    double h_;
    int size_ = 0;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<Complex>>> solver_;
};

inline FdStarResolvent fd_resolvent_star(const StarModel& m, double kappa, GridSpec grid) {
    return FdStarResolvent(m, kappa, grid);
}

struct KernelError {
    double max_abs = 0.0;
    double rms = 0.0;
    std::size_t samples = 0;
};

/// Error statistics of `sampled` against `analytic` over a sample set; both are called with the
/// same argument tuple.
template <class Analytic, class Sampled, class Sample>
KernelError compare_kernels(const Analytic& analytic, const Sampled& sampled, std::span<const Sample> samples) {
    KernelError e;
    double sum = 0.0;
    for (const auto& s : samples) {
        const double d = std::abs(std::apply(analytic, s) - std::apply(sampled, s));
        e.max_abs = std::max(e.max_abs, d);
        sum += d * d;
    }
    e.samples = samples.size();
    e.rms = samples.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(samples.size()));
    return e;
}

/// Error budget of the second-order oracle at step h.
inline double oracle_budget(double h) { return 50.0 * h * h; }

/// Probe pairs on [0.3, 3], all multiples of 3e-3 so they stay grid nodes under halving.
inline std::vector<std::tuple<double, double>> probe_pairs() {
    std::vector<std::tuple<double, double>> p;
    for (const double x : {0.3, 0.9, 1.5, 2.4})
        for (const double y : {0.6, 1.2, 3.0}) p.emplace_back(x, y);
    return p;
}

/// Closed-form (or Krein-inserted) half-line kernel against the oracle at step h on [0, 12].
inline KernelError oracle_check_halfline(const HalflineBC& bc, std::span<const PointInteraction> points, double kappa,
                                         double h) {
    const auto fd = fd_resolvent_halfline(bc, points, kappa, GridSpec::with_step(h, 12.0));
    auto analytic = [&](double x, double y) { return krein_insert_all(bc, points, kappa, x, y); };
    const auto samples = probe_pairs();
    return compare_kernels(analytic, fd, std::span<const std::tuple<double, double>>(samples));
}

/// Assembled star kernel against the star oracle at step h, over every edge pair.
inline KernelError oracle_check_star(const StarModel& m, double kappa, double h) {
    const auto fd = fd_resolvent_star(m, kappa, GridSpec::with_step(h, 12.0));
    auto analytic = [&](int j, double x, int l, double y) { return star_green(m, kappa, j, x, l, y); };
    std::vector<std::tuple<int, double, int, double>> samples;
    for (int j = 0; j < m.edges(); ++j)
        for (int l = 0; l < m.edges(); ++l)
            for (const auto& [x, y] : probe_pairs()) samples.emplace_back(j, x, l, y);
    return compare_kernels(analytic, fd, std::span<const std::tuple<int, double, int, double>>(samples));
}

} // namespace qgraph
