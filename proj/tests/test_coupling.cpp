#include "qgraph/coupling.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qgraph;
using qgraph::testing::random_complex;
using qgraph::testing::random_unitary;

namespace {

const Complex I{0.0, 1.0};

Matrix identity(int n) { return Matrix::Identity(n, n); }

} // namespace

TEST(MakeCoupling, KirchhoffIsSwapForTwoEdges) {
    const auto c = make_coupling(Family::delta, 2, 0.0);
    Matrix expected(2, 2);
    expected << 0, 1, 1, 0;
    EXPECT_LT(linalg::max_abs(c.u() - expected), 1e-15);
}

TEST(MakeCoupling, InfiniteParametersGiveDecoupledLimits) {
    EXPECT_LT(linalg::max_abs(make_coupling(Family::delta, 3, infinity).u() + identity(3)), 1e-15);
    EXPECT_LT(linalg::max_abs(make_coupling(Family::delta_p, 3, infinity).u() + identity(3)), 1e-15);
    EXPECT_LT(linalg::max_abs(make_coupling(Family::delta_prime_s, 3, infinity).u() - identity(3)), 1e-15);
    EXPECT_LT(linalg::max_abs(make_coupling(Family::delta_prime, 3, -infinity).u() - identity(3)), 1e-15);
}

TEST(MakeCoupling, DeltaPrimeEntriesByHand) {
    // n = 2, β = 1: diagonal -(2+i)/(2-i) + 2/(2-i), off-diagonal 2/(2-i).
    const Complex diag = -(2.0 + I) / (2.0 - I) + 2.0 / (2.0 - I);
    const Complex off = 2.0 / (2.0 - I);
    const auto c = make_coupling(Family::delta_prime, 2, 1.0);
    EXPECT_LT(std::abs(c.u()(0, 0) - diag), 1e-15);
    EXPECT_LT(std::abs(c.u()(1, 1) - diag), 1e-15);
    EXPECT_LT(std::abs(c.u()(0, 1) - off), 1e-15);
    EXPECT_LT(std::abs(c.u()(1, 0) - off), 1e-15);
    // (-(2+i) + 2)/(2-i) = -i/(2-i) = (1 - 2i)/5
    EXPECT_LT(std::abs(diag - Complex{0.2, -0.4}), 1e-15);
    EXPECT_LT(linalg::unitarity_defect(c.u()), 1e-12);
}

TEST(MakeCoupling, RejectsBadInput) {
    EXPECT_THROW(make_coupling(Family::delta, 0, 1.0), InvalidArgument);
    EXPECT_THROW(make_coupling(Family::custom, 2, 1.0), InvalidArgument);
    EXPECT_THROW(make_coupling(Family::delta, 2, std::nan("")), InvalidArgument);
}

TEST(MakeCoupling, EveryFamilyIsUnitaryForRandomParameters) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> param(-50.0, 50.0);
    std::uniform_int_distribution<int> size(1, 8);
    for (const Family f : {Family::delta, Family::delta_prime_s, Family::delta_p, Family::delta_prime}) {
        for (int t = 0; t < 100; ++t) {
            const auto c = make_coupling(f, size(rng), param(rng));
            EXPECT_LT(linalg::unitarity_defect(c.u()), 1e-12);
        }
    }
}

TEST(VertexCoupling, RejectsNonUnitaryMatrix) {
    Matrix m = identity(2);
    m(0, 0) = 2.0;
    EXPECT_THROW(VertexCoupling{m}, InvalidArgument);
    EXPECT_THROW(VertexCoupling{Matrix(2, 3)}, InvalidArgument);
}

TEST(ToAB, NeumannAndDirichletPairs) {
    const auto neu = to_ab(VertexCoupling(identity(3)));
    EXPECT_LT(linalg::max_abs(neu.a), 1e-15);
    EXPECT_LT(linalg::max_abs(neu.b - 2.0 * I * identity(3)), 1e-15);

    const auto dir = to_ab(VertexCoupling(Matrix(-identity(3))));
    EXPECT_LT(linalg::max_abs(dir.a + 2.0 * identity(3)), 1e-15);
    EXPECT_LT(linalg::max_abs(dir.b), 1e-15);
}

TEST(ToAB, DeltaPairHasHermitianProduct) {
    const auto ab = to_ab(make_coupling(Family::delta, 2, 1.0));
    const Matrix p = ab.a * ab.b.adjoint();
    EXPECT_LT(linalg::max_abs(p - p.adjoint()), 1e-12);
}

TEST(FromAB, CanonicalDecoupledPairs) {
    ABPair neumann{Matrix::Zero(2, 2), identity(2)};
    EXPECT_LT(linalg::max_abs(from_ab(neumann).u() - identity(2)), 1e-14);
    ABPair dirichlet{identity(2), Matrix::Zero(2, 2)};
    EXPECT_LT(linalg::max_abs(from_ab(dirichlet).u() + identity(2)), 1e-14);
}

TEST(FromAB, RoundTripRandomUnitaries) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(1, 6);
    for (int t = 0; t < 20; ++t) {
        const VertexCoupling c(random_unitary(size(rng), rng));
        EXPECT_LT(linalg::max_abs(from_ab(to_ab(c)).u() - c.u()), 1e-10);
    }
}

TEST(FromAB, LeftMultipliedPairDefinesSameConditions) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 50; ++t) {
        const int n = 1 + t % 6;
        const VertexCoupling c0(random_unitary(n, rng));
        const ABPair canonical = to_ab(c0);
        const Matrix m = random_complex(n, n, rng) + 3.0 * identity(n);
        const ABPair ab{m * canonical.a, m * canonical.b};
        const VertexCoupling c = from_ab(ab);

        // Solutions of A Ψ + B Ψ' = 0: the null space of the n×2n block.
        Matrix block(n, 2 * n);
        block << ab.a, ab.b;
        Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeFullV);
        for (int k = 0; k < n; ++k) {
            const Vector v = svd.matrixV().col(n + k);
            EXPECT_TRUE(satisfies_vertex_condition(c, {v.head(n), v.tail(n)}, 1e-9));
        }
        // Conversely: solutions of the U form satisfy A Ψ + B Ψ' = 0.
        const Vector w = random_complex(n, 1, rng);
        const BoundaryValues bv{(identity(n) + c.u()) * w, -I * (identity(n) - c.u()) * w};
        EXPECT_TRUE(satisfies_vertex_condition(c, bv, 1e-9));
        EXPECT_LT((ab.a * bv.psi + ab.b * bv.dpsi).norm(), 1e-9 * (bv.psi.norm() + bv.dpsi.norm()));
    }
}

TEST(FromAB, RejectsInadmissiblePairs) {
    EXPECT_THROW(from_ab({Matrix::Zero(2, 2), Matrix::Zero(2, 2)}), SingularMatrix);
    // rank 2 but AB* not Hermitian
    Matrix a = identity(2);
    Matrix b(2, 2);
    b << 0, 1, 0, 0;
    EXPECT_THROW(from_ab({a, b}), SingularMatrix);
}

TEST(ValidateAB, Diagnostics) {
    const auto good = validate_ab(to_ab(make_coupling(Family::delta_p, 3, 1.0)));
    EXPECT_EQ(good.rank, 3);
    EXPECT_LT(good.hermiticity_defect, 1e-12);
    EXPECT_GT(good.min_eigenvalue, 0.0);
    EXPECT_TRUE(good.admissible);

    const auto zero = validate_ab({Matrix::Zero(2, 2), Matrix::Zero(2, 2)});
    EXPECT_EQ(zero.rank, 0);
    EXPECT_FALSE(zero.admissible);

    Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
    a(0, 0) = 1.0;
    b(1, 1) = 1.0;
    const auto mixed = validate_ab({a, b});
    EXPECT_EQ(mixed.rank, 2);
    EXPECT_EQ(mixed.hermiticity_defect, 0.0);
    EXPECT_TRUE(mixed.admissible);
    // Mixed Dirichlet/Neumann pair maps to diag(-1, 1).
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = -1.0;
    expected(1, 1) = 1.0;
    EXPECT_LT(linalg::max_abs(from_ab({a, b}).u() - expected), 1e-14);

    EXPECT_THROW(validate_ab({Matrix::Zero(2, 2), Matrix::Zero(3, 3)}), InvalidArgument);
}

TEST(RescaleLength, IdentityCases) {
    std::mt19937_64 rng(17);
    const VertexCoupling c(random_unitary(4, rng));
    EXPECT_LT(linalg::max_abs(rescale_length(c, 0.7, 0.7).u() - c.u()), 1e-14);
    EXPECT_LT(linalg::max_abs(rescale_length(VertexCoupling(identity(3)), 0.3, 5.0).u() - identity(3)), 1e-15);
    EXPECT_THROW(rescale_length(c, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(rescale_length(c, 1.0, -1.0), InvalidArgument);
}

TEST(RescaleLength, ComposesAndInverts) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> len(0.1, 10.0);
    for (int t = 0; t < 50; ++t) {
        const VertexCoupling c(random_unitary(1 + t % 5, rng));
        const double l1 = len(rng), l2 = len(rng), l3 = len(rng);
        const auto two_step = rescale_length(rescale_length(c, l1, l2), l2, l3);
        const auto direct = rescale_length(c, l1, l3);
        EXPECT_LT(linalg::max_abs(two_step.u() - direct.u()), 1e-12);
        EXPECT_LT(linalg::max_abs(rescale_length(rescale_length(c, l1, l2), l2, l1).u() - c.u()), 1e-12);
    }
}

TEST(RescaleLength, ScaledConditionMatches) {
    // U_ℓ encodes (U-I)Ψ + iℓ(U+I)Ψ' = 0; U_1 rescaled to ℓ must accept the same boundary data.
    std::mt19937_64 rng(23);
    const int n = 3;
    const VertexCoupling c(random_unitary(n, rng));
    const double ell = 2.5;
    const Matrix u2 = rescale_length(c, 1.0, ell).u();
    const Vector w = random_complex(n, 1, rng);
    const Vector psi = (identity(n) + c.u()) * w;
    const Vector dpsi = -I * (identity(n) - c.u()) * w;
    const Vector residual = (u2 - identity(n)) * psi + I * ell * (u2 + identity(n)) * dpsi;
    EXPECT_LT(residual.norm(), 1e-12 * (psi.norm() + dpsi.norm()));
}

TEST(SatisfiesVertexCondition, NeumannDirichletAndDelta) {
    std::mt19937_64 rng(29);
    const Vector any = random_complex(3, 1, rng);
    EXPECT_TRUE(satisfies_vertex_condition(VertexCoupling(identity(3)), {any, Vector::Zero(3)}, 1e-12));
    EXPECT_TRUE(satisfies_vertex_condition(VertexCoupling(Matrix(-identity(3))), {Vector::Zero(3), any}, 1e-12));

    const auto delta = make_coupling(Family::delta, 3, 2.0);
    Vector psi = Vector::Ones(3);
    Vector dpsi(3);
    dpsi << 0.5, 1.0, 0.5;
    EXPECT_TRUE(satisfies_vertex_condition(delta, {psi, dpsi}, 1e-12));
    dpsi << 0.5, 0.0, 0.5;
    EXPECT_FALSE(satisfies_vertex_condition(delta, {psi, dpsi}, 1e-12));

    EXPECT_THROW(satisfies_vertex_condition(delta, {Vector::Ones(2), Vector::Ones(2)}, 1e-12), InvalidArgument);
}

TEST(SatisfiesVertexCondition, KirchhoffEquivalence) {
    // For n = 2, α = 0 the U form is equivalent to ψ1 = ψ2 and ψ1' + ψ2' = 0.
    const auto kirchhoff = make_coupling(Family::delta, 2, 0.0);
    Vector psi(2), dpsi(2);
    psi << 1.0, 1.0;
    dpsi << 0.0, 0.0;
    EXPECT_TRUE(satisfies_vertex_condition(kirchhoff, {psi, dpsi}, 1e-12));
    psi << 0.0, 0.0;
    dpsi << 1.0, -1.0;
    EXPECT_TRUE(satisfies_vertex_condition(kirchhoff, {psi, dpsi}, 1e-12));
    psi << 1.0, 0.0;
    dpsi << 0.0, 0.0;
    EXPECT_FALSE(satisfies_vertex_condition(kirchhoff, {psi, dpsi}, 1e-12));
    psi << 0.0, 0.0;
    dpsi << 1.0, 1.0;
    EXPECT_FALSE(satisfies_vertex_condition(kirchhoff, {psi, dpsi}, 1e-12));
}

TEST(DecoupledProjection, LimitsAndDeltaRank) {
    EXPECT_LT(linalg::max_abs(decoupled_projection(VertexCoupling(Matrix(-identity(3)))) - identity(3)), 1e-14);
    EXPECT_LT(linalg::max_abs(decoupled_projection(VertexCoupling(identity(3)))), 1e-15);

    const Matrix p = decoupled_projection(make_coupling(Family::delta, 3, 1.5));
    EXPECT_NEAR(p.trace().real(), 2.0, 1e-12);
    // ker J: the projection annihilates the constant vector.
    EXPECT_LT((p * Vector::Ones(3)).norm(), 1e-12);
}

TEST(DecoupledProjection, IsOrthogonalProjection) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t) {
        const int n = 1 + t % 6;
        // Unitary with a prescribed -1 eigenspace of random dimension.
        const Matrix v = random_unitary(n, rng);
        Vector eig(n);
        std::uniform_real_distribution<double> phase(-3.0, 3.0);
        for (int k = 0; k < n; ++k) eig(k) = (k % 2 == 0) ? Complex{-1.0, 0.0} : std::polar(1.0, phase(rng));
        const VertexCoupling c(v * eig.asDiagonal() * v.adjoint());
        const Matrix p = decoupled_projection(c);
        EXPECT_LT(linalg::max_abs(p * p - p), 1e-10);
        EXPECT_LT(linalg::max_abs(p.adjoint() - p), 1e-10);
        EXPECT_NEAR(p.trace().real(), (n + 1) / 2, 1e-9);
        EXPECT_LT(linalg::max_abs(c.u() * p + p), 1e-10);
    }
}
