#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "rek/bounds.hpp"
#include "rek/gen.hpp"
#include "rek/reference.hpp"
#include "support.hpp"

using namespace rek;
using rek::testing::kEps;

namespace {

Instance instance(InstanceKind kind, std::size_t m, std::size_t n, std::uint64_t seed, bool consistent = false,
                  std::size_t rank = 0, double cond = 1e6) {
    InstanceSpec s;
    s.kind = kind;
    s.m = m;
    s.n = n;
    s.seed = seed;
    s.consistent = consistent;
    s.rank = rank;
    s.condTarget = cond;
    return generate(s);
}

std::vector<Instance> zoo() {
    std::vector<Instance> out;
    std::uint64_t seed = 0;
    for (auto kind : {InstanceKind::SparseGaussian, InstanceKind::DenseGaussian, InstanceKind::IllConditioned}) {
        out.push_back(instance(kind, 40, 15, ++seed));
        out.push_back(instance(kind, 15, 40, ++seed, true));
        out.push_back(instance(kind, 30, 30, ++seed));
    }
    out.push_back(instance(InstanceKind::DenseGaussian, 40, 25, ++seed, false, 6));
    out.push_back(instance(InstanceKind::IllConditioned, 40, 25, ++seed, true, 9, 1e4));
    return out;
}

Eigen::MatrixXd eigenOf(const DualSparseMatrix& A) { return toEigen(toDense(A)); }

}  // namespace

// SVD ------------------------------------------------------------------------

TEST(Svd, Identity) {
    const Svd s = svdDecompose(DenseMatrix::identity(4));
    for (double v : s.sigma) EXPECT_NEAR(v, 1.0, 4 * kEps);
}

TEST(Svd, Diagonal) {
    DenseMatrix D(2, 2);
    D(0, 0) = 3;
    D(1, 1) = 4;
    const Svd s = svdDecompose(D);
    EXPECT_NEAR(s.sigma[0], 4.0, 8 * kEps);
    EXPECT_NEAR(s.sigma[1], 3.0, 8 * kEps);
}

TEST(Svd, OrthogonalFactorsAndReconstruction) {
    struct Shape {
        std::size_t m, n;
    };
    for (Shape sh : {Shape{30, 10}, Shape{10, 30}, Shape{60, 60}, Shape{450, 420}}) {
        const Instance inst = instance(InstanceKind::DenseGaussian, sh.m, sh.n, sh.m + sh.n);
        const Eigen::MatrixXd A = eigenOf(inst.A);
        const Svd s = svdDecompose(inst.A);
        const Eigen::Index k = Eigen::Index(std::min(sh.m, sh.n));
        ASSERT_EQ(s.U.cols(), k);
        ASSERT_EQ(s.V.cols(), k);
        const double tol = kSvdResidualFactor * double(std::max(sh.m, sh.n)) * kEps;
        EXPECT_LE((s.U.transpose() * s.U - Eigen::MatrixXd::Identity(k, k)).norm(), tol * std::sqrt(double(k)));
        EXPECT_LE((s.V.transpose() * s.V - Eigen::MatrixXd::Identity(k, k)).norm(), tol * std::sqrt(double(k)));
        const Eigen::Map<const Eigen::VectorXd> sig(s.sigma.data(), k);
        EXPECT_LE((A - s.U * sig.asDiagonal() * s.V.transpose()).norm(), tol * A.norm());
        for (std::size_t i = 1; i < s.sigma.size(); ++i) EXPECT_GE(s.sigma[i - 1], s.sigma[i]);
    }
}

TEST(Svd, RefusesOversizedInput) {
    EXPECT_THROW(svdDecompose(DenseMatrix(2001, 2000)), TooLarge);
}

// Minimum-norm solution ------------------------------------------------------

TEST(MinNorm, Identity) {
    const Vector b{1, 2};
    const ReferenceSolution r = minNormSolve(DenseMatrix::identity(2), b);
    EXPECT_NEAR(r.xLs[0], 1.0, 4 * kEps);
    EXPECT_NEAR(r.xLs[1], 2.0, 4 * kEps);
    EXPECT_LE(norm2(r.bPerp), 8 * kEps);
    EXPECT_EQ(r.rank, 2u);
    EXPECT_NEAR(r.kappaFSq, 2.0, 1e-14);
    EXPECT_NEAR(r.condSq, 1.0, 1e-14);
}

TEST(MinNorm, SingleColumnProjection) {
    DenseMatrix A(2, 1);
    A(0, 0) = 1.0;
    const ReferenceSolution r = minNormSolve(A, Vector{3, 4});
    EXPECT_NEAR(r.xLs[0], 3.0, 8 * kEps);
    EXPECT_NEAR(r.bRange[0], 3.0, 8 * kEps);
    EXPECT_NEAR(r.bRange[1], 0.0, 8 * kEps);
    EXPECT_NEAR(r.bPerp[0], 0.0, 8 * kEps);
    EXPECT_NEAR(r.bPerp[1], 4.0, 8 * kEps);
}

TEST(MinNorm, DuplicateRowsNullSpacePerturbation) {
    // Rows repeat, so rank 3 < n = 6 and the least-squares solution set is an affine space.
    RngStream rng(1);
    DenseMatrix A(8, 6);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 6; ++j) A(i, j) = rng.normal();
    }
    for (std::size_t i = 3; i < 8; ++i) {
        for (std::size_t j = 0; j < 6; ++j) A(i, j) = A(i % 3, j);
    }
    const Vector b = rek::testing::randomVector(8, 2);
    const ReferenceSolution r = minNormSolve(A, b);
    ASSERT_EQ(r.rank, 3u);
    const Eigen::MatrixXd M = toEigen(A);
    Eigen::JacobiSVD<Eigen::MatrixXd> full(M, Eigen::ComputeFullV);
    const Eigen::MatrixXd N = full.matrixV().rightCols(3);
    const Eigen::Map<const Eigen::VectorXd> x(r.xLs.data(), 6);
    const Eigen::Map<const Eigen::VectorXd> bv(b.data(), 8);
    const double res = (M * x - bv).norm();
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd c(3);
        for (int k = 0; k < 3; ++k) c[k] = rng.normal();
        const Eigen::VectorXd y = x + 0.01 * N * c;
        EXPECT_NEAR((M * y - bv).norm(), res, 1e-12 * (1 + res));
        EXPECT_GT(y.squaredNorm(), x.squaredNorm());
    }
    EXPECT_LE(std::abs(x.dot(N.col(0))), 1e-13 * x.norm());
}

TEST(MinNorm, Invariants) {
    for (const Instance& inst : zoo()) {
        const ReferenceSolution r = minNormSolve(inst.A, inst.b);
        const double bn = norm2(inst.b);
        const double kf = std::sqrt(r.kappaFSq);
        for (std::size_t k = 0; k < inst.b.size(); ++k) {
            const double scale = std::max(std::abs(inst.b[k]), std::abs(r.bRange[k]));
            EXPECT_NEAR(r.bRange[k] + r.bPerp[k], inst.b[k], 2 * kEps * scale);
        }
        EXPECT_LE(std::abs(dot(r.bRange, r.bPerp)), 64 * kEps * bn * bn);
        EXPECT_NEAR(bn * bn, std::pow(norm2(r.bRange), 2) + std::pow(norm2(r.bPerp), 2), 64 * kEps * bn * bn);
        EXPECT_LE(norm2(subtract(matVec(inst.A, r.xLs), r.bRange)), 128 * kEps * kf * bn);
        EXPECT_LE(projectorResidual(r, r.xLs), 128 * kEps * kf * norm2(r.xLs));
        EXPECT_LE(norm2(subtract(pinvApply(r, r.bRange), r.xLs)), 128 * kEps * kf * norm2(r.xLs));
        // kappa^2 <= kappa_F^2 <= rank kappa^2
        EXPECT_LE(r.condSq, r.kappaFSq * (1 + 1e-12));
        EXPECT_LE(r.kappaFSq, double(r.rank) * r.condSq * (1 + 1e-12));
        // Retained values sit above the cutoff, discarded ones below.
        const Svd s = svdDecompose(inst.A);
        const double cutoff = defaultRankTol(inst.A.rows(), inst.A.cols()) * s.sigma.front();
        EXPECT_GT(r.sigmaMin(), cutoff);
        if (r.rank < s.sigma.size()) {
            EXPECT_LE(s.sigma[r.rank], cutoff);
        }
        EXPECT_NEAR(r.frobSq, inst.A.frobSq(), 1e-12 * r.frobSq);
        EXPECT_EQ(r.nnz, inst.A.nnz());
    }
}

TEST(MinNorm, ResolvingWithRangePartIsStable) {
    for (const Instance& inst : zoo()) {
        const ReferenceSolution r = minNormSolve(inst.A, inst.b);
        const ReferenceSolution again = minNormSolve(inst.A, r.bRange);
        EXPECT_LE(norm2(subtract(again.xLs, r.xLs)), 128 * kEps * std::sqrt(r.kappaFSq) * norm2(r.xLs));
        EXPECT_LE(norm2(again.bPerp), 128 * kEps * norm2(inst.b));
    }
}

TEST(MinNorm, PseudoInverseNormIsInverseSigmaMin) {
    const Instance inst = instance(InstanceKind::IllConditioned, 30, 12, 50, false, 0, 1e4);
    const ReferenceSolution r = minNormSolve(inst.A, inst.b);
    const Eigen::MatrixXd P = eigenOf(inst.A).completeOrthogonalDecomposition().pseudoInverse();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(30);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        const Eigen::VectorXd w = P.transpose() * (P * v);
        lambda = w.norm() / v.norm();
        v = w / w.norm();
    }
    EXPECT_NEAR(std::sqrt(lambda), 1.0 / r.sigmaMin(), 1e-8 / r.sigmaMin());
}

TEST(MinNorm, CustomRankTolerance) {
    const Instance inst = instance(InstanceKind::IllConditioned, 20, 10, 51, false, 0, 1e8);
    EXPECT_EQ(minNormSolve(inst.A, inst.b).rank, 10u);
    EXPECT_EQ(minNormSolve(inst.A, inst.b, 1e-3).rank, 1u);
    EXPECT_DOUBLE_EQ(defaultRankTol(20, 10), 8.0 * 20 * kEps);
}

TEST(MinNorm, Errors) {
    EXPECT_THROW(minNormSolve(DenseMatrix::identity(2), Vector{1}), DimensionMismatch);
    EXPECT_THROW(minNormSolve(DenseMatrix::identity(2), Vector{1, NAN}), NonFinite);
    EXPECT_THROW(minNormSolve(DenseMatrix(2, 2), Vector{1, 1}), AllZeroMatrix);
}

// Projector helpers ----------------------------------------------------------

TEST(Projectors, RowsAndNullVectors) {
    const Instance inst = instance(InstanceKind::DenseGaussian, 8, 12, 60);
    const ReferenceSolution r = minNormSolve(inst.A, inst.b);
    const DenseMatrix D = toDense(inst.A);
    for (std::size_t i = 0; i < 8; ++i) {
        const auto row = D.row(i);
        EXPECT_LE(projectorResidual(r, row), 64 * kEps * norm2(row));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> full(toEigen(D), Eigen::ComputeFullV);
    for (int k = 8; k < 12; ++k) {
        const Eigen::VectorXd v = 2.5 * full.matrixV().col(k);
        const Vector vv(v.data(), v.data() + 12);
        EXPECT_NEAR(projectorResidual(r, vv), 2.5, 1e-12);
    }
}

TEST(Projectors, MatchExplicitDenseProjectors) {
    const Instance inst = instance(InstanceKind::DenseGaussian, 20, 14, 61, false, 5);
    const ReferenceSolution r = minNormSolve(inst.A, inst.b);
    const Eigen::MatrixXd A = eigenOf(inst.A);
    const Eigen::MatrixXd P = A.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::MatrixXd rowProj = Eigen::MatrixXd::Identity(14, 14) - P * A;
    const Eigen::MatrixXd rangeProj = Eigen::MatrixXd::Identity(20, 20) - A * P;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Vector v = rek::testing::randomVector(14, s);
        const Vector w = rek::testing::randomVector(20, s + 100);
        const double pv = (rowProj * Eigen::Map<const Eigen::VectorXd>(v.data(), 14)).norm();
        const double pw = (rangeProj * Eigen::Map<const Eigen::VectorXd>(w.data(), 20)).norm();
        EXPECT_NEAR(projectorResidual(r, v), pv, 1e-10 * norm2(v));
        EXPECT_NEAR(rangeResidual(r, w), pw, 1e-10 * norm2(w));
        const Vector pinv = pinvApply(r, w);
        const Eigen::VectorXd expect = P * Eigen::Map<const Eigen::VectorXd>(w.data(), 20);
        for (std::size_t k = 0; k < 14; ++k) EXPECT_NEAR(pinv[k], expect[Eigen::Index(k)], 1e-9 * expect.norm());
    }
    EXPECT_THROW(projectorResidual(r, Vector(3)), DimensionMismatch);
    EXPECT_THROW(rangeResidual(r, Vector(3)), DimensionMismatch);
    EXPECT_THROW(pinvApply(r, Vector(3)), DimensionMismatch);
}

TEST(RelativeError, Definition) {
    EXPECT_DOUBLE_EQ(relativeError(Vector{2, 0}, Vector{1, 0}), 0.5);
    EXPECT_DOUBLE_EQ(relativeError(Vector{0, 0}, Vector{0, 4}), 1.0);
    EXPECT_EQ(relativeError(Vector{0, 0}, Vector{0, 0}), 0.0);
}

// Bounds ---------------------------------------------------------------------

TEST(Bounds, Identity) {
    const std::size_t n = 7;
    const ReferenceSolution r = minNormSolve(DenseMatrix::identity(n), rek::testing::randomVector(n, 1));
    const double eps = 1e-8, delta = 0.1;
    const TheoryBounds t = theoryBounds(r, eps, delta);
    EXPECT_NEAR(t.kappaFSq, double(n), 1e-13);
    EXPECT_NEAR(t.condSq, 1.0, 1e-14);
    EXPECT_NEAR(t.tStar, 2.0 * double(n) * std::log(96.0 / (delta * eps * eps)), 1e-10);
    EXPECT_NEAR(t.rkRate, 1.0 - 1.0 / double(n), 1e-14);
    EXPECT_GT(t.ropRate, 0.0);
    EXPECT_LT(t.ropRate, 1.0);
}

TEST(Bounds, RankOne) {
    DenseMatrix A(3, 2);
    A(0, 0) = 1;
    A(0, 1) = 2;
    A(2, 0) = 3;
    A(2, 1) = 6;
    const ReferenceSolution r = minNormSolve(A, Vector{1, 1, 1});
    ASSERT_EQ(r.rank, 1u);
    const double eps = 1e-6, delta = 0.05;
    const TheoryBounds t = theoryBounds(r, eps, delta);
    EXPECT_NEAR(t.kappaFSq, 1.0, 1e-14);
    EXPECT_NEAR(t.condSq, 1.0, 1e-14);
    EXPECT_NEAR(t.tStar, 2.0 * std::log(96.0 / (delta * eps * eps)), 1e-12);
}

TEST(Bounds, IndependentReevaluation) {
    const Instance inst = instance(InstanceKind::SparseGaussian, 100, 20, 70);
    const ReferenceSolution r = minNormSolve(inst.A, inst.b);
    const double eps = 1e-9, delta = 0.2;
    const TheoryBounds t = theoryBounds(r, eps, delta);

    const Eigen::MatrixXd A = eigenOf(inst.A);
    const Eigen::VectorXd sv = A.jacobiSvd().singularValues();
    const double smax = sv[0], smin = sv[sv.size() - 1];
    const double kF2 = A.squaredNorm() / (smin * smin);
    const double k2 = smax * smax / (smin * smin);
    const double lg = std::log(32.0 * (1.0 + 2.0 * k2) / (delta * eps * eps));
    const double rel = 1e-12;
    EXPECT_NEAR(t.kappaFSq, kF2, rel * kF2);
    EXPECT_NEAR(t.condSq, k2, rel * k2);
    EXPECT_NEAR(t.tStar, 2.0 * kF2 * lg, rel * 2.0 * kF2 * lg);
    const double fwd = eps * std::sqrt(kF2) * (1 + std::sqrt(kF2));
    EXPECT_NEAR(t.forwardErrBound, fwd, rel * fwd);
    const double worst = 10.0 * (100 + 20) * 20 * k2 * lg;
    EXPECT_NEAR(t.worstFlops, worst, rel * worst);
    const double expected = 20.0 * double(inst.A.nnz()) * k2 * lg;
    EXPECT_NEAR(t.expectedFlops, expected, rel * expected);
    EXPECT_NEAR(t.sigmaMinSq, smin * smin, rel * smin * smin);

    const double alpha = 1.0 - 1.0 / kF2;
    const double xn2 = std::pow(norm2(r.xLs), 2);
    EXPECT_NEAR(t.rekEnvelope(101), std::pow(alpha, 50) * (1 + 2 * k2) * xn2, 1e-10 * xn2 * k2);
    EXPECT_NEAR(t.ropEnvelope(40), std::pow(alpha, 40) * std::pow(norm2(r.bRange), 2), 1e-10 * t.bRangeNormSq);
    EXPECT_NEAR(t.rkEnvelope(40, 2.0), std::pow(alpha, 40) * 2.0, 1e-12);
    EXPECT_NEAR(t.noisyRkEnvelope(40, 2.0, 3.0), std::pow(alpha, 40) * 2.0 + 3.0 / (smin * smin), 1e-10);
    EXPECT_GT(t.rkRate, 0.0);
    EXPECT_LT(t.rkRate, 1.0);
}

TEST(Bounds, EnvelopesDecreaseMonotonically) {
    const Instance inst = instance(InstanceKind::DenseGaussian, 30, 10, 71);
    const TheoryBounds t = theoryBounds(minNormSolve(inst.A, inst.b), 1e-6, 0.1);
    for (std::uint64_t k = 0; k < 200; k += 2) {
        EXPECT_GE(t.rekEnvelope(k), t.rekEnvelope(k + 2));
        EXPECT_EQ(t.rekEnvelope(k), t.rekEnvelope(k + 1));
        EXPECT_GT(t.ropEnvelope(double(k)), t.ropEnvelope(double(k + 1)));
    }
    EXPECT_DOUBLE_EQ(t.decay(0), 1.0);
}

TEST(Bounds, InvalidParameters) {
    const ReferenceSolution r = minNormSolve(DenseMatrix::identity(2), Vector{1, 1});
    EXPECT_THROW(theoryBounds(r, 0.0, 0.1), InvalidRange);
    EXPECT_THROW(theoryBounds(r, 2.0, 0.1), InvalidRange);
    EXPECT_THROW(theoryBounds(r, 1e-6, 0.0), InvalidRange);
    EXPECT_THROW(theoryBounds(r, 1e-6, 1.0), InvalidRange);
}

TEST(Bounds, DefaultIterationCap) {
    const ReferenceSolution r = minNormSolve(DenseMatrix::identity(3), Vector{1, 1, 1});
    const TheoryBounds t = theoryBounds(r, 1e-14, 0.1);
    EXPECT_EQ(defaultMaxIters(t), std::uint64_t(std::ceil(2.0 * t.tStar)));
    TheoryBounds huge = t;
    huge.tStar = 1e30;
    EXPECT_EQ(defaultMaxIters(huge), std::numeric_limits<std::uint64_t>::max());
}
