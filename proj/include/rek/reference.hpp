#pragma once

// Dense SVD-based ground truth: minimum-norm least-squares solution,
// projections of b onto range(A) and its complement, singular values,
// numerical rank and the condition quantities every convergence bound
// is stated in. Desk-scale only (sparse inputs are densified).

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "rek/errors.hpp"
#include "rek/matrix.hpp"

namespace rek {

/// Largest m * n the oracle accepts.
inline constexpr std::size_t kDenseWorkCap = 2000 * 2000;

/// Reconstruction guarantee of svdDecompose:
///   |A - U S V^T|_F <= kSvdResidualFactor * max(m, n) * machine-eps * |A|_F.
inline constexpr double kSvdResidualFactor = 8.0;

struct Svd {
    Eigen::MatrixXd U;  // m x min(m, n), orthonormal columns
    Vector sigma;       // min(m, n) values, descending
    Eigen::MatrixXd V;  // n x min(m, n), orthonormal columns
};

inline Eigen::MatrixXd toEigen(const DenseMatrix& A) {
    Eigen::MatrixXd M(A.rows(), A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < A.cols(); ++j) M(i, j) = A(i, j);
    }
    return M;
}

inline Svd svdDecompose(const DenseMatrix& A) {
    if (A.rows() * A.cols() > kDenseWorkCap) {
        throw TooLarge("reference SVD limited to " + std::to_string(kDenseWorkCap) + " entries, got " +
                       std::to_string(A.rows()) + " x " + std::to_string(A.cols()));
    }
    if (!allFinite(A.data())) throw NonFinite("reference SVD: non-finite entry");
    const Eigen::MatrixXd M = toEigen(A);
    Svd out;
    // One-sided Jacobi is the most accurate choice for small and
    // moderately sized problems; divide-and-conquer for larger ones.
    if (std::min(A.rows(), A.cols()) <= 400) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.U = svd.matrixU();
        out.V = svd.matrixV();
        out.sigma.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
    } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.U = svd.matrixU();
        out.V = svd.matrixV();
        out.sigma.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
    }
    return out;
}

inline Svd svdDecompose(const DualSparseMatrix& A) { return svdDecompose(toDense(A)); }

/// 8 max(m, n) machine-eps.
inline double defaultRankTol(std::size_t rows, std::size_t cols) {
    return 8.0 * double(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

struct ReferenceSolution {
    Vector xLs;                  // A^+ b
    Vector singularValues;       // the `rank` retained values, descending
    std::size_t rank = 0;
    Vector bRange;               // projection of b onto range(A)
    Vector bPerp;                // b - bRange
    double kappaFSq = 0.0;       // |A|_F^2 / sigma_min^2
    double condSq = 0.0;         // sigma_max^2 / sigma_min^2
    double frobSq = 0.0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t nnz = 0;
    Eigen::MatrixXd rangeBasis;  // m x rank, left singular vectors
    Eigen::MatrixXd rowBasis;    // n x rank, right singular vectors

    double sigmaMax() const { return singularValues.front(); }
    double sigmaMin() const { return singularValues.back(); }
};

namespace detail {

inline Eigen::Map<const Eigen::VectorXd> asEigen(std::span<const double> v) {
    return {v.data(), Eigen::Index(v.size())};
}

inline Vector toVector(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

}  // namespace detail

/// rankTol < 0 selects defaultRankTol.
inline ReferenceSolution minNormSolve(const DenseMatrix& A, std::span<const double> b, double rankTol = -1.0) {
    if (b.size() != A.rows()) throw DimensionMismatch("minNormSolve: b has wrong length");
    if (!allFinite(b)) throw NonFinite("minNormSolve: non-finite right-hand side");
    if (rankTol < 0.0) rankTol = defaultRankTol(A.rows(), A.cols());

    const Svd svd = svdDecompose(A);
    ReferenceSolution ref;
    ref.rows = A.rows();
    ref.cols = A.cols();
    for (double a : A.data()) {
        ref.frobSq += a * a;
        if (a != 0.0) ++ref.nnz;
    }
    if (ref.nnz == 0) throw AllZeroMatrix();

    const double cutoff = rankTol * svd.sigma.front();
    while (ref.rank < svd.sigma.size() && svd.sigma[ref.rank] > cutoff) ++ref.rank;
    ref.singularValues.assign(svd.sigma.begin(), svd.sigma.begin() + std::ptrdiff_t(ref.rank));
    ref.rangeBasis = svd.U.leftCols(Eigen::Index(ref.rank));
    ref.rowBasis = svd.V.leftCols(Eigen::Index(ref.rank));

    const auto bv = detail::asEigen(b);
    const Eigen::VectorXd coeffs = ref.rangeBasis.transpose() * bv;
    Eigen::VectorXd scaled = coeffs;
    for (Eigen::Index k = 0; k < scaled.size(); ++k) scaled[k] /= ref.singularValues[std::size_t(k)];
    ref.xLs = detail::toVector(ref.rowBasis * scaled);
    ref.bRange = detail::toVector(ref.rangeBasis * coeffs);
    ref.bPerp = subtract(b, ref.bRange);

    const double smin = ref.sigmaMin();
    const double smax = ref.sigmaMax();
    ref.kappaFSq = ref.frobSq / (smin * smin);
    ref.condSq = (smax * smax) / (smin * smin);
    return ref;
}

inline ReferenceSolution minNormSolve(const DualSparseMatrix& A, std::span<const double> b, double rankTol = -1.0) {
    return minNormSolve(toDense(A), b, rankTol);
}

/// |(I - A^+ A) v|: distance of v from the row space of A.
inline double projectorResidual(const ReferenceSolution& ref, std::span<const double> v) {
    if (v.size() != ref.cols) throw DimensionMismatch("projectorResidual: wrong length");
    const auto vv = detail::asEigen(v);
    return (vv - ref.rowBasis * (ref.rowBasis.transpose() * vv)).norm();
}

/// |(I - A A^+) w|: distance of w from range(A).
inline double rangeResidual(const ReferenceSolution& ref, std::span<const double> w) {
    if (w.size() != ref.rows) throw DimensionMismatch("rangeResidual: wrong length");
    const auto wv = detail::asEigen(w);
    return (wv - ref.rangeBasis * (ref.rangeBasis.transpose() * wv)).norm();
}

/// A^+ w
inline Vector pinvApply(const ReferenceSolution& ref, std::span<const double> w) {
    if (w.size() != ref.rows) throw DimensionMismatch("pinvApply: wrong length");
    Eigen::VectorXd c = ref.rangeBasis.transpose() * detail::asEigen(w);
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] /= ref.singularValues[std::size_t(k)];
    return detail::toVector(ref.rowBasis * c);
}

/// Relative forward error |est - truth| / |est|, falling back to |truth|
/// as the denominator when the estimate is zero.
inline double relativeError(std::span<const double> estimate, std::span<const double> truth) {
    const double diff = norm2(subtract(estimate, truth));
    double denom = norm2(estimate);
    if (denom == 0.0) denom = norm2(truth);
    return denom == 0.0 ? diff : diff / denom;
}

}  // namespace rek
