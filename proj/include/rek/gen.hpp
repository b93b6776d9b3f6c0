#pragma once

// Seeded random test instances:
//
//   SparseGaussian  Bernoulli(density) pattern with standard normal values
//   DenseGaussian   standard normal entries, optionally of prescribed rank
//   IllConditioned  U diag(1, c^-1/2, ..., c^-1/2) V^T with random
//                   orthonormal U, V, so that sigma_max^2/sigma_min^2 = c
//
// Gaussian ensembles have their columns scaled to unit norm. The
// ill-conditioned ensemble is left unscaled so that its spectrum is
// exactly the prescribed one.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rek/errors.hpp"
#include "rek/matrix.hpp"
#include "rek/rng.hpp"

namespace rek {

enum class InstanceKind { SparseGaussian, DenseGaussian, IllConditioned };

inline std::string_view toString(InstanceKind k) noexcept {
    switch (k) {
        case InstanceKind::SparseGaussian: return "sparse";
        case InstanceKind::DenseGaussian: return "dense";
        case InstanceKind::IllConditioned: return "illcond";
    }
    return "?";
}

inline InstanceKind parseInstanceKind(std::string_view name) {
    if (name == "sparse") return InstanceKind::SparseGaussian;
    if (name == "dense") return InstanceKind::DenseGaussian;
    if (name == "illcond") return InstanceKind::IllConditioned;
    throw InvalidRange("unknown instance kind '" + std::string(name) + "' (expected sparse, dense or illcond)");
}

struct InstanceSpec {
    InstanceKind kind = InstanceKind::SparseGaussian;
    std::size_t m = 200;
    std::size_t n = 50;
    double density = 0.25;    // SparseGaussian only
    double condTarget = 1e6;  // IllConditioned only: sigma_max^2 / sigma_min^2
    bool consistent = false;  // b = A x_planted + noise instead of pure Gaussian b
    double noiseScale = 0.0;
    std::uint64_t seed = 0;
    std::size_t rank = 0;     // DenseGaussian / IllConditioned: 0 means min(m, n)

    void validate() const {
        if (m == 0 || n == 0) throw InvalidRange("instance dimensions must be positive");
        if (!(density > 0.0 && density <= 1.0)) throw InvalidRange("density must lie in (0, 1]");
        if (!(condTarget >= 1.0) || !std::isfinite(condTarget)) throw InvalidRange("condition target must be >= 1");
        if (!(noiseScale >= 0.0) || !std::isfinite(noiseScale)) throw InvalidRange("noise scale must be >= 0");
        if (rank > std::min(m, n)) throw InvalidRange("rank exceeds min(m, n)");
    }
};

struct Instance {
    DualSparseMatrix A;
    Vector b;
    std::optional<Vector> planted;  // set when b was built from A x_planted
};

namespace detail {

inline constexpr std::uint64_t kMatrixStream = 0x4d4154;  // "MAT"
inline constexpr std::uint64_t kRhsStream = 0x524853;     // "RHS"
inline constexpr int kSparseRetries = 16;

inline Eigen::MatrixXd gaussian(RngStream& rng, std::size_t rows, std::size_t cols) {
    Eigen::MatrixXd G(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) G(Eigen::Index(i), Eigen::Index(j)) = rng.normal();
    }
    return G;
}

inline Vector gaussianVector(RngStream& rng, std::size_t len) {
    Vector v(len);
    for (double& e : v) e = rng.normal();
    return v;
}

/// Orthonormal basis of the range of a full-rank tall Gaussian matrix.
inline Eigen::MatrixXd randomOrthonormal(RngStream& rng, std::size_t rows, std::size_t cols) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, rows, cols));
    return qr.householderQ() * Eigen::MatrixXd::Identity(Eigen::Index(rows), Eigen::Index(cols));
}

/// Scales columns to unit norm; returns the applied scale factors.
inline Vector normalizeColumns(Eigen::MatrixXd& M) {
    Vector scale(std::size_t(M.cols()), 1.0);
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double nrm = M.col(j).norm();
        if (nrm > 0.0) {
            scale[std::size_t(j)] = 1.0 / nrm;
            M.col(j) /= nrm;
        }
    }
    return scale;
}

inline DenseMatrix toDenseMatrix(const Eigen::MatrixXd& M) {
    DenseMatrix D(std::size_t(M.rows()), std::size_t(M.cols()));
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) D(std::size_t(i), std::size_t(j)) = M(i, j);
    }
    return D;
}

inline Vector toVec(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

}  // namespace detail

inline Instance generate(const InstanceSpec& spec) {
    spec.validate();
    RngStream rng(deriveSeed(spec.seed, detail::kMatrixStream));
    const std::size_t m = spec.m;
    const std::size_t n = spec.n;
    const std::size_t k = spec.rank == 0 ? std::min(m, n) : spec.rank;

    std::optional<DualSparseMatrix> A;
    // Basis in which a planted solution lies in the row space of A; empty
    // means "use A^T g" (or a plain Gaussian when A has full column rank).
    std::optional<Eigen::MatrixXd> rowSpace;
    bool fullColumnRank = false;

    switch (spec.kind) {
        case InstanceKind::SparseGaussian: {
            for (int attempt = 0; attempt < detail::kSparseRetries && !A; ++attempt) {
                Eigen::MatrixXd M = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(n));
                bool any = false;
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (rng.uniform() < spec.density) {
                            M(Eigen::Index(i), Eigen::Index(j)) = rng.normal();
                            any = any || M(Eigen::Index(i), Eigen::Index(j)) != 0.0;
                        }
                    }
                }
                if (!any) continue;
                detail::normalizeColumns(M);
                A = DualSparseMatrix::fromDense(detail::toDenseMatrix(M));
            }
            if (!A) throw DegenerateDensity("sparse draw produced an all-zero matrix " +
                                            std::to_string(detail::kSparseRetries) + " times");
            break;
        }
        case InstanceKind::DenseGaussian: {
            Eigen::MatrixXd M;
            if (k < std::min(m, n)) {
                const Eigen::MatrixXd left = detail::gaussian(rng, m, k);
                const Eigen::MatrixXd right = detail::gaussian(rng, k, n);
                M = left * right;
                const Vector scale = detail::normalizeColumns(M);
                Eigen::MatrixXd basis = right.transpose();
                for (std::size_t j = 0; j < n; ++j) basis.row(Eigen::Index(j)) *= scale[j];
                rowSpace = basis;
            } else {
                M = detail::gaussian(rng, m, n);
                detail::normalizeColumns(M);
                fullColumnRank = m >= n;
            }
            A = DualSparseMatrix::fromDense(detail::toDenseMatrix(M));
            break;
        }
        case InstanceKind::IllConditioned: {
            const Eigen::MatrixXd U = detail::randomOrthonormal(rng, m, k);
            const Eigen::MatrixXd V = detail::randomOrthonormal(rng, n, k);
            Eigen::VectorXd sigma = Eigen::VectorXd::Constant(Eigen::Index(k), 1.0 / std::sqrt(spec.condTarget));
            sigma[0] = 1.0;
            const Eigen::MatrixXd M = U * sigma.asDiagonal() * V.transpose();
            A = DualSparseMatrix::fromDense(detail::toDenseMatrix(M));
            rowSpace = V;
            break;
        }
    }

    RngStream rhsRng(deriveSeed(spec.seed, detail::kRhsStream));
    Instance inst{std::move(*A), {}, std::nullopt};
    if (!spec.consistent) {
        inst.b = detail::gaussianVector(rhsRng, m);
        return inst;
    }

    Vector planted;
    if (rowSpace) {
        const Vector h = detail::gaussianVector(rhsRng, std::size_t(rowSpace->cols()));
        planted = detail::toVec(*rowSpace * Eigen::Map<const Eigen::VectorXd>(h.data(), rowSpace->cols()));
    } else if (fullColumnRank) {
        planted = detail::gaussianVector(rhsRng, n);
    } else {
        planted = matTVec(inst.A, detail::gaussianVector(rhsRng, m));
    }
    inst.b = matVec(inst.A, planted);
    if (spec.noiseScale > 0.0) {
        for (double& e : inst.b) e += spec.noiseScale * rhsRng.normal();
    }
    inst.planted = std::move(planted);
    return inst;
}

}  // namespace rek
