#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rek/matrix.hpp"
#include "rek/rng.hpp"

namespace rek::testing {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Random sparse matrix with a guaranteed nonzero at (0, 0).
inline DualSparseMatrix randomSparse(std::size_t m, std::size_t n, double density, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<Triplet> t{{0, 0, 1.0 + rng.uniform()}};
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (rng.uniform() < density) t.push_back({i, j, rng.normal()});
        }
    }
    return DualSparseMatrix::fromTriplets(t, m, n);
}

inline Vector randomVector(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    Vector v(n);
    for (double& e : v) e = rng.normal();
    return v;
}

inline DenseMatrix randomDense(std::size_t m, std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    DenseMatrix D(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) D(i, j) = rng.normal();
    }
    return D;
}

// Plain dense products on a materialized matrix.
inline Vector denseMatVec(const DenseMatrix& D, const Vector& x) {
    Vector y(D.rows(), 0.0);
    for (std::size_t i = 0; i < D.rows(); ++i) {
        for (std::size_t j = 0; j < D.cols(); ++j) y[i] += D(i, j) * x[j];
    }
    return y;
}

inline Vector denseMatTVec(const DenseMatrix& D, const Vector& z) {
    Vector y(D.cols(), 0.0);
    for (std::size_t i = 0; i < D.rows(); ++i) {
        for (std::size_t j = 0; j < D.cols(); ++j) y[j] += D(i, j) * z[i];
    }
    return y;
}

inline double maxAbsDiff(const Vector& a, const Vector& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

}  // namespace rek::testing
