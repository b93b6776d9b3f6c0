#pragma once

// Matrix storage shared by the solvers and the reference oracle.
//
// DualSparseMatrix keeps one logical matrix in both compressed-row and
// compressed-column layouts so that Kaczmarz row projections and
// column projections both touch only the stored entries of the sampled
// line. Squared row/column norms and the squared Frobenius norm are
// cached at construction; the matrix is immutable afterwards and can be
// shared between concurrent solves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rek/errors.hpp"

namespace rek {

using Vector = std::vector<double>;

/// Floating-point operation tally. A multiply-add pair counts as 2.
class FlopCounter {
public:
    void add(std::uint64_t n) noexcept { count_ += n; }
    std::uint64_t count() const noexcept { return count_; }
    void reset() noexcept { count_ = 0; }

private:
    std::uint64_t count_ = 0;
};

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("dot: lengths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm2(std::span<const double> v) {
    // Scaled accumulation so that tiny or huge entries do not under/overflow.
    double scale = 0.0;
    double ssq = 1.0;
    for (double e : v) {
        if (e == 0.0) continue;
        const double a = std::abs(e);
        if (scale < a) {
            ssq = 1.0 + ssq * (scale / a) * (scale / a);
            scale = a;
        } else {
            ssq += (a / scale) * (a / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("subtract: length mismatch");
    Vector out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
    return out;
}

inline bool allFinite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

/// Dense m x n matrix with row-major storage.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols) : DenseMatrix(rows, cols, Vector(rows * cols, 0.0)) {}

    DenseMatrix(std::size_t rows, std::size_t cols, Vector rowMajor)
        : rows_(rows), cols_(cols), data_(std::move(rowMajor)) {
        if (rows_ == 0 || cols_ == 0) throw InvalidRange("DenseMatrix: dimensions must be positive");
        if (data_.size() != rows_ * cols_) {
            throw DimensionMismatch("DenseMatrix: expected " + std::to_string(rows_ * cols_) +
                                    " entries, got " + std::to_string(data_.size()));
        }
        if (!allFinite(data_)) throw NonFinite("DenseMatrix: non-finite entry");
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix eye(n, n);
        for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
        return eye;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data_).subspan(i * cols_, cols_);
    }
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    Vector data_;
};

/// Stored entries of one row (or column): parallel index/value spans.
struct SparseLine {
    std::span<const std::size_t> indices;
    std::span<const double> values;

    std::size_t nnz() const noexcept { return indices.size(); }
};

class DualSparseMatrix {
public:
    /// Duplicates are summed and exact zeros dropped (coordinate-format semantics).
    static DualSparseMatrix fromTriplets(std::span<const Triplet> triplets, std::size_t rows,
                                         std::size_t cols) {
        if (rows == 0 || cols == 0) throw InvalidRange("DualSparseMatrix: dimensions must be positive");
        std::vector<Triplet> sorted(triplets.begin(), triplets.end());
        for (const auto& t : sorted) {
            if (t.row >= rows || t.col >= cols) {
                throw IndexOutOfRange("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                      ") outside " + std::to_string(rows) + " x " + std::to_string(cols));
            }
            if (!std::isfinite(t.value)) throw NonFinite("triplet value is not finite");
        }
        std::stable_sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });

        DualSparseMatrix A;
        A.rows_ = rows;
        A.cols_ = cols;
        A.rowPtr_.assign(rows + 1, 0);
        for (std::size_t k = 0; k < sorted.size();) {
            const std::size_t r = sorted[k].row;
            const std::size_t c = sorted[k].col;
            double v = 0.0;
            for (; k < sorted.size() && sorted[k].row == r && sorted[k].col == c; ++k) v += sorted[k].value;
            if (v == 0.0) continue;
            A.colIdx_.push_back(c);
            A.csrVal_.push_back(v);
            ++A.rowPtr_[r + 1];
        }
        if (A.csrVal_.empty()) throw AllZeroMatrix();
        std::partial_sum(A.rowPtr_.begin(), A.rowPtr_.end(), A.rowPtr_.begin());

        // Counting transpose: rows are visited in order, so row indices
        // within each column come out strictly increasing.
        A.colPtr_.assign(cols + 1, 0);
        for (std::size_t c : A.colIdx_) ++A.colPtr_[c + 1];
        std::partial_sum(A.colPtr_.begin(), A.colPtr_.end(), A.colPtr_.begin());
        A.rowIdx_.resize(A.colIdx_.size());
        A.cscVal_.resize(A.csrVal_.size());
        std::vector<std::size_t> next(A.colPtr_.begin(), A.colPtr_.end() - 1);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t k = A.rowPtr_[r]; k < A.rowPtr_[r + 1]; ++k) {
                const std::size_t dst = next[A.colIdx_[k]]++;
                A.rowIdx_[dst] = r;
                A.cscVal_[dst] = A.csrVal_[k];
            }
        }

        A.rowSq_.assign(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t k = A.rowPtr_[r]; k < A.rowPtr_[r + 1]; ++k) A.rowSq_[r] += A.csrVal_[k] * A.csrVal_[k];
        }
        A.colSq_.assign(cols, 0.0);
        for (std::size_t c = 0; c < cols; ++c) {
            for (std::size_t k = A.colPtr_[c]; k < A.colPtr_[c + 1]; ++k) A.colSq_[c] += A.cscVal_[k] * A.cscVal_[k];
        }
        A.frobSq_ = std::accumulate(A.rowSq_.begin(), A.rowSq_.end(), 0.0);
        return A;
    }

    static DualSparseMatrix fromDense(const DenseMatrix& D) {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < D.rows(); ++i) {
            for (std::size_t j = 0; j < D.cols(); ++j) {
                if (D(i, j) != 0.0) t.push_back({i, j, D(i, j)});
            }
        }
        return fromTriplets(t, D.rows(), D.cols());
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return csrVal_.size(); }

    SparseLine row(std::size_t i) const {
        if (i >= rows_) throw IndexOutOfRange("row " + std::to_string(i) + " of " + std::to_string(rows_));
        const auto b = rowPtr_[i];
        const auto e = rowPtr_[i + 1];
        return {std::span<const std::size_t>(colIdx_).subspan(b, e - b),
                std::span<const double>(csrVal_).subspan(b, e - b)};
    }

    SparseLine col(std::size_t j) const {
        if (j >= cols_) throw IndexOutOfRange("column " + std::to_string(j) + " of " + std::to_string(cols_));
        const auto b = colPtr_[j];
        const auto e = colPtr_[j + 1];
        return {std::span<const std::size_t>(rowIdx_).subspan(b, e - b),
                std::span<const double>(cscVal_).subspan(b, e - b)};
    }

    double rowSqNorm(std::size_t i) const {
        if (i >= rows_) throw IndexOutOfRange("row " + std::to_string(i) + " of " + std::to_string(rows_));
        return rowSq_[i];
    }
    double colSqNorm(std::size_t j) const {
        if (j >= cols_) throw IndexOutOfRange("column " + std::to_string(j) + " of " + std::to_string(cols_));
        return colSq_[j];
    }
    std::span<const double> rowSqNorms() const noexcept { return rowSq_; }
    std::span<const double> colSqNorms() const noexcept { return colSq_; }
    double frobSq() const noexcept { return frobSq_; }
    double frobNorm() const noexcept { return std::sqrt(frobSq_); }

    // Raw layouts, for serialization and structural checks.
    std::span<const std::size_t> csrRowPtr() const noexcept { return rowPtr_; }
    std::span<const std::size_t> csrColIndices() const noexcept { return colIdx_; }
    std::span<const double> csrValues() const noexcept { return csrVal_; }
    std::span<const std::size_t> cscColPtr() const noexcept { return colPtr_; }
    std::span<const std::size_t> cscRowIndices() const noexcept { return rowIdx_; }
    std::span<const double> cscValues() const noexcept { return cscVal_; }

    /// Triplets in row-major order.
    std::vector<Triplet> triplets() const {
        std::vector<Triplet> t;
        t.reserve(nnz());
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t k = rowPtr_[r]; k < rowPtr_[r + 1]; ++k) t.push_back({r, colIdx_[k], csrVal_[k]});
        }
        return t;
    }

private:
    DualSparseMatrix() = default;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> rowPtr_;
    std::vector<std::size_t> colIdx_;
    Vector csrVal_;
    std::vector<std::size_t> colPtr_;
    std::vector<std::size_t> rowIdx_;
    Vector cscVal_;
    Vector rowSq_;
    Vector colSq_;
    double frobSq_ = 0.0;
};

inline DualSparseMatrix buildDual(std::span<const Triplet> triplets, std::size_t rows, std::size_t cols) {
    return DualSparseMatrix::fromTriplets(triplets, rows, cols);
}

inline DenseMatrix toDense(const DualSparseMatrix& A) {
    DenseMatrix D(A.rows(), A.cols());
    for (const auto& t : A.triplets()) D(t.row, t.col) = t.value;
    return D;
}

namespace detail {

inline double lineDot(const SparseLine& line, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t k = 0; k < line.nnz(); ++k) s += line.values[k] * v[line.indices[k]];
    return s;
}

inline void lineAxpy(const SparseLine& line, double alpha, std::span<double> v) {
    for (std::size_t k = 0; k < line.nnz(); ++k) v[line.indices[k]] += alpha * line.values[k];
}

inline void requireLength(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw DimensionMismatch(std::string(what) + ": vector length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(n));
    }
}

}  // namespace detail

/// <a^(i), x>; adds 2 nnz(a^(i)) flops.
inline double rowDot(const DualSparseMatrix& A, std::size_t i, std::span<const double> x, FlopCounter& flops) {
    const SparseLine line = A.row(i);
    detail::requireLength(x, A.cols(), "rowDot");
    flops.add(2 * line.nnz());
    return detail::lineDot(line, x);
}

/// <a_(j), z>; adds 2 nnz(a_(j)) flops.
inline double colDot(const DualSparseMatrix& A, std::size_t j, std::span<const double> z, FlopCounter& flops) {
    const SparseLine line = A.col(j);
    detail::requireLength(z, A.rows(), "colDot");
    flops.add(2 * line.nnz());
    return detail::lineDot(line, z);
}

/// x += alpha a^(i)
inline void axpyRow(const DualSparseMatrix& A, std::size_t i, double alpha, std::span<double> x, FlopCounter& flops) {
    const SparseLine line = A.row(i);
    detail::requireLength(x, A.cols(), "axpyRow");
    flops.add(2 * line.nnz());
    detail::lineAxpy(line, alpha, x);
}

/// z += alpha a_(j)
inline void axpyCol(const DualSparseMatrix& A, std::size_t j, double alpha, std::span<double> z, FlopCounter& flops) {
    const SparseLine line = A.col(j);
    detail::requireLength(z, A.rows(), "axpyCol");
    flops.add(2 * line.nnz());
    detail::lineAxpy(line, alpha, z);
}

inline Vector matVec(const DualSparseMatrix& A, std::span<const double> x) {
    detail::requireLength(x, A.cols(), "matVec");
    Vector y(A.rows(), 0.0);
    for (std::size_t i = 0; i < A.rows(); ++i) y[i] = detail::lineDot(A.row(i), x);
    return y;
}

inline Vector matTVec(const DualSparseMatrix& A, std::span<const double> z) {
    detail::requireLength(z, A.rows(), "matTVec");
    Vector y(A.cols(), 0.0);
    for (std::size_t j = 0; j < A.cols(); ++j) y[j] = detail::lineDot(A.col(j), z);
    return y;
}

struct SparsityProfile {
    double rAvg;  // expected nnz of a row drawn with probability |a^(i)|^2 / |A|_F^2
    double cAvg;  // same for columns
    std::size_t nnz;
};

inline SparsityProfile sparsityProfile(const DualSparseMatrix& A) {
    SparsityProfile p{0.0, 0.0, A.nnz()};
    for (std::size_t i = 0; i < A.rows(); ++i) p.rAvg += A.rowSqNorm(i) / A.frobSq() * double(A.row(i).nnz());
    for (std::size_t j = 0; j < A.cols(); ++j) p.cAvg += A.colSqNorm(j) / A.frobSq() * double(A.col(j).nnz());
    return p;
}

}  // namespace rek
