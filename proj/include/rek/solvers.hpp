#pragma once

// Randomized row/column projection solvers:
//
//   ROP  randomized orthogonal projection. Column projections drive z
//        from b towards the component of b orthogonal to range(A).
//   RK   randomized Kaczmarz. Row projections onto the hyperplanes
//        <a^(i), x> = b_i; converges for consistent systems.
//   REK  randomized extended Kaczmarz. Interleaves ROP on z with RK on
//        the system Ax = b - z and converges to the minimum-norm
//        least-squares solution A^+ b for any A and b.
//
// Rows are drawn with probability |a^(i)|^2/|A|_F^2 and columns with
// |a_(j)|^2/|A|_F^2. Every solve owns its generators and counters; the
// matrix is only read, so independent solves may share it across
// threads.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rek/errors.hpp"
#include "rek/matrix.hpp"
#include "rek/rng.hpp"
#include "rek/sampling.hpp"

namespace rek {

enum class SolverKind { Rop, Rk, Rek };

inline std::string_view toString(SolverKind kind) noexcept {
    switch (kind) {
        case SolverKind::Rop: return "rop";
        case SolverKind::Rk: return "rk";
        case SolverKind::Rek: return "rek";
    }
    return "?";
}

inline SolverKind parseSolverKind(std::string_view name) {
    if (name == "rop") return SolverKind::Rop;
    if (name == "rk") return SolverKind::Rk;
    if (name == "rek") return SolverKind::Rek;
    throw InvalidRange("unknown solver '" + std::string(name) + "' (expected rek, rk or rop)");
}

enum class Termination { Converged, MaxIters };

inline std::string_view toString(Termination t) noexcept {
    return t == Termination::Converged ? "converged" : "max-iters";
}

inline constexpr double kDefaultEps = 1e-14;

struct SolverConfig {
    double eps = kDefaultEps;
    std::optional<std::uint64_t> maxIters;       // default: 10^6 min(m, n)
    std::optional<std::uint64_t> checkInterval;  // default: 8 min(m, n)
    std::uint64_t seed = 0;
    SolverKind solver = SolverKind::Rek;
    // REK only: feed z^(k+1)_i instead of z^(k)_i into the row update.
    bool useUpdatedZ = false;

    /// Throws InvalidRange unless 0 < eps < 2 and both counts are >= 1.
    void validate() const {
        if (!(eps > 0.0 && eps < 2.0)) throw InvalidRange("eps must satisfy 0 < eps < 2, got " + std::to_string(eps));
        if (maxIters && *maxIters == 0) throw InvalidRange("max-iters must be at least 1");
        if (checkInterval && *checkInterval == 0) throw InvalidRange("check-interval must be at least 1");
    }

    std::uint64_t resolvedCheckInterval(const DualSparseMatrix& A) const {
        return checkInterval.value_or(8 * std::min(A.rows(), A.cols()));
    }

    std::uint64_t resolvedMaxIters(const DualSparseMatrix& A) const {
        return maxIters.value_or(std::uint64_t{1'000'000} * std::min(A.rows(), A.cols()));
    }
};

struct SolveReport {
    Vector x;       // estimate of A^+ b (RK, REK); empty for ROP
    Vector z;       // estimate of the part of b orthogonal to range(A) (ROP, REK); empty for RK
    Vector bRange;  // ROP only: b - z, estimate of the projection of b onto range(A)
    std::uint64_t iters = 0;
    std::uint64_t flops = 0;       // iteration work only
    std::uint64_t checkFlops = 0;  // convergence checks, tracked separately
    Termination reason = Termination::MaxIters;
    // REK: |Ax - (b - z)|; RK: |Ax - b|; ROP: |z|.
    double residualNorm = 0.0;
    // REK, ROP: |A^T z|; RK: |A^T (b - Ax)|.
    double atzNorm = 0.0;
    double wallTime = 0.0;

    bool converged() const noexcept { return reason == Termination::Converged; }
};

// Single steps ---------------------------------------------------------------

/// z <- z - (<a_(j), z> / |a_(j)|^2) a_(j). Adds 4 nnz(a_(j)) + 1 flops.
inline void ropStep(const DualSparseMatrix& A, std::span<double> z, std::size_t j, FlopCounter& flops) {
    const double coeff = colDot(A, j, z, flops) / A.colSqNorm(j);
    flops.add(1);
    axpyCol(A, j, -coeff, z, flops);
}

/// x <- x + ((beta - <a^(i), x>) / |a^(i)|^2) a^(i). Adds 4 nnz(a^(i)) + 2 flops.
inline void rkStep(const DualSparseMatrix& A, std::span<double> x, std::size_t i, double beta, FlopCounter& flops) {
    const double coeff = (beta - rowDot(A, i, x, flops)) / A.rowSqNorm(i);
    flops.add(2);
    axpyRow(A, i, coeff, x, flops);
}

/// One extended Kaczmarz iteration with row i and column j: the column
/// projection of z, then the row projection of x onto <a^(i), x> = b_i - z_i.
/// z_i is read before the column update unless `useUpdatedZ` is set.
/// Adds 4 (nnz(a^(i)) + nnz(a_(j))) + 2 flops: four level-1 kernels plus
/// the two scalar divisions.
inline void rekIteration(const DualSparseMatrix& A, std::span<const double> b, std::span<double> x,
                         std::span<double> z, std::size_t i, std::size_t j, FlopCounter& flops,
                         bool useUpdatedZ = false) {
    if (b.size() != A.rows()) throw DimensionMismatch("rekIteration: b has wrong length");
    const double zi = z[i];
    const double zCoeff = colDot(A, j, z, flops) / A.colSqNorm(j);
    axpyCol(A, j, -zCoeff, z, flops);
    const double rhs = b[i] - (useUpdatedZ ? z[i] : zi);
    const double xCoeff = (rhs - rowDot(A, i, x, flops)) / A.rowSqNorm(i);
    axpyRow(A, i, xCoeff, x, flops);
    flops.add(2);
}

// Iterators ------------------------------------------------------------------
//
// Hold a reference to the matrix, which must outlive them.

class RopIterator {
public:
    RopIterator(const DualSparseMatrix& A, std::span<const double> b, std::uint64_t seed)
        : A_(&A), cols_(colSampler(A)), rng_(deriveSeed(seed, kColStream)), z_(b.begin(), b.end()) {
        if (b.size() != A.rows()) throw DimensionMismatch("ROP: b has wrong length");
    }

    void step() {
        ropStep(*A_, z_, cols_.sample(rng_), flops_);
        ++iters_;
    }
    void run(std::uint64_t k) {
        for (std::uint64_t t = 0; t < k; ++t) step();
    }

    const Vector& z() const noexcept { return z_; }
    std::uint64_t iterations() const noexcept { return iters_; }
    std::uint64_t flops() const noexcept { return flops_.count(); }

private:
    const DualSparseMatrix* A_;
    AliasTable cols_;
    RngStream rng_;
    Vector z_;
    FlopCounter flops_;
    std::uint64_t iters_ = 0;
};

class RkIterator {
public:
    /// Starts from x = 0, which lies in the row space of A.
    RkIterator(const DualSparseMatrix& A, std::span<const double> b, std::uint64_t seed)
        : A_(&A), rows_(rowSampler(A)), rng_(deriveSeed(seed, kRowStream)), b_(b.begin(), b.end()), x_(A.cols(), 0.0) {
        if (b.size() != A.rows()) throw DimensionMismatch("RK: b has wrong length");
    }

    void step() {
        const std::size_t i = rows_.sample(rng_);
        rkStep(*A_, x_, i, b_[i], flops_);
        ++iters_;
    }
    void run(std::uint64_t k) {
        for (std::uint64_t t = 0; t < k; ++t) step();
    }

    const Vector& x() const noexcept { return x_; }
    std::uint64_t iterations() const noexcept { return iters_; }
    std::uint64_t flops() const noexcept { return flops_.count(); }

private:
    const DualSparseMatrix* A_;
    AliasTable rows_;
    RngStream rng_;
    Vector b_;
    Vector x_;
    FlopCounter flops_;
    std::uint64_t iters_ = 0;
};

class RekIterator {
public:
    /// Starts from x = 0, z = b.
    RekIterator(const DualSparseMatrix& A, std::span<const double> b, std::uint64_t seed, bool useUpdatedZ = false)
        : A_(&A),
          rows_(rowSampler(A)),
          cols_(colSampler(A)),
          rowRng_(deriveSeed(seed, kRowStream)),
          colRng_(deriveSeed(seed, kColStream)),
          b_(b.begin(), b.end()),
          x_(A.cols(), 0.0),
          z_(b.begin(), b.end()),
          useUpdatedZ_(useUpdatedZ) {
        if (b.size() != A.rows()) throw DimensionMismatch("REK: b has wrong length");
    }

    void step() {
        const std::size_t i = rows_.sample(rowRng_);
        const std::size_t j = cols_.sample(colRng_);
        rekIteration(*A_, b_, x_, z_, i, j, flops_, useUpdatedZ_);
        ++iters_;
    }
    void run(std::uint64_t k) {
        for (std::uint64_t t = 0; t < k; ++t) step();
    }

    const Vector& x() const noexcept { return x_; }
    const Vector& z() const noexcept { return z_; }
    std::uint64_t iterations() const noexcept { return iters_; }
    std::uint64_t flops() const noexcept { return flops_.count(); }

private:
    const DualSparseMatrix* A_;
    AliasTable rows_;
    AliasTable cols_;
    RngStream rowRng_;
    RngStream colRng_;
    Vector b_;
    Vector x_;
    Vector z_;
    FlopCounter flops_;
    std::uint64_t iters_ = 0;
    bool useUpdatedZ_;
};

// Termination ----------------------------------------------------------------

struct RekResiduals {
    double residual;  // |Ax - (b - z)|
    double atz;       // |A^T z|
    double xNorm;
    double bNorm;
    double bMinusZNorm;
    double zNorm;
};

inline RekResiduals rekResiduals(const DualSparseMatrix& A, std::span<const double> b, std::span<const double> x,
                                 std::span<const double> z, FlopCounter* checkFlops = nullptr) {
    if (b.size() != A.rows() || z.size() != A.rows() || x.size() != A.cols()) {
        throw DimensionMismatch("rekResiduals: shapes do not conform");
    }
    Vector r = matVec(A, x);
    Vector bmz(b.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        bmz[k] = b[k] - z[k];
        r[k] -= bmz[k];
    }
    const Vector atz = matTVec(A, z);
    if (checkFlops) checkFlops->add(4 * A.nnz() + 6 * A.rows() + 4 * A.cols());
    return {norm2(r), norm2(atz), norm2(x), norm2(b), norm2(bmz), norm2(z)};
}

/// Both relative criteria
///   |Ax - (b - z)| <= eps |A|_F |x|   and   |A^T z| <= eps |A|_F^2 |x|.
/// When x = 0 they are undefined; the run is then treated as converged
/// only if |b - z| <= eps |b| and |A^T z| <= eps |A|_F |z|, i.e. b is
/// (numerically) orthogonal to range(A) and x = 0 is the answer.
inline bool rekConverged(const DualSparseMatrix& A, const RekResiduals& q, double eps) {
    if (q.xNorm == 0.0) return q.bMinusZNorm <= eps * q.bNorm && q.atz <= eps * A.frobNorm() * q.zNorm;
    return q.residual <= eps * A.frobNorm() * q.xNorm && q.atz <= eps * A.frobSq() * q.xNorm;
}

inline bool rekTerminationCheck(const DualSparseMatrix& A, std::span<const double> b, std::span<const double> x,
                                std::span<const double> z, double eps, FlopCounter* checkFlops = nullptr) {
    return rekConverged(A, rekResiduals(A, b, x, z, checkFlops), eps);
}

/// |A^T z| <= eps |A|_F |z|; z = 0 counts as converged.
inline bool ropConverged(const DualSparseMatrix& A, double atzNorm, double zNorm, double eps) {
    return atzNorm <= eps * A.frobNorm() * zNorm;
}

/// |Ax - b| <= eps |A|_F |x|; with x = 0 only b = 0 converges.
inline bool rkConverged(const DualSparseMatrix& A, double residual, double xNorm, double bNorm, double eps) {
    if (xNorm == 0.0) return residual <= eps * bNorm;
    return residual <= eps * A.frobNorm() * xNorm;
}

// Drivers --------------------------------------------------------------------

namespace detail {

// Checks at k = 0 and every `interval` iterations, plus once at the cap.
template <class Iterator, class Check>
Termination drive(Iterator& it, std::uint64_t interval, std::uint64_t maxIters, Check&& check) {
    for (;;) {
        const std::uint64_t k = it.iterations();
        if ((k % interval == 0 || k == maxIters) && check()) return Termination::Converged;
        if (k >= maxIters) return Termination::MaxIters;
        it.step();
    }
}

inline double secondsSince(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

inline SolveReport runROP(const DualSparseMatrix& A, std::span<const double> b, const SolverConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RopIterator it(A, b, config.seed);
    FlopCounter checkFlops;
    auto check = [&] {
        const double atz = norm2(matTVec(A, it.z()));
        checkFlops.add(2 * A.nnz() + 2 * A.cols() + 2 * A.rows());
        return ropConverged(A, atz, norm2(it.z()), config.eps);
    };
    SolveReport rep;
    rep.reason = detail::drive(it, config.resolvedCheckInterval(A), config.resolvedMaxIters(A), check);
    rep.z = it.z();
    rep.bRange = subtract(b, rep.z);
    rep.iters = it.iterations();
    rep.flops = it.flops();
    rep.residualNorm = norm2(rep.z);
    rep.atzNorm = norm2(matTVec(A, rep.z));
    rep.checkFlops = checkFlops.count();
    rep.wallTime = detail::secondsSince(start);
    return rep;
}

inline SolveReport runRK(const DualSparseMatrix& A, std::span<const double> b, const SolverConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RkIterator it(A, b, config.seed);
    FlopCounter checkFlops;
    const double bNorm = norm2(b);
    auto residual = [&] {
        Vector r = matVec(A, it.x());
        for (std::size_t k = 0; k < r.size(); ++k) r[k] -= b[k];
        checkFlops.add(2 * A.nnz() + 3 * A.rows() + 2 * A.cols());
        return r;
    };
    auto check = [&] { return rkConverged(A, norm2(residual()), norm2(it.x()), bNorm, config.eps); };
    SolveReport rep;
    rep.reason = detail::drive(it, config.resolvedCheckInterval(A), config.resolvedMaxIters(A), check);
    rep.x = it.x();
    rep.iters = it.iterations();
    rep.flops = it.flops();
    const Vector r = residual();
    rep.residualNorm = norm2(r);
    rep.atzNorm = norm2(matTVec(A, r));
    rep.checkFlops = checkFlops.count();
    rep.wallTime = detail::secondsSince(start);
    return rep;
}

inline SolveReport runREK(const DualSparseMatrix& A, std::span<const double> b, const SolverConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RekIterator it(A, b, config.seed, config.useUpdatedZ);
    FlopCounter checkFlops;
    auto check = [&] { return rekConverged(A, rekResiduals(A, b, it.x(), it.z(), &checkFlops), config.eps); };
    SolveReport rep;
    rep.reason = detail::drive(it, config.resolvedCheckInterval(A), config.resolvedMaxIters(A), check);
    rep.x = it.x();
    rep.z = it.z();
    rep.iters = it.iterations();
    rep.flops = it.flops();
    const RekResiduals q = rekResiduals(A, b, rep.x, rep.z, &checkFlops);
    rep.residualNorm = q.residual;
    rep.atzNorm = q.atz;
    rep.checkFlops = checkFlops.count();
    rep.wallTime = detail::secondsSince(start);
    return rep;
}

inline SolveReport solve(const DualSparseMatrix& A, std::span<const double> b, const SolverConfig& config) {
    switch (config.solver) {
        case SolverKind::Rop: return runROP(A, b, config);
        case SolverKind::Rk: return runRK(A, b, config);
        case SolverKind::Rek: return runREK(A, b, config);
    }
    throw InvalidRange("unknown solver kind");
}

}  // namespace rek
