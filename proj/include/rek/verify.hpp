#pragma once

// Statistical and deterministic checks of the solvers against the
// closed-form bounds, on one desk-scale instance. Monte-Carlo checks
// compare empirical means over independent seeds with `envelopeSlack`
// times the bound plus three standard errors; exact-expectation checks
// enumerate every row or column with its sampling weight instead of
// sampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rek/bounds.hpp"
#include "rek/matrix.hpp"
#include "rek/reference.hpp"
#include "rek/solvers.hpp"

namespace rek {

struct MonteCarloStat {
    double mean = 0.0;
    double stdErr = 0.0;  // standard error of the mean
};

/// Mean and standard error over `reps` seeded runs of errorSq(iterator) at
/// each checkpoint. Checkpoints must be non-decreasing.
template <class MakeIterator, class ErrorSq>
std::vector<MonteCarloStat> monteCarloMeans(std::size_t reps, std::span<const std::uint64_t> checkpoints,
                                            std::uint64_t seedBase, MakeIterator&& make, ErrorSq&& errorSq) {
    std::vector<double> sums(checkpoints.size(), 0.0);
    std::vector<double> sumSq(checkpoints.size(), 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
        auto it = make(deriveSeed(seedBase, r));
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            it.run(checkpoints[c] - it.iterations());
            const double e = errorSq(it);
            sums[c] += e;
            sumSq[c] += e * e;
        }
    }
    std::vector<MonteCarloStat> out(checkpoints.size());
    const double n = double(reps);
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c].mean = sums[c] / n;
        if (reps > 1) {
            const double var = std::max(0.0, (sumSq[c] - n * out[c].mean * out[c].mean) / (n - 1.0));
            out[c].stdErr = std::sqrt(var / n);
        }
    }
    return out;
}

inline double squaredDistance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

/// E_i |x+ - xLs|^2 over all rows i (weights q_i) for one RK step from x
/// on the system A x = y.
inline double expectedRkStepError(const DualSparseMatrix& A, std::span<const double> y, std::span<const double> x,
                                  std::span<const double> xLs) {
    double e = 0.0;
    FlopCounter unused;
    for (std::size_t i = 0; i < A.rows(); ++i) {
        if (A.rowSqNorm(i) == 0.0) continue;
        Vector next(x.begin(), x.end());
        rkStep(A, next, i, y[i], unused);
        e += A.rowSqNorm(i) / A.frobSq() * squaredDistance(next, xLs);
    }
    return e;
}

/// E_j |z+ - bPerp|^2 over all columns j (weights p_j) for one ROP step from z.
inline double expectedRopStepError(const DualSparseMatrix& A, std::span<const double> z,
                                   std::span<const double> bPerp) {
    double e = 0.0;
    FlopCounter unused;
    for (std::size_t j = 0; j < A.cols(); ++j) {
        if (A.colSqNorm(j) == 0.0) continue;
        Vector next(z.begin(), z.end());
        ropStep(A, next, j, unused);
        e += A.colSqNorm(j) / A.frobSq() * squaredDistance(next, bPerp);
    }
    return e;
}

struct VerifyOptions {
    std::size_t reps = 200;
    double eps = 1e-6;
    double delta = 0.1;
    std::uint64_t seed = 0;
    double envelopeSlack = 1.5;
    // Monte-Carlo checks whose estimated cost exceeds this are skipped.
    double flopBudget = 2e10;
};

struct CheckResult {
    enum class Status { Pass, Fail, Skip };
    std::string name;
    Status status;
    std::string detail;
};

inline std::string_view toString(CheckResult::Status s) noexcept {
    switch (s) {
        case CheckResult::Status::Pass: return "PASS";
        case CheckResult::Status::Fail: return "FAIL";
        case CheckResult::Status::Skip: return "SKIP";
    }
    return "?";
}

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline CheckResult verdict(std::string name, bool ok, std::string detail) {
    return {std::move(name), ok ? CheckResult::Status::Pass : CheckResult::Status::Fail, std::move(detail)};
}

inline std::vector<std::uint64_t> kappaCheckpoints(double kappaFSq, std::initializer_list<double> multiples) {
    std::vector<std::uint64_t> out;
    for (double k : multiples) out.push_back(std::uint64_t(std::ceil(k * kappaFSq)));
    return out;
}

}  // namespace detail

inline std::vector<CheckResult> runVerification(const DualSparseMatrix& A, std::span<const double> b,
                                                const VerifyOptions& opt) {
    using Status = CheckResult::Status;
    constexpr double kMachEps = std::numeric_limits<double>::epsilon();
    std::vector<CheckResult> out;

    const ReferenceSolution ref = minNormSolve(A, b);
    const TheoryBounds tb = theoryBounds(ref, opt.eps, opt.delta);
    const SparsityProfile sp = sparsityProfile(A);
    const double perIter = 4.0 * (sp.rAvg + sp.cAvg) + 2.0;
    const double kappaF = std::sqrt(ref.kappaFSq);
    const double xLsNorm = norm2(ref.xLs);
    const double bNorm = norm2(b);

    {
        const double rel = 1e-12;
        const bool ok = ref.condSq <= ref.kappaFSq * (1 + rel) && ref.kappaFSq <= double(ref.rank) * ref.condSq * (1 + rel);
        out.push_back(detail::verdict("condition-inequalities", ok,
                                      "kappa^2=" + detail::sci(ref.condSq) + " kappa_F^2=" + detail::sci(ref.kappaFSq) +
                                          " rank=" + std::to_string(ref.rank)));
    }
    {
        const Vector again = pinvApply(ref, ref.bRange);
        const double diff = norm2(subtract(again, ref.xLs));
        const double tol = 128.0 * kMachEps * kappaF * xLsNorm + 128.0 * kMachEps * bNorm / ref.sigmaMin();
        out.push_back(detail::verdict("oracle-self-consistency", diff <= tol,
                                      "|A^+ b_range - x_LS|=" + detail::sci(diff) + " tol=" + detail::sci(tol)));
    }

    // One-step exact expectations on the consistent system A x = b_range.
    {
        RngStream rng(deriveSeed(opt.seed, 0x4f4e45));
        Vector g(A.rows());
        for (double& e : g) e = rng.normal();
        const Vector x = matTVec(A, g);  // in the row space
        const double before = squaredDistance(x, ref.xLs);
        const double after = expectedRkStepError(A, ref.bRange, x, ref.xLs);
        const double bound = tb.rkRate * before;
        const double tol = 1e-12 * before;
        out.push_back(detail::verdict("expected-error-reduction", after <= bound + tol,
                                      "E|x+ - x_LS|^2=" + detail::sci(after) + " bound=" + detail::sci(bound)));

        Vector h(A.cols());
        for (double& e : h) e = rng.normal();
        const Vector u = matVec(A, h);  // in range(A)
        Vector z(u.size());
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = ref.bPerp[k] + u[k];
        const double eBefore = squaredDistance(z, ref.bPerp);
        const double eAfter = expectedRopStepError(A, z, ref.bPerp);
        const double eBound = (1.0 - tb.sigmaMinSq / A.frobSq()) * eBefore;
        out.push_back(detail::verdict("rop-one-step-contraction", eAfter <= eBound + 1e-12 * eBefore,
                                      "E|e+|^2=" + detail::sci(eAfter) + " bound=" + detail::sci(eBound)));
    }

    // Forward error of a converged REK run.
    {
        SolverConfig cfg;
        cfg.eps = opt.eps;
        cfg.seed = opt.seed;
        cfg.maxIters = defaultMaxIters(tb);
        if (double(*cfg.maxIters) * perIter > opt.flopBudget) {
            out.push_back({"rek-forward-error", Status::Skip, "iteration cap beyond flop budget"});
        } else {
            const SolveReport rep = runREK(A, b, cfg);
            if (!rep.converged()) {
                out.push_back({"rek-forward-error", Status::Fail,
                               "no convergence within " + std::to_string(rep.iters) + " iterations"});
            } else {
                const double err = relativeError(rep.x, ref.xLs);
                const double bound = tb.forwardErrBound * (1.0 + 1e-6);
                out.push_back(detail::verdict("rek-forward-error", err <= bound,
                                              "err=" + detail::sci(err) + " bound=" + detail::sci(bound)));
            }
        }
    }

    const double slack = opt.envelopeSlack;
    const double floorSq = [&] {
        const double s = 1e-12 * (xLsNorm + bNorm / ref.sigmaMin());
        return s * s;
    }();

    auto monteCarlo = [&](const std::string& name, std::vector<std::uint64_t> cps, auto&& make, auto&& errorSq,
                          auto&& envelope) {
        if (double(opt.reps) * double(cps.back()) * perIter > opt.flopBudget) {
            out.push_back({name, Status::Skip, "beyond flop budget"});
            return;
        }
        const auto stats = monteCarloMeans(opt.reps, cps, opt.seed, make, errorSq);
        bool ok = true;
        std::string detail;
        for (std::size_t c = 0; c < cps.size(); ++c) {
            // The mean is heavy-tailed when the bound is tight (e.g. RK on
            // the identity), so allow for three standard errors of noise.
            const double limit = slack * envelope(cps[c]) + 3.0 * stats[c].stdErr + floorSq;
            ok = ok && stats[c].mean <= limit;
            detail += "k=" + std::to_string(cps[c]) + ": " + detail::sci(stats[c].mean) + " vs " +
                      detail::sci(limit) + "; ";
        }
        out.push_back(detail::verdict(name, ok, detail));
    };

    monteCarlo(
        "rek-envelope", detail::kappaCheckpoints(ref.kappaFSq, {2, 4, 8}),
        [&](std::uint64_t s) { return RekIterator(A, b, s); },
        [&](const RekIterator& it) { return squaredDistance(it.x(), ref.xLs); },
        [&](std::uint64_t T) { return tb.rekEnvelope(T); });

    {
        // RK on b = b_range + b_perp: consistent part plus fixed noise.
        const double noiseSq = std::pow(norm2(ref.bPerp), 2);
        monteCarlo(
            "rk-envelope", detail::kappaCheckpoints(ref.kappaFSq, {2, 4, 8}),
            [&](std::uint64_t s) { return RkIterator(A, b, s); },
            [&](const RkIterator& it) { return squaredDistance(it.x(), ref.xLs); },
            [&](std::uint64_t k) { return tb.noisyRkEnvelope(double(k), tb.xLsNormSq, noiseSq); });
    }

    monteCarlo(
        "rop-envelope", detail::kappaCheckpoints(ref.kappaFSq, {2, 4}),
        [&](std::uint64_t s) { return RopIterator(A, b, s); },
        [&](const RopIterator& it) { return squaredDistance(it.z(), ref.bPerp); },
        [&](std::uint64_t k) { return tb.ropEnvelope(double(k)); });

    // Iteration bound: at least (1 - delta) of the runs stop within T*.
    {
        const std::size_t runs = std::min<std::size_t>(opt.reps, 100);
        const std::uint64_t cap = std::uint64_t(std::floor(tb.tStar));
        if (double(runs) * double(cap) * perIter > opt.flopBudget || cap == 0) {
            out.push_back({"iteration-bound", Status::Skip, "beyond flop budget"});
        } else {
            std::size_t within = 0;
            for (std::size_t r = 0; r < runs; ++r) {
                SolverConfig cfg;
                cfg.eps = opt.eps;
                cfg.seed = deriveSeed(opt.seed ^ 0x54535441, r);
                cfg.maxIters = cap;
                if (runREK(A, b, cfg).converged()) ++within;
            }
            const bool ok = double(within) >= (1.0 - opt.delta) * double(runs);
            out.push_back(detail::verdict("iteration-bound", ok,
                                          std::to_string(within) + "/" + std::to_string(runs) + " within T*=" +
                                              detail::sci(tb.tStar)));
        }
    }

    // Flop model: exact on fully populated matrices, 5% in mean otherwise.
    {
        RekIterator it(A, b, opt.seed);
        const std::uint64_t iters = 10000;
        it.run(iters);
        const double mean = double(it.flops()) / double(iters);
        if (A.nnz() == A.rows() * A.cols()) {
            const std::uint64_t expect = (4 * (A.rows() + A.cols()) + 2) * iters;
            out.push_back(detail::verdict("flop-model", it.flops() == expect,
                                          std::to_string(it.flops()) + " vs " + std::to_string(expect)));
        } else {
            const bool ok = std::abs(mean - perIter) <= 0.05 * perIter;
            out.push_back(detail::verdict("flop-model", ok,
                                          "mean " + detail::sci(mean) + " vs 4(R_avg+C_avg)+2=" + detail::sci(perIter)));
        }
    }
    return out;
}

}  // namespace rek
