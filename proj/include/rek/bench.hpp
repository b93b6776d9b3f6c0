#pragma once

// Benchmark sweeps: (m, n) grid x repetitions x solvers, one BenchRecord
// per solve, emitted in sweep order whatever the number of workers.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rek/bounds.hpp"
#include "rek/gen.hpp"
#include "rek/io.hpp"
#include "rek/matrix.hpp"
#include "rek/reference.hpp"
#include "rek/solvers.hpp"

namespace rek {

struct BenchOptions {
    InstanceSpec base;  // kind, density, condTarget, consistent, noiseScale, rank
    std::vector<std::size_t> ms{200};
    std::vector<std::size_t> ns{50};
    std::vector<SolverKind> solvers{SolverKind::Rek};
    std::size_t reps = 10;
    double eps = kDefaultEps;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> maxIters;
    std::optional<std::uint64_t> checkInterval;
    std::size_t oracleCap = 2000;  // oracle skipped when max(m, n) exceeds this
    double delta = 0.1;
    unsigned jobs = 1;

    // Fixed instance instead of generated ones; repetitions then vary
    // only the solver seed.
    struct Fixed {
        DualSparseMatrix A;
        Vector b;
        std::string id;
    };
    std::optional<Fixed> fixed;
};

namespace detail {

inline constexpr std::uint64_t kSolveStream = 0x534f4c5645;  // "SOLVE"

struct BenchTask {
    std::size_t m;
    std::size_t n;
    std::size_t rep;
    std::uint64_t instanceSeed;
};

inline std::vector<BenchRecord> runBenchTask(const BenchOptions& opt, const BenchTask& task) {
    std::string id;
    std::optional<Instance> generated;
    const DualSparseMatrix* A = nullptr;
    const Vector* b = nullptr;
    std::vector<BenchRecord> out;

    auto failAll = [&](const std::string& what) {
        for (SolverKind s : opt.solvers) {
            BenchRecord r;
            r.instance = id;
            r.solver = std::string(toString(s));
            r.m = task.m;
            r.n = task.n;
            r.eps = opt.eps;
            r.error = what;
            out.push_back(std::move(r));
        }
        return out;
    };

    try {
        if (opt.fixed) {
            id = opt.fixed->id;
            A = &opt.fixed->A;
            b = &opt.fixed->b;
        } else {
            id = std::string(toString(opt.base.kind)) + "-" + std::to_string(task.m) + "x" + std::to_string(task.n) +
                 "-r" + std::to_string(task.rep);
            InstanceSpec spec = opt.base;
            spec.m = task.m;
            spec.n = task.n;
            spec.seed = task.instanceSeed;
            generated = generate(spec);
            A = &generated->A;
            b = &generated->b;
        }
    } catch (const std::exception& e) {
        return failAll(e.what());
    }

    std::optional<ReferenceSolution> ref;
    std::optional<TheoryBounds> bounds;
    if (std::max(A->rows(), A->cols()) <= opt.oracleCap && A->rows() * A->cols() <= kDenseWorkCap) {
        try {
            ref = minNormSolve(*A, *b);
            bounds = theoryBounds(*ref, opt.eps, opt.delta);
        } catch (const std::exception&) {
            ref.reset();
            bounds.reset();
        }
    }

    const std::uint64_t solveSeed = deriveSeed(task.instanceSeed, kSolveStream);
    for (SolverKind s : opt.solvers) {
        BenchRecord r;
        r.instance = id;
        r.solver = std::string(toString(s));
        r.m = A->rows();
        r.n = A->cols();
        r.nnz = A->nnz();
        r.eps = opt.eps;
        r.seed = solveSeed;
        try {
            SolverConfig cfg;
            cfg.eps = opt.eps;
            cfg.solver = s;
            cfg.seed = solveSeed;
            cfg.checkInterval = opt.checkInterval;
            cfg.maxIters = opt.maxIters;
            if (!cfg.maxIters && bounds) cfg.maxIters = defaultMaxIters(*bounds);
            const SolveReport rep = solve(*A, *b, cfg);
            r.iters = rep.iters;
            r.flops = rep.flops;
            r.wallTime = rep.wallTime;
            r.residualNorm = rep.residualNorm;
            r.atzNorm = rep.atzNorm;
            r.converged = rep.converged();
            if (ref) {
                r.forwardErr = s == SolverKind::Rop ? relativeError(rep.z, ref->bPerp) : relativeError(rep.x, ref->xLs);
            }
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

inline std::vector<BenchRecord> runBench(const BenchOptions& opt) {
    if (opt.solvers.empty()) throw InvalidRange("bench: no solvers requested");
    if (opt.reps == 0) throw InvalidRange("bench: reps must be at least 1");
    if (!(opt.eps > 0.0 && opt.eps < 2.0)) throw InvalidRange("bench: eps must lie in (0, 2)");
    if (!(opt.delta > 0.0 && opt.delta < 1.0)) throw InvalidRange("bench: delta must lie in (0, 1)");

    std::vector<detail::BenchTask> tasks;
    if (opt.fixed) {
        for (std::size_t rep = 0; rep < opt.reps; ++rep) {
            tasks.push_back({opt.fixed->A.rows(), opt.fixed->A.cols(), rep, deriveSeed(opt.seed, rep)});
        }
    } else {
        if (opt.ms.empty() || opt.ns.empty()) throw InvalidRange("bench: empty size grid");
        std::size_t point = 0;
        for (std::size_t m : opt.ms) {
            for (std::size_t n : opt.ns) {
                for (std::size_t rep = 0; rep < opt.reps; ++rep) {
                    tasks.push_back({m, n, rep, deriveSeed(opt.seed, (std::uint64_t(point) << 32) | rep)});
                }
                ++point;
            }
        }
    }

    std::vector<std::vector<BenchRecord>> results(tasks.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.jobs, unsigned(tasks.size())));
    if (workers == 1) {
        for (std::size_t k = 0; k < tasks.size(); ++k) results[k] = detail::runBenchTask(opt, tasks[k]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < tasks.size(); k = next++) {
                    results[k] = detail::runBenchTask(opt, tasks[k]);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<BenchRecord> records;
    for (auto& group : results) {
        for (auto& r : group) records.push_back(std::move(r));
    }
    return records;
}

}  // namespace rek
