#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rek/rek.hpp"

namespace rek::cli {
namespace {

std::shared_ptr<spdlog::logger> makeLogger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err, true);
    auto log = std::make_shared<spdlog::logger>("rek", sink);
    log->set_pattern("[%l] %v");
    log->set_level(spdlog::level::err);
    if (const char* env = std::getenv("KACZMARZ_LOG")) {
        const std::string v = env;
        if (v == "error") log->set_level(spdlog::level::err);
        else if (v == "info") log->set_level(spdlog::level::info);
        else if (v == "debug") log->set_level(spdlog::level::debug);
        else log->error("ignoring KACZMARZ_LOG={} (expected error, info or debug)", v);
    }
    return log;
}

// Flags shared by the instance generator in gen, bench and verify.
struct GenFlags {
    std::string kind = "sparse";
    double density = 0.25;
    double cond = 1e6;
    bool consistent = false;
    double noise = 0.0;
    std::size_t rank = 0;

    void add(CLI::App* app) {
        app->add_option("--kind", kind, "Instance ensemble")
            ->check(CLI::IsMember({"sparse", "dense", "illcond"}))
            ->capture_default_str();
        app->add_option("--density", density, "Nonzero density of sparse instances")->capture_default_str();
        app->add_option("--cond", cond, "sigma_max^2 / sigma_min^2 of illcond instances")->capture_default_str();
        app->add_option("--consistent", consistent, "Build b = A x + noise with a planted x")->capture_default_str();
        app->add_option("--noise", noise, "Noise scale added to a consistent b")->capture_default_str();
        app->add_option("--rank", rank, "Rank of dense or illcond instances (0: full)")->capture_default_str();
    }

    InstanceSpec spec(std::size_t m, std::size_t n, std::uint64_t seed) const {
        InstanceSpec s;
        s.kind = parseInstanceKind(kind);
        s.m = m;
        s.n = n;
        s.density = density;
        s.condTarget = cond;
        s.consistent = consistent;
        s.noiseScale = noise;
        s.seed = seed;
        s.rank = rank;
        s.validate();
        return s;
    }
};

struct SolveFlags {
    std::string solver = "rek";
    double eps = kDefaultEps;
    std::uint64_t seed = 0;
    std::uint64_t maxIters = 0;
    std::uint64_t checkInterval = 0;
    CLI::Option* maxItersOpt = nullptr;
    CLI::Option* checkIntervalOpt = nullptr;

    void add(CLI::App* app) {
        app->add_option("--eps", eps, "Accuracy parameter, 0 < eps < 2")->capture_default_str();
        app->add_option("--seed", seed, "64-bit seed")->capture_default_str();
        maxItersOpt = app->add_option("--max-iters", maxIters, "Iteration cap");
        checkIntervalOpt = app->add_option("--check-interval", checkInterval, "Iterations between convergence checks");
    }

    SolverConfig config() const {
        SolverConfig c;
        c.eps = eps;
        c.seed = seed;
        c.solver = parseSolverKind(solver);
        if (maxItersOpt->count() > 0) c.maxIters = maxIters;
        if (checkIntervalOpt->count() > 0) c.checkInterval = checkInterval;
        c.validate();
        return c;
    }
};

struct FixedInstance {
    DualSparseMatrix A;
    Vector b;
};

FixedInstance loadInstance(const std::string& matrixPath, const std::string& rhsPath) {
    FixedInstance inst{asSparse(readMatrixMarket(matrixPath)), readVector(rhsPath)};
    if (inst.b.size() != inst.A.rows()) {
        throw DimensionMismatch("right-hand side has " + std::to_string(inst.b.size()) + " entries, matrix has " +
                                std::to_string(inst.A.rows()) + " rows");
    }
    return inst;
}

bool oracleFits(const DualSparseMatrix& A, std::size_t cap) {
    return std::max(A.rows(), A.cols()) <= cap && A.rows() * A.cols() <= kDenseWorkCap;
}

void printLine(std::ostream& out, const std::string& key, const std::string& value) {
    out << key;
    for (std::size_t k = key.size(); k < 18; ++k) out << ' ';
    out << value << '\n';
}

// gen ------------------------------------------------------------------------

struct GenCmd {
    GenFlags gen;
    std::size_t m = 200;
    std::size_t n = 50;
    std::uint64_t seed = 0;
    std::string matrix;
    std::string rhs;
    std::string out;

    void add(CLI::App* app) {
        gen.add(app);
        app->add_option("--m", m, "Rows")->capture_default_str();
        app->add_option("--n", n, "Columns")->capture_default_str();
        app->add_option("--seed", seed, "64-bit seed")->capture_default_str();
        app->add_option("--matrix", matrix, "Output Matrix Market file for A")->required();
        app->add_option("--rhs", rhs, "Output Matrix Market file for b")->required();
        app->add_option("--out", out, "Output file for the planted solution (consistent instances)");
    }

    int run(std::ostream& os, spdlog::logger& log) const {
        const Instance inst = generate(gen.spec(m, n, seed));
        writeMatrixMarket(inst.A, matrix);
        writeVector(inst.b, rhs);
        if (!out.empty()) {
            if (!inst.planted) throw InvalidRange("--out needs --consistent true");
            writeVector(*inst.planted, out);
        }
        log.info("generated {}x{} {} instance, nnz {}", inst.A.rows(), inst.A.cols(), gen.kind, inst.A.nnz());
        os << "wrote " << matrix << " (" << inst.A.rows() << "x" << inst.A.cols() << ", nnz " << inst.A.nnz()
           << ") and " << rhs << '\n';
        return kOk;
    }
};

// solve ----------------------------------------------------------------------

struct SolveCmd {
    SolveFlags flags;
    std::string matrix;
    std::string rhs;
    std::string out;
    std::size_t oracleCap = 2000;
    double delta = 0.1;

    void add(CLI::App* app) {
        flags.add(app);
        app->add_option("--solver", flags.solver, "Solver")
            ->check(CLI::IsMember({"rek", "rk", "rop"}))
            ->capture_default_str();
        app->add_option("--matrix", matrix, "Matrix Market file for A")->required();
        app->add_option("--rhs", rhs, "Matrix Market file for b")->required();
        app->add_option("--out", out, "Write x (rek, rk) or z (rop) here");
        app->add_option("--oracle-cap", oracleCap, "Largest dimension for the SVD oracle")->capture_default_str();
        app->add_option("--delta", delta, "Failure probability for the default iteration cap")->capture_default_str();
    }

    int run(std::ostream& os, spdlog::logger& log) const {
        SolverConfig cfg = flags.config();
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidRange("delta must lie in (0, 1)");
        const FixedInstance inst = loadInstance(matrix, rhs);
        log.info("loaded {}x{} matrix, nnz {}", inst.A.rows(), inst.A.cols(), inst.A.nnz());

        std::optional<ReferenceSolution> ref;
        std::optional<TheoryBounds> bounds;
        if (oracleFits(inst.A, oracleCap)) {
            ref = minNormSolve(inst.A, inst.b);
            bounds = theoryBounds(*ref, cfg.eps, delta);
            if (!cfg.maxIters) cfg.maxIters = defaultMaxIters(*bounds);
            log.info("kappa_F^2 {:.6g}, kappa^2 {:.6g}, T* {:.6g}", ref->kappaFSq, ref->condSq, bounds->tStar);
        }

        const SolveReport rep = solve(inst.A, inst.b, cfg);
        printLine(os, "solver", std::string(toString(cfg.solver)));
        printLine(os, "termination", std::string(toString(rep.reason)));
        printLine(os, "iterations", std::to_string(rep.iters));
        printLine(os, "flops", std::to_string(rep.flops));
        printLine(os, "check flops", std::to_string(rep.checkFlops));
        printLine(os, "residual", formatDouble(rep.residualNorm));
        printLine(os, "atz", formatDouble(rep.atzNorm));
        printLine(os, "wall time", formatDouble(rep.wallTime));
        if (ref) {
            const double err = cfg.solver == SolverKind::Rop ? relativeError(rep.z, ref->bPerp)
                                                              : relativeError(rep.x, ref->xLs);
            printLine(os, "forward error", formatDouble(err));
            if (cfg.solver == SolverKind::Rek) printLine(os, "forward bound", formatDouble(bounds->forwardErrBound));
        }
        if (!out.empty()) writeVector(cfg.solver == SolverKind::Rop ? rep.z : rep.x, out);
        return rep.converged() ? kOk : kNotConverged;
    }
};

// bench ----------------------------------------------------------------------

struct BenchCmd {
    GenFlags gen;
    SolveFlags flags;
    std::vector<std::size_t> ms{200};
    std::vector<std::size_t> ns{50};
    std::vector<std::string> solvers{"rek"};
    std::size_t reps = 10;
    std::size_t oracleCap = 2000;
    double delta = 0.1;
    unsigned jobs = 1;
    std::string matrix;
    std::string rhs;
    std::string csv;

    void add(CLI::App* app) {
        gen.add(app);
        flags.add(app);
        app->add_option("--m", ms, "Row counts (comma separated)")->delimiter(',')->capture_default_str();
        app->add_option("--n", ns, "Column counts (comma separated)")->delimiter(',')->capture_default_str();
        app->add_option("--solver", solvers, "Solvers (comma separated)")
            ->delimiter(',')
            ->check(CLI::IsMember({"rek", "rk", "rop"}))
            ->capture_default_str();
        app->add_option("--reps", reps, "Repetitions per sweep point")->capture_default_str();
        app->add_option("--oracle-cap", oracleCap, "Largest dimension for the SVD oracle")->capture_default_str();
        app->add_option("--delta", delta, "Failure probability for the default iteration cap")->capture_default_str();
        app->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
        auto* mat = app->add_option("--matrix", matrix, "Benchmark this matrix instead of generated ones");
        auto* r = app->add_option("--rhs", rhs, "Right-hand side for --matrix");
        mat->needs(r);
        r->needs(mat);
        app->add_option("--csv", csv, "Output CSV (default: stdout)");
    }

    int run(std::ostream& os, spdlog::logger& log) const {
        BenchOptions opt;
        const SolverConfig cfg = flags.config();
        opt.eps = cfg.eps;
        opt.seed = cfg.seed;
        opt.maxIters = cfg.maxIters;
        opt.checkInterval = cfg.checkInterval;
        opt.solvers.clear();
        for (const auto& s : solvers) opt.solvers.push_back(parseSolverKind(s));
        opt.reps = reps;
        opt.oracleCap = oracleCap;
        opt.delta = delta;
        opt.jobs = jobs == 0 ? 1 : jobs;
        opt.ms = ms;
        opt.ns = ns;
        if (!matrix.empty()) {
            FixedInstance inst = loadInstance(matrix, rhs);
            opt.fixed = BenchOptions::Fixed{std::move(inst.A), std::move(inst.b), matrix};
        } else {
            for (std::size_t m : ms) {
                for (std::size_t n : ns) gen.spec(m, n, 0);  // validate the whole grid up front
            }
            opt.base = gen.spec(ms.front(), ns.front(), 0);
        }
        const std::vector<BenchRecord> records = runBench(opt);
        std::size_t failed = 0;
        for (const auto& r : records) {
            if (!r.error.empty()) {
                ++failed;
                log.error("{} {}: {}", r.instance, r.solver, r.error);
            }
        }
        if (csv.empty()) {
            writeCsv(records, os);
        } else {
            writeCsv(records, csv);
            os << "wrote " << records.size() << " records to " << csv;
            if (failed > 0) os << " (" << failed << " failed)";
            os << '\n';
        }
        return kOk;
    }
};

// verify ---------------------------------------------------------------------

struct VerifyCmd {
    GenFlags gen;
    std::size_t m = 120;
    std::size_t n = 40;
    std::string matrix;
    std::string rhs;
    VerifyOptions opt;

    void add(CLI::App* app) {
        gen.kind = "dense";
        gen.add(app);
        app->add_option("--m", m, "Rows of the generated instance")->capture_default_str();
        app->add_option("--n", n, "Columns of the generated instance")->capture_default_str();
        auto* mat = app->add_option("--matrix", matrix, "Verify on this matrix instead of a generated one");
        auto* r = app->add_option("--rhs", rhs, "Right-hand side for --matrix");
        mat->needs(r);
        r->needs(mat);
        app->add_option("--reps", opt.reps, "Monte-Carlo repetitions")->capture_default_str();
        app->add_option("--eps", opt.eps, "Accuracy parameter, 0 < eps < 2")->capture_default_str();
        app->add_option("--delta", opt.delta, "Failure probability")->capture_default_str();
        app->add_option("--seed", opt.seed, "64-bit seed")->capture_default_str();
        app->add_option("--envelope-slack", opt.envelopeSlack, "Multiplier on the expected-error envelopes")
            ->capture_default_str();
        app->add_option("--flop-budget", opt.flopBudget, "Skip Monte-Carlo checks costing more flops than this")
            ->capture_default_str();
    }

    int run(std::ostream& os, spdlog::logger& log) const {
        if (!(opt.eps > 0.0 && opt.eps < 2.0)) throw InvalidRange("eps must satisfy 0 < eps < 2");
        if (!(opt.delta > 0.0 && opt.delta < 1.0)) throw InvalidRange("delta must lie in (0, 1)");
        if (!(opt.envelopeSlack > 0.0)) throw InvalidRange("envelope slack must be positive");
        if (opt.reps == 0) throw InvalidRange("reps must be at least 1");
        auto load = [&]() -> FixedInstance {
            if (!matrix.empty()) return loadInstance(matrix, rhs);
            Instance g = generate(gen.spec(m, n, opt.seed));
            return {std::move(g.A), std::move(g.b)};
        };
        const FixedInstance inst = load();
        if (!oracleFits(inst.A, 2000)) throw TooLarge("verify needs an instance the SVD oracle can handle");
        log.info("verifying on {}x{} matrix, nnz {}", inst.A.rows(), inst.A.cols(), inst.A.nnz());
        bool allPass = true;
        for (const CheckResult& c : runVerification(inst.A, inst.b, opt)) {
            os << toString(c.status) << ' ' << c.name << "  " << c.detail << '\n';
            allPass = allPass && c.status != CheckResult::Status::Fail;
        }
        return allPass ? kOk : kCheckFailed;
    }
};

}  // namespace

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    auto log = makeLogger(err);
    CLI::App app{"Randomized extended Kaczmarz least-squares solver", "rek"};
    app.require_subcommand(1);

    GenCmd genCmd;
    SolveCmd solveCmd;
    BenchCmd benchCmd;
    VerifyCmd verifyCmd;
    auto* gen = app.add_subcommand("gen", "Generate a random instance as Matrix Market files");
    auto* slv = app.add_subcommand("solve", "Solve a least-squares system");
    auto* bench = app.add_subcommand("bench", "Run a benchmark sweep and write CSV");
    auto* verify = app.add_subcommand("verify", "Check solver behaviour against the theoretical bounds");
    genCmd.add(gen);
    solveCmd.add(slv);
    benchCmd.add(bench);
    verifyCmd.add(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (gen->parsed()) return genCmd.run(out, *log);
        if (slv->parsed()) return solveCmd.run(out, *log);
        if (bench->parsed()) return benchCmd.run(out, *log);
        return verifyCmd.run(out, *log);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace rek::cli
