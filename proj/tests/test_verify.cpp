#include <gtest/gtest.h>

#include <algorithm>

#include "rek/gen.hpp"
#include "rek/verify.hpp"
#include "support.hpp"

using namespace rek;

namespace {

using Status = CheckResult::Status;

void expectNoFailures(const std::vector<CheckResult>& results) {
    ASSERT_FALSE(results.empty());
    for (const auto& c : results) EXPECT_NE(c.status, Status::Fail) << c.name << ": " << c.detail;
}

}  // namespace

TEST(Verify, IdentityPassesEverything) {
    const DualSparseMatrix I = DualSparseMatrix::fromDense(DenseMatrix::identity(50));
    VerifyOptions opt;
    opt.reps = 50;
    const auto results = runVerification(I, rek::testing::randomVector(50, 1), opt);
    expectNoFailures(results);
    EXPECT_TRUE(std::all_of(results.begin(), results.end(), [](const auto& c) { return c.status == Status::Pass; }));
}

TEST(Verify, RankDeficientConsistent) {
    InstanceSpec s;
    s.kind = InstanceKind::DenseGaussian;
    s.m = 60;
    s.n = 30;
    s.rank = 10;
    s.consistent = true;
    s.seed = 2;
    const Instance inst = generate(s);
    VerifyOptions opt;
    opt.reps = 60;
    expectNoFailures(runVerification(inst.A, inst.b, opt));
}

TEST(Verify, TinySlackIsDetected) {
    InstanceSpec s;
    s.kind = InstanceKind::DenseGaussian;
    s.m = 60;
    s.n = 20;
    s.seed = 3;
    const Instance inst = generate(s);
    VerifyOptions opt;
    opt.reps = 30;
    opt.envelopeSlack = 1e-3;
    const auto results = runVerification(inst.A, inst.b, opt);
    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& c) {
        return c.status == Status::Fail && c.name.find("envelope") != std::string::npos;
    });
    EXPECT_GT(failed, 0);
}

TEST(Verify, TightBudgetSkipsExpensiveChecks) {
    InstanceSpec s;
    s.kind = InstanceKind::DenseGaussian;
    s.m = 40;
    s.n = 10;
    const Instance inst = generate(s);
    VerifyOptions opt;
    opt.reps = 10;
    opt.flopBudget = 1.0;
    const auto results = runVerification(inst.A, inst.b, opt);
    EXPECT_TRUE(std::any_of(results.begin(), results.end(), [](const auto& c) { return c.status == Status::Skip; }));
    expectNoFailures(results);
}

TEST(Verify, ExpectedStepErrorMatchesEnumeration) {
    const DenseMatrix D = rek::testing::randomDense(6, 4, 5);
    const DualSparseMatrix A = DualSparseMatrix::fromDense(D);
    const Vector x = rek::testing::randomVector(4, 6);
    const Vector xs = rek::testing::randomVector(4, 7);
    const Vector y = matVec(A, xs);
    double expect = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        const double w = A.rowSqNorm(i) / A.frobSq();
        const auto row = D.row(i);
        const double t = (y[i] - dot(row, x)) / A.rowSqNorm(i);
        Vector next = x;
        for (std::size_t j = 0; j < 4; ++j) next[j] += t * row[j];
        expect += w * squaredDistance(next, xs);
    }
    EXPECT_NEAR(expectedRkStepError(A, y, x, xs), expect, 1e-12 * expect);
}

TEST(Verify, StatusNames) {
    EXPECT_EQ(toString(Status::Pass), "PASS");
    EXPECT_EQ(toString(Status::Fail), "FAIL");
    EXPECT_EQ(toString(Status::Skip), "SKIP");
}
