#include "otscale/baseline.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "otscale/core.hpp"
#include "otscale/oracle.hpp"
#include "otscale/repair.hpp"
#include "otscale/sinkhorn.hpp"

using namespace otscale;

namespace {

template <typename F>
ErrKind kind_of(F&& f) {
  try {
    f();
  } catch (const OtError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an OtError";
  return ErrKind::bad_argument;
}

TEST(PlainEta, FlooredAtLogTwo) {
  TransportInstance one = validate_instance(Matrix(1, 1, {5.0}), {1}, {1});
  EXPECT_DOUBLE_EQ(plain_eta(one, 0.5), std::log(2.0) / 0.5);
  TransportInstance a = testutil::instance_a();
  EXPECT_DOUBLE_EQ(plain_eta(a, 1e-1), std::log(2.0) / 1e-1);
  TransportInstance tall = validate_instance(Matrix(3, 1, {1.0, 2.0, 3.0}), {1, 1, 1}, {3});
  EXPECT_DOUBLE_EQ(plain_eta(tall, 2.0), std::log(3.0) / 2.0);
}

TEST(PlainSinkhorn, SingleCellConvergesInTwoRescales) {
  TransportInstance inst = validate_instance(Matrix(1, 1, {5.0}), {1}, {1});
  EngineResult res = run_plain_sinkhorn(inst, 0.5);
  EXPECT_LE(res.trace.rescale_count(), 2);
  EXPECT_EQ(res.trace.doubling_count(), 0);
  EXPECT_NEAR(res.x(0, 0), 1.0, 1e-9);
}

TEST(PlainSinkhorn, FixedEtaAndStrictAlternation) {
  TransportInstance inst = testutil::instance_a();
  EngineResult res = run_plain_sinkhorn(inst, 1e-1);
  double eta = plain_eta(inst, 1e-1);
  ASSERT_FALSE(res.trace.records.empty());
  // The trailing row rescale comes from finalization; everything before it
  // alternates row, col, row, col, ... at the pinned eta.
  for (size_t k = 0; k + 1 < res.trace.records.size(); ++k) {
    const TraceRecord& r = res.trace.records[k];
    EXPECT_DOUBLE_EQ(r.eta, eta);
    EXPECT_EQ(r.op, k % 2 == 0 ? StepKind::row : StepKind::col) << "step " << r.step;
  }
  EXPECT_EQ(res.trace.records.back().op, StepKind::row);
  EXPECT_EQ(res.trace.doubling_count(), 0);
  EXPECT_TRUE(res.trace.dual_nondecreasing());
}

TEST(PlainSinkhorn, SmallInstanceWithinEpsilonAfterRepair) {
  TransportInstance inst = testutil::instance_a();
  EngineResult res = run_plain_sinkhorn(inst, 1e-1);
  TransportPlan p = repair_plan(res.x, inst);
  EXPECT_GE(p.cost, 4.0 - 1e-9);
  EXPECT_LE(p.cost, 4.0 + 1e-1);
}

TEST(PlainSinkhorn, TerminalContractAndGapCertificate) {
  testutil::Rng rng(61409);
  for (int trial = 0; trial < 10; ++trial) {
    int n = static_cast<int>(rng.pick(2, 4));
    int m = static_cast<int>(rng.pick(2, 4));
    TransportInstance inst = testutil::random_instance(rng, n, m, 1, 5, 3);
    EngineResult res = run_plain_sinkhorn(inst, 0.5);

    std::vector<double> rs = row_sums_dense(res.x);
    for (int i = 0; i < n; ++i)
      EXPECT_NEAR(rs[i], static_cast<double>(inst.row_marginal[i]), 1e-9) << "trial " << trial;
    std::vector<double> cs = col_sums_dense(res.x);
    double colerr = 0.0;
    for (int j = 0; j < m; ++j)
      colerr += std::fabs(cs[j] - static_cast<double>(inst.col_marginal[j]));
    EXPECT_LE(colerr, 0.5 + 1e-9) << "trial " << trial;

    // Terminal states have exact rows and banded columns, so the same gap
    // certificate as the engine's doubling lines applies at the fixed eta.
    double opt_scaled = exact_ot(inst).value / static_cast<double>(inst.mu);
    double d = dual_value(res.state);
    EXPECT_LE(d, opt_scaled + 1e-9) << "trial " << trial;
    EXPECT_LE(opt_scaled - d, gap_bound(res.state) + 1e-9) << "trial " << trial;
    EXPECT_TRUE(res.trace.dual_nondecreasing()) << "trial " << trial;
  }
}

TEST(PlainSinkhorn, SurvivesDeepUnderflowAtTinyEpsilon) {
  // eta = log(2)/1e-4 ~ 6931 puts the initial exponents near -48000, far
  // below the dense range; the run must still converge through log-domain
  // arithmetic alone.
  TransportInstance inst = testutil::instance_a();
  EngineResult res = run_plain_sinkhorn(inst, 1e-4);
  std::vector<double> rs = row_sums_dense(res.x);
  EXPECT_NEAR(rs[0], 2.0, 1e-9);
  EXPECT_NEAR(rs[1], 1.0, 1e-9);
  EXPECT_TRUE(res.trace.dual_nondecreasing());

  // The doubling engine needs far fewer rescales at the same accuracy.
  EngineResult fast = run_expsinkhorn(inst, 1e-4);
  EXPECT_GT(res.trace.rescale_count(), fast.trace.rescale_count());
}

TEST(PlainSinkhorn, ZeroCostShortCircuits) {
  TransportInstance inst =
      validate_instance(Matrix(2, 2, {0.0, 0.0, 0.0, 0.0}), {1, 1}, {1, 1});
  EngineResult res = run_plain_sinkhorn(inst, 1e-2);
  EXPECT_TRUE(res.trace.records.empty());
  EXPECT_DOUBLE_EQ(res.x(0, 0), 1.0);
}

TEST(PlainSinkhorn, BadEpsilonAndCapSignalled) {
  TransportInstance inst = testutil::instance_a();
  EXPECT_EQ(kind_of([&] { run_plain_sinkhorn(inst, 0.0); }), ErrKind::bad_argument);
  EXPECT_EQ(kind_of([&] { run_plain_sinkhorn(inst, 1e-4, 3); }),
            ErrKind::iteration_cap_exceeded);
}

}  // namespace
