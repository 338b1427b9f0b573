#include "otscale/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "otscale/core.hpp"
#include "otscale/gen.hpp"
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

TEST(Numbers, IntegersPrintBare) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(5.0), "5");
  EXPECT_EQ(format_number(-17.0), "-17");
  EXPECT_EQ(format_number(1e15), "1000000000000000");
}

TEST(Numbers, RealsRoundTripBinary64) {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-13, -3.141592653589793, 16635.532333438689}) {
    std::string s = format_number(v);
    EXPECT_EQ(std::stod(s), v) << s;
    EXPECT_EQ(format_number(std::stod(s)), s) << s;
  }
}

TEST(InstanceFiles, CanonicalDocumentParses) {
  std::string text =
      "n 2\n"
      "m 2\n"
      "r 2 1\n"
      "c 1 2\n"
      "Q\n"
      "1 2\n"
      "3 1\n";
  TransportInstance inst = parse_instance(text);
  EXPECT_EQ(inst.n, 2);
  EXPECT_EQ(inst.m, 2);
  EXPECT_EQ(inst.row_marginal, (std::vector<long long>{2, 1}));
  EXPECT_EQ(inst.col_marginal, (std::vector<long long>{1, 2}));
  EXPECT_DOUBLE_EQ(inst.cost(1, 0), 3.0);
  EXPECT_EQ(write_instance(inst), text);
}

TEST(InstanceFiles, SerializeParseIsIdentityOnGeneratedInstances) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    GenConfig cfg;
    cfg.n = 3 + static_cast<int>(seed % 4);
    cfg.m = 2 + static_cast<int>(seed % 5);
    cfg.seed = seed;
    TransportInstance inst = gen_instance(cfg);
    std::string text = write_instance(inst);
    TransportInstance again = parse_instance(text);
    EXPECT_EQ(write_instance(again), text);
    EXPECT_EQ(again.row_marginal, inst.row_marginal);
    EXPECT_EQ(again.col_marginal, inst.col_marginal);
    EXPECT_EQ(again.cost.data, inst.cost.data);
  }
}

TEST(InstanceFiles, RealCostsSurviveExactly) {
  TransportInstance inst =
      validate_instance(Matrix(1, 2, {0.1, 1.0 / 3.0}), {2}, {1, 1});
  TransportInstance again = parse_instance(write_instance(inst));
  EXPECT_EQ(again.cost.data, inst.cost.data);
  EXPECT_EQ(write_instance(again), write_instance(inst));
}

TEST(InstanceFiles, MalformedDocumentsSignalParseErrors) {
  EXPECT_EQ(kind_of([] { parse_instance(""); }), ErrKind::parse_error);
  EXPECT_EQ(kind_of([] { parse_instance("n 2\nm 2\nr 2 1\nc 1 2\nQ\n1 2\n"); }),
            ErrKind::parse_error);  // missing cost row
  EXPECT_EQ(kind_of([] { parse_instance("n 2\nm 2\nr 2 x\nc 1 2\nQ\n1 2\n3 1\n"); }),
            ErrKind::parse_error);  // junk token
  EXPECT_EQ(kind_of([] { parse_instance("n 2\nm 2\nr 2 1\nc 1 2\nQ\n1 2\n3 1\n9\n"); }),
            ErrKind::parse_error);  // trailing content
  EXPECT_EQ(kind_of([] { parse_instance("n 2\nm 2\nr 2.5 0.5\nc 1 2\nQ\n1 2\n3 1\n"); }),
            ErrKind::parse_error);  // fractional marginals
  // Semantic validation still applies after parsing.
  EXPECT_EQ(kind_of([] { parse_instance("n 2\nm 2\nr 2 2\nc 1 2\nQ\n1 2\n3 1\n"); }),
            ErrKind::unbalanced_marginals);
}

TEST(PlanFiles, RoundTrip) {
  Matrix x(2, 3, {1.0, 0.5, 0.0, 0.0, 0.25, 2.0});
  std::string text = write_plan_matrix(x);
  Matrix back = parse_plan_matrix(text);
  EXPECT_EQ(back.rows, 2);
  EXPECT_EQ(back.cols, 3);
  EXPECT_EQ(back.data, x.data);
  EXPECT_EQ(write_plan_matrix(back), text);
}

TEST(TraceFiles, HeaderAndColumnsMatchRecords) {
  TransportInstance inst = testutil::instance_a();
  EngineResult res = run_expsinkhorn(inst, 1e-2);
  std::string text = write_trace(res.trace);

  std::vector<std::string> lines = io_detail::split_lines(text);
  ASSERT_EQ(lines.size(), res.trace.records.size() + 1);
  EXPECT_EQ(lines[0], "step eta op l1_row l1_col dual gap_bound");
  double prev_dual = res.trace.initial_dual;
  for (size_t k = 1; k < lines.size(); ++k) {
    std::vector<std::string> toks = io_detail::tokens_of(lines[k]);
    ASSERT_EQ(toks.size(), 7u) << lines[k];
    const TraceRecord& r = res.trace.records[k - 1];
    EXPECT_EQ(toks[0], std::to_string(r.step));
    EXPECT_EQ(std::stod(toks[1]), r.eta);
    EXPECT_EQ(toks[2], step_kind_name(r.op));
    EXPECT_EQ(std::stod(toks[5]), r.dual);
    // The emitted dual column is nondecreasing.
    EXPECT_GE(std::stod(toks[5]), prev_dual - kDualTol);
    prev_dual = std::stod(toks[5]);
  }
}

TEST(CirculationFiles, CanonicalRoundTripIsBitExact) {
  std::string text =
      "p mcc 3 3\n"
      "a 1 2 2 -1\n"
      "a 2 3 2 -1\n"
      "a 3 1 2 -1\n";
  MccInstance mcc = parse_mcc(text);
  EXPECT_EQ(mcc.num_vertices, 3);
  ASSERT_EQ(mcc.edges.size(), 3u);
  EXPECT_EQ(mcc.edges[0].tail, 0);
  EXPECT_EQ(mcc.edges[0].head, 1);
  EXPECT_EQ(mcc.edges[0].capacity, 2);
  EXPECT_EQ(mcc.edges[0].cost, -1);
  EXPECT_EQ(write_mcc(mcc), text);
}

TEST(CirculationFiles, CommentsAcceptedNeverEmitted) {
  std::string text =
      "c a triangle\n"
      "p mcc 3 3\n"
      "c comments may appear anywhere\n"
      "a 1 2 2 -1\n"
      "a 2 3 2 -1\n"
      "a 3 1 2 -1\n";
  MccInstance mcc = parse_mcc(text);
  EXPECT_EQ(mcc.edges.size(), 3u);
  EXPECT_EQ(write_mcc(parse_mcc(write_mcc(mcc))), write_mcc(mcc));
}

TEST(CirculationFiles, MalformedFilesSignalErrors) {
  EXPECT_EQ(kind_of([] { parse_mcc(""); }), ErrKind::parse_error);
  EXPECT_EQ(kind_of([] { parse_mcc("p mcc 2 1\n"); }), ErrKind::parse_error);  // count short
  EXPECT_EQ(kind_of([] { parse_mcc("p mcc 2 1\na 1 3 1 0\n"); }),
            ErrKind::vertex_out_of_range);
  EXPECT_EQ(kind_of([] { parse_mcc("p mcc 2 1\na 1 1 1 0\n"); }), ErrKind::self_loop);
  EXPECT_EQ(kind_of([] { parse_mcc("p mcc 2 1\na 1 2 0 0\n"); }),
            ErrKind::nonpositive_capacity);
  EXPECT_EQ(kind_of([] { parse_mcc("p mcc 2 1\nb 1 2 1 0\n"); }), ErrKind::parse_error);
}

TEST(Generator, SameSeedSameBytes) {
  GenConfig cfg;
  cfg.seed = 7;
  std::string a = write_instance(gen_instance(cfg));
  std::string b = write_instance(gen_instance(cfg));
  EXPECT_EQ(a, b);
  cfg.seed = 8;
  EXPECT_NE(write_instance(gen_instance(cfg)), a);
}

TEST(Generator, InstancesAreBalancedAndInBounds) {
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    GenConfig cfg;
    cfg.n = 2 + static_cast<int>(seed % 7);
    cfg.m = 2 + static_cast<int>((3 * seed) % 7);
    cfg.cost_max = 10;
    cfg.marg_max = 5;
    cfg.seed = seed;
    TransportInstance inst = gen_instance(cfg);  // validate_instance ran inside
    long long sr = 0, sc = 0;
    for (long long v : inst.row_marginal) {
      EXPECT_GE(v, 1);
      EXPECT_LE(v, cfg.marg_max);
      sr += v;
    }
    for (long long v : inst.col_marginal) {
      EXPECT_GE(v, 1);
      EXPECT_LE(v, cfg.marg_max);
      sc += v;
    }
    EXPECT_EQ(sr, sc);
    for (double v : inst.cost.data) {
      EXPECT_GE(v, 1.0);
      EXPECT_LE(v, static_cast<double>(cfg.cost_max));
      EXPECT_EQ(v, std::nearbyint(v));
    }
  }
}

TEST(Generator, RejectsImpossibleShapes) {
  GenConfig cfg;
  cfg.n = 1;
  cfg.m = 9;
  cfg.marg_max = 2;
  EXPECT_EQ(kind_of([&] { gen_instance(cfg); }), ErrKind::bad_argument);
  cfg = GenConfig{};
  cfg.n = 0;
  EXPECT_EQ(kind_of([&] { gen_instance(cfg); }), ErrKind::bad_argument);
}

}  // namespace
