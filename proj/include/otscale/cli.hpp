#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "otscale/baseline.hpp"
#include "otscale/core.hpp"
#include "otscale/gen.hpp"
#include "otscale/io.hpp"
#include "otscale/mcc.hpp"
#include "otscale/oracle.hpp"
#include "otscale/repair.hpp"
#include "otscale/sinkhorn.hpp"

namespace otscale {

// Exit codes, fixed across all subcommands: 0 success, 1 unreadable or
// invalid input (files or flags), 2 solver failure, 3 verification findings.
constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitSolver = 2;
constexpr int kExitVerify = 3;

namespace cli_detail {

// The 2x2 instance used when a benchmark is run without seeds.
inline TransportInstance sample_instance() {
  return validate_instance(Matrix(2, 2, {1.0, 2.0, 3.0, 1.0}), {2, 1}, {1, 2});
}

// Fractional marginals scaled by a user-chosen denominator, rounded, and
// rebalanced on the last column entry. An approximation: the solved instance
// is the rationalized one, so results are reported divided by the
// denominator again.
inline TransportInstance rationalize_instance(const RawInstance& raw, long long denom) {
  std::vector<long long> r(raw.n), c(raw.m);
  long long sr = 0, sc = 0;
  for (int i = 0; i < raw.n; ++i) {
    r[i] = std::llround(raw.row_marginal[i] * static_cast<double>(denom));
    sr += r[i];
  }
  for (int j = 0; j + 1 < raw.m; ++j) {
    c[j] = std::llround(raw.col_marginal[j] * static_cast<double>(denom));
    sc += c[j];
  }
  c[raw.m - 1] = sr - sc;
  for (long long v : r)
    if (v <= 0) fail(ErrKind::bad_argument, "rationalized row marginal is not positive");
  for (long long v : c)
    if (v <= 0) fail(ErrKind::bad_argument, "rationalized column marginal is not positive");
  return validate_instance(raw.cost, std::move(r), std::move(c));
}

struct SolveOpts {
  std::string input;
  std::string output;
  std::string trace;
  std::string mode = "expsinkhorn";
  double epsilon = 1e-3;
  long long max_iters = 0;
  long long rationalize = 0;
};

inline EngineResult run_mode(const std::string& mode, const TransportInstance& inst,
                             double epsilon, long long max_iters) {
  if (mode == "plain") return run_plain_sinkhorn(inst, epsilon, max_iters);
  return run_expsinkhorn(inst, epsilon, max_iters);
}

inline int cmd_solve(const SolveOpts& o, std::ostream& out, std::ostream& err) {
  TransportInstance inst;
  double scale = 1.0;
  try {
    RawInstance raw = parse_raw_instance(read_text_file(o.input));
    if (o.rationalize > 0) {
      inst = rationalize_instance(raw, o.rationalize);
      scale = static_cast<double>(o.rationalize);
    } else {
      inst = instance_from_raw(raw);
    }
  } catch (const OtError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }

  try {
    EngineResult res = run_mode(o.mode, inst, o.epsilon, o.max_iters);
    TransportPlan plan = repair_plan(res.x, inst);
    out << "cost " << format_number(plan.cost / scale) << "\n";
    out << "iterations " << res.trace.rescale_count() << "\n";
    out << "eta " << format_number(res.state.eta) << "\n";
    out << "gap_bound "
        << format_number(static_cast<double>(inst.mu) * gap_bound(res.state) / scale) << "\n";
    if (!o.output.empty()) {
      Matrix x = plan.x;
      if (scale != 1.0)
        for (double& v : x.data) v /= scale;
      write_text_file(o.output, write_plan_matrix(x));
    }
    if (!o.trace.empty()) write_text_file(o.trace, write_trace(res.trace));
  } catch (const OtError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

struct VerifyOpts {
  std::string input;
  std::string plan;
  bool self = false;
  std::string mode = "expsinkhorn";
  double epsilon = 1e-3;
  long long max_iters = 0;
};

inline int cmd_verify(const VerifyOpts& o, std::ostream& out, std::ostream& err) {
  TransportInstance inst;
  try {
    inst = parse_instance(read_text_file(o.input));
  } catch (const OtError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }
  if (o.self == !o.plan.empty()) {  // i.e. neither or both provided
    err << "error: provide exactly one of a plan file or --self\n";
    return kExitParse;
  }

  Matrix x;
  if (o.self) {
    try {
      EngineResult res = run_mode(o.mode, inst, o.epsilon, o.max_iters);
      x = repair_plan(res.x, inst).x;
    } catch (const OtError& e) {
      err << "error: " << e.what() << "\n";
      return kExitSolver;
    }
  } else {
    try {
      x = parse_plan_matrix(read_text_file(o.plan));
    } catch (const OtError& e) {
      err << "error: " << e.what() << "\n";
      return kExitParse;
    }
  }

  std::vector<std::string> findings;
  double cost = 0.0;
  if (x.rows != inst.n || x.cols != inst.m) {
    findings.push_back("plan shape " + std::to_string(x.rows) + "x" + std::to_string(x.cols) +
                       " does not match instance");
  } else {
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.m; ++j)
        if (x(i, j) < -kFeasTol) {
          findings.push_back("negative entry at " + std::to_string(i) + "," + std::to_string(j));
          i = inst.n;  // one finding of this kind is enough
          break;
        }
    std::vector<double> rs = row_sums_dense(x), cs = col_sums_dense(x);
    for (int i = 0; i < inst.n; ++i) {
      double resid = std::fabs(rs[i] - static_cast<double>(inst.row_marginal[i]));
      if (resid > kFeasTol)
        findings.push_back("row " + std::to_string(i) + " residual " + format_number(resid));
    }
    for (int j = 0; j < inst.m; ++j) {
      double resid = std::fabs(cs[j] - static_cast<double>(inst.col_marginal[j]));
      if (resid > kFeasTol)
        findings.push_back("column " + std::to_string(j) + " residual " + format_number(resid));
    }
    cost = inner(x, inst.cost);
  }

  double opt = exact_ot(inst).value;
  out << "opt " << format_number(opt) << "\n";
  out << "cost " << format_number(cost) << "\n";
  if (cost > opt + o.epsilon)
    findings.push_back("cost exceeds opt + epsilon by " +
                       format_number(cost - opt - o.epsilon));
  for (const std::string& f : findings) out << "fail " << f << "\n";
  out << "verdict " << (findings.empty() ? "pass" : "fail") << "\n";
  return findings.empty() ? kExitOk : kExitVerify;
}

struct GenOpts {
  GenConfig cfg;
  std::string output;
};

inline int cmd_gen(const GenOpts& o, std::ostream& /*out*/, std::ostream& err) {
  try {
    TransportInstance inst = gen_instance(o.cfg);
    write_text_file(o.output, write_instance(inst));
  } catch (const OtError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitOk;
}

struct BenchOpts {
  std::string eps_list = "1e-1,1e-2,1e-3";
  std::string modes = "expsinkhorn,plain";
  std::string seeds;
  int n = 4;
  int m = 4;
  long long cost_max = 10;
  long long marg_max = 5;
  long long max_iters = 0;
  std::string output;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

// Ordinary least squares for y ~ a*x + b; r2 is 1 for a perfect fit on a
// flat series (zero total variance, zero residual).
struct LineFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 1.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  size_t k = xs.size();
  double sx = 0, sy = 0;
  for (size_t i = 0; i < k; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit f;
  f.a = sxx > 0 ? sxy / sxx : 0.0;
  f.b = my - f.a * mx;
  double ss_res = 0, ss_tot = 0;
  for (size_t i = 0; i < k; ++i) {
    double e = ys[i] - (f.a * xs[i] + f.b);
    ss_res += e * e;
    ss_tot += (ys[i] - my) * (ys[i] - my);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res > 0 ? 0.0 : 1.0);
  return f;
}

inline int cmd_bench(const BenchOpts& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> mode_list = split_list(o.modes);
  std::vector<std::string> eps_tokens = split_list(o.eps_list);
  std::vector<std::string> seed_tokens = split_list(o.seeds);
  std::vector<double> eps_vals;
  std::vector<uint64_t> seed_vals;
  try {
    if (mode_list.empty() || eps_tokens.empty())
      fail(ErrKind::bad_argument, "empty sweep: need at least one mode and one epsilon");
    for (const std::string& mode : mode_list)
      if (mode != "expsinkhorn" && mode != "plain")
        fail(ErrKind::bad_argument, "unknown mode '" + mode + "'");
    for (const std::string& tok : eps_tokens) {
      double e = io_detail::parse_real(tok, 0);
      if (!(e > 0.0)) fail(ErrKind::bad_argument, "epsilon values must be positive");
      eps_vals.push_back(e);
    }
    for (const std::string& tok : seed_tokens)
      seed_vals.push_back(static_cast<uint64_t>(io_detail::parse_int(tok, 0)));
  } catch (const OtError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }

  // Instances in seed order; no seeds means the built-in sample.
  std::vector<TransportInstance> instances;
  std::vector<double> opts;
  try {
    if (seed_vals.empty()) {
      instances.push_back(sample_instance());
    } else {
      for (uint64_t s : seed_vals) {
        GenConfig cfg;
        cfg.n = o.n;
        cfg.m = o.m;
        cfg.cost_max = o.cost_max;
        cfg.marg_max = o.marg_max;
        cfg.seed = s;
        instances.push_back(gen_instance(cfg));
      }
    }
    for (const TransportInstance& inst : instances) opts.push_back(exact_ot(inst).value);
  } catch (const OtError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }

  // Sort row order: mode ascending, epsilon descending (accuracy increases
  // down the table).
  std::sort(mode_list.begin(), mode_list.end());
  std::vector<size_t> eps_order(eps_vals.size());
  for (size_t i = 0; i < eps_order.size(); ++i) eps_order[i] = i;
  std::sort(eps_order.begin(), eps_order.end(),
            [&](size_t a, size_t b) { return eps_vals[a] > eps_vals[b]; });

  std::string report = "mode eps runs ok median_iters max_gap\n";
  int ok_total = 0;
  std::vector<double> fit_x, fit_y;
  for (const std::string& mode : mode_list) {
    for (size_t oe : eps_order) {
      double eps = eps_vals[oe];
      std::vector<double> iters;
      double max_gap = 0.0;
      for (size_t k = 0; k < instances.size(); ++k) {
        try {
          EngineResult res = run_mode(mode, instances[k], eps, o.max_iters);
          TransportPlan plan = repair_plan(res.x, instances[k]);
          iters.push_back(static_cast<double>(res.trace.rescale_count()));
          max_gap = std::max(max_gap, plan.cost - opts[k]);
        } catch (const OtError&) {
          // recorded as a failed cell below
        }
      }
      int ok = static_cast<int>(iters.size());
      ok_total += ok;
      std::string med = "-", gap = "-";
      if (ok > 0) {
        std::sort(iters.begin(), iters.end());
        double median = (ok % 2) ? iters[ok / 2] : 0.5 * (iters[ok / 2 - 1] + iters[ok / 2]);
        med = format_number(median);
        gap = format_number(max_gap);
        if (mode == "expsinkhorn") {
          fit_x.push_back(std::log(1.0 / eps));
          fit_y.push_back(median);
        }
      }
      report += mode + " " + eps_tokens[oe] + " " + std::to_string(instances.size()) + " " +
                std::to_string(ok) + " " + med + " " + gap + "\n";
    }
  }
  if (fit_x.size() >= 2) {
    LineFit f = fit_line(fit_x, fit_y);
    report += "# expsinkhorn iterations ~ a*log(1/eps) + b: a=" + format_number(f.a) +
              " b=" + format_number(f.b) + " r2=" + format_number(f.r2) + "\n";
  }

  if (!o.output.empty()) {
    try {
      write_text_file(o.output, report);
    } catch (const OtError& e) {
      err << "error: " << e.what() << "\n";
      return kExitParse;
    }
  } else {
    out << report;
  }
  return ok_total > 0 ? kExitOk : kExitSolver;
}

struct MccOpts {
  std::string action;
  std::string input;
  std::string output;
  double epsilon = 0.0;
};

inline int cmd_mcc(const MccOpts& o, std::ostream& out, std::ostream& err) {
  MccInstance mcc;
  TransportInstance reduced;
  try {
    mcc = parse_mcc(read_text_file(o.input));
    reduced = mcc_to_ot(mcc);
  } catch (const OtError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }

  if (o.action == "reduce") {
    std::string text = write_instance(reduced);
    if (!o.output.empty()) {
      try {
        write_text_file(o.output, text);
      } catch (const OtError& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
      }
    } else {
      out << text;
    }
    return kExitOk;
  }

  try {
    MccSolution sol = solve_mcc(mcc, o.epsilon);
    out << "cost " << sol.cost << "\n";
    if (!o.output.empty())
      write_text_file(o.output, write_circulation(sol.circulation, mcc, sol.cost));
  } catch (const OtError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace cli_detail

// Argument-vector entry point (no argv[0]); the binary is a thin wrapper.
// Streams are injected so the whole surface is testable in-process.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Optimal transport via scaled entropic regularization with a doubling schedule"};
  app.name("otscale");
  app.require_subcommand(1);

  SolveOpts so;
  CLI::App* solve = app.add_subcommand("solve", "Solve an instance file and report the plan");
  solve->add_option("input", so.input, "instance file")->required();
  solve->add_option("--epsilon", so.epsilon, "additive cost accuracy")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve->add_option("--mode", so.mode, "solver: expsinkhorn or plain")
      ->check(CLI::IsMember({"expsinkhorn", "plain"}))
      ->capture_default_str();
  solve->add_option("--output", so.output, "write the repaired plan here");
  solve->add_option("--trace", so.trace, "write the per-step trace here");
  solve->add_option("--max-iters", so.max_iters, "step cap, 0 = automatic")
      ->check(CLI::NonNegativeNumber);
  solve->add_option("--rationalize", so.rationalize,
                    "denominator for rounding fractional marginals to integers (approximation)")
      ->check(CLI::NonNegativeNumber);

  VerifyOpts vo;
  CLI::App* verify = app.add_subcommand("verify", "Check a plan against the exact optimum");
  verify->add_option("input", vo.input, "instance file")->required();
  verify->add_option("plan", vo.plan, "plan file to check");
  verify->add_flag("--self", vo.self, "solve first, then verify the result");
  verify->add_option("--epsilon", vo.epsilon, "allowed cost excess over the optimum")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--mode", vo.mode, "solver for --self")
      ->check(CLI::IsMember({"expsinkhorn", "plain"}))
      ->capture_default_str();
  verify->add_option("--max-iters", vo.max_iters, "step cap for --self, 0 = automatic")
      ->check(CLI::NonNegativeNumber);

  GenOpts go;
  CLI::App* gen = app.add_subcommand("gen", "Generate a random integral instance");
  gen->add_option("output", go.output, "instance file to write")->required();
  gen->add_option("--n", go.cfg.n, "rows")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--m", go.cfg.m, "columns")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--cost-max", go.cfg.cost_max, "cost entries drawn from [1, cost-max]")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--marg-max", go.cfg.marg_max, "marginal entries capped here")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--seed", go.cfg.seed, "generator seed")->capture_default_str();

  BenchOpts bo;
  CLI::App* bench = app.add_subcommand("bench", "Sweep modes x accuracies and report iterations");
  bench->add_option("output", bo.output, "report file (prints to stdout if omitted)");
  bench->add_option("--eps-list", bo.eps_list, "comma-separated accuracies")
      ->capture_default_str();
  bench->add_option("--modes", bo.modes, "comma-separated solver modes")->capture_default_str();
  bench->add_option("--seeds", bo.seeds,
                    "comma-separated generator seeds; empty runs the built-in 2x2 sample");
  bench->add_option("--n", bo.n, "rows of seeded instances")->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--m", bo.m, "columns of seeded instances")->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--cost-max", bo.cost_max, "cost bound for seeded instances")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--marg-max", bo.marg_max, "marginal bound for seeded instances")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--max-iters", bo.max_iters, "per-cell step cap, 0 = automatic")
      ->check(CLI::NonNegativeNumber);

  MccOpts mo;
  CLI::App* mcc = app.add_subcommand("mcc", "Solve or reduce a min-cost circulation file");
  mcc->add_option("action", mo.action, "solve or reduce")
      ->required()
      ->check(CLI::IsMember({"solve", "reduce"}));
  mcc->add_option("input", mo.input, "circulation file (p mcc header, a-lines)")->required();
  mcc->add_option("--output", mo.output, "circulation / reduced-instance file to write");
  mcc->add_option("--epsilon", mo.epsilon, "engine accuracy, 0 = exact-rounding default")
      ->check(CLI::NonNegativeNumber);

  std::vector<const char*> argv;
  argv.push_back("otscale");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  if (solve->parsed()) return cmd_solve(so, out, err);
  if (verify->parsed()) return cmd_verify(vo, out, err);
  if (gen->parsed()) return cmd_gen(go, out, err);
  if (bench->parsed()) return cmd_bench(bo, out, err);
  return cmd_mcc(mo, out, err);
}

}  // namespace otscale
