#pragma once

// Scaling engine with a doubling regularization schedule. The transport
// matrix is kept implicit through the dual state; row/column sums are
// evaluated by streaming log-sum-exp, so doubling the regularization never
// touches matrix storage (entries square implicitly).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "otscale/core.hpp"

namespace otscale {

enum class StepKind { row, col, double_eta };

inline const char* step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::row: return "row";
    case StepKind::col: return "col";
    default: return "double";
  }
}

// What a single engine step did. dual_delta is the exact increase of the
// dual objective; for rescales it is nonnegative up to roundoff whenever the
// implied mass invariant (sum X <= target mass) holds.
struct StepOutcome {
  StepKind kind = StepKind::row;
  double dual_delta = 0.0;
  double l1_row = std::numeric_limits<double>::quiet_NaN();
  double l1_col = std::numeric_limits<double>::quiet_NaN();
};

// One trace line per engine step. eta is the regularization in force when
// the step executed (a doubling line carries the eta being left behind, so
// its gap_bound column certifies that doubling event). dual is the dual
// objective after the step, in scaled units.
struct TraceRecord {
  int step = 0;
  double eta = 0.0;
  StepKind op = StepKind::row;
  double l1_row = 0.0;
  double l1_col = 0.0;
  double dual = 0.0;
  double gap_bound = 0.0;
};

struct IterationTrace {
  double initial_dual = 0.0;
  std::vector<TraceRecord> records;

  int rescale_count() const {
    int c = 0;
    for (const TraceRecord& r : records) c += r.op != StepKind::double_eta;
    return c;
  }
  int doubling_count() const {
    int c = 0;
    for (const TraceRecord& r : records) c += r.op == StepKind::double_eta;
    return c;
  }
  // Dual monotonicity across consecutive records, within kDualTol.
  bool dual_nondecreasing() const {
    double prev = initial_dual;
    for (const TraceRecord& r : records) {
      if (r.dual < prev - kDualTol) return false;
      prev = r.dual;
    }
    return true;
  }
};

// Row/column sums of the implied matrix. log_sum stays finite long after
// the plain sum underflows, and the dual updates consume only log_sum.
struct LogSums {
  std::vector<double> log_sum;
  std::vector<double> sum;
};

// Exponent of one implied entry, eta * (alpha + beta - cost), evaluated so
// the absolute error tracks one ulp of the result instead of eta * ulp of
// the dual sum. The naive product loses eta * ulp(|alpha| + |beta|), which
// at the final eta of a tight solve dwarfs the entry itself; here the
// rounding residue of the additions is recovered exactly (error-free
// transformations) and scaled in alongside the stored dual tails.
inline double implied_exponent(double eta, double a, double a_tail, double b, double b_tail,
                               double q) {
  double s1 = a + b;
  double v1 = s1 - a;
  double e1 = (a - (s1 - v1)) + (b - v1);
  double s2 = s1 - q;
  double v2 = s2 - s1;
  double e2 = (s1 - (s2 - v2)) + (-q - v2);
  double tail = (a_tail + b_tail) + (e1 + e2);
  return eta * s2 + eta * tail;
}

namespace sink_detail {

// A row whose largest exponent falls below this is numerically dead and
// signals pathological duals rather than a legitimate state.
inline constexpr double underflow_guard() {
  return -708.396418532264106 - 50.0;  // log(DBL_MIN) - 50
}

inline LogSums sums_log(const ScalingState& st, const TransportInstance& inst, bool rows,
                        bool guard = true) {
  int outer = rows ? inst.n : inst.m;
  int inner = rows ? inst.m : inst.n;
  LogSums out;
  out.log_sum.resize(outer);
  out.sum.resize(outer);
  std::vector<double> ex(inner);
  for (int i = 0; i < outer; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < inner; ++j) {
      ex[j] = rows ? implied_exponent(st.eta, st.alpha[i], st.alpha_tail[i], st.beta[j],
                                      st.beta_tail[j], inst.cost(i, j))
                   : implied_exponent(st.eta, st.alpha[j], st.alpha_tail[j], st.beta[i],
                                      st.beta_tail[i], inst.cost(j, i));
      mx = std::max(mx, ex[j]);
    }
    if (guard && mx < underflow_guard())
      fail(ErrKind::numeric_underflow,
           std::string(rows ? "row " : "column ") + std::to_string(i) +
               " of the implied matrix underflowed (max exponent " + std::to_string(mx) + ")");
    double acc = 0.0;
    for (int j = 0; j < inner; ++j) acc += std::exp(ex[j] - mx);
    out.log_sum[i] = mx + std::log(acc);
    out.sum[i] = std::exp(out.log_sum[i]);
  }
  return out;
}

inline double l1_error(const LogSums& s, const std::vector<double>& target) {
  return l1_diff(s.sum, target);
}

// alpha_i -= (log a_i - log r_i) / eta (or the beta analogue), accumulated
// compensated: the shift lands on dual[i] + tail[i] and the rounding residue
// of the update stays in tail[i], keeping the dual pair good to far below
// one ulp. Returns the exact dual increase
// - sum target_i * (log s_i - log target_i) / eta.
inline double apply_rescale(std::vector<double>& dual, std::vector<double>& tail,
                            const LogSums& s, const std::vector<double>& target, double eta) {
  double delta = 0.0;
  for (size_t i = 0; i < dual.size(); ++i) {
    double shift = (s.log_sum[i] - std::log(target[i])) / eta;
    double y = tail[i] - shift;
    double t = dual[i] + y;
    double v = t - dual[i];
    tail[i] = (dual[i] - (t - v)) + (y - v);
    dual[i] = t;
    delta -= target[i] * shift;
  }
  return delta;
}

}  // namespace sink_detail

inline LogSums row_sums_log(const ScalingState& st, const TransportInstance& inst) {
  return sink_detail::sums_log(st, inst, true);
}

inline LogSums col_sums_log(const ScalingState& st, const TransportInstance& inst) {
  return sink_detail::sums_log(st, inst, false);
}

// Dual objective of the scaled problem: sum r_i alpha_i + sum c_j beta_j.
inline double dual_value(const ScalingState& st) {
  double d = 0.0;
  for (int i = 0; i < st.n(); ++i) d += st.row_target[i] * (st.alpha[i] + st.alpha_tail[i]);
  for (int j = 0; j < st.m(); ++j) d += st.col_target[j] * (st.beta[j] + st.beta_tail[j]);
  return d;
}

// Optimality-gap certificate valid at a doubling event: at such a state,
// scaled-optimum minus dual_value is at most 2 * mass * log(n mu) / eta.
inline double gap_bound(const ScalingState& st) {
  return 2.0 / st.eta * st.target_mass() * st.log_nmu();
}

// Guaranteed dual progress of a rescale whose sums are `s` against `target`:
// eta^-1/10 * min(1/mu, |s - target|_1^2 / mass).
inline double dual_increase_lower_bound(const std::vector<double>& sums,
                                        const std::vector<double>& target, double eta,
                                        long long mu) {
  double l1 = l1_diff(sums, target);
  double mass = 0.0;
  for (double v : target) mass += v;
  return 0.1 / eta * std::min(1.0 / static_cast<double>(mu), l1 * l1 / mass);
}

// Make row sums of the implied matrix equal row_target exactly. Total
// function: at already-exact rows this is the identity with zero delta.
inline StepOutcome row_rescale(ScalingState& st, const TransportInstance& inst) {
  LogSums a = row_sums_log(st, inst);
  LogSums b = col_sums_log(st, inst);
  StepOutcome out;
  out.kind = StepKind::row;
  out.l1_row = sink_detail::l1_error(a, st.row_target);
  out.l1_col = sink_detail::l1_error(b, st.col_target);
  out.dual_delta =
      sink_detail::apply_rescale(st.alpha, st.alpha_tail, a, st.row_target, st.eta);
  return out;
}

// Make column sums equal col_target exactly. Must only run when the rows
// are already within their tolerance band: the doubling-gap analysis needs
// the most recent rescale to leave one marginal exact, and a column rescale
// issued over a large row error breaks that ordering.
inline StepOutcome col_rescale(ScalingState& st, const TransportInstance& inst) {
  LogSums a = row_sums_log(st, inst);
  double l1r = sink_detail::l1_error(a, st.row_target);
  if (l1r > 0.5 / static_cast<double>(st.mu))
    fail(ErrKind::precondition_violated,
         "col_rescale issued while the row error exceeds 1/(2 mu)");
  LogSums b = col_sums_log(st, inst);
  StepOutcome out;
  out.kind = StepKind::col;
  out.l1_row = l1r;
  out.l1_col = sink_detail::l1_error(b, st.col_target);
  out.dual_delta = sink_detail::apply_rescale(st.beta, st.beta_tail, b, st.col_target, st.eta);
  return out;
}

// Double the regularization. Duals are untouched, so every implied entry
// squares; entries are at most 1, so the implied mass can only shrink.
inline StepOutcome double_eta(ScalingState& st) {
  st.eta *= 2.0;
  StepOutcome out;
  out.kind = StepKind::double_eta;
  out.dual_delta = 0.0;
  return out;
}

// Dense materialization of the implied (scaled-units) matrix.
inline Matrix implied_plan(const ScalingState& st, const TransportInstance& inst) {
  Matrix x(inst.n, inst.m);
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j)
      x(i, j) = std::exp(implied_exponent(st.eta, st.alpha[i], st.alpha_tail[i], st.beta[j],
                                          st.beta_tail[j], inst.cost(i, j)));
  return x;
}

// Pessimistic step bound in the shape of the schedule analysis:
// K * mass^2 * log(n mu) * log(schedule length), with K = 200.
inline double worst_case_step_bound(const TransportInstance& inst, double epsilon) {
  double mass = static_cast<double>(inst.total_mass());
  double lognmu =
      std::max(std::log(static_cast<double>(inst.n) * static_cast<double>(inst.mu)), std::log(2.0));
  double sched = 4.0 * static_cast<double>(inst.mu) * mass * inst.cost_max / (10.0 * epsilon);
  return 200.0 * mass * mass * lognmu * std::log(std::max(sched, 2.0));
}

inline long long default_step_cap(const TransportInstance& inst, double epsilon) {
  double cap = 10.0 * worst_case_step_bound(inst, epsilon);
  cap = std::min(cap, 9.0e18);
  return std::max<long long>(1000, static_cast<long long>(cap));
}

struct EngineResult {
  Matrix x;  // candidate plan in original units; exact row sums, column sums within mu/2
  ScalingState state;
  IterationTrace trace;
};

// Observer invoked after every recorded step; used by invariant audits.
using StepObserver = void (*)(const ScalingState&, const TraceRecord&, void*);

// Full solve of the scaled problem to additive error epsilon (original
// units) followed by the exactness finalization described above. max_steps
// of zero picks the default cap. The caller typically follows with
// repair_plan() to obtain an exactly feasible plan.
inline EngineResult run_expsinkhorn(const TransportInstance& inst, double epsilon,
                                    long long max_steps = 0, StepObserver observer = nullptr,
                                    void* observer_arg = nullptr) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrKind::bad_argument, "epsilon must be positive and finite");

  EngineResult res;
  if (inst.cost_max == 0.0) {
    // Every feasible plan costs zero; return one directly.
    res.x = northwest_fill(inst.row_marginal, inst.col_marginal);
    ScaledMarginals s = scale_instance(inst);
    res.state.eta = 1.0;
    res.state.alpha.assign(inst.n, 0.0);
    res.state.beta.assign(inst.m, 0.0);
    res.state.alpha_tail.assign(inst.n, 0.0);
    res.state.beta_tail.assign(inst.m, 0.0);
    res.state.row_target = std::move(s.row_target);
    res.state.col_target = std::move(s.col_target);
    res.state.mu = s.mu;
    res.trace.initial_dual = 0.0;
    return res;
  }

  ScalingState st = initial_state(inst);
  const double thresh = 0.5 / static_cast<double>(st.mu);
  const double eta_end =
      4.0 * static_cast<double>(st.mu) / epsilon * st.target_mass() * st.log_nmu();
  const long long cap = max_steps > 0 ? max_steps : default_step_cap(inst, epsilon);

  IterationTrace trace;
  trace.initial_dual = dual_value(st);
  int step = 0;

  auto record = [&](StepKind op, double eta_at, double l1r, double l1c) {
    TraceRecord r;
    r.step = ++step;
    r.eta = eta_at;
    r.op = op;
    r.l1_row = l1r;
    r.l1_col = l1c;
    r.dual = dual_value(st);
    r.gap_bound = 2.0 / eta_at * st.target_mass() * st.log_nmu();
    trace.records.push_back(r);
    if (step > cap)
      fail(ErrKind::iteration_cap_exceeded,
           "step cap " + std::to_string(cap) + " exhausted at eta " + std::to_string(st.eta));
    if (observer) observer(st, r, observer_arg);
  };

  while (st.eta <= eta_end) {
    LogSums a = row_sums_log(st, inst);
    LogSums b = col_sums_log(st, inst);
    double l1r = sink_detail::l1_error(a, st.row_target);
    double l1c = sink_detail::l1_error(b, st.col_target);
    if (l1r > thresh) {
      sink_detail::apply_rescale(st.alpha, st.alpha_tail, a, st.row_target, st.eta);
      record(StepKind::row, st.eta, l1r, l1c);
    } else if (l1c > thresh) {
      sink_detail::apply_rescale(st.beta, st.beta_tail, b, st.col_target, st.eta);
      record(StepKind::col, st.eta, l1r, l1c);
    } else {
      double eta_pre = st.eta;
      st.eta *= 2.0;
      record(StepKind::double_eta, eta_pre, l1r, l1c);
    }
  }

  // Finalization at the final eta: exact rows for the repair step, and the
  // column error back inside its band in case the last doubling pushed it
  // out. Ends with a row rescale; a column rescale can move the row error
  // by at most the column error it fixed, so the loop settles.
  {
    auto measure = [&](LogSums& a, LogSums& b, double& l1r, double& l1c) {
      a = row_sums_log(st, inst);
      b = col_sums_log(st, inst);
      l1r = sink_detail::l1_error(a, st.row_target);
      l1c = sink_detail::l1_error(b, st.col_target);
    };
    LogSums a, b;
    double l1r, l1c;
    measure(a, b, l1r, l1c);
    sink_detail::apply_rescale(st.alpha, st.alpha_tail, a, st.row_target, st.eta);
    record(StepKind::row, st.eta, l1r, l1c);
    while (true) {
      measure(a, b, l1r, l1c);
      if (l1c <= thresh) break;
      sink_detail::apply_rescale(st.beta, st.beta_tail, b, st.col_target, st.eta);
      record(StepKind::col, st.eta, l1r, l1c);
      measure(a, b, l1r, l1c);
      sink_detail::apply_rescale(st.alpha, st.alpha_tail, a, st.row_target, st.eta);
      record(StepKind::row, st.eta, l1r, l1c);
    }
  }

  res.x = implied_plan(st, inst);
  for (double& v : res.x.data) v *= static_cast<double>(st.mu);
  res.state = std::move(st);
  res.trace = std::move(trace);
  return res;
}

}  // namespace otscale
