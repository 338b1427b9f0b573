#pragma once

// Fixed-regularization Sinkhorn, kept as a comparison baseline. Identical
// dual bookkeeping and trace format to the doubling engine, but eta is
// pinned to max(log n, log 2) / epsilon up front and the loop strictly
// alternates row/column rescales until the combined l1 error enters the
// 1/(2 mu) band. At small epsilon the initial exponents sit far below the
// dense floating-point range; that is expected here, the duals adapt after
// one rescale pair, so the sums run unguarded (the log-domain arithmetic is
// exact regardless).

#include <algorithm>
#include <cmath>
#include <string>

#include "otscale/core.hpp"
#include "otscale/sinkhorn.hpp"

namespace otscale {

// Generous flat cap: running into it at tiny epsilon is the phenomenon this
// baseline exists to demonstrate.
inline constexpr long long kPlainStepCap = 2'000'000;

inline double plain_eta(const TransportInstance& inst, double epsilon) {
  return std::max(std::log(static_cast<double>(inst.n)), std::log(2.0)) / epsilon;
}

inline EngineResult run_plain_sinkhorn(const TransportInstance& inst, double epsilon,
                                       long long max_steps = 0, StepObserver observer = nullptr,
                                       void* observer_arg = nullptr) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrKind::bad_argument, "epsilon must be positive and finite");

  EngineResult res;
  if (inst.cost_max == 0.0) {
    res.x = northwest_fill(inst.row_marginal, inst.col_marginal);
    ScaledMarginals s = scale_instance(inst);
    res.state.eta = 1.0;
    res.state.alpha.assign(inst.n, 0.0);
    res.state.beta.assign(inst.m, 0.0);
    res.state.row_target = std::move(s.row_target);
    res.state.col_target = std::move(s.col_target);
    res.state.mu = s.mu;
    res.trace.initial_dual = 0.0;
    return res;
  }

  ScalingState st = initial_state(inst);
  st.eta = plain_eta(inst, epsilon);
  const double thresh = 0.5 / static_cast<double>(st.mu);
  const long long cap = max_steps > 0 ? max_steps : kPlainStepCap;

  IterationTrace trace;
  trace.initial_dual = dual_value(st);
  int step = 0;

  auto record = [&](StepKind op, double l1r, double l1c) {
    TraceRecord r;
    r.step = ++step;
    r.eta = st.eta;
    r.op = op;
    r.l1_row = l1r;
    r.l1_col = l1c;
    r.dual = dual_value(st);
    r.gap_bound = 2.0 / st.eta * st.target_mass() * st.log_nmu();
    trace.records.push_back(r);
    if (step > cap)
      fail(ErrKind::iteration_cap_exceeded,
           "step cap " + std::to_string(cap) + " exhausted at eta " + std::to_string(st.eta));
    if (observer) observer(st, r, observer_arg);
  };

  bool row_turn = true;
  while (true) {
    LogSums a = sink_detail::sums_log(st, inst, true, false);
    LogSums b = sink_detail::sums_log(st, inst, false, false);
    double l1r = sink_detail::l1_error(a, st.row_target);
    double l1c = sink_detail::l1_error(b, st.col_target);
    if (l1r + l1c <= thresh) break;
    if (row_turn) {
      sink_detail::apply_rescale(st.alpha, st.alpha_tail, a, st.row_target, st.eta);
      record(StepKind::row, l1r, l1c);
    } else {
      sink_detail::apply_rescale(st.beta, st.beta_tail, b, st.col_target, st.eta);
      record(StepKind::col, l1r, l1c);
    }
    row_turn = !row_turn;
  }

  // Same finalization contract as the engine: exact rows, columns inside
  // the band (the stop test already implies the band, so the pair loop is
  // usually skipped).
  {
    auto measure = [&](LogSums& a, LogSums& b, double& l1r, double& l1c) {
      a = sink_detail::sums_log(st, inst, true, false);
      b = sink_detail::sums_log(st, inst, false, false);
      l1r = sink_detail::l1_error(a, st.row_target);
      l1c = sink_detail::l1_error(b, st.col_target);
    };
    LogSums a, b;
    double l1r, l1c;
    measure(a, b, l1r, l1c);
    sink_detail::apply_rescale(st.alpha, st.alpha_tail, a, st.row_target, st.eta);
    record(StepKind::row, l1r, l1c);
    while (true) {
      measure(a, b, l1r, l1c);
      if (l1c <= thresh) break;
      sink_detail::apply_rescale(st.beta, st.beta_tail, b, st.col_target, st.eta);
      record(StepKind::col, l1r, l1c);
      measure(a, b, l1r, l1c);
      sink_detail::apply_rescale(st.alpha, st.alpha_tail, a, st.row_target, st.eta);
      record(StepKind::row, l1r, l1c);
    }
  }

  res.x = implied_plan(st, inst);
  for (double& v : res.x.data) v *= static_cast<double>(st.mu);
  res.state = std::move(st);
  res.trace = std::move(trace);
  return res;
}

}  // namespace otscale
