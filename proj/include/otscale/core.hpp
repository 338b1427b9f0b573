#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "otscale/dense.hpp"

namespace otscale {

// Centralized numeric tolerances. Feasibility checks (marginal residuals,
// capacity slack) use kFeasTol; dual-slack / monotonicity checks use kDualTol.
constexpr double kFeasTol = 1e-9;
constexpr double kDualTol = 1e-12;

enum class ErrKind {
  dimension_mismatch,
  unbalanced_marginals,
  nonpositive_marginal,
  nonfinite_cost,
  degenerate_cost,
  numeric_underflow,
  precondition_violated,
  iteration_cap_exceeded,
  infeasible_extraction,
  plan_infeasible,
  conservation_violation,
  isolated_vertex,
  self_loop,
  nonpositive_capacity,
  vertex_out_of_range,
  bad_argument,
  parse_error,
};

class OtError : public std::runtime_error {
 public:
  OtError(ErrKind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

[[noreturn]] inline void fail(ErrKind k, const std::string& what) { throw OtError(k, what); }

// A balanced transportation problem: minimize <X, cost> over nonnegative X
// with row sums row_marginal and column sums col_marginal. Marginals are
// positive integers; costs are arbitrary finite reals.
struct TransportInstance {
  int n = 0;
  int m = 0;
  Matrix cost;
  std::vector<long long> row_marginal;
  std::vector<long long> col_marginal;

  double cost_max = 0.0;   // max |cost_ij|
  long long mu = 0;        // max marginal entry

  long long total_mass() const {
    long long t = 0;
    for (long long v : row_marginal) t += v;
    return t;
  }
};

inline TransportInstance validate_instance(Matrix cost, std::vector<long long> row_marginal,
                                           std::vector<long long> col_marginal) {
  if (cost.rows <= 0 || cost.cols <= 0)
    fail(ErrKind::dimension_mismatch, "cost matrix must be nonempty");
  if (static_cast<size_t>(cost.rows) != row_marginal.size() ||
      static_cast<size_t>(cost.cols) != col_marginal.size())
    fail(ErrKind::dimension_mismatch, "marginal lengths must match cost shape");
  for (long long v : row_marginal)
    if (v <= 0) fail(ErrKind::nonpositive_marginal, "row marginals must be positive integers");
  for (long long v : col_marginal)
    if (v <= 0) fail(ErrKind::nonpositive_marginal, "column marginals must be positive integers");
  long long sr = 0, sc = 0;
  for (long long v : row_marginal) sr += v;
  for (long long v : col_marginal) sc += v;
  if (sr != sc) fail(ErrKind::unbalanced_marginals, "marginal sums differ");
  for (double v : cost.data)
    if (!std::isfinite(v)) fail(ErrKind::nonfinite_cost, "cost entries must be finite");

  TransportInstance inst;
  inst.n = cost.rows;
  inst.m = cost.cols;
  inst.cost = std::move(cost);
  inst.row_marginal = std::move(row_marginal);
  inst.col_marginal = std::move(col_marginal);
  inst.cost_max = max_abs(inst.cost);
  long long mu = 1;
  for (long long v : inst.row_marginal) mu = std::max(mu, v);
  for (long long v : inst.col_marginal) mu = std::max(mu, v);
  inst.mu = mu;
  return inst;
}

// Marginals divided by mu = max entry, so every target lies in (0, 1].
struct ScaledMarginals {
  std::vector<double> row_target;
  std::vector<double> col_target;
  long long mu = 1;
};

inline ScaledMarginals scale_instance(const TransportInstance& inst) {
  ScaledMarginals s;
  s.mu = inst.mu;
  s.row_target.resize(inst.n);
  s.col_target.resize(inst.m);
  for (int i = 0; i < inst.n; ++i)
    s.row_target[i] = static_cast<double>(inst.row_marginal[i]) / static_cast<double>(s.mu);
  for (int j = 0; j < inst.m; ++j)
    s.col_target[j] = static_cast<double>(inst.col_marginal[j]) / static_cast<double>(s.mu);
  return s;
}

// Dual state of the scaled problem. The transport matrix is never stored:
// it is implied entrywise by X_ij = exp(eta * (alpha_i + beta_j - cost_ij)),
// with alpha_i = alpha[i] + alpha_tail[i] and likewise for beta. The tails
// carry the rounding residue of dual updates: eta grows to ~1/epsilon, so a
// dual quantized at one ulp alone would smear every implied entry by a
// factor exp(eta * ulp), visible at tight accuracy. Plain value type; copy
// freely. The tail vectors must match alpha/beta in length (zeros are
// always valid).
struct ScalingState {
  double eta = 0.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> alpha_tail;
  std::vector<double> beta_tail;
  std::vector<double> row_target;
  std::vector<double> col_target;
  long long mu = 1;

  int n() const { return static_cast<int>(alpha.size()); }
  int m() const { return static_cast<int>(beta.size()); }
  double target_mass() const {
    double t = 0.0;
    for (double v : row_target) t += v;
    return t;
  }
  // log(n * mu); the entropy scale of the regularization schedule.
  double log_nmu() const { return std::log(static_cast<double>(n()) * static_cast<double>(mu)); }
};

// Initial dual state: eta_0 = 10 * log(n*mu) / max|cost| and duals pinned at
// -max|cost|, so every implied entry is at most (n*mu)^-10. The log term is
// floored at log 2 so a 1x1 unit instance still gets a positive eta_0.
inline ScalingState initial_state(const TransportInstance& inst) {
  if (inst.cost_max == 0.0)
    fail(ErrKind::degenerate_cost, "all-zero cost matrix: every feasible plan is optimal");
  ScaledMarginals s = scale_instance(inst);
  ScalingState st;
  st.mu = s.mu;
  st.row_target = std::move(s.row_target);
  st.col_target = std::move(s.col_target);
  double lognmu = std::max(std::log(static_cast<double>(inst.n) * static_cast<double>(st.mu)),
                           std::log(2.0));
  st.eta = 10.0 / inst.cost_max * lognmu;
  st.alpha.assign(inst.n, -inst.cost_max);
  st.beta.assign(inst.m, -inst.cost_max);
  st.alpha_tail.assign(inst.n, 0.0);
  st.beta_tail.assign(inst.m, 0.0);
  return st;
}

// Greedy northwest-corner fill: integral feasible plan for integral marginals.
inline Matrix northwest_fill(const std::vector<long long>& row_marginal,
                             const std::vector<long long>& col_marginal) {
  int n = static_cast<int>(row_marginal.size());
  int m = static_cast<int>(col_marginal.size());
  Matrix x(n, m, 0.0);
  std::vector<long long> rr = row_marginal, cc = col_marginal;
  int i = 0, j = 0;
  while (i < n && j < m) {
    long long t = std::min(rr[i], cc[j]);
    x(i, j) = static_cast<double>(t);
    rr[i] -= t;
    cc[j] -= t;
    if (rr[i] == 0) ++i;
    if (cc[j] == 0) ++j;
  }
  return x;
}

// Feasible transport plan (marginals met within kFeasTol per entry).
struct TransportPlan {
  Matrix x;
  double cost = 0.0;
};

inline TransportPlan make_plan(Matrix x, const TransportInstance& inst) {
  if (x.rows != inst.n || x.cols != inst.m)
    fail(ErrKind::plan_infeasible, "plan shape does not match instance");
  for (double& v : x.data) {
    if (v < -kFeasTol) fail(ErrKind::plan_infeasible, "negative plan entry");
    if (v < 0.0) v = 0.0;
  }
  std::vector<double> rs = row_sums_dense(x), cs = col_sums_dense(x);
  for (int i = 0; i < inst.n; ++i)
    if (std::fabs(rs[i] - static_cast<double>(inst.row_marginal[i])) > kFeasTol)
      fail(ErrKind::plan_infeasible, "row marginal violated at row " + std::to_string(i));
  for (int j = 0; j < inst.m; ++j)
    if (std::fabs(cs[j] - static_cast<double>(inst.col_marginal[j])) > kFeasTol)
      fail(ErrKind::plan_infeasible, "column marginal violated at column " + std::to_string(j));
  TransportPlan p;
  p.cost = inner(x, inst.cost);
  p.x = std::move(x);
  return p;
}

}  // namespace otscale
