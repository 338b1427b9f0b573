#pragma once

// Turning an approximately scaled matrix into an exactly feasible plan.
// The main path extracts a sub-plan carrying exactly half of each marginal
// (it exists whenever rows are exact and the column error is below 1/(2 mu),
// by a weighted Hall argument over the support) and doubles it. A rank-one
// rounding fallback covers inputs outside those preconditions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "otscale/core.hpp"

namespace otscale {

// Bipartite flow network in the one shape repair needs:
// source (0) -> row nodes (1..n) -> column nodes (n+1..n+m) -> sink (n+m+1).
struct FlowNetwork {
  struct Arc {
    int to = 0;
    int rev = 0;  // position of the paired reverse arc in adj[to]
    double cap = 0.0;  // residual
    double orig = 0.0;
  };

  int n = 0, m = 0;
  std::vector<std::vector<Arc>> adj;

  int source() const { return 0; }
  int sink() const { return n + m + 1; }
  int row_node(int i) const { return 1 + i; }
  int col_node(int j) const { return 1 + n + j; }

  void add_arc(int from, int to, double cap) {
    adj[from].push_back({to, static_cast<int>(adj[to].size()), cap, cap});
    adj[to].push_back({from, static_cast<int>(adj[from].size()) - 1, 0.0, 0.0});
  }
};

namespace repair_detail {

// Residuals at or below this are treated as saturated, so augmentation
// terminates instead of chasing floating-point dust.
constexpr double kFlowTol = 1e-12;

// Entries this small are not support: the Hall argument runs over the set
// of genuinely positive cells.
constexpr double kSupportTol = 1e-300;

inline bool bfs_levels(const FlowNetwork& net, std::vector<int>& level) {
  std::fill(level.begin(), level.end(), -1);
  std::vector<int> queue;
  queue.reserve(level.size());
  queue.push_back(net.source());
  level[net.source()] = 0;
  for (size_t h = 0; h < queue.size(); ++h) {
    int v = queue[h];
    for (const FlowNetwork::Arc& a : net.adj[v])
      if (a.cap > kFlowTol && level[a.to] < 0) {
        level[a.to] = level[v] + 1;
        queue.push_back(a.to);
      }
  }
  return level[net.sink()] >= 0;
}

inline double dfs_push(FlowNetwork& net, const std::vector<int>& level, std::vector<size_t>& it,
                       int v, double limit) {
  if (v == net.sink()) return limit;
  for (size_t& k = it[v]; k < net.adj[v].size(); ++k) {
    FlowNetwork::Arc& a = net.adj[v][k];
    if (a.cap <= kFlowTol || level[a.to] != level[v] + 1) continue;
    double pushed = dfs_push(net, level, it, a.to, std::min(limit, a.cap));
    if (pushed > 0.0) {
      a.cap -= pushed;
      net.adj[a.to][a.rev].cap += pushed;
      return pushed;
    }
  }
  return 0.0;
}

}  // namespace repair_detail

// Blocking-flow (Dinic) maximum flow from source to sink. Capacities are
// reals; the network depth is four, so phases are few and cheap.
inline double max_flow(FlowNetwork& net) {
  double value = 0.0;
  std::vector<int> level(net.adj.size());
  std::vector<size_t> it(net.adj.size());
  while (repair_detail::bfs_levels(net, level)) {
    std::fill(it.begin(), it.end(), 0);
    while (true) {
      double pushed = repair_detail::dfs_push(net, level, it, net.source(),
                                              std::numeric_limits<double>::infinity());
      if (pushed <= 0.0) break;
      value += pushed;
    }
  }
  return value;
}

// Full-strength repair network for a candidate plan in original units:
// source arcs carry r_i (scaled by demand_fraction), middle arcs carry the
// positive entries of x, sink arcs carry c_j.
inline FlowNetwork repair_network(const Matrix& x, const TransportInstance& inst,
                                  double demand_fraction = 1.0) {
  if (x.rows != inst.n || x.cols != inst.m)
    fail(ErrKind::dimension_mismatch, "plan shape does not match instance");
  FlowNetwork net;
  net.n = inst.n;
  net.m = inst.m;
  net.adj.assign(static_cast<size_t>(inst.n) + inst.m + 2, {});
  for (int i = 0; i < inst.n; ++i)
    net.add_arc(net.source(), net.row_node(i),
                demand_fraction * static_cast<double>(inst.row_marginal[i]));
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j)
      if (x(i, j) > repair_detail::kSupportTol)
        net.add_arc(net.row_node(i), net.col_node(j), x(i, j));
  for (int j = 0; j < inst.m; ++j)
    net.add_arc(net.col_node(j), net.sink(),
                demand_fraction * static_cast<double>(inst.col_marginal[j]));
  return net;
}

// Sub-plan carrying exactly half of each marginal: 0 <= Xhat <= x entrywise,
// Xhat 1 = r_s/2, Xhat^T 1 = c_s/2. Exists whenever x has exact row sums,
// column error at most 1/(2 mu), and mu*r_s, mu*c_s are integral; a failed
// saturation therefore signals violated preconditions. Everything here is in
// scaled units (targets in (0, 1]).
inline Matrix extract_half_feasible(const Matrix& x, const std::vector<double>& r_s,
                                    const std::vector<double>& c_s, long long mu) {
  int n = x.rows, m = x.cols;
  if (static_cast<size_t>(n) != r_s.size() || static_cast<size_t>(m) != c_s.size())
    fail(ErrKind::dimension_mismatch, "marginal lengths must match plan shape");
  FlowNetwork net;
  net.n = n;
  net.m = m;
  net.adj.assign(static_cast<size_t>(n) + m + 2, {});
  const double mu_d = static_cast<double>(mu);
  double target = 0.0;
  for (int i = 0; i < n; ++i) {
    double cap = 0.5 * mu_d * r_s[i];
    net.add_arc(net.source(), net.row_node(i), cap);
    target += cap;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (x(i, j) > repair_detail::kSupportTol)
        net.add_arc(net.row_node(i), net.col_node(j), mu_d * x(i, j));
  for (int j = 0; j < m; ++j) net.add_arc(net.col_node(j), net.sink(), 0.5 * mu_d * c_s[j]);

  double value = max_flow(net);
  if (std::fabs(value - target) > kFeasTol * std::max(1.0, target))
    fail(ErrKind::infeasible_extraction,
         "half-demand flow reached " + std::to_string(value) + " of " + std::to_string(target) +
             "; input violates the extraction preconditions");

  Matrix xhat(n, m, 0.0);
  for (int i = 0; i < n; ++i)
    for (const FlowNetwork::Arc& a : net.adj[net.row_node(i)])
      if (a.orig > 0.0 && a.to >= net.col_node(0) && a.to < net.sink())
        xhat(i, a.to - net.col_node(0)) = (a.orig - a.cap) / mu_d;
  return xhat;
}

// Exactly feasible plan from an engine result: double the half-feasible
// sub-plan. The cost exceeds the optimum by at most
// 2 * mu / eta_final * mass * log(n mu) in original units.
inline TransportPlan repair_plan(const Matrix& x, const TransportInstance& inst) {
  if (x.rows != inst.n || x.cols != inst.m)
    fail(ErrKind::dimension_mismatch, "plan shape does not match instance");
  ScaledMarginals s = scale_instance(inst);
  const double mu_d = static_cast<double>(s.mu);
  Matrix xs = x;
  for (double& v : xs.data) v /= mu_d;
  Matrix xhat = extract_half_feasible(xs, s.row_target, s.col_target, s.mu);
  Matrix y(x.rows, x.cols);
  for (size_t k = 0; k < y.data.size(); ++k) y.data[k] = 2.0 * mu_d * xhat.data[k];
  return make_plan(std::move(y), inst);
}

// Fallback rounding for inputs outside the extraction preconditions: scale
// overfull rows and columns down, then spread the remaining deficit as the
// rank-one correction err_r * err_c^T / |err_r|_1. Cost increase is at most
// max|Q| times the input's total marginal error when costs are nonnegative.
inline TransportPlan round_feasible_simple(const Matrix& x, const TransportInstance& inst) {
  if (x.rows != inst.n || x.cols != inst.m)
    fail(ErrKind::dimension_mismatch, "plan shape does not match instance");
  Matrix y = x;
  for (double& v : y.data)
    if (v < 0.0) v = 0.0;

  std::vector<double> rs = row_sums_dense(y);
  for (int i = 0; i < inst.n; ++i) {
    double target = static_cast<double>(inst.row_marginal[i]);
    if (rs[i] > target) {
      double f = target / rs[i];
      for (int j = 0; j < inst.m; ++j) y(i, j) *= f;
    }
  }
  std::vector<double> cs = col_sums_dense(y);
  for (int j = 0; j < inst.m; ++j) {
    double target = static_cast<double>(inst.col_marginal[j]);
    if (cs[j] > target) {
      double f = target / cs[j];
      for (int i = 0; i < inst.n; ++i) y(i, j) *= f;
    }
  }

  rs = row_sums_dense(y);
  cs = col_sums_dense(y);
  std::vector<double> err_r(inst.n), err_c(inst.m);
  for (int i = 0; i < inst.n; ++i)
    err_r[i] = std::max(0.0, static_cast<double>(inst.row_marginal[i]) - rs[i]);
  for (int j = 0; j < inst.m; ++j)
    err_c[j] = std::max(0.0, static_cast<double>(inst.col_marginal[j]) - cs[j]);
  double total = l1_norm(err_r);
  if (total > 1e-15)
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.m; ++j) y(i, j) += err_r[i] * err_c[j] / total;
  return make_plan(std::move(y), inst);
}

}  // namespace otscale
