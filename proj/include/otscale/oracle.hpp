#pragma once

// Exact reference solvers used to certify the iterative pipeline in tests.
// Deliberately classical and independent: successive shortest paths for the
// transport problem, negative-cycle canceling for circulations. Intended for
// desk-scale inputs (n*m <= ~1e4), not performance.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "otscale/core.hpp"
#include "otscale/mcc_types.hpp"

namespace otscale {

struct ExactOtResult {
  double value = 0.0;
  Matrix plan;
};

namespace oracle_detail {

struct Arc {
  int to = 0;
  int rev = 0;
  long long cap = 0;
  double cost = 0.0;
};

struct Net {
  std::vector<std::vector<Arc>> adj;
  explicit Net(int v) : adj(v) {}
  void add(int u, int v, long long cap, double cost) {
    adj[u].push_back({v, static_cast<int>(adj[v].size()), cap, cost});
    adj[v].push_back({u, static_cast<int>(adj[u].size()) - 1, 0, -cost});
  }
};

// Shortest path by Bellman-Ford (queue form). Handles negative arc costs;
// the residual network of a min-cost flow never contains a negative cycle.
inline bool shortest_path(const Net& net, int s, int t, std::vector<double>& dist,
                          std::vector<std::pair<int, int>>& pred) {
  int v = static_cast<int>(net.adj.size());
  dist.assign(v, std::numeric_limits<double>::infinity());
  pred.assign(v, {-1, -1});
  std::vector<char> inq(v, 0);
  std::deque<int> q;
  dist[s] = 0.0;
  q.push_back(s);
  inq[s] = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    inq[u] = 0;
    for (size_t k = 0; k < net.adj[u].size(); ++k) {
      const Arc& a = net.adj[u][k];
      if (a.cap <= 0) continue;
      double nd = dist[u] + a.cost;
      if (nd < dist[a.to] - 1e-15) {
        dist[a.to] = nd;
        pred[a.to] = {u, static_cast<int>(k)};
        if (!inq[a.to]) {
          q.push_back(a.to);
          inq[a.to] = 1;
        }
      }
    }
  }
  return std::isfinite(dist[t]);
}

}  // namespace oracle_detail

// Exact optimum of a validated transport instance. The returned plan is
// integral (flows on an integral-capacity network stay integral).
inline ExactOtResult exact_ot(const TransportInstance& inst) {
  using namespace oracle_detail;
  int n = inst.n, m = inst.m;
  int source = n + m, sink = n + m + 1;
  Net net(n + m + 2);
  for (int i = 0; i < n; ++i) net.add(source, i, inst.row_marginal[i], 0.0);
  for (int j = 0; j < m; ++j) net.add(n + j, sink, inst.col_marginal[j], 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) net.add(i, n + j, std::min(inst.row_marginal[i], inst.col_marginal[j]), inst.cost(i, j));

  long long need = inst.total_mass();
  long long sent = 0;
  std::vector<double> dist;
  std::vector<std::pair<int, int>> pred;
  while (sent < need) {
    if (!shortest_path(net, source, sink, dist, pred))
      fail(ErrKind::plan_infeasible, "transport oracle: demand not routable");
    long long push = need - sent;
    for (int v = sink; v != source;) {
      auto [u, k] = pred[v];
      push = std::min(push, net.adj[u][k].cap);
      v = u;
    }
    for (int v = sink; v != source;) {
      auto [u, k] = pred[v];
      Arc& a = net.adj[u][k];
      a.cap -= push;
      net.adj[a.to][a.rev].cap += push;
      v = u;
    }
    sent += push;
  }

  ExactOtResult res;
  res.plan = Matrix(n, m, 0.0);
  for (int i = 0; i < n; ++i) {
    // Arcs leaving a row node toward a column node are exactly the middle
    // arcs; flow = residual capacity of the paired reverse arc.
    for (const Arc& a : net.adj[i]) {
      if (a.to >= n && a.to < n + m) {
        long long f = net.adj[a.to][a.rev].cap;
        res.plan(i, a.to - n) += static_cast<double>(f);
      }
    }
  }
  res.value = inner(res.plan, inst.cost);
  return res;
}

struct ExactMccResult {
  long long cost = 0;
  Circulation circulation;
};

// Exact minimum-cost circulation: start from the zero flow and cancel
// negative residual cycles until none remain. All arithmetic is integral.
inline ExactMccResult exact_mcc(const MccInstance& mcc) {
  int v = mcc.num_vertices;
  int e = static_cast<int>(mcc.edges.size());
  // Residual arc 2k is edge k forward, 2k+1 is its reverse.
  std::vector<long long> res_cap(2 * e), arc_cost(2 * e);
  std::vector<int> arc_from(2 * e), arc_to(2 * e);
  for (int k = 0; k < e; ++k) {
    const MccInstance::Edge& ed = mcc.edges[k];
    arc_from[2 * k] = ed.tail;
    arc_to[2 * k] = ed.head;
    res_cap[2 * k] = ed.capacity;
    arc_cost[2 * k] = ed.cost;
    arc_from[2 * k + 1] = ed.head;
    arc_to[2 * k + 1] = ed.tail;
    res_cap[2 * k + 1] = 0;
    arc_cost[2 * k + 1] = -ed.cost;
  }

  std::vector<long long> dist(v);
  std::vector<int> pred_arc(v);
  while (true) {
    // Bellman-Ford from an implicit super-source (all distances start 0),
    // so any reachable negative cycle is detected.
    std::fill(dist.begin(), dist.end(), 0LL);
    std::fill(pred_arc.begin(), pred_arc.end(), -1);
    int touched = -1;
    for (int pass = 0; pass < v; ++pass) {
      touched = -1;
      for (int a = 0; a < 2 * e; ++a) {
        if (res_cap[a] <= 0) continue;
        if (dist[arc_from[a]] + arc_cost[a] < dist[arc_to[a]]) {
          dist[arc_to[a]] = dist[arc_from[a]] + arc_cost[a];
          pred_arc[arc_to[a]] = a;
          touched = arc_to[a];
        }
      }
      if (touched < 0) break;
    }
    if (touched < 0) break;  // no negative cycle remains

    // Walk predecessors v steps to land on the cycle, then collect it.
    int x = touched;
    for (int step = 0; step < v; ++step) x = arc_from[pred_arc[x]];
    std::vector<int> cycle;
    for (int cur = x;;) {
      int a = pred_arc[cur];
      cycle.push_back(a);
      cur = arc_from[a];
      if (cur == x) break;
    }
    long long gain = 0;
    long long delta = std::numeric_limits<long long>::max();
    for (int a : cycle) {
      gain += arc_cost[a];
      delta = std::min(delta, res_cap[a]);
    }
    if (gain >= 0)
      fail(ErrKind::precondition_violated, "circulation oracle: extracted cycle not improving");
    for (int a : cycle) {
      res_cap[a] -= delta;
      res_cap[a ^ 1] += delta;
    }
  }

  ExactMccResult out;
  out.circulation.flow.resize(e);
  out.cost = 0;
  for (int k = 0; k < e; ++k) {
    out.circulation.flow[k] = res_cap[2 * k + 1];
    out.cost += mcc.edges[k].cost * out.circulation.flow[k];
  }
  return out;
}

}  // namespace otscale
