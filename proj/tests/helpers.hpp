#pragma once

// Shared fixtures and reference implementations for the test suite. The
// reference pieces here (brute-force enumeration, naive augmenting paths)
// are written against the problem statement, not against the library code,
// so they can serve as independent cross-checks.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "otscale/core.hpp"
#include "otscale/mcc_types.hpp"

namespace testutil {

using otscale::Matrix;
using otscale::MccInstance;
using otscale::TransportInstance;

// 2x2 workhorse: optimum 4 attained only by [[1,1],[0,1]].
inline TransportInstance instance_a() {
  Matrix q(2, 2);
  q(0, 0) = 1;
  q(0, 1) = 2;
  q(1, 0) = 3;
  q(1, 1) = 1;
  return otscale::validate_instance(q, {2, 1}, {1, 2});
}

// mt19937_64 with hand-rolled bounded draws keeps generated test data
// identical across standard libraries.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(uint64_t seed) : gen(seed) {}
  long long pick(long long lo, long long hi) {  // inclusive range
    return lo + static_cast<long long>(gen() % static_cast<uint64_t>(hi - lo + 1));
  }
  double unit() { return (gen() >> 11) * 0x1.0p-53; }
};

// Random balanced integral instance with every marginal entry <= marg_max.
// Requires n * marg_max >= m and m * marg_max >= n, otherwise no balanced
// assignment exists and the resampling below would never finish.
inline TransportInstance random_instance(Rng& rng, int n, int m, long long cost_lo,
                                         long long cost_hi, long long marg_max) {
  if (n * marg_max < m || m * marg_max < n)
    otscale::fail(otscale::ErrKind::bad_argument, "random_instance: incompatible sizes");
  std::vector<long long> r(n), c(m);
  while (true) {
    long long s = 0;
    for (int i = 0; i < n; ++i) {
      r[i] = rng.pick(1, marg_max);
      s += r[i];
    }
    if (s < m || s > m * marg_max) continue;
    std::fill(c.begin(), c.end(), 1LL);
    long long left = s - m;
    while (left > 0) {
      int j = static_cast<int>(rng.pick(0, m - 1));
      if (c[j] < marg_max) {
        ++c[j];
        --left;
      }
    }
    break;
  }
  Matrix q(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) q(i, j) = static_cast<double>(rng.pick(cost_lo, cost_hi));
  return otscale::validate_instance(q, r, c);
}

// Random circulation instance. A directed cycle through all vertices keeps
// every in-degree positive (so reductions stay well-defined) and makes
// negative-cost cycles likely when cost_lo < 0.
inline MccInstance random_mcc(Rng& rng, int max_vertices, long long cap_max, long long cost_lo,
                              long long cost_hi) {
  MccInstance mcc;
  mcc.num_vertices = static_cast<int>(rng.pick(2, max_vertices));
  int v = mcc.num_vertices;
  for (int i = 0; i < v; ++i)
    mcc.edges.push_back({i, (i + 1) % v, rng.pick(1, cap_max), rng.pick(cost_lo, cost_hi)});
  int extra = static_cast<int>(rng.pick(0, 2 * v));
  for (int k = 0; k < extra; ++k) {
    int a = static_cast<int>(rng.pick(0, v - 1));
    int b = static_cast<int>(rng.pick(0, v - 1));
    if (a == b) continue;
    mcc.edges.push_back({a, b, rng.pick(1, cap_max), rng.pick(cost_lo, cost_hi)});
  }
  return otscale::validate_mcc(mcc);
}

// Minimum transport cost by exhaustive enumeration of integral plans.
// Only usable when the total mass is tiny.
inline double brute_force_ot(const TransportInstance& inst) {
  std::vector<long long> col_left(inst.col_marginal);
  double best = std::numeric_limits<double>::infinity();
  double qmin = 0.0;  // most negative unit cost, for an admissible bound
  for (double v : inst.cost.data) qmin = std::min(qmin, v);

  // Fill cell (i, j) with every admissible amount, row by row. `left` is the
  // total mass not yet placed; cost + left * qmin lower-bounds any completion.
  auto rec = [&](auto&& self, int i, int j, long long row_left, long long left,
                 double cost) -> void {
    if (cost + static_cast<double>(left) * qmin >= best) return;
    if (i == inst.n) {
      best = cost;
      return;
    }
    if (j == inst.m) {
      if (row_left == 0)
        self(self, i + 1, 0, i + 1 < inst.n ? inst.row_marginal[i + 1] : 0, left, cost);
      return;
    }
    if (j == inst.m - 1) {
      if (col_left[j] >= row_left) {
        col_left[j] -= row_left;
        self(self, i, j + 1, 0, left - row_left,
             cost + static_cast<double>(row_left) * inst.cost(i, j));
        col_left[j] += row_left;
      }
      return;
    }
    long long hi = std::min(row_left, col_left[j]);
    for (long long t = 0; t <= hi; ++t) {
      col_left[j] -= t;
      self(self, i, j + 1, row_left - t, left - t,
           cost + static_cast<double>(t) * inst.cost(i, j));
      col_left[j] += t;
    }
  };
  rec(rec, 0, 0, inst.row_marginal[0], inst.total_mass(), 0.0);
  return best;
}

// Plain BFS augmenting-path max flow on a bipartite source/rows/cols/sink
// network with real capacities; the independent check for the repair step.
struct NaiveBipartiteFlow {
  int n, m;
  std::vector<double> source_cap, sink_cap;
  Matrix mid_cap;  // 0 means no arc

  double run(double tol = 1e-12) {
    int src = 0, snk = n + m + 1;
    int v = n + m + 2;
    std::vector<std::vector<double>> cap(v, std::vector<double>(v, 0.0));
    for (int i = 0; i < n; ++i) cap[src][1 + i] = source_cap[i];
    for (int j = 0; j < m; ++j) cap[1 + n + j][snk] = sink_cap[j];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) cap[1 + i][1 + n + j] = mid_cap(i, j);
    double total = 0.0;
    while (true) {
      std::vector<int> pred(v, -1);
      pred[src] = src;
      std::queue<int> q;
      q.push(src);
      while (!q.empty() && pred[snk] < 0) {
        int u = q.front();
        q.pop();
        for (int w = 0; w < v; ++w)
          if (pred[w] < 0 && cap[u][w] > tol) {
            pred[w] = u;
            q.push(w);
          }
      }
      if (pred[snk] < 0) break;
      double push = std::numeric_limits<double>::infinity();
      for (int w = snk; w != src; w = pred[w]) push = std::min(push, cap[pred[w]][w]);
      for (int w = snk; w != src; w = pred[w]) {
        cap[pred[w]][w] -= push;
        cap[w][pred[w]] += push;
      }
      total += push;
    }
    return total;
  }
};

}  // namespace testutil
