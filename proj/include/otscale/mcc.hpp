#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "otscale/core.hpp"
#include "otscale/mcc_types.hpp"
#include "otscale/repair.hpp"
#include "otscale/sinkhorn.hpp"

namespace otscale {

// Cost assigned to vertex/edge pairs that must stay empty in the circulation
// -> transport reduction. Any integral plan touching such a cell costs at
// least max(C,1) more than the all-zero circulation, so optima avoid them.
inline long long forbidden_cost(const MccInstance& mcc) {
  long long m = static_cast<long long>(mcc.edges.size());
  return m * mcc.max_capacity() * std::max<long long>(mcc.max_cost_abs(), 1);
}

// Accuracy at which a repaired fractional plan of the reduced instance
// rounds to an exactly optimal circulation: strictly below the integer cost
// quantum 1, with margin.
inline double rounding_epsilon(const MccInstance& mcc) {
  return 1.0 / (4.0 * static_cast<double>(forbidden_cost(mcc)));
}

// Circulation -> transportation. Rows are vertices with supply equal to the
// incoming capacity; columns are edges with demand equal to their capacity.
// An edge's column can be filled from its tail (paying the edge cost, i.e.
// routing flow) or from its head (free, i.e. leaving residual capacity);
// every other row is blocked by forbidden_cost.
inline TransportInstance mcc_to_ot(const MccInstance& mcc_in) {
  MccInstance mcc = validate_mcc(mcc_in);
  int n = mcc.num_vertices;
  int m = static_cast<int>(mcc.edges.size());
  if (m == 0) fail(ErrKind::isolated_vertex, "circulation has no edges");

  std::vector<long long> r(n, 0), c(m, 0);
  for (int e = 0; e < m; ++e) {
    r[mcc.edges[e].head] += mcc.edges[e].capacity;
    c[e] = mcc.edges[e].capacity;
  }
  for (int u = 0; u < n; ++u)
    if (r[u] == 0)
      fail(ErrKind::isolated_vertex,
           "vertex " + std::to_string(u) + " has no incoming capacity");

  double big = static_cast<double>(forbidden_cost(mcc));
  Matrix q(n, m, 0.0);
  for (int e = 0; e < m; ++e)
    for (int u = 0; u < n; ++u) {
      if (u == mcc.edges[e].tail)
        q(u, e) = static_cast<double>(mcc.edges[e].cost);
      else if (u == mcc.edges[e].head)
        q(u, e) = 0.0;
      else
        q(u, e) = big;
    }
  return validate_instance(std::move(q), std::move(r), std::move(c));
}

// Reads the circulation back out of a plan for mcc_to_ot's instance: flow on
// edge e is whatever its column takes from the tail row. The plan must be
// integral; flows must respect capacities and conserve at every vertex.
inline Circulation circulation_from_plan(const Matrix& x, const MccInstance& mcc) {
  int m = static_cast<int>(mcc.edges.size());
  if (x.rows != mcc.num_vertices || x.cols != m)
    fail(ErrKind::dimension_mismatch, "plan shape does not match circulation instance");
  Circulation f;
  f.flow.resize(m);
  for (int e = 0; e < m; ++e) {
    double v = x(mcc.edges[e].tail, e);
    long long k = std::llround(v);
    if (std::fabs(v - static_cast<double>(k)) > kFeasTol)
      fail(ErrKind::bad_argument, "plan entry for edge " + std::to_string(e) + " is not integral");
    if (k < 0 || k > mcc.edges[e].capacity)
      fail(ErrKind::plan_infeasible, "flow on edge " + std::to_string(e) + " is out of bounds");
    f.flow[e] = k;
  }
  std::vector<long long> net(mcc.num_vertices, 0);
  for (int e = 0; e < m; ++e) {
    net[mcc.edges[e].tail] += f.flow[e];
    net[mcc.edges[e].head] -= f.flow[e];
  }
  for (int u = 0; u < mcc.num_vertices; ++u)
    if (net[u] != 0)
      fail(ErrKind::conservation_violation,
           "net flow at vertex " + std::to_string(u) + " is " + std::to_string(net[u]));
  return f;
}

// Inverse of circulation_from_plan on feasible circulations: tail rows carry
// the flow, head rows the residual capacity. Cost is preserved exactly since
// head cells are free.
inline Matrix plan_from_circulation(const Circulation& f, const MccInstance& mcc) {
  int m = static_cast<int>(mcc.edges.size());
  if (f.flow.size() != static_cast<size_t>(m))
    fail(ErrKind::dimension_mismatch, "flow length does not match edge count");
  Matrix x(mcc.num_vertices, m, 0.0);
  for (int e = 0; e < m; ++e) {
    x(mcc.edges[e].tail, e) = static_cast<double>(f.flow[e]);
    x(mcc.edges[e].head, e) = static_cast<double>(mcc.edges[e].capacity - f.flow[e]);
  }
  return x;
}

// Transportation -> circulation, relative to the northwest-corner plan X0.
// Vertices are the rows and columns of the instance; flow re-routes mass:
// a forward arc row->column adds to a cell (paying its cost), the reverse
// arc removes what X0 put there (earning the cost back inverted). Optimal
// circulation cost equals OPT minus the cost of X0.
struct OtReduction {
  MccInstance mcc;
  Matrix x0;
  // arc k moves mass at cell (cell_row[k], cell_col[k]); adds[k] says in
  // which direction.
  std::vector<int> cell_row;
  std::vector<int> cell_col;
  std::vector<char> adds;

  Matrix recover(const Circulation& f) const {
    if (f.flow.size() != mcc.edges.size())
      fail(ErrKind::dimension_mismatch, "flow length does not match edge count");
    Matrix x = x0;
    for (size_t k = 0; k < f.flow.size(); ++k) {
      double d = static_cast<double>(f.flow[k]);
      x(cell_row[k], cell_col[k]) += adds[k] ? d : -d;
    }
    return x;
  }
};

inline OtReduction ot_to_mcc(const TransportInstance& inst) {
  for (double v : inst.cost.data)
    if (v != std::nearbyint(v))
      fail(ErrKind::bad_argument, "reduction requires integral costs");

  OtReduction red;
  red.x0 = northwest_fill(inst.row_marginal, inst.col_marginal);
  red.mcc.num_vertices = inst.n + inst.m;
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j) {
      long long filled = std::llround(red.x0(i, j));
      long long room =
          std::min(inst.row_marginal[i], inst.col_marginal[j]) - filled;
      long long q = std::llround(inst.cost(i, j));
      if (room > 0) {
        red.mcc.edges.push_back({i, inst.n + j, room, q});
        red.cell_row.push_back(i);
        red.cell_col.push_back(j);
        red.adds.push_back(1);
      }
      if (filled > 0) {
        red.mcc.edges.push_back({inst.n + j, i, filled, -q});
        red.cell_row.push_back(i);
        red.cell_col.push_back(j);
        red.adds.push_back(0);
      }
    }
  return red;
}

// Rounds a (near-)feasible fractional plan to an integral one without
// increasing its cost. Fractional entries of a plan with integral marginals
// always close an alternating row/column cycle; shifting mass around the
// cheap direction of that cycle until some entry hits an integer strictly
// shrinks the fractional support.
inline TransportPlan cycle_cancel_round(Matrix x, const TransportInstance& inst) {
  if (x.rows != inst.n || x.cols != inst.m)
    fail(ErrKind::plan_infeasible, "plan shape does not match instance");
  constexpr double kFracTol = 1e-9;
  auto is_frac = [](double v) { return std::fabs(v - std::nearbyint(v)) > kFracTol; };

  for (int pass = 0; ; ++pass) {
    if (pass > inst.n * inst.m)
      fail(ErrKind::iteration_cap_exceeded, "cycle rounding failed to terminate");

    std::vector<std::vector<int>> row_adj(inst.n), col_adj(inst.m);
    int frac_cells = 0;
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.m; ++j)
        if (is_frac(x(i, j))) {
          row_adj[i].push_back(j);
          col_adj[j].push_back(i);
          ++frac_cells;
        }
    if (frac_cells == 0) break;

    // Integral marginals force every row/column touching a fractional cell
    // to touch at least two, so walking the support graph while never
    // leaving by the arrival cell must revisit a node: that closes a cycle.
    int start = -1;
    for (int i = 0; i < inst.n && start < 0; ++i)
      if (!row_adj[i].empty()) start = i;
    if (start < 0 || row_adj[start].size() < 2)
      fail(ErrKind::plan_infeasible, "fractional support does not close a cycle");

    // Node ids: rows are [0, n), columns are [n, n+m).
    std::vector<int> seen_at(inst.n + inst.m, -1);
    std::vector<std::pair<int, int>> arrive;
    seen_at[start] = 0;
    arrive.push_back({-1, -1});
    int cur = start;
    std::pair<int, int> via{-1, -1};
    std::vector<std::pair<int, int>> cycle;
    while (cycle.empty()) {
      int i, j;
      if (cur < inst.n) {
        i = cur;
        j = row_adj[i][0];
        if (std::pair<int, int>{i, j} == via) {
          if (row_adj[i].size() < 2)
            fail(ErrKind::plan_infeasible, "fractional support does not close a cycle");
          j = row_adj[i][1];
        }
      } else {
        j = cur - inst.n;
        i = col_adj[j][0];
        if (std::pair<int, int>{i, j} == via) {
          if (col_adj[j].size() < 2)
            fail(ErrKind::plan_infeasible, "fractional support does not close a cycle");
          i = col_adj[j][1];
        }
      }
      int next = (cur < inst.n) ? inst.n + j : i;
      via = {i, j};
      if (seen_at[next] >= 0) {
        for (size_t k = seen_at[next] + 1; k < arrive.size(); ++k)
          cycle.push_back(arrive[k]);
        cycle.push_back(via);
        // Orientation below assumes the cycle starts at `next`.
        cur = next;
        break;
      }
      seen_at[next] = static_cast<int>(arrive.size());
      arrive.push_back(via);
      cur = next;
    }

    // Alternate +/- around the cycle, starting row->column positive at the
    // entry node, and push in whichever direction does not raise the cost.
    double rate = 0.0;
    int head_sign = (cur < inst.n) ? 1 : -1;
    for (size_t k = 0; k < cycle.size(); ++k) {
      int orient = (k % 2 == 0) ? head_sign : -head_sign;
      rate += orient * inst.cost(cycle[k].first, cycle[k].second);
    }
    int push = (rate <= 0.0) ? 1 : -1;
    double delta = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < cycle.size(); ++k) {
      int orient = (k % 2 == 0) ? head_sign : -head_sign;
      double v = x(cycle[k].first, cycle[k].second);
      double room = (push * orient > 0) ? std::ceil(v) - v : v - std::floor(v);
      delta = std::min(delta, room);
    }
    for (size_t k = 0; k < cycle.size(); ++k) {
      int orient = (k % 2 == 0) ? head_sign : -head_sign;
      x(cycle[k].first, cycle[k].second) += push * orient * delta;
    }
  }

  for (double& v : x.data) {
    double r = std::nearbyint(v);
    if (std::fabs(v - r) > kFracTol)
      fail(ErrKind::plan_infeasible, "rounding left a fractional entry");
    v = (r == 0.0) ? 0.0 : r;
  }
  return make_plan(std::move(x), inst);
}

struct MccSolution {
  long long cost = 0;
  Circulation circulation;
};

// End-to-end circulation solver: reduce to transportation, run the scaling
// engine to accuracy below the integer cost quantum, repair to exact
// feasibility, round integral, read the flow back. The result is exactly
// optimal: the rounded cost is an integer within (OPT, OPT + 1).
inline MccSolution solve_mcc(const MccInstance& mcc, double epsilon = 0.0) {
  TransportInstance ot = mcc_to_ot(mcc);
  if (epsilon <= 0.0) epsilon = rounding_epsilon(mcc);
  EngineResult res = run_expsinkhorn(ot, epsilon);
  TransportPlan feasible = repair_plan(res.x, ot);
  TransportPlan integral = cycle_cancel_round(std::move(feasible.x), ot);
  MccSolution sol;
  sol.circulation = circulation_from_plan(integral.x, mcc);
  for (size_t e = 0; e < mcc.edges.size(); ++e)
    sol.cost += mcc.edges[e].cost * sol.circulation.flow[e];
  return sol;
}

}  // namespace otscale
