#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otscale/core.hpp"

namespace otscale {

// Minimum-cost circulation instance: directed multigraph with integral
// costs and positive integral capacities. Parallel edges are allowed,
// self-loops are not (they would be invisible to any reduction).
struct MccInstance {
  struct Edge {
    int tail = 0;
    int head = 0;
    long long capacity = 0;
    long long cost = 0;
  };
  int num_vertices = 0;
  std::vector<Edge> edges;

  long long max_capacity() const {
    long long u = 0;
    for (const Edge& e : edges) u = std::max(u, e.capacity);
    return u;
  }
  long long max_cost_abs() const {
    long long c = 0;
    for (const Edge& e : edges) c = std::max(c, std::llabs(e.cost));
    return c;
  }
};

inline MccInstance validate_mcc(MccInstance mcc) {
  if (mcc.num_vertices <= 0) fail(ErrKind::bad_argument, "circulation needs at least one vertex");
  for (size_t k = 0; k < mcc.edges.size(); ++k) {
    const MccInstance::Edge& e = mcc.edges[k];
    if (e.tail < 0 || e.tail >= mcc.num_vertices || e.head < 0 || e.head >= mcc.num_vertices)
      fail(ErrKind::vertex_out_of_range, "edge " + std::to_string(k) + " endpoint out of range");
    if (e.tail == e.head) fail(ErrKind::self_loop, "edge " + std::to_string(k) + " is a self-loop");
    if (e.capacity <= 0)
      fail(ErrKind::nonpositive_capacity, "edge " + std::to_string(k) + " must have capacity >= 1");
  }
  return mcc;
}

// Per-edge integral flow, indexed like MccInstance::edges.
struct Circulation {
  std::vector<long long> flow;
};

}  // namespace otscale
