// Find an exactly optimal min-cost circulation with the scaling engine:
// reduce to transportation, solve below the integer cost quantum, repair,
// round along alternating cycles, and read the flow back off the plan.
#include <cstdio>

#include "otscale/mcc.hpp"
#include "otscale/oracle.hpp"

int main() {
  using namespace otscale;

  // A negative 3-cycle worth pushing to capacity, plus a costly chord.
  MccInstance mcc;
  mcc.num_vertices = 3;
  mcc.edges = {
      {0, 1, 2, -1},
      {1, 2, 2, -1},
      {2, 0, 2, -1},
      {0, 2, 1, 4},
  };
  mcc = validate_mcc(mcc);

  MccSolution sol = solve_mcc(mcc);
  long long reference = exact_mcc(mcc).cost;
  std::printf("scaling pipeline cost %lld, exact solver cost %lld\n", sol.cost, reference);
  for (size_t e = 0; e < mcc.edges.size(); ++e)
    std::printf("edge %d -> %d: flow %lld / %lld at cost %lld\n", mcc.edges[e].tail,
                mcc.edges[e].head, sol.circulation.flow[e], mcc.edges[e].capacity,
                mcc.edges[e].cost);
  return 0;
}
