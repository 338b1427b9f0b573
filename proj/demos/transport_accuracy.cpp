// Solve one random transportation instance at a sweep of accuracies and
// watch the iteration count grow only logarithmically while the realized
// cost gap collapses. Usage: transport_accuracy [seed]
#include <cstdio>
#include <cstdlib>

#include "otscale/gen.hpp"
#include "otscale/oracle.hpp"
#include "otscale/repair.hpp"
#include "otscale/sinkhorn.hpp"

int main(int argc, char** argv) {
  using namespace otscale;

  GenConfig cfg;
  cfg.n = 6;
  cfg.m = 5;
  cfg.cost_max = 10;
  cfg.marg_max = 8;
  cfg.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  TransportInstance inst = gen_instance(cfg);
  double opt = exact_ot(inst).value;
  std::printf("%dx%d instance, seed %llu, exact optimum %.17g\n", inst.n, inst.m,
              static_cast<unsigned long long>(cfg.seed), opt);

  std::printf("%10s %12s %12s %14s\n", "eps", "iterations", "final eta", "cost - opt");
  for (double eps = 1e-1; eps >= 1e-6 / 2; eps /= 10.0) {
    EngineResult res = run_expsinkhorn(inst, eps);
    TransportPlan plan = repair_plan(res.x, inst);
    std::printf("%10.0e %12d %12.4g %14.3e\n", eps, res.trace.rescale_count(), res.state.eta,
                plan.cost - opt);
  }
  return 0;
}
