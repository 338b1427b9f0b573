#pragma once

#include <cstdint>
#include <random>

#include "otscale/core.hpp"

namespace otscale {

struct GenConfig {
  int n = 4;
  int m = 4;
  long long cost_max = 10;
  long long marg_max = 5;
  uint64_t seed = 1;
};

// Deterministic pseudo-random instance: mt19937_64 with modulo draws, so the
// byte stream depends only on the seed, never on the standard library's
// distribution internals. Costs are uniform integers in [1, cost_max];
// marginals are balanced by drawing the row side in [1, marg_max] and
// splitting the same total across columns one unit at a time.
inline TransportInstance gen_instance(const GenConfig& cfg) {
  if (cfg.n <= 0 || cfg.m <= 0 || cfg.cost_max <= 0 || cfg.marg_max <= 0)
    fail(ErrKind::bad_argument, "generator sizes must be positive");
  if (cfg.n * cfg.marg_max < cfg.m || cfg.m * cfg.marg_max < cfg.n)
    fail(ErrKind::bad_argument, "no balanced instance fits these bounds");

  std::mt19937_64 gen(cfg.seed);
  auto pick = [&](long long lo, long long hi) {
    return lo + static_cast<long long>(gen() % static_cast<uint64_t>(hi - lo + 1));
  };

  std::vector<long long> r(cfg.n), c(cfg.m);
  while (true) {
    long long total = 0;
    for (int i = 0; i < cfg.n; ++i) {
      r[i] = pick(1, cfg.marg_max);
      total += r[i];
    }
    if (total < cfg.m || total > cfg.m * cfg.marg_max) continue;
    std::fill(c.begin(), c.end(), 1LL);
    long long left = total - cfg.m;
    while (left > 0) {
      int j = static_cast<int>(pick(0, cfg.m - 1));
      if (c[j] < cfg.marg_max) {
        ++c[j];
        --left;
      }
    }
    break;
  }

  Matrix q(cfg.n, cfg.m, 0.0);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.m; ++j) q(i, j) = static_cast<double>(pick(1, cfg.cost_max));
  return validate_instance(std::move(q), std::move(r), std::move(c));
}

}  // namespace otscale
