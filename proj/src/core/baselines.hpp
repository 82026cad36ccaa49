#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/instance.hpp"
#include "core/metrics.hpp"

namespace binpack {

// Uniform permutation; deterministic per seed.
PackingOrder random_order(const Instance& instance, std::uint64_t seed);

// Descending area (2D) / volume (3D); ties by ascending index.
PackingOrder bbox_seq_order(const Instance& instance);

struct BrkgaConfig {
  int population_size = 0;  // 0 selects min(10 n, 500), at least 2
  double elite_fraction = 0.2;
  double mutant_fraction = 0.15;
  double elite_inherit_prob = 0.7;
  int generations = 100;
  std::uint64_t seed = 0;
  RewardConfig reward;
};

void validate(const BrkgaConfig& cfg);
int effective_population(const BrkgaConfig& cfg, int n);

// Ascending key order, ties broken by index.
PackingOrder decode_keys(std::span<const double> keys);

struct BrkgaResult {
  PackingOrder order;
  double best_penalty = 0.0;
  // Best-so-far penalty after the initial population and after each
  // generation (generations + 1 entries).
  std::vector<double> history;
  std::int64_t evaluations = 0;
};

BrkgaResult brkga_solve(const Instance& instance, const BrkgaConfig& cfg);
inline PackingOrder brkga_order(const Instance& instance, const BrkgaConfig& cfg) {
  return brkga_solve(instance, cfg).order;
}

}  // namespace binpack
