#include "core/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"
#include "core/placement.hpp"
#include "core/rng.hpp"

namespace binpack {

PackingOrder random_order(const Instance& instance, std::uint64_t seed) {
  PackingOrder order(instance.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

PackingOrder bbox_seq_order(const Instance& instance) {
  PackingOrder order(instance.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return instance.objects[a].measure() > instance.objects[b].measure();
  });
  return order;
}

void validate(const BrkgaConfig& cfg) {
  if (cfg.population_size != 0 && cfg.population_size < 2) {
    throw ConfigError("population_size must be >= 2");
  }
  if (!(cfg.elite_fraction > 0.0) || !(cfg.mutant_fraction >= 0.0) ||
      !(cfg.elite_fraction + cfg.mutant_fraction < 1.0)) {
    throw ConfigError("need elite_fraction > 0 and elite + mutant fractions < 1");
  }
  if (!(cfg.elite_inherit_prob >= 0.5 && cfg.elite_inherit_prob < 1.0)) {
    throw ConfigError("elite_inherit_prob must lie in [0.5, 1)");
  }
  if (cfg.generations < 0) throw ConfigError("generations must be >= 0");
  validate(cfg.reward);
}

int effective_population(const BrkgaConfig& cfg, int n) {
  if (cfg.population_size > 0) return cfg.population_size;
  return std::max(2, std::min(10 * n, 500));
}

PackingOrder decode_keys(std::span<const double> keys) {
  PackingOrder order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return keys[a] < keys[b]; });
  return order;
}

namespace {

struct Individual {
  std::vector<double> keys;
  double fitness = 0.0;
};

}  // namespace

BrkgaResult brkga_solve(const Instance& instance, const BrkgaConfig& cfg) {
  validate(cfg);
  const int n = instance.size();
  BrkgaResult out;
  auto fitness = [&](const std::vector<double>& keys) {
    ++out.evaluations;
    return penalty(pack_sequence(instance, decode_keys(keys)), cfg.reward);
  };
  if (n <= 1) {
    out.order = PackingOrder(n, 0);
    out.best_penalty = fitness(std::vector<double>(n, 0.0));
    out.history.assign(cfg.generations + 1, out.best_penalty);
    return out;
  }

  const int pop = effective_population(cfg, n);
  const int elites = std::clamp(
      static_cast<int>(std::lround(cfg.elite_fraction * pop)), 1, pop - 1);
  const int mutants = std::clamp(
      static_cast<int>(std::lround(cfg.mutant_fraction * pop)), 0, pop - elites - 1);

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_keys = [&] {
    std::vector<double> k(n);
    for (double& v : k) v = unit(rng);
    return k;
  };

  std::vector<Individual> population(pop);
  for (auto& ind : population) {
    ind.keys = random_keys();
    ind.fitness = fitness(ind.keys);
  }
  auto rank = [](std::vector<Individual>& p) {
    std::stable_sort(p.begin(), p.end(), [](const Individual& a, const Individual& b) {
      return a.fitness < b.fitness;
    });
  };
  rank(population);
  Individual best = population.front();
  out.history.push_back(best.fitness);

  std::uniform_int_distribution<int> pick_elite(0, elites - 1);
  std::uniform_int_distribution<int> pick_other(elites, pop - 1);
  for (int g = 0; g < cfg.generations; ++g) {
    std::vector<Individual> next;
    next.reserve(pop);
    for (int i = 0; i < elites; ++i) next.push_back(population[i]);
    for (int i = 0; i < mutants; ++i) {
      Individual m{random_keys(), 0.0};
      m.fitness = fitness(m.keys);
      next.push_back(std::move(m));
    }
    while (static_cast<int>(next.size()) < pop) {
      const auto& elite = population[pick_elite(rng)];
      const auto& other = population[pick_other(rng)];
      Individual child{std::vector<double>(n), 0.0};
      for (int k = 0; k < n; ++k) {
        child.keys[k] = unit(rng) < cfg.elite_inherit_prob ? elite.keys[k]
                                                           : other.keys[k];
      }
      child.fitness = fitness(child.keys);
      next.push_back(std::move(child));
    }
    population = std::move(next);
    rank(population);
    if (population.front().fitness < best.fitness) best = population.front();
    out.history.push_back(best.fitness);
  }
  out.order = decode_keys(best.keys);
  out.best_penalty = best.fitness;
  return out;
}

}  // namespace binpack
