#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/baselines.hpp"
#include "core/metrics.hpp"
#include "core/placement.hpp"
#include "core/policy.hpp"

namespace binpack {

enum class Method { kRandom, kBboxSeq, kBrkga, kDrl };

std::string method_name(Method m);        // "random", "bbox", "brkga", "drl"
std::string method_table_label(Method m); // "Random", "B-Box Seq", ...
Method parse_method(const std::string& name);

struct MethodConfig {
  Method method = Method::kBboxSeq;
  std::uint64_t seed = 0;
  BrkgaConfig brkga;
  RewardConfig reward;
  const PolicyModel* model = nullptr;  // required for kDrl
};

// Order for instance number `index` of a dataset. Seeded methods derive a
// per-instance stream from (seed, index).
PackingOrder solve_order(const Instance& instance, std::size_t index,
                         const MethodConfig& cfg);

struct MethodRun {
  std::vector<PackingResult> results;
  std::vector<double> latencies_ms;  // order generation + placement
};

MethodRun run_method(std::span<const Instance> instances, const MethodConfig& cfg);

Evaluation evaluate_method(std::span<const Instance> instances, const MethodConfig& cfg);

}  // namespace binpack
