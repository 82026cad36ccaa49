#include "core/runner.hpp"

#include <chrono>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace binpack {

std::string method_name(Method m) {
  switch (m) {
    case Method::kRandom: return "random";
    case Method::kBboxSeq: return "bbox";
    case Method::kBrkga: return "brkga";
    case Method::kDrl: return "drl";
  }
  return "?";
}

std::string method_table_label(Method m) {
  switch (m) {
    case Method::kRandom: return "Random";
    case Method::kBboxSeq: return "B-Box Seq";
    case Method::kBrkga: return "BRKGA";
    case Method::kDrl: return "DRL";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "random") return Method::kRandom;
  if (name == "bbox") return Method::kBboxSeq;
  if (name == "brkga") return Method::kBrkga;
  if (name == "drl") return Method::kDrl;
  throw ConfigError("unknown method '" + name + "'");
}

PackingOrder solve_order(const Instance& instance, std::size_t index,
                         const MethodConfig& cfg) {
  const auto idx = static_cast<std::uint64_t>(index);
  switch (cfg.method) {
    case Method::kRandom:
      return random_order(instance, derive_seed({cfg.seed, idx}));
    case Method::kBboxSeq:
      return bbox_seq_order(instance);
    case Method::kBrkga: {
      BrkgaConfig b = cfg.brkga;
      b.reward = cfg.reward;
      b.seed = derive_seed({cfg.brkga.seed, idx});
      return brkga_order(instance, b);
    }
    case Method::kDrl:
      if (cfg.model == nullptr) throw ConfigError("method drl needs a model");
      return decode(instance, cfg.model->params.actor, DecodeMode::kGreedy, nullptr).order;
  }
  throw ConfigError("unknown method");
}

MethodRun run_method(std::span<const Instance> instances, const MethodConfig& cfg) {
  MethodRun run;
  run.results.reserve(instances.size());
  run.latencies_ms.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    PackingResult r = pack_sequence(instances[i], solve_order(instances[i], i, cfg));
    const auto stop = std::chrono::steady_clock::now();
    run.latencies_ms.push_back(
        std::chrono::duration<double, std::milli>(stop - start).count());
    run.results.push_back(std::move(r));
  }
  return run;
}

Evaluation evaluate_method(std::span<const Instance> instances, const MethodConfig& cfg) {
  const MethodRun run = run_method(instances, cfg);
  return evaluate(method_table_label(cfg.method), run.results, run.latencies_ms,
                  cfg.reward);
}

}  // namespace binpack
