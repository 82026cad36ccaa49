#include "core/metrics.hpp"

#include <cstdio>

#include <json.hpp>

#include "core/errors.hpp"

namespace binpack {

void validate(const RewardConfig& cfg) {
  if (!(cfg.alpha >= 0.0) || !(cfg.beta >= 0.0)) {
    throw ConfigError("alpha and beta must be non-negative");
  }
  if (!(cfg.scale >= 0.0)) throw ConfigError("scale must be non-negative");
}

double compactness(const HeightMap& hmap, std::int64_t object_measure) {
  const std::int64_t region =
      static_cast<std::int64_t>(hmap.length()) * hmap.width() * hmap.max_height();
  if (object_measure <= 0 || region <= 0) {
    throw ContractError("compactness of an empty box is undefined");
  }
  return static_cast<double>(object_measure) / static_cast<double>(region);
}

double pyramid(const HeightMap& hmap, std::int64_t object_measure) {
  const std::int64_t region = hmap.sum();
  if (object_measure <= 0 || region <= 0) {
    throw ContractError("pyramid of an empty box is undefined");
  }
  return static_cast<double>(object_measure) / static_cast<double>(region);
}

std::vector<BoxMetrics> box_metrics(const PackingResult& result) {
  const auto measures = result.box_measures();
  std::vector<BoxMetrics> out;
  for (std::size_t b = 0; b < result.height_maps.size(); ++b) {
    if (measures[b] == 0) continue;
    const HeightMap& h = result.height_maps[b];
    out.push_back({compactness(h, measures[b]), pyramid(h, measures[b]),
                   h.max_height(), measures[b]});
  }
  return out;
}

ResultSummary summarize(const PackingResult& result) {
  const auto boxes = box_metrics(result);
  if (boxes.empty()) throw ContractError("result has no non-empty box");
  ResultSummary s;
  for (const auto& b : boxes) {
    s.mean_compactness += b.compactness;
    s.mean_pyramid += b.pyramid;
  }
  s.boxes = static_cast<int>(boxes.size());
  s.mean_compactness /= s.boxes;
  s.mean_pyramid /= s.boxes;
  return s;
}

double penalty(double mean_compactness, double mean_pyramid,
               const RewardConfig& cfg) {
  return cfg.scale * (cfg.alpha * (1.0 - mean_compactness) +
                      cfg.beta * (1.0 - mean_pyramid));
}

double penalty(const PackingResult& result, const RewardConfig& cfg) {
  const ResultSummary s = summarize(result);
  return penalty(s.mean_compactness, s.mean_pyramid, cfg);
}

Evaluation evaluate(const std::string& method,
                    const std::vector<PackingResult>& results,
                    const std::vector<double>& latencies_ms,
                    const RewardConfig& cfg) {
  if (results.empty()) throw ContractError("evaluate needs at least one result");
  if (!latencies_ms.empty() && latencies_ms.size() != results.size()) {
    throw ContractError("latencies must parallel results");
  }
  Evaluation e;
  e.method = method;
  e.instances = static_cast<int>(results.size());
  for (const auto& r : results) {
    const ResultSummary s = summarize(r);
    e.avg_compactness += s.mean_compactness;
    e.avg_pyramid += s.mean_pyramid;
    e.avg_boxes += s.boxes;
    e.avg_penalty += penalty(s.mean_compactness, s.mean_pyramid, cfg);
  }
  for (double ms : latencies_ms) e.avg_latency_ms += ms;
  const double n = static_cast<double>(results.size());
  e.avg_compactness /= n;
  e.avg_pyramid /= n;
  e.avg_boxes /= n;
  e.avg_penalty /= n;
  e.avg_latency_ms /= n;
  return e;
}

std::string format_table(const std::vector<Evaluation>& rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %7s %7s %7s %12s\n", "Methods", "C", "P",
                "Num.", "Lat.(ms)");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %7.3f %7.3f %7.3f %12.4g\n",
                  r.method.c_str(), r.avg_compactness, r.avg_pyramid,
                  r.avg_boxes, r.avg_latency_ms);
    out += buf;
  }
  return out;
}

std::string table_record(const std::vector<Evaluation>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"method", r.method},
                   {"C", r.avg_compactness},
                   {"P", r.avg_pyramid},
                   {"Num.", r.avg_boxes},
                   {"Lat.(ms)", r.avg_latency_ms},
                   {"penalty", r.avg_penalty},
                   {"instances", r.instances}});
  }
  return nlohmann::json{{"rows", std::move(arr)}}.dump();
}

}  // namespace binpack
