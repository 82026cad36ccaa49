#pragma once

#include <string>
#include <vector>

#include "core/placement.hpp"

namespace binpack {

struct BoxMetrics {
  double compactness = 0.0;
  double pyramid = 0.0;
  int max_height = 0;
  std::int64_t object_measure = 0;
};

struct RewardConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double scale = 5.0;
};

void validate(const RewardConfig& cfg);

// Object measure over floor extent times the tallest column. Throws
// ContractError for an empty box.
double compactness(const HeightMap& hmap, std::int64_t object_measure);
// Object measure over the sum of all height-map entries.
double pyramid(const HeightMap& hmap, std::int64_t object_measure);

// Metrics for every non-empty box of a result.
std::vector<BoxMetrics> box_metrics(const PackingResult& result);

struct ResultSummary {
  double mean_compactness = 0.0;
  double mean_pyramid = 0.0;
  int boxes = 0;
};
ResultSummary summarize(const PackingResult& result);

// scale * [alpha (1 - mean C) + beta (1 - mean P)]. Lower is better.
double penalty(double mean_compactness, double mean_pyramid,
               const RewardConfig& cfg);
double penalty(const PackingResult& result, const RewardConfig& cfg = {});
inline double reward(const PackingResult& result, const RewardConfig& cfg = {}) {
  return -penalty(result, cfg);
}

struct Evaluation {
  std::string method;
  double avg_compactness = 0.0;
  double avg_pyramid = 0.0;
  double avg_boxes = 0.0;
  double avg_latency_ms = 0.0;
  double avg_penalty = 0.0;
  int instances = 0;
};

// Per-instance means over boxes, then means over instances. latencies_ms is
// either empty or parallel to results.
Evaluation evaluate(const std::string& method,
                    const std::vector<PackingResult>& results,
                    const std::vector<double>& latencies_ms,
                    const RewardConfig& cfg = {});

// Fixed-width table with columns Methods, C, P, Num., Lat.(ms).
std::string format_table(const std::vector<Evaluation>& rows);
// {"rows":[{"method","C","P","Num.","Lat.(ms)","penalty","instances"}]}
std::string table_record(const std::vector<Evaluation>& rows);

}  // namespace binpack
