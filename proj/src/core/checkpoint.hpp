#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/policy.hpp"

namespace binpack {

// Binary container: 8-byte magic "BPCKPT\0\1", u32 version, u64 header
// length, UTF-8 JSON header {"version","meta","tensors":[{name,rows,cols}]},
// then every tensor as little-endian IEEE-754 doubles in column-major order.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, MatrixXd>> tensors;

  const MatrixXd* find(const std::string& name) const;
};

std::string serialize(const Checkpoint& ckpt);
Checkpoint deserialize(const std::string& bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

// meta.model holds the ModelConfig; tensors are named per
// PolicyParams::for_each.
Checkpoint model_checkpoint(const PolicyModel& model);
// Accepts any checkpoint carrying a model (e.g. a training checkpoint).
PolicyModel model_from_checkpoint(const Checkpoint& ckpt);

void save_model(const PolicyModel& model, const std::filesystem::path& path);
PolicyModel load_model(const std::filesystem::path& path);

}  // namespace binpack
