#include "core/instance.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "core/errors.hpp"
#include "core/io_util.hpp"
#include "core/rng.hpp"

namespace binpack {

using nlohmann::json;

Extent Extent::from_vector(const std::vector<int>& dims) {
  if (dims.size() == 2) return Extent(dims[0], dims[1]);
  if (dims.size() == 3) return Extent(dims[0], dims[1], dims[2]);
  throw ConfigError("extent must have 2 or 3 entries, got " +
                    std::to_string(dims.size()));
}

bool fits_half_box(const ObjectDims& obj, const BoxSpec& box) {
  if (obj.rank != box.rank) return false;
  for (int a = 0; a < obj.rank; ++a) {
    if (obj[a] < 1 || 2 * obj[a] > box[a]) return false;
  }
  return true;
}

void validate(const Instance& instance) {
  const BoxSpec& box = instance.box;
  if (box.rank != 2 && box.rank != 3) throw ConfigError("box rank must be 2 or 3");
  for (int a = 0; a < box.rank; ++a) {
    if (box[a] < 1) throw ConfigError("box dimensions must be >= 1");
  }
  if (instance.objects.empty()) throw ConfigError("instance has no objects");
  for (std::size_t i = 0; i < instance.objects.size(); ++i) {
    const ObjectDims& obj = instance.objects[i];
    if (obj.rank != box.rank) {
      throw ConfigError("object " + std::to_string(i) + " rank differs from box");
    }
    if (!fits_half_box(obj, box)) {
      throw InstanceError("object " + std::to_string(i) +
                          " violates the half-box size rule");
    }
  }
}

bool is_permutation_of(const PackingOrder& order, int n) {
  if (static_cast<int>(order.size()) != n) return false;
  std::vector<char> seen(n, 0);
  for (int i : order) {
    if (i < 0 || i >= n || seen[i]) return false;
    seen[i] = 1;
  }
  return true;
}

void validate(const GenConfig& cfg) {
  if (cfg.rank != 2 && cfg.rank != 3) throw ConfigError("rank must be 2 or 3");
  if (cfg.box.rank != cfg.rank) throw ConfigError("box rank does not match mode");
  if (cfg.objects < 1) throw ConfigError("object count must be >= 1");
  if (cfg.dim_low < 1) throw ConfigError("dim_low must be >= 1");
  if (cfg.dim_high < cfg.dim_low) throw ConfigError("dim_high < dim_low");
  for (int a = 0; a < cfg.rank; ++a) {
    if (2 * cfg.dim_high > cfg.box[a]) {
      throw ConfigError("dim_high " + std::to_string(cfg.dim_high) +
                        " exceeds half of box dimension " +
                        std::to_string(cfg.box[a]));
    }
  }
}

GenConfig default_gen_config(int rank) {
  GenConfig cfg;
  if (rank == 3) {
    cfg.rank = 3;
    cfg.objects = 70;
    cfg.dim_low = 2;
    cfg.dim_high = 5;
    cfg.box = BoxSpec(10, 10, 10);
  }
  return cfg;
}

Instance generate_instance(const GenConfig& cfg, std::string id) {
  validate(cfg);
  Rng rng(cfg.seed);
  std::uniform_int_distribution<int> dist(cfg.dim_low, cfg.dim_high);
  Instance inst;
  inst.id = id.empty() ? std::to_string(cfg.seed) + "-0" : std::move(id);
  inst.box = cfg.box;
  inst.objects.reserve(cfg.objects);
  for (int i = 0; i < cfg.objects; ++i) {
    Extent e;
    e.rank = cfg.rank;
    for (int a = 0; a < cfg.rank; ++a) e.v[a] = dist(rng);
    inst.objects.emplace_back(e);
  }
  return inst;
}

std::vector<Instance> generate_dataset(const GenConfig& cfg, int count) {
  validate(cfg);
  if (count < 0) throw ConfigError("count must be >= 0");
  std::vector<Instance> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    GenConfig c = cfg;
    c.seed = derive_seed({cfg.seed, static_cast<std::uint64_t>(k)});
    out.push_back(generate_instance(
        c, std::to_string(cfg.seed) + "-" + std::to_string(k)));
  }
  return out;
}

std::string to_record(const Instance& instance) {
  json objects = json::array();
  for (const auto& o : instance.objects) objects.push_back(o.to_vector());
  // nlohmann::json orders keys lexicographically: box, id, objects.
  json j = {{"id", instance.id},
            {"box", instance.box.to_vector()},
            {"objects", std::move(objects)}};
  return j.dump();
}

namespace {

std::vector<int> int_array(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) {
      throw ParseError(std::string(what) + " entries must be integers");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

Instance parse_record(const std::string& line) {
  json j = parse_json_strict(line);
  if (!j.is_object()) throw ParseError("record must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "id" && key != "box" && key != "objects") {
      throw ParseError("unknown field '" + key + "'");
    }
  }
  if (!j.contains("id") || !j["id"].is_string()) {
    throw ParseError("missing string field 'id'");
  }
  if (!j.contains("box")) throw ParseError("missing field 'box'");
  if (!j.contains("objects") || !j["objects"].is_array()) {
    throw ParseError("missing array field 'objects'");
  }
  Instance inst;
  inst.id = j["id"].get<std::string>();
  try {
    inst.box = Extent::from_vector(int_array(j["box"], "box"));
    for (const auto& o : j["objects"]) {
      inst.objects.emplace_back(Extent::from_vector(int_array(o, "object")));
    }
    validate(inst);
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  } catch (const InstanceError& e) {
    throw ParseError(e.what());
  }
  return inst;
}

void write_dataset(const std::vector<Instance>& instances,
                   const std::filesystem::path& path) {
  std::string out;
  for (const auto& inst : instances) {
    out += to_record(inst);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<Instance> read_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Instance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return out;
}

}  // namespace binpack
