#include "core/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "core/errors.hpp"
#include "core/io_util.hpp"

namespace binpack {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'B', 'P', 'C', 'K', 'P', 'T', '\0', '\1'};

template <class T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ParseError("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

}  // namespace

const MatrixXd* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return &m;
  }
  return nullptr;
}

std::string serialize(const Checkpoint& ckpt) {
  nlohmann::json header;
  header["version"] = Checkpoint::kVersion;
  header["meta"] = ckpt.meta;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, m] : ckpt.tensors) {
    header["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  const std::string head = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put(out, Checkpoint::kVersion);
  put(out, static_cast<std::uint64_t>(head.size()));
  out += head;
  for (const auto& [name, m] : ckpt.tensors) {
    out.append(reinterpret_cast<const char*>(m.data()),
               static_cast<std::size_t>(m.size()) * sizeof(double));
  }
  return out;
}

Checkpoint deserialize(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("not a checkpoint file (bad magic)");
  }
  std::size_t pos = sizeof kMagic;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != Checkpoint::kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto head_len = take<std::uint64_t>(bytes, pos);
  if (pos + head_len > bytes.size()) throw ParseError("checkpoint header truncated");
  const nlohmann::json header = parse_json_strict(bytes.substr(pos, head_len));
  pos += head_len;
  Checkpoint ckpt;
  try {
    ckpt.meta = header.at("meta");
    for (const auto& t : header.at("tensors")) {
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0) throw ParseError("negative tensor shape");
      const std::size_t nbytes = static_cast<std::size_t>(rows * cols) * sizeof(double);
      if (pos + nbytes > bytes.size()) throw ParseError("checkpoint data truncated");
      MatrixXd m(rows, cols);
      std::memcpy(m.data(), bytes.data() + pos, nbytes);
      pos += nbytes;
      ckpt.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint header: ") + e.what());
  }
  if (pos != bytes.size()) throw ParseError("trailing bytes after checkpoint data");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, serialize(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize(read_file(path));
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return {{"rank", cfg.rank}, {"hidden", cfg.hidden}, {"init_seed", cfg.init_seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.rank = j.at("rank").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.init_seed = j.at("init_seed").get<std::uint64_t>();
  validate(cfg);
  return cfg;
}

Checkpoint model_checkpoint(const PolicyModel& model) {
  Checkpoint ckpt;
  ckpt.meta["model"] = to_json(model.config);
  model.params.for_each([&](std::string_view name, const MatrixXd& m) {
    ckpt.tensors.emplace_back(std::string(name), m);
  });
  return ckpt;
}

PolicyModel model_from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.meta.contains("model")) throw ParseError("checkpoint has no model");
  PolicyModel model;
  try {
    model = init_model(model_config_from_json(ckpt.meta.at("model")));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model config: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("bad model config: ") + e.what());
  }
  model.params.for_each([&](std::string_view name, MatrixXd& m) {
    const MatrixXd* stored = ckpt.find(std::string(name));
    if (stored == nullptr) throw ParseError("checkpoint missing tensor " + std::string(name));
    if (stored->rows() != m.rows() || stored->cols() != m.cols()) {
      throw ParseError("tensor " + std::string(name) + " has the wrong shape");
    }
    m = *stored;
  });
  return model;
}

void save_model(const PolicyModel& model, const std::filesystem::path& path) {
  save_checkpoint(model_checkpoint(model), path);
}

PolicyModel load_model(const std::filesystem::path& path) {
  return model_from_checkpoint(load_checkpoint(path));
}

}  // namespace binpack
