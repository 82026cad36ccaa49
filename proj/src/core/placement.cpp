#include "core/placement.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "core/errors.hpp"
#include "core/io_util.hpp"

namespace binpack {

using nlohmann::json;

HeightMap::HeightMap(const BoxSpec& box)
    : box_(box), cells_(static_cast<std::size_t>(box.length()) * box.width(), 0) {}

HeightMap HeightMap::from_columns(const BoxSpec& box, const std::vector<int>& h) {
  if (box.rank != 2 || static_cast<int>(h.size()) != box.length()) {
    throw ConfigError("column heights must match a 2D box length");
  }
  HeightMap m(box);
  for (int x = 0; x < box.length(); ++x) {
    if (h[x] < 0 || h[x] > box.height()) throw ConfigError("height out of range");
    m.at(x) = h[x];
  }
  return m;
}

int HeightMap::max_height() const {
  return cells_.empty() ? 0 : *std::max_element(cells_.begin(), cells_.end());
}

std::int64_t HeightMap::sum() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::int64_t{0});
}

namespace {

// Resting height and supported cell count of a footprint at (x, y).
struct Rest {
  int z;
  int supported;
};

Rest rest_at(const HeightMap& hmap, int x, int y, int l, int w) {
  int z = 0;
  for (int i = x; i < x + l; ++i) {
    for (int j = y; j < y + w; ++j) z = std::max(z, hmap.at(i, j));
  }
  int supported = 0;
  for (int i = x; i < x + l; ++i) {
    for (int j = y; j < y + w; ++j) supported += hmap.at(i, j) == z;
  }
  return {z, supported};
}

bool admits(const HeightMap& hmap, const ObjectDims& obj, Rest r) {
  const int area = obj.length() * obj.width();
  return r.z + obj.height() <= hmap.box().height() && 2 * r.supported > area;
}

}  // namespace

std::vector<Position> allowable_positions(const HeightMap& hmap,
                                          const ObjectDims& obj) {
  std::vector<Position> out;
  if (obj.rank != hmap.box().rank) return out;
  const int l = obj.length();
  const int w = obj.width();
  for (int x = 0; x + l <= hmap.length(); ++x) {
    for (int y = 0; y + w <= hmap.width(); ++y) {
      Rest r = rest_at(hmap, x, y, l, w);
      if (admits(hmap, obj, r)) out.push_back({x, y, r.z});
    }
  }
  return out;
}

std::optional<Position> select_target(const std::vector<Position>& positions) {
  if (positions.empty()) return std::nullopt;
  auto key = [](const Position& p) { return std::tuple(p.z, p.y, p.x); };
  return *std::min_element(
      positions.begin(), positions.end(),
      [&](const Position& a, const Position& b) { return key(a) < key(b); });
}

void place(HeightMap& hmap, const ObjectDims& obj, const Position& pos) {
  const int l = obj.length();
  const int w = obj.width();
  if (obj.rank != hmap.box().rank || pos.x < 0 || pos.y < 0 ||
      pos.x + l > hmap.length() || pos.y + w > hmap.width()) {
    throw ContractError("placement outside the box floor");
  }
  Rest r = rest_at(hmap, pos.x, pos.y, l, w);
  if (r.z != pos.z || !admits(hmap, obj, r)) {
    throw ContractError("position is not allowable for this object");
  }
  const int top = pos.z + obj.height();
  for (int i = pos.x; i < pos.x + l; ++i) {
    for (int j = pos.y; j < pos.y + w; ++j) hmap.at(i, j) = top;
  }
}

std::vector<std::int64_t> PackingResult::box_measures() const {
  std::vector<std::int64_t> out(height_maps.size(), 0);
  for (const auto& p : placements) out[p.box_index] += p.dims.measure();
  return out;
}

PackingResult pack_sequence(const Instance& instance, const PackingOrder& order) {
  if (!is_permutation_of(order, instance.size())) {
    throw ContractError("packing order is not a permutation of the objects");
  }
  PackingResult result;
  result.id = instance.id;
  result.box = instance.box;
  result.placements.reserve(order.size());
  for (int idx : order) {
    const ObjectDims& obj = instance.objects[idx];
    if (!fits_half_box(obj, instance.box)) {
      throw InstanceError("object " + std::to_string(idx) +
                          " violates the half-box size rule");
    }
    std::optional<Position> target;
    int b = 0;
    for (; b < result.boxes_used(); ++b) {
      target = select_target(allowable_positions(result.height_maps[b], obj));
      if (target) break;
    }
    if (!target) {
      result.height_maps.emplace_back(instance.box);
      target = select_target(allowable_positions(result.height_maps[b], obj));
      if (!target) {
        throw InstanceError("object " + std::to_string(idx) +
                            " does not fit an empty box");
      }
    }
    place(result.height_maps[b], obj, *target);
    result.placements.push_back({idx, b, *target, obj});
  }
  return result;
}

std::string to_record(const PackingResult& result) {
  const bool is3d = result.box.rank == 3;
  json placements = json::array();
  for (const auto& p : result.placements) {
    json pos = is3d ? json::array({p.position.x, p.position.y, p.position.z})
                    : json::array({p.position.x, p.position.z});
    placements.push_back({{"index", p.object_index},
                          {"box", p.box_index},
                          {"position", std::move(pos)},
                          {"dims", p.dims.to_vector()}});
  }
  json j = {{"id", result.id},
            {"box", result.box.to_vector()},
            {"boxes_used", result.boxes_used()},
            {"placements", std::move(placements)}};
  return j.dump();
}

PackingResult parse_result_record(const std::string& line) {
  json j = parse_json_strict(line);
  try {
    PackingResult r;
    r.id = j.at("id").get<std::string>();
    r.box = Extent::from_vector(j.at("box").get<std::vector<int>>());
    const int boxes = j.at("boxes_used").get<int>();
    if (boxes < 1) throw ParseError("boxes_used must be >= 1");
    const auto& placements = j.at("placements");
    if (!placements.is_array() || placements.empty()) {
      throw ParseError("placements must be a non-empty array");
    }
    for (int b = 0; b < boxes; ++b) r.height_maps.emplace_back(r.box);
    for (const auto& pj : placements) {
      Placement p;
      p.object_index = pj.at("index").get<int>();
      p.box_index = pj.at("box").get<int>();
      p.dims = Extent::from_vector(pj.at("dims").get<std::vector<int>>());
      auto pos = pj.at("position").get<std::vector<int>>();
      if (static_cast<int>(pos.size()) != r.box.rank) {
        throw ParseError("position rank does not match box");
      }
      p.position = r.box.rank == 3 ? Position{pos[0], pos[1], pos[2]}
                                   : Position{pos[0], 0, pos[1]};
      if (p.box_index < 0 || p.box_index >= boxes) {
        throw ParseError("placement box index out of range");
      }
      place(r.height_maps[p.box_index], p.dims, p.position);
      r.placements.push_back(p);
    }
    std::vector<char> used(boxes, 0);
    for (const auto& p : r.placements) used[p.box_index] = 1;
    if (std::find(used.begin(), used.end(), 0) != used.end()) {
      throw ParseError("boxes_used counts an empty box");
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  } catch (const ContractError& e) {
    throw ParseError(std::string("invalid placement: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

void write_results(const std::vector<PackingResult>& results,
                   const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : results) {
    out += to_record(r);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<PackingResult> read_results(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<PackingResult> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_result_record(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return out;
}

}  // namespace binpack
