#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/instance.hpp"

namespace binpack {

// Minimal-coordinate corner of a placed object. y is always 0 in 2D.
struct Position {
  int x = 0;
  int y = 0;
  int z = 0;
  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;
};

// Column heights over a box floor, stored x-major: cell (x, y) lives at
// x * width + y. In 2D the floor has width 1.
class HeightMap {
 public:
  HeightMap() = default;
  explicit HeightMap(const BoxSpec& box);

  const BoxSpec& box() const { return box_; }
  int length() const { return box_.length(); }
  int width() const { return box_.width(); }
  int at(int x, int y = 0) const { return cells_[x * width() + y]; }
  int& at(int x, int y = 0) { return cells_[x * width() + y]; }
  const std::vector<int>& cells() const { return cells_; }
  int max_height() const;
  std::int64_t sum() const;

  // 2D convenience: heights along x.
  static HeightMap from_columns(const BoxSpec& box, const std::vector<int>& h);

  friend bool operator==(const HeightMap&, const HeightMap&) = default;

 private:
  BoxSpec box_;
  std::vector<int> cells_;
};

// Every footprint position within the floor where the object rests on the
// footprint maximum, stays under the lid and has strictly more than half of
// its bottom cells supported at that height.
std::vector<Position> allowable_positions(const HeightMap& hmap,
                                          const ObjectDims& obj);

// Lexicographic minimum by (z, y, x); (z, x) in 2D since y is 0.
std::optional<Position> select_target(const std::vector<Position>& positions);

// Sets the footprint to pos.z + height. Throws ContractError unless pos is
// allowable for obj.
void place(HeightMap& hmap, const ObjectDims& obj, const Position& pos);

struct Placement {
  int object_index = 0;
  int box_index = 0;
  Position position;
  ObjectDims dims;
  friend bool operator==(const Placement&, const Placement&) = default;
};

struct PackingResult {
  std::string id;
  BoxSpec box;
  std::vector<Placement> placements;  // packing order
  std::vector<HeightMap> height_maps;  // one per opened box

  int boxes_used() const { return static_cast<int>(height_maps.size()); }
  // Sum of object areas (2D) or volumes (3D) placed in each box.
  std::vector<std::int64_t> box_measures() const;
  friend bool operator==(const PackingResult&, const PackingResult&) = default;
};

// First-fit over open boxes in opening order; a box is opened only when no
// open box admits the object.
PackingResult pack_sequence(const Instance& instance, const PackingOrder& order);

// One JSON line: {"box","boxes_used","id","placements":[{"box","dims",
// "index","position"}]}. Positions are [x,z] in 2D, [x,y,z] in 3D.
std::string to_record(const PackingResult& result);
// Rebuilds height maps by replaying placements; validates each placement.
PackingResult parse_result_record(const std::string& line);

void write_results(const std::vector<PackingResult>& results,
                   const std::filesystem::path& path);
std::vector<PackingResult> read_results(const std::filesystem::path& path);

}  // namespace binpack
