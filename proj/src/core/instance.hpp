#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace binpack {

// Integer extent on the unit grid. Rank 2 stores (length, height); rank 3
// stores (length, width, height).
struct Extent {
  int rank = 2;
  std::array<int, 3> v{0, 0, 0};

  Extent() = default;
  Extent(int l, int h) : rank(2), v{l, h, 0} {}
  Extent(int l, int w, int h) : rank(3), v{l, w, h} {}

  int length() const { return v[0]; }
  int width() const { return rank == 3 ? v[1] : 1; }
  int height() const { return rank == 3 ? v[2] : v[1]; }
  int operator[](int axis) const { return v[axis]; }
  // Area in 2D, volume in 3D.
  std::int64_t measure() const {
    return static_cast<std::int64_t>(length()) * width() * height();
  }
  std::vector<int> to_vector() const {
    return std::vector<int>(v.begin(), v.begin() + rank);
  }
  static Extent from_vector(const std::vector<int>& dims);

  friend bool operator==(const Extent&, const Extent&) = default;
};

struct ObjectDims : Extent {
  using Extent::Extent;
  ObjectDims(const Extent& e) : Extent(e) {}
};

struct BoxSpec : Extent {
  using Extent::Extent;
  BoxSpec(const Extent& e) : Extent(e) {}
};

// Every object dimension must be at least 1 and at most half the box along
// the same axis.
bool fits_half_box(const ObjectDims& obj, const BoxSpec& box);

struct Instance {
  std::string id;
  BoxSpec box;
  std::vector<ObjectDims> objects;

  int rank() const { return box.rank; }
  int size() const { return static_cast<int>(objects.size()); }
  friend bool operator==(const Instance&, const Instance&) = default;
};

// Throws ConfigError unless the instance is non-empty, rank-consistent and
// every object satisfies fits_half_box.
void validate(const Instance& instance);

// 0-based object indices in packing order.
using PackingOrder = std::vector<int>;

bool is_permutation_of(const PackingOrder& order, int n);

struct GenConfig {
  int rank = 2;
  int objects = 40;
  int dim_low = 1;
  int dim_high = 5;
  BoxSpec box{10, 10};
  std::uint64_t seed = 0;
};

void validate(const GenConfig& cfg);

// Default datasets: 2D n=40 dims 1..5 in 10x10; 3D n=70 dims 2..5 in
// 10x10x10.
GenConfig default_gen_config(int rank);

// Each dimension drawn uniformly from [dim_low, dim_high]. The stream is
// fully determined by cfg.seed.
Instance generate_instance(const GenConfig& cfg, std::string id = {});

// Instance k uses seed derive_seed({cfg.seed, k}) and id "<seed>-<k>".
std::vector<Instance> generate_dataset(const GenConfig& cfg, int count);

std::string to_record(const Instance& instance);
Instance parse_record(const std::string& line);

void write_dataset(const std::vector<Instance>& instances,
                   const std::filesystem::path& path);
std::vector<Instance> read_dataset(const std::filesystem::path& path);

}  // namespace binpack
