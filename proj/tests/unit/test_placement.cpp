#include <doctest.h>

#include <random>

#include "core/baselines.hpp"
#include "core/errors.hpp"
#include "core/placement.hpp"
#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"

using namespace binpack;

namespace {

std::vector<Position> positions_2d(std::initializer_list<std::pair<int, int>> xz) {
  std::vector<Position> out;
  for (auto [x, z] : xz) out.push_back({x, 0, z});
  return out;
}

std::vector<Position> oracle_positions(const HeightMap& m, const ObjectDims& o) {
  std::vector<Position> out;
  for (const auto& p : oracle::allowable(m.length(), m.width(), m.box().height(), m.cells(),
                                         o.length(), o.width(), o.height())) {
    out.push_back({p.x, p.y, p.z});
  }
  return out;
}

}  // namespace

TEST_CASE("allowable positions on the reconstructed selection map") {
  const HeightMap m = HeightMap::from_columns(BoxSpec(5, 10), {5, 5, 3, 2, 2});
  const auto got = allowable_positions(m, ObjectDims(2, 1));
  CHECK(got == positions_2d({{0, 5}, {3, 2}}));
  CHECK(select_target(got) == Position{3, 0, 2});
}

TEST_CASE("allowable positions on the [5 5 2 3 3] height map") {
  const HeightMap m = HeightMap::from_columns(BoxSpec(5, 10), {5, 5, 2, 3, 3});
  const ObjectDims obj(2, 1);
  const auto oracle = oracle_positions(m, obj);
  CHECK(oracle == positions_2d({{0, 5}, {3, 3}}));
  CHECK(allowable_positions(m, obj) == oracle);
}

TEST_CASE("exactly half support is rejected") {
  const HeightMap m = HeightMap::from_columns(BoxSpec(4, 10), {3, 0, 0, 0});
  const auto got = allowable_positions(m, ObjectDims(2, 1));
  // x=0 rests at 3 on one of two cells.
  CHECK(got == positions_2d({{1, 0}, {2, 0}}));
}

TEST_CASE("flat floor admits every in-bounds x at z=0") {
  const HeightMap m(BoxSpec(10, 10));
  const auto got = allowable_positions(m, ObjectDims(4, 5));
  REQUIRE(got.size() == 7);
  for (int x = 0; x < 7; ++x) CHECK(got[x] == Position{x, 0, 0});
  const HeightMap m3(BoxSpec(10, 10, 10));
  CHECK(allowable_positions(m3, ObjectDims(3, 4, 5)).size() == 8 * 7);
}

TEST_CASE("lid excludes positions that would poke out") {
  const HeightMap m = HeightMap::from_columns(BoxSpec(4, 6), {4, 4, 0, 0});
  CHECK(allowable_positions(m, ObjectDims(2, 3)) == positions_2d({{2, 0}}));
}

TEST_CASE("select_target orders by z, then y, then x") {
  CHECK(select_target({}) == std::nullopt);
  CHECK(select_target(positions_2d({{1, 0}, {4, 0}})) == Position{1, 0, 0});
  CHECK(select_target({{2, 0, 3}, {0, 1, 3}, {4, 4, 2}}) == Position{4, 4, 2});
  CHECK(select_target({{2, 0, 3}, {0, 1, 3}}) == Position{2, 0, 3});
  CHECK(select_target({{3, 1, 3}, {0, 1, 3}}) == Position{0, 1, 3});
}

TEST_CASE("place updates exactly the footprint") {
  HeightMap m(BoxSpec(5, 10));
  place(m, ObjectDims(2, 3), {0, 0, 0});
  CHECK(m.cells() == std::vector<int>{3, 3, 0, 0, 0});

  HeightMap f = HeightMap::from_columns(BoxSpec(5, 10), {5, 5, 3, 2, 2});
  place(f, ObjectDims(2, 1), {3, 0, 2});
  CHECK(f.cells() == std::vector<int>{5, 5, 3, 3, 3});

  HeightMap m3(BoxSpec(10, 10, 10));
  place(m3, ObjectDims(10, 10, 4), {0, 0, 0});
  CHECK(m3.cells() == std::vector<int>(100, 4));
}

TEST_CASE("place rejects positions that are not allowable") {
  HeightMap m = HeightMap::from_columns(BoxSpec(5, 10), {5, 5, 3, 2, 2});
  CHECK_THROWS_AS(place(m, ObjectDims(2, 1), {1, 0, 5}), ContractError);  // half support
  CHECK_THROWS_AS(place(m, ObjectDims(2, 1), {3, 0, 0}), ContractError);  // wrong z
  CHECK_THROWS_AS(place(m, ObjectDims(2, 1), {4, 0, 2}), ContractError);  // out of floor
  CHECK_THROWS_AS(place(m, ObjectDims(2, 6), {0, 0, 5}), ContractError);  // above lid
}

TEST_CASE("perfect tiling fills two boxes") {
  Instance inst;
  inst.box = BoxSpec(10, 10);
  for (int i = 0; i < 8; ++i) inst.objects.emplace_back(5, 5);
  const PackingResult r = pack_sequence(inst, {7, 6, 5, 4, 3, 2, 1, 0});
  CHECK(r.boxes_used() == 2);
  CHECK(r.height_maps[0].cells() == std::vector<int>(10, 10));
  CHECK(r.height_maps[1].cells() == std::vector<int>(10, 10));
  CHECK(r.box_measures() == std::vector<std::int64_t>{100, 100});
  CHECK(oracle::check_packing(inst, r).empty());
}

TEST_CASE("single object lands at the origin") {
  Instance inst;
  inst.box = BoxSpec(10, 10);
  inst.objects = {ObjectDims(3, 3)};
  const PackingResult r = pack_sequence(inst, {0});
  CHECK(r.boxes_used() == 1);
  CHECK(r.placements[0].position == Position{0, 0, 0});
}

TEST_CASE("first-fit reuses earlier boxes") {
  Instance inst;
  inst.box = BoxSpec(4, 4);
  inst.objects = {ObjectDims(2, 2), ObjectDims(2, 2), ObjectDims(2, 2), ObjectDims(2, 2),
                  ObjectDims(2, 2), ObjectDims(1, 1)};
  const PackingResult r = pack_sequence(inst, {0, 1, 2, 3, 4, 5});
  CHECK(r.boxes_used() == 2);
  CHECK(r.placements[4].box_index == 1);
  // Box 0 is full; the 1x1 goes to box 1 beside the 2x2.
  CHECK(r.placements[5].box_index == 1);
  CHECK(r.placements[5].position == Position{2, 0, 0});
}

TEST_CASE("oversized objects and bad orders are rejected") {
  Instance inst;
  inst.box = BoxSpec(10, 10);
  inst.objects = {ObjectDims(10, 5)};
  CHECK_THROWS_AS(pack_sequence(inst, {0}), InstanceError);
  inst.objects = {ObjectDims(2, 2), ObjectDims(2, 2)};
  CHECK_THROWS_AS(pack_sequence(inst, {0, 0}), ContractError);
}

TEST_CASE("allowable positions match the voxel oracle on random small maps") {
  std::mt19937_64 rng(7);
  int cases = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const bool is3d = trial % 2 == 1;
    std::uniform_int_distribution<int> side(2, is3d ? 4 : 6);
    const BoxSpec box = is3d ? BoxSpec(side(rng), side(rng), side(rng) + 2)
                             : BoxSpec(side(rng), side(rng) + 2);
    GenConfig g;
    g.rank = box.rank;
    g.box = box;
    g.dim_low = 1;
    const int shortest = is3d ? std::min({box.length(), box.width(), box.height()})
                              : std::min(box.length(), box.height());
    g.dim_high = std::max(1, shortest / 2);
    g.objects = 12;
    g.seed = rng();
    const Instance inst = generate_instance(g);
    std::vector<HeightMap> maps;
    for (int idx : random_order(inst, rng())) {
      const ObjectDims& obj = inst.objects[idx];
      bool placed = false;
      for (auto& m : maps) {
        const auto got = allowable_positions(m, obj);
        REQUIRE(got == oracle_positions(m, obj));
        ++cases;
        if (!got.empty()) {
          place(m, obj, *select_target(got));
          placed = true;
          break;
        }
      }
      if (!placed) {
        maps.emplace_back(box);
        place(maps.back(), obj, *select_target(allowable_positions(maps.back(), obj)));
      }
    }
  }
  CHECK(cases > 1000);
}

TEST_CASE("packings satisfy the replay invariants") {
  for (int rank : {2, 3}) {
    GenConfig g = default_gen_config(rank);
    for (std::uint64_t s = 0; s < 20; ++s) {
      g.seed = s;
      const Instance inst = generate_instance(g);
      const PackingResult r = pack_sequence(inst, random_order(inst, s));
      INFO("rank " << rank << " seed " << s);
      CHECK(oracle::check_packing(inst, r) == "");
      CHECK(pack_sequence(inst, random_order(inst, s)) == r);
    }
  }
}

TEST_CASE("result records round trip and are validated on read") {
  TempDir dir("placement");
  std::vector<PackingResult> results;
  for (int rank : {2, 3}) {
    GenConfig g = default_gen_config(rank);
    g.seed = 4;
    const Instance inst = generate_instance(g);
    results.push_back(pack_sequence(inst, bbox_seq_order(inst)));
  }
  write_results(results, dir / "r.jsonl");
  CHECK(read_results(dir / "r.jsonl") == results);

  const std::string bad =
      R"({"box":[10,10],"boxes_used":1,"id":"x","placements":[)"
      R"({"box":0,"dims":[2,2],"index":0,"position":[0,0]},)"
      R"({"box":0,"dims":[2,2],"index":1,"position":[1,0]}]})";
  CHECK_THROWS_AS(parse_result_record(bad), ParseError);
  CHECK_THROWS_AS(parse_result_record(R"({"box":[10,10],"boxes_used":1,"id":"x","placements":[]})"),
                  ParseError);
}
