#include <doctest.h>

#include <cstring>
#include <string>

#include "binpack/binpack.h"
#include "../support/temp_dir.hpp"

namespace {

bp_dataset* generated(int rank, int n, int count, uint64_t seed) {
  bp_gen_config g;
  bp_gen_config_default(rank, &g);
  g.objects = n;
  g.seed = seed;
  bp_dataset* ds = nullptr;
  REQUIRE(bp_dataset_generate(&g, count, &ds) == BP_OK);
  return ds;
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(bp_status_name(BP_OK)) == "ok");
  bp_gen_config g;
  bp_gen_config_default(2, &g);
  CHECK(g.objects == 40);
  CHECK(g.box[0] == 10);
  g.dim_high = 6;
  bp_dataset* ds = nullptr;
  CHECK(bp_dataset_generate(&g, 5, &ds) == BP_ERR_INVALID_ARGUMENT);
  CHECK(ds == nullptr);
  CHECK(std::string(bp_last_error()).find("half") != std::string::npos);
  CHECK(bp_dataset_read("/nonexistent/x.jsonl", &ds) == BP_ERR_IO);
}

TEST_CASE("datasets through the C interface") {
  TempDir dir("capi");
  bp_dataset* ds = generated(3, 7, 4, 2);
  CHECK(bp_dataset_size(ds) == 4);
  int rank = 0;
  size_t n = 0;
  REQUIRE(bp_dataset_instance_shape(ds, 1, &rank, &n) == BP_OK);
  CHECK(rank == 3);
  CHECK(n == 7);
  int dims[21];
  REQUIRE(bp_dataset_instance_dims(ds, 1, dims, 21) == BP_OK);
  for (int d : dims) CHECK((d >= 2 && d <= 5));
  CHECK(bp_dataset_instance_dims(ds, 1, dims, 3) != BP_OK);
  CHECK(bp_dataset_instance_shape(ds, 9, &rank, &n) == BP_ERR_INVALID_ARGUMENT);

  const std::string path = (dir / "d.jsonl").string();
  REQUIRE(bp_dataset_write(ds, path.c_str()) == BP_OK);
  bp_dataset* back = nullptr;
  REQUIRE(bp_dataset_read(path.c_str(), &back) == BP_OK);
  int dims2[21];
  REQUIRE(bp_dataset_instance_dims(back, 1, dims2, 21) == BP_OK);
  CHECK(std::memcmp(dims, dims2, sizeof dims) == 0);
  bp_dataset_free(back);
  bp_dataset_free(ds);

  bp_dataset* manual = nullptr;
  REQUIRE(bp_dataset_create(&manual) == BP_OK);
  const int box[2] = {10, 10};
  const int big[2] = {10, 5};
  CHECK(bp_dataset_add(manual, "x", 2, box, big, 1) == BP_ERR_INSTANCE);
  bp_dataset_free(manual);
}

TEST_CASE("packing, evaluation and rendering") {
  TempDir dir("capi_pack");
  bp_dataset* ds = nullptr;
  REQUIRE(bp_dataset_create(&ds) == BP_OK);
  const int box[2] = {10, 10};
  int dims[16];
  for (int& d : dims) d = 5;
  REQUIRE(bp_dataset_add(ds, "tile", 2, box, dims, 8) == BP_OK);

  const int order[8] = {0, 1, 2, 3, 4, 5, 6, 7};
  bp_results* res = nullptr;
  REQUIRE(bp_pack_order(ds, 0, order, 8, &res) == BP_OK);
  int boxes = 0;
  REQUIRE(bp_results_boxes_used(res, 0, &boxes) == BP_OK);
  CHECK(boxes == 2);
  bp_metrics m;
  REQUIRE(bp_results_evaluate(res, "tile", nullptr, &m) == BP_OK);
  CHECK(m.avg_compactness == doctest::Approx(1.0));
  CHECK(m.avg_penalty == doctest::Approx(0.0));
  size_t files = 0;
  const std::string prefix = (dir / "tile").string();
  REQUIRE(bp_results_render_svg(res, 0, prefix.c_str(), &files) == BP_OK);
  CHECK(files == 2);
  bp_results_free(res);

  const int bad[8] = {0, 0, 2, 3, 4, 5, 6, 7};
  CHECK(bp_pack_order(ds, 0, bad, 8, &res) == BP_ERR_CONTRACT);

  bp_method_config cfg;
  bp_method_config_default(BP_METHOD_DRL, &cfg);
  CHECK(bp_pack_dataset(ds, &cfg, &res) == BP_ERR_INVALID_ARGUMENT);
  bp_dataset_free(ds);
}

TEST_CASE("methods are deterministic and serialisable") {
  TempDir dir("capi_methods");
  bp_dataset* ds = generated(2, 12, 5, 9);
  bp_model* model = nullptr;
  REQUIRE(bp_model_create(2, 8, 1, &model) == BP_OK);
  bp_metrics rows[4];
  for (int k = 0; k < 4; ++k) {
    bp_method method = static_cast<bp_method>(k);
    bp_method_config cfg;
    bp_method_config_default(method, &cfg);
    cfg.seed = 3;
    cfg.brkga.generations = 3;
    cfg.model = model;
    bp_results* a = nullptr;
    bp_results* b = nullptr;
    REQUIRE(bp_pack_dataset(ds, &cfg, &a) == BP_OK);
    REQUIRE(bp_pack_dataset(ds, &cfg, &b) == BP_OK);
    bp_metrics ma, mb;
    REQUIRE(bp_results_evaluate(a, bp_method_label(method), nullptr, &ma) == BP_OK);
    REQUIRE(bp_results_evaluate(b, nullptr, nullptr, &mb) == BP_OK);
    CHECK(ma.avg_compactness == mb.avg_compactness);
    CHECK(ma.avg_boxes == mb.avg_boxes);
    CHECK(ma.avg_latency_ms > 0.0);
    rows[k] = ma;

    const std::string path = (dir / "r.jsonl").string();
    REQUIRE(bp_results_write(a, path.c_str()) == BP_OK);
    bp_results* c = nullptr;
    REQUIRE(bp_results_read(path.c_str(), &c) == BP_OK);
    bp_metrics mc;
    REQUIRE(bp_results_evaluate(c, nullptr, nullptr, &mc) == BP_OK);
    CHECK(mc.avg_penalty == doctest::Approx(ma.avg_penalty));
    CHECK(mc.avg_latency_ms == 0.0);
    bp_results_free(a);
    bp_results_free(b);
    bp_results_free(c);
  }
  char* table = nullptr;
  REQUIRE(bp_metrics_format(rows, 4, 0, &table) == BP_OK);
  const std::string text(table);
  bp_string_free(table);
  CHECK(text.find("Random") < text.find("B-Box Seq"));
  CHECK(text.find("BRKGA") < text.find("DRL"));

  bp_method parsed;
  CHECK(bp_method_parse("brkga", &parsed) == BP_OK);
  CHECK(parsed == BP_METHOD_BRKGA);
  CHECK(bp_method_parse("genetic", &parsed) == BP_ERR_INVALID_ARGUMENT);
  bp_model_free(model);
  bp_dataset_free(ds);
}

TEST_CASE("models and training through the C interface") {
  TempDir dir("capi_train");
  bp_train_config cfg;
  bp_train_config_desk(&cfg);
  CHECK(cfg.train_size == 10000);
  CHECK(cfg.epochs == 3);
  cfg.hidden = 8;
  cfg.batch_size = 10;
  cfg.epochs = 2;
  bp_dataset* train = generated(2, 6, 30, 1);
  bp_dataset* val = generated(2, 6, 10, 2);
  const std::string ckpt = (dir / "t.ckpt").string();
  int calls = 0;
  bp_model* model = nullptr;
  REQUIRE(bp_train(&cfg, train, val, ckpt.c_str(), nullptr, nullptr,
                   [](int, double p, void* u) {
                     CHECK(p >= 0.0);
                     ++*static_cast<int*>(u);
                   },
                   &calls, &model) == BP_OK);
  CHECK(calls == 2);

  bp_train_config stored;
  REQUIRE(bp_train_checkpoint_config(ckpt.c_str(), &stored) == BP_OK);
  CHECK(stored.hidden == 8);
  CHECK(stored.batch_size == 10);

  bp_model* loaded = nullptr;
  REQUIRE(bp_model_load(ckpt.c_str(), &loaded) == BP_OK);
  int rank = 0, hidden = 0;
  size_t params = 0;
  REQUIRE(bp_model_info(loaded, &rank, &hidden, &params) == BP_OK);
  CHECK(rank == 2);
  CHECK(hidden == 8);
  int o1[6], o2[6];
  REQUIRE(bp_model_decode(model, val, 0, o1, 6) == BP_OK);
  REQUIRE(bp_model_decode(loaded, val, 0, o2, 6) == BP_OK);
  CHECK(std::memcmp(o1, o2, sizeof o1) == 0);

  bp_dataset* cubes = generated(3, 6, 2, 3);
  CHECK(bp_model_decode(model, cubes, 0, o1, 6) == BP_ERR_INVALID_ARGUMENT);
  CHECK(bp_model_load((dir / "none").string().c_str(), &loaded) == BP_ERR_IO);
  bp_dataset_free(cubes);
  bp_model_free(loaded);
  bp_model_free(model);
  bp_dataset_free(train);
  bp_dataset_free(val);
}
