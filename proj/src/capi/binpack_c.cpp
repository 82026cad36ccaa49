#include "binpack/binpack.h"

#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/errors.hpp"
#include "core/instance.hpp"
#include "core/metrics.hpp"
#include "core/render.hpp"
#include "core/runner.hpp"
#include "core/trainer.hpp"

struct bp_dataset {
  std::vector<binpack::Instance> instances;
};

struct bp_results {
  std::vector<binpack::PackingResult> results;
  std::vector<double> latencies_ms;
};

struct bp_model {
  binpack::PolicyModel model;
};

namespace {

thread_local std::string g_last_error;

bp_status fail(bp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
bp_status guarded(F&& body) {
  try {
    body();
    return BP_OK;
  } catch (const binpack::ConfigError& e) {
    return fail(BP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const binpack::IoError& e) {
    return fail(BP_ERR_IO, e.what());
  } catch (const binpack::ParseError& e) {
    return fail(BP_ERR_PARSE, e.what());
  } catch (const binpack::InstanceError& e) {
    return fail(BP_ERR_INSTANCE, e.what());
  } catch (const binpack::ContractError& e) {
    return fail(BP_ERR_CONTRACT, e.what());
  } catch (const binpack::NumericError& e) {
    return fail(BP_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(BP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BP_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw binpack::ConfigError(what);
}

binpack::BoxSpec box_from(int rank, const int* box) {
  return rank == 3 ? binpack::BoxSpec(box[0], box[1], box[2])
                   : binpack::BoxSpec(box[0], box[1]);
}

binpack::GenConfig gen_from(const bp_gen_config& c) {
  require(c.rank == 2 || c.rank == 3, "rank must be 2 or 3");
  binpack::GenConfig g;
  g.rank = c.rank;
  g.objects = c.objects;
  g.dim_low = c.dim_low;
  g.dim_high = c.dim_high;
  g.box = box_from(c.rank, c.box);
  g.seed = c.seed;
  return g;
}

bp_gen_config gen_to(const binpack::GenConfig& g) {
  bp_gen_config c{};
  c.rank = g.rank;
  c.objects = g.objects;
  c.dim_low = g.dim_low;
  c.dim_high = g.dim_high;
  for (int a = 0; a < g.rank; ++a) c.box[a] = g.box[a];
  c.seed = g.seed;
  return c;
}

binpack::RewardConfig reward_from(const bp_reward_config& r) {
  return {r.alpha, r.beta, r.scale};
}

bp_reward_config reward_to(const binpack::RewardConfig& r) {
  return {r.alpha, r.beta, r.scale};
}

binpack::TrainConfig train_from(const bp_train_config& c) {
  binpack::TrainConfig t;
  t.model.rank = c.rank;
  t.model.hidden = c.hidden;
  t.model.init_seed = c.init_seed;
  t.learning_rate = c.learning_rate;
  t.batch_size = c.batch_size;
  t.epochs = c.epochs;
  t.train_size = c.train_size;
  t.val_size = c.val_size;
  t.reward = reward_from(c.reward);
  t.seed = c.seed;
  t.clip_norm = c.clip_norm;
  return t;
}

bp_train_config train_to(const binpack::TrainConfig& t) {
  bp_train_config c{};
  c.rank = t.model.rank;
  c.hidden = t.model.hidden;
  c.init_seed = t.model.init_seed;
  c.learning_rate = t.learning_rate;
  c.batch_size = t.batch_size;
  c.epochs = t.epochs;
  c.train_size = t.train_size;
  c.val_size = t.val_size;
  c.reward = reward_to(t.reward);
  c.seed = t.seed;
  c.clip_norm = t.clip_norm;
  return c;
}

binpack::Method method_from(bp_method m) {
  switch (m) {
    case BP_METHOD_RANDOM: return binpack::Method::kRandom;
    case BP_METHOD_BBOX: return binpack::Method::kBboxSeq;
    case BP_METHOD_BRKGA: return binpack::Method::kBrkga;
    case BP_METHOD_DRL: return binpack::Method::kDrl;
  }
  throw binpack::ConfigError("unknown method");
}

const binpack::Instance& instance_at(const bp_dataset* ds, size_t index) {
  require(ds != nullptr, "dataset is null");
  if (index >= ds->instances.size()) throw binpack::ConfigError("instance index out of range");
  return ds->instances[index];
}

const binpack::PackingResult& result_at(const bp_results* res, size_t index) {
  require(res != nullptr, "results handle is null");
  if (index >= res->results.size()) throw binpack::ConfigError("result index out of range");
  return res->results[index];
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* bp_last_error(void) { return g_last_error.c_str(); }

const char* bp_status_name(bp_status status) {
  switch (status) {
    case BP_OK: return "ok";
    case BP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BP_ERR_IO: return "io error";
    case BP_ERR_PARSE: return "parse error";
    case BP_ERR_INSTANCE: return "instance error";
    case BP_ERR_CONTRACT: return "contract violation";
    case BP_ERR_NUMERIC: return "numeric error";
    case BP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* bp_version(void) { return "1.0.0"; }

void bp_gen_config_default(int rank, bp_gen_config* out) {
  if (out != nullptr) *out = gen_to(binpack::default_gen_config(rank == 3 ? 3 : 2));
}

bp_status bp_dataset_generate(const bp_gen_config* cfg, int count, bp_dataset** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    auto ds = std::make_unique<bp_dataset>();
    ds->instances = binpack::generate_dataset(gen_from(*cfg), count);
    *out = ds.release();
  });
}

bp_status bp_dataset_create(bp_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new bp_dataset;
  });
}

bp_status bp_dataset_add(bp_dataset* ds, const char* id, int rank, const int* box,
                         const int* dims, size_t n) {
  return guarded([&] {
    require(ds != nullptr && box != nullptr && (dims != nullptr || n == 0), "null argument");
    require(rank == 2 || rank == 3, "rank must be 2 or 3");
    binpack::Instance inst;
    inst.id = id != nullptr ? id : std::to_string(ds->instances.size());
    inst.box = box_from(rank, box);
    for (size_t i = 0; i < n; ++i) {
      const int* d = dims + i * rank;
      inst.objects.push_back(rank == 3 ? binpack::ObjectDims(d[0], d[1], d[2])
                                       : binpack::ObjectDims(d[0], d[1]));
    }
    binpack::validate(inst);
    ds->instances.push_back(std::move(inst));
  });
}

bp_status bp_dataset_read(const char* path, bp_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto ds = std::make_unique<bp_dataset>();
    ds->instances = binpack::read_dataset(path);
    *out = ds.release();
  });
}

bp_status bp_dataset_write(const bp_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    binpack::write_dataset(ds->instances, path);
  });
}

size_t bp_dataset_size(const bp_dataset* ds) {
  return ds == nullptr ? 0 : ds->instances.size();
}

bp_status bp_dataset_instance_shape(const bp_dataset* ds, size_t index, int* rank,
                                    size_t* objects) {
  return guarded([&] {
    const auto& inst = instance_at(ds, index);
    if (rank != nullptr) *rank = inst.rank();
    if (objects != nullptr) *objects = inst.objects.size();
  });
}

bp_status bp_dataset_instance_dims(const bp_dataset* ds, size_t index, int* dims_out,
                                   size_t capacity) {
  return guarded([&] {
    const auto& inst = instance_at(ds, index);
    const size_t need = inst.objects.size() * inst.rank();
    require(dims_out != nullptr && capacity >= need, "output buffer too small");
    size_t k = 0;
    for (const auto& o : inst.objects) {
      for (int a = 0; a < inst.rank(); ++a) dims_out[k++] = o[a];
    }
  });
}

void bp_dataset_free(bp_dataset* ds) { delete ds; }

bp_status bp_method_parse(const char* name, bp_method* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    switch (binpack::parse_method(name)) {
      case binpack::Method::kRandom: *out = BP_METHOD_RANDOM; break;
      case binpack::Method::kBboxSeq: *out = BP_METHOD_BBOX; break;
      case binpack::Method::kBrkga: *out = BP_METHOD_BRKGA; break;
      case binpack::Method::kDrl: *out = BP_METHOD_DRL; break;
    }
  });
}

const char* bp_method_name(bp_method method) {
  switch (method) {
    case BP_METHOD_RANDOM: return "random";
    case BP_METHOD_BBOX: return "bbox";
    case BP_METHOD_BRKGA: return "brkga";
    case BP_METHOD_DRL: return "drl";
  }
  return "unknown";
}

const char* bp_method_label(bp_method method) {
  switch (method) {
    case BP_METHOD_RANDOM: return "Random";
    case BP_METHOD_BBOX: return "B-Box Seq";
    case BP_METHOD_BRKGA: return "BRKGA";
    case BP_METHOD_DRL: return "DRL";
  }
  return "unknown";
}

void bp_method_config_default(bp_method method, bp_method_config* out) {
  if (out == nullptr) return;
  const binpack::BrkgaConfig b;
  *out = bp_method_config{};
  out->method = method;
  out->seed = 0;
  out->brkga = {b.population_size, b.elite_fraction, b.mutant_fraction,
                b.elite_inherit_prob, b.generations, b.seed};
  out->reward = reward_to(binpack::RewardConfig{});
  out->model = nullptr;
}

bp_status bp_pack_dataset(const bp_dataset* ds, const bp_method_config* cfg,
                          bp_results** out) {
  return guarded([&] {
    require(ds != nullptr && cfg != nullptr && out != nullptr, "null argument");
    binpack::MethodConfig mc;
    mc.method = method_from(cfg->method);
    mc.seed = cfg->seed;
    mc.brkga.population_size = cfg->brkga.population_size;
    mc.brkga.elite_fraction = cfg->brkga.elite_fraction;
    mc.brkga.mutant_fraction = cfg->brkga.mutant_fraction;
    mc.brkga.elite_inherit_prob = cfg->brkga.elite_inherit_prob;
    mc.brkga.generations = cfg->brkga.generations;
    mc.brkga.seed = cfg->brkga.seed;
    mc.reward = reward_from(cfg->reward);
    binpack::validate(mc.reward);
    if (mc.method == binpack::Method::kBrkga) binpack::validate(mc.brkga);
    if (mc.method == binpack::Method::kDrl) {
      require(cfg->model != nullptr, "method drl requires a model checkpoint");
      mc.model = &cfg->model->model;
      for (const auto& inst : ds->instances) {
        require(inst.rank() == mc.model->config.rank,
                "model rank does not match the dataset");
      }
    }
    binpack::MethodRun run = binpack::run_method(ds->instances, mc);
    auto res = std::make_unique<bp_results>();
    res->results = std::move(run.results);
    res->latencies_ms = std::move(run.latencies_ms);
    *out = res.release();
  });
}

bp_status bp_pack_order(const bp_dataset* ds, size_t index, const int* order, size_t n,
                        bp_results** out) {
  return guarded([&] {
    const auto& inst = instance_at(ds, index);
    require(order != nullptr && out != nullptr, "null argument");
    binpack::PackingOrder o(order, order + n);
    if (!binpack::is_permutation_of(o, inst.size())) {
      throw binpack::ContractError("order is not a permutation of the instance objects");
    }
    auto res = std::make_unique<bp_results>();
    res->results.push_back(binpack::pack_sequence(inst, o));
    *out = res.release();
  });
}

bp_status bp_results_read(const char* path, bp_results** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto res = std::make_unique<bp_results>();
    res->results = binpack::read_results(path);
    *out = res.release();
  });
}

bp_status bp_results_write(const bp_results* res, const char* path) {
  return guarded([&] {
    require(res != nullptr && path != nullptr, "null argument");
    binpack::write_results(res->results, path);
  });
}

size_t bp_results_size(const bp_results* res) {
  return res == nullptr ? 0 : res->results.size();
}

bp_status bp_results_boxes_used(const bp_results* res, size_t index, int* out) {
  return guarded([&] {
    const auto& r = result_at(res, index);
    require(out != nullptr, "null argument");
    *out = r.boxes_used();
  });
}

bp_status bp_results_penalty(const bp_results* res, size_t index,
                             const bp_reward_config* reward, double* out) {
  return guarded([&] {
    const auto& r = result_at(res, index);
    require(out != nullptr, "null argument");
    const binpack::RewardConfig rc = reward ? reward_from(*reward) : binpack::RewardConfig{};
    binpack::validate(rc);
    *out = binpack::penalty(r, rc);
  });
}

bp_status bp_results_evaluate(const bp_results* res, const char* label,
                              const bp_reward_config* reward, bp_metrics* out) {
  return guarded([&] {
    require(res != nullptr && out != nullptr, "null argument");
    require(!res->results.empty(), "no results to evaluate");
    const binpack::RewardConfig rc = reward ? reward_from(*reward) : binpack::RewardConfig{};
    binpack::validate(rc);
    const binpack::Evaluation e =
        binpack::evaluate(label ? label : "", res->results, res->latencies_ms, rc);
    *out = bp_metrics{};
    std::strncpy(out->label, e.method.c_str(), sizeof out->label - 1);
    out->avg_compactness = e.avg_compactness;
    out->avg_pyramid = e.avg_pyramid;
    out->avg_boxes = e.avg_boxes;
    out->avg_latency_ms = e.avg_latency_ms;
    out->avg_penalty = e.avg_penalty;
    out->instances = e.instances;
  });
}

bp_status bp_results_render_svg(const bp_results* res, size_t index, const char* prefix,
                                size_t* files_written) {
  return guarded([&] {
    const auto& r = result_at(res, index);
    require(prefix != nullptr, "null argument");
    const auto paths = binpack::render_to_files(r, prefix);
    if (files_written != nullptr) *files_written = paths.size();
  });
}

void bp_results_free(bp_results* res) { delete res; }

bp_status bp_metrics_format(const bp_metrics* rows, size_t n, int as_json, char** out) {
  return guarded([&] {
    require((rows != nullptr || n == 0) && out != nullptr, "null argument");
    std::vector<binpack::Evaluation> evals;
    for (size_t i = 0; i < n; ++i) {
      binpack::Evaluation e;
      e.method.assign(rows[i].label, strnlen(rows[i].label, sizeof rows[i].label));
      e.avg_compactness = rows[i].avg_compactness;
      e.avg_pyramid = rows[i].avg_pyramid;
      e.avg_boxes = rows[i].avg_boxes;
      e.avg_latency_ms = rows[i].avg_latency_ms;
      e.avg_penalty = rows[i].avg_penalty;
      e.instances = rows[i].instances;
      evals.push_back(std::move(e));
    }
    *out = copy_string(as_json ? binpack::table_record(evals) : binpack::format_table(evals));
  });
}

void bp_string_free(char* s) { delete[] s; }

bp_status bp_model_create(int rank, int hidden, uint64_t init_seed, bp_model** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    auto m = std::make_unique<bp_model>();
    m->model = binpack::init_model({rank, hidden, init_seed});
    *out = m.release();
  });
}

bp_status bp_model_load(const char* path, bp_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto m = std::make_unique<bp_model>();
    m->model = binpack::load_model(path);
    *out = m.release();
  });
}

bp_status bp_model_save(const bp_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    binpack::save_model(model->model, path);
  });
}

bp_status bp_model_info(const bp_model* model, int* rank, int* hidden,
                        size_t* parameter_count) {
  return guarded([&] {
    require(model != nullptr, "null argument");
    if (rank != nullptr) *rank = model->model.config.rank;
    if (hidden != nullptr) *hidden = model->model.config.hidden;
    if (parameter_count != nullptr) *parameter_count = model->model.params.parameter_count();
  });
}

bp_status bp_model_decode(const bp_model* model, const bp_dataset* ds, size_t index,
                          int* order_out, size_t capacity) {
  return guarded([&] {
    require(model != nullptr, "null argument");
    const auto& inst = instance_at(ds, index);
    require(order_out != nullptr && capacity >= inst.objects.size(), "output buffer too small");
    const auto trace = binpack::decode(inst, model->model.params.actor,
                                       binpack::DecodeMode::kGreedy, nullptr);
    std::copy(trace.order.begin(), trace.order.end(), order_out);
  });
}

void bp_model_free(bp_model* model) { delete model; }

void bp_train_config_default(int rank, bp_train_config* out) {
  if (out == nullptr) return;
  binpack::TrainConfig t;
  t.model.rank = rank == 3 ? 3 : 2;
  *out = train_to(t);
}

void bp_train_config_desk(bp_train_config* out) {
  if (out != nullptr) *out = train_to(binpack::desk_train_config());
}

void bp_gen_config_desk(bp_gen_config* out) {
  if (out != nullptr) *out = gen_to(binpack::desk_gen_config());
}

bp_status bp_train_checkpoint_config(const char* path, bp_train_config* out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    const binpack::Checkpoint ckpt = binpack::load_checkpoint(path);
    if (!ckpt.meta.contains("train")) throw binpack::ParseError("not a training checkpoint");
    try {
      *out = train_to(binpack::train_config_from_json(ckpt.meta.at("train")));
    } catch (const nlohmann::json::exception& e) {
      throw binpack::ParseError(e.what());
    }
  });
}

bp_status bp_train(const bp_train_config* cfg, const bp_dataset* train,
                   const bp_dataset* val, const char* checkpoint_path, const char* log_path,
                   const char* resume_from, bp_epoch_callback on_epoch, void* user,
                   bp_model** model_out) {
  return guarded([&] {
    require(cfg != nullptr && train != nullptr && val != nullptr, "null argument");
    binpack::TrainOptions opts;
    if (checkpoint_path != nullptr) opts.checkpoint_path = checkpoint_path;
    if (log_path != nullptr) opts.log_path = log_path;
    if (resume_from != nullptr) opts.resume_from = resume_from;
    if (on_epoch != nullptr) {
      opts.on_epoch = [on_epoch, user](const binpack::EpochRecord& r) {
        on_epoch(r.epoch, r.val_penalty, user);
      };
    }
    binpack::TrainOutcome outcome =
        binpack::train(train_from(*cfg), train->instances, val->instances, opts);
    if (model_out != nullptr) {
      auto m = std::make_unique<bp_model>();
      m->model = std::move(outcome.model);
      *model_out = m.release();
    }
  });
}

}  // extern "C"
