// binpack command-line front end. Talks to the library only through the C
// interface in binpack/binpack.h.
#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "binpack/binpack.h"

namespace {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3 };

struct Failure {
  bp_status status;
  std::string message;
};

void check(bp_status s) {
  if (s != BP_OK) throw Failure{s, bp_last_error()};
}

int exit_code_for(bp_status s) {
  switch (s) {
    case BP_OK: return kExitOk;
    case BP_ERR_INVALID_ARGUMENT: return kExitUsage;
    case BP_ERR_IO:
    case BP_ERR_PARSE:
    case BP_ERR_INSTANCE: return kExitData;
    default: return kExitInternal;
  }
}

struct DatasetDeleter {
  void operator()(bp_dataset* p) const { bp_dataset_free(p); }
};
struct ResultsDeleter {
  void operator()(bp_results* p) const { bp_results_free(p); }
};
struct ModelDeleter {
  void operator()(bp_model* p) const { bp_model_free(p); }
};
using DatasetPtr = std::unique_ptr<bp_dataset, DatasetDeleter>;
using ResultsPtr = std::unique_ptr<bp_results, ResultsDeleter>;
using ModelPtr = std::unique_ptr<bp_model, ModelDeleter>;

DatasetPtr read_dataset(const std::string& path) {
  bp_dataset* ds = nullptr;
  check(bp_dataset_read(path.c_str(), &ds));
  return DatasetPtr(ds);
}

DatasetPtr generate(const bp_gen_config& g, int count) {
  bp_dataset* ds = nullptr;
  check(bp_dataset_generate(&g, count, &ds));
  return DatasetPtr(ds);
}

ModelPtr load_model(const std::string& path) {
  bp_model* m = nullptr;
  check(bp_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

int rank_of(const std::string& mode) { return mode == "3d" ? 3 : 2; }

std::vector<int> parse_box(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--box", "expected comma-separated integers, got '" + text + "'");
    }
  }
  return out;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  std::string mode = "2d";
  int n = 0;
  int count = 1000;
  int dim_low = 0;
  int dim_high = 0;
  std::string box;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenArgs& a) {
  bp_gen_config g;
  bp_gen_config_default(rank_of(a.mode), &g);
  if (a.n > 0) g.objects = a.n;
  if (a.dim_low > 0) g.dim_low = a.dim_low;
  if (a.dim_high > 0) g.dim_high = a.dim_high;
  if (!a.box.empty()) {
    const auto box = parse_box(a.box);
    if (static_cast<int>(box.size()) != g.rank) {
      throw CLI::ValidationError("--box", "needs " + std::to_string(g.rank) + " values in " +
                                              a.mode + " mode");
    }
    for (int i = 0; i < g.rank; ++i) g.box[i] = box[i];
  }
  g.seed = a.seed;
  if (a.count < 0) throw CLI::ValidationError("--count", "must be >= 0");
  const DatasetPtr ds = generate(g, a.count);
  check(bp_dataset_write(ds.get(), a.out.c_str()));
  std::fprintf(stderr, "wrote %d instances to %s\n", a.count, a.out.c_str());
  return kExitOk;
}

// ---- pack / eval -------------------------------------------------------------

struct MethodArgs {
  std::uint64_t seed = 0;
  std::string model;
  int brkga_generations = -1;
  int brkga_population = 0;
  double alpha = 0.5;
  double beta = 0.5;
};

void add_method_options(CLI::App* cmd, MethodArgs& m) {
  cmd->add_option("--seed", m.seed, "seed for random orders and BRKGA");
  cmd->add_option("--model", m.model, "policy checkpoint for the drl method");
  cmd->add_option("--brkga-generations", m.brkga_generations, "BRKGA generations (default 100)");
  cmd->add_option("--brkga-population", m.brkga_population,
                  "BRKGA population (default min(10 n, 500))");
  cmd->add_option("--alpha", m.alpha, "compactness weight in the penalty");
  cmd->add_option("--beta", m.beta, "pyramid weight in the penalty");
}

bp_method_config method_config(bp_method method, const MethodArgs& a, const bp_model* model) {
  bp_method_config cfg;
  bp_method_config_default(method, &cfg);
  cfg.seed = a.seed;
  cfg.brkga.seed = a.seed;
  if (a.brkga_generations >= 0) cfg.brkga.generations = a.brkga_generations;
  cfg.brkga.population_size = a.brkga_population;
  cfg.reward.alpha = a.alpha;
  cfg.reward.beta = a.beta;
  cfg.model = model;
  return cfg;
}

bp_method parse_method(const std::string& name) {
  bp_method m;
  check(bp_method_parse(name.c_str(), &m));
  return m;
}

ModelPtr model_for(bp_method method, const MethodArgs& a) {
  if (method != BP_METHOD_DRL) return nullptr;
  if (a.model.empty()) {
    throw CLI::ValidationError("--model", "method drl needs a trained checkpoint");
  }
  return load_model(a.model);
}

struct PackArgs {
  std::string data;
  std::string method = "bbox";
  std::string out;
  MethodArgs m;
};

int run_pack(const PackArgs& a) {
  const DatasetPtr ds = read_dataset(a.data);
  const bp_method method = parse_method(a.method);
  const ModelPtr model = model_for(method, a.m);
  const bp_method_config cfg = method_config(method, a.m, model.get());
  bp_results* raw = nullptr;
  check(bp_pack_dataset(ds.get(), &cfg, &raw));
  const ResultsPtr res(raw);
  check(bp_results_write(res.get(), a.out.c_str()));
  std::fprintf(stderr, "wrote %zu results to %s\n", bp_results_size(res.get()), a.out.c_str());
  return kExitOk;
}

struct EvalArgs {
  std::string data;
  std::string results;
  std::vector<std::string> methods;
  bool all = false;
  std::string out;
  MethodArgs m;
};

void print_rows(const std::vector<bp_metrics>& rows, const std::string& json_path) {
  char* table = nullptr;
  check(bp_metrics_format(rows.data(), rows.size(), 0, &table));
  std::fputs(table, stdout);
  bp_string_free(table);
  if (json_path.empty()) return;
  char* record = nullptr;
  check(bp_metrics_format(rows.data(), rows.size(), 1, &record));
  std::FILE* f = std::fopen(json_path.c_str(), "w");
  if (f == nullptr) {
    bp_string_free(record);
    throw Failure{BP_ERR_IO, "cannot write " + json_path};
  }
  std::fputs(record, f);
  std::fputc('\n', f);
  std::fclose(f);
  bp_string_free(record);
}

int run_eval(const EvalArgs& a) {
  bp_reward_config reward{a.m.alpha, a.m.beta, 5.0};
  std::vector<bp_metrics> rows;
  if (!a.results.empty()) {
    bp_results* raw = nullptr;
    check(bp_results_read(a.results.c_str(), &raw));
    const ResultsPtr res(raw);
    bp_metrics row;
    const std::string label = a.methods.empty() ? "results" : a.methods.front();
    check(bp_results_evaluate(res.get(), label.c_str(), &reward, &row));
    rows.push_back(row);
    print_rows(rows, a.out);
    return kExitOk;
  }
  if (a.data.empty()) throw CLI::ValidationError("eval", "give --data or --results");

  std::vector<bp_method> methods;
  if (a.all) {
    methods = {BP_METHOD_RANDOM, BP_METHOD_BBOX, BP_METHOD_BRKGA};
    if (!a.m.model.empty()) methods.push_back(BP_METHOD_DRL);
  } else {
    if (a.methods.empty()) throw CLI::ValidationError("eval", "give --method or --all");
    for (const auto& name : a.methods) methods.push_back(parse_method(name));
  }
  const DatasetPtr ds = read_dataset(a.data);
  for (bp_method method : methods) {
    const ModelPtr model = model_for(method, a.m);
    const bp_method_config cfg = method_config(method, a.m, model.get());
    bp_results* raw = nullptr;
    check(bp_pack_dataset(ds.get(), &cfg, &raw));
    const ResultsPtr res(raw);
    bp_metrics row;
    check(bp_results_evaluate(res.get(), bp_method_label(method), &reward, &row));
    rows.push_back(row);
  }
  print_rows(rows, a.out);
  return kExitOk;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
  std::string mode = "2d";
  bool desk = false;
  int n = 0;
  int train_size = 0;
  int val_size = 0;
  int epochs = 0;
  int batch_size = 0;
  double lr = -1.0;
  int hidden = 0;
  double alpha = -1.0;
  double beta = -1.0;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 1;
  bool clip = false;
  double clip_norm = 0.0;
  std::string checkpoint = "model.ckpt";
  std::string log;
  std::string resume;
  std::string train_data;
  std::string val_data;
};

void print_epoch(int epoch, double val_penalty, void*) {
  std::fprintf(stderr, "epoch %d: validation penalty %.4f\n", epoch + 1, val_penalty);
}

int run_train(const TrainArgs& a, const CLI::App& cmd) {
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  bp_train_config cfg;
  bp_gen_config g;
  if (a.desk) {
    bp_train_config_desk(&cfg);
    bp_gen_config_desk(&g);
  } else {
    bp_train_config_default(rank_of(a.mode), &cfg);
    bp_gen_config_default(rank_of(a.mode), &g);
  }
  if (!a.resume.empty()) {
    check(bp_train_checkpoint_config(a.resume.c_str(), &cfg));
    bp_gen_config_default(cfg.rank, &g);
    if (a.desk) bp_gen_config_desk(&g);
  }
  if (given("--n")) g.objects = a.n;
  if (given("--train-size")) cfg.train_size = a.train_size;
  if (given("--val-size")) cfg.val_size = a.val_size;
  if (given("--epochs")) cfg.epochs = a.epochs;
  if (a.resume.empty()) {
    if (given("--batch-size")) cfg.batch_size = a.batch_size;
    if (given("--lr")) cfg.learning_rate = a.lr;
    if (given("--hidden")) cfg.hidden = a.hidden;
    if (given("--alpha")) cfg.reward.alpha = a.alpha;
    if (given("--beta")) cfg.reward.beta = a.beta;
    if (given("--seed")) cfg.seed = cfg.init_seed = a.seed;
    if (a.clip) cfg.clip_norm = 2.0;
    if (given("--clip-norm")) cfg.clip_norm = a.clip_norm;
  }

  DatasetPtr train, val;
  if (!a.train_data.empty()) {
    train = read_dataset(a.train_data);
  } else {
    g.seed = a.data_seed;
    train = generate(g, cfg.train_size);
  }
  if (!a.val_data.empty()) {
    val = read_dataset(a.val_data);
  } else {
    g.seed = a.data_seed + 1;
    val = generate(g, cfg.val_size);
  }
  std::fprintf(stderr, "training on %zu instances, validating on %zu\n",
               bp_dataset_size(train.get()), bp_dataset_size(val.get()));
  check(bp_train(&cfg, train.get(), val.get(), a.checkpoint.c_str(),
                 a.log.empty() ? nullptr : a.log.c_str(),
                 a.resume.empty() ? nullptr : a.resume.c_str(), &print_epoch, nullptr,
                 nullptr));
  std::fprintf(stderr, "checkpoint written to %s\n", a.checkpoint.c_str());
  return kExitOk;
}

// ---- render ------------------------------------------------------------------

struct RenderArgs {
  std::string results;
  std::size_t record = 0;
  std::string prefix = "packing";
};

int run_render(const RenderArgs& a) {
  bp_results* raw = nullptr;
  check(bp_results_read(a.results.c_str(), &raw));
  const ResultsPtr res(raw);
  if (bp_results_size(res.get()) == 0) {
    std::fprintf(stderr, "binpack: %s holds no results\n", a.results.c_str());
    return kExitData;
  }
  std::size_t files = 0;
  check(bp_results_render_svg(res.get(), a.record, a.prefix.c_str(), &files));
  std::fprintf(stderr, "wrote %zu image(s) with prefix %s\n", files, a.prefix.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regular 2D/3D bin packing with height-map placement"};
  app.set_config("--config", "", "read options from an INI or TOML file");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bp_version()));

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a dataset of random instances");
  gen_cmd->add_option("--mode", gen.mode, "2d or 3d")->check(CLI::IsMember({"2d", "3d"}));
  gen_cmd->add_option("--n", gen.n, "objects per instance (default 40 in 2d, 70 in 3d)");
  gen_cmd->add_option("--count", gen.count, "number of instances");
  gen_cmd->add_option("--dim-low", gen.dim_low, "smallest object side");
  gen_cmd->add_option("--dim-high", gen.dim_high, "largest object side");
  gen_cmd->add_option("--box", gen.box, "box extent, e.g. 10,10 or 10,10,10");
  gen_cmd->add_option("--seed", gen.seed, "dataset seed");
  gen_cmd->add_option("--out", gen.out, "output file")->required();

  PackArgs pack;
  CLI::App* pack_cmd = app.add_subcommand("pack", "pack every instance and write results");
  pack_cmd->add_option("--data", pack.data, "dataset file")->required();
  pack_cmd->add_option("--method", pack.method, "random, bbox, brkga or drl");
  pack_cmd->add_option("--out", pack.out, "results file")->required();
  add_method_options(pack_cmd, pack.m);

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "print the metrics table");
  eval_cmd->add_option("--data", eval.data, "dataset file");
  eval_cmd->add_option("--results", eval.results, "evaluate a stored results file instead");
  eval_cmd->add_option("--method", eval.methods, "method(s) to run");
  eval_cmd->add_flag("--all", eval.all, "Random, B-Box Seq, BRKGA and, with --model, DRL");
  eval_cmd->add_option("--out", eval.out, "also write the table as a JSON record");
  add_method_options(eval_cmd, eval.m);

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train the pointer-network policy");
  train_cmd->add_option("--mode", train.mode, "2d or 3d")->check(CLI::IsMember({"2d", "3d"}));
  train_cmd->add_flag("--desk", train.desk, "reduced single-core configuration (2d, n=10)");
  train_cmd->add_option("--n", train.n, "objects per generated instance");
  train_cmd->add_option("--train-size", train.train_size, "training instances");
  train_cmd->add_option("--val-size", train.val_size, "validation instances");
  train_cmd->add_option("--epochs", train.epochs, "total epochs");
  train_cmd->add_option("--batch-size", train.batch_size, "instances per update");
  train_cmd->add_option("--lr", train.lr, "learning rate");
  train_cmd->add_option("--hidden", train.hidden, "embedding and hidden width");
  train_cmd->add_option("--alpha", train.alpha, "compactness weight");
  train_cmd->add_option("--beta", train.beta, "pyramid weight");
  train_cmd->add_option("--seed", train.seed, "initialisation and sampling seed");
  train_cmd->add_option("--data-seed", train.data_seed, "seed of generated datasets");
  train_cmd->add_flag("--clip", train.clip, "clip gradient norms at 2.0");
  train_cmd->add_option("--clip-norm", train.clip_norm, "clip gradient norms at this value");
  train_cmd->add_option("--checkpoint", train.checkpoint, "checkpoint written every epoch");
  train_cmd->add_option("--log", train.log, "newline-delimited training log");
  train_cmd->add_option("--resume", train.resume, "continue from a training checkpoint");
  train_cmd->add_option("--train-data", train.train_data, "training dataset file");
  train_cmd->add_option("--val-data", train.val_data, "validation dataset file");

  RenderArgs render;
  CLI::App* render_cmd = app.add_subcommand("render", "draw one packing result as SVG");
  render_cmd->add_option("--result", render.results, "results file")->required();
  render_cmd->add_option("--record", render.record, "0-based result index");
  render_cmd->add_option("--out-prefix", render.prefix, "files are <prefix>_box<k>.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*pack_cmd) return run_pack(pack);
    if (*eval_cmd) return run_eval(eval);
    if (*train_cmd) return run_train(train, *train_cmd);
    if (*render_cmd) return run_render(render);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "binpack: %s\n", e.what());
    return kExitUsage;
  } catch (const Failure& f) {
    std::fprintf(stderr, "binpack: %s: %s\n", bp_status_name(f.status), f.message.c_str());
    return exit_code_for(f.status);
  }
  return kExitUsage;
}
