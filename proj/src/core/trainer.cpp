#include "core/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"
#include "core/io_util.hpp"

namespace binpack {

using nlohmann::json;

void validate(const TrainConfig& cfg) {
  validate(cfg.model);
  validate(cfg.reward);
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (cfg.train_size < 1 || cfg.val_size < 1) {
    throw ConfigError("train and validation sizes must be >= 1");
  }
  if (!(cfg.reward.alpha + cfg.reward.beta > 0.0)) {
    throw ConfigError("alpha + beta must be positive");
  }
  if (!(cfg.clip_norm >= 0.0)) throw ConfigError("clip norm must be >= 0");
}

std::int64_t planned_batches(const TrainConfig& cfg) {
  return static_cast<std::int64_t>(cfg.epochs) * (cfg.train_size / cfg.batch_size);
}

json to_json(const TrainConfig& cfg) {
  return {{"model", to_json(cfg.model)},
          {"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"train_size", cfg.train_size},
          {"val_size", cfg.val_size},
          {"alpha", cfg.reward.alpha},
          {"beta", cfg.reward.beta},
          {"scale", cfg.reward.scale},
          {"seed", cfg.seed},
          {"adam_beta1", cfg.adam.beta1},
          {"adam_beta2", cfg.adam.beta2},
          {"adam_epsilon", cfg.adam.epsilon},
          {"clip_norm", cfg.clip_norm}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.model = model_config_from_json(j.at("model"));
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.train_size = j.at("train_size").get<int>();
  cfg.val_size = j.at("val_size").get<int>();
  cfg.reward.alpha = j.at("alpha").get<double>();
  cfg.reward.beta = j.at("beta").get<double>();
  cfg.reward.scale = j.at("scale").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.adam.beta1 = j.at("adam_beta1").get<double>();
  cfg.adam.beta2 = j.at("adam_beta2").get<double>();
  cfg.adam.epsilon = j.at("adam_epsilon").get<double>();
  cfg.clip_norm = j.at("clip_norm").get<double>();
  validate(cfg);
  return cfg;
}

TrainConfig desk_train_config() {
  TrainConfig cfg;
  cfg.model.rank = 2;
  cfg.epochs = 3;
  cfg.train_size = 10000;
  cfg.val_size = 1000;
  return cfg;
}

GenConfig desk_gen_config() {
  GenConfig g = default_gen_config(2);
  g.objects = 10;
  return g;
}

std::vector<Rollout> rollout(std::span<const Instance> batch,
                             const ActorParams& params, Rng& rng,
                             const RewardConfig& reward) {
  std::vector<Rollout> out;
  out.reserve(batch.size());
  for (const Instance& inst : batch) {
    Rollout r;
    r.trace = decode(inst, params, DecodeMode::kSample, &rng);
    r.result = pack_sequence(inst, r.trace.order);
    r.penalty = penalty(r.result, reward);
    out.push_back(std::move(r));
  }
  return out;
}

Losses losses(double log_prob_sum, double penalty, double value) {
  const double advantage = penalty - value;
  return {advantage * log_prob_sum, advantage * advantage};
}

Adam::Adam(std::vector<std::string> names, AdamConfig cfg)
    : names_(std::move(names)), cfg_(cfg) {}

void Adam::step(PolicyParams& params, const PolicyParams& grad,
                double learning_rate) {
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  std::map<std::string_view, const MatrixXd*> grads;
  grad.for_each([&](std::string_view name, const MatrixXd& g) { grads[name] = &g; });
  params.for_each([&](std::string_view name, MatrixXd& p) {
    if (std::find(names_.begin(), names_.end(), name) == names_.end()) return;
    const MatrixXd& g = *grads.at(name);
    const std::string key(name);
    auto [mit, m_new] = m_.try_emplace(key, MatrixXd::Zero(p.rows(), p.cols()));
    auto [vit, v_new] = v_.try_emplace(key, MatrixXd::Zero(p.rows(), p.cols()));
    MatrixXd& m = mit->second;
    MatrixXd& v = vit->second;
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    p.array() -= learning_rate * (m.array() / bc1) /
                 ((v.array() / bc2).sqrt() + cfg_.epsilon);
  });
}

void Adam::save(Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.meta[prefix] = {{"steps", steps_},
                       {"beta1", cfg_.beta1},
                       {"beta2", cfg_.beta2},
                       {"epsilon", cfg_.epsilon},
                       {"names", names_}};
  for (const auto& name : names_) {
    auto m = m_.find(name);
    auto v = v_.find(name);
    if (m == m_.end()) continue;
    ckpt.tensors.emplace_back(prefix + ".m/" + name, m->second);
    ckpt.tensors.emplace_back(prefix + ".v/" + name, v->second);
  }
}

void Adam::load(const Checkpoint& ckpt, const std::string& prefix,
                const PolicyParams& shapes) {
  const json& meta = ckpt.meta.at(prefix);
  steps_ = meta.at("steps").get<std::int64_t>();
  cfg_.beta1 = meta.at("beta1").get<double>();
  cfg_.beta2 = meta.at("beta2").get<double>();
  cfg_.epsilon = meta.at("epsilon").get<double>();
  names_ = meta.at("names").get<std::vector<std::string>>();
  m_.clear();
  v_.clear();
  shapes.for_each([&](std::string_view name, const MatrixXd& p) {
    const std::string key(name);
    const MatrixXd* m = ckpt.find(prefix + ".m/" + key);
    const MatrixXd* v = ckpt.find(prefix + ".v/" + key);
    if (m == nullptr || v == nullptr) return;
    if (m->rows() != p.rows() || m->cols() != p.cols() || v->rows() != p.rows() ||
        v->cols() != p.cols()) {
      throw ParseError("optimizer state for " + key + " has the wrong shape");
    }
    m_[key] = *m;
    v_[key] = *v;
  });
}

std::string to_record(const UpdateRecord& r) {
  return json{{"type", "update"},
              {"epoch", r.epoch},
              {"batch", r.batch},
              {"mean_penalty", r.mean_penalty},
              {"mean_value", r.mean_value},
              {"actor_loss", r.actor_loss},
              {"critic_loss", r.critic_loss},
              {"actor_grad_norm", r.actor_grad_norm},
              {"critic_grad_norm", r.critic_grad_norm}}
      .dump();
}

std::string to_record(const EpochRecord& r) {
  return json{{"type", "epoch"}, {"epoch", r.epoch}, {"val_penalty", r.val_penalty}}
      .dump();
}

double greedy_penalty(std::span<const Instance> instances, const ActorParams& params,
                      const RewardConfig& reward) {
  if (instances.empty()) return 0.0;
  double total = 0.0;
  for (const Instance& inst : instances) {
    const DecodeTrace t = decode(inst, params, DecodeMode::kGreedy, nullptr);
    total += penalty(pack_sequence(inst, t.order), reward);
  }
  return total / static_cast<double>(instances.size());
}

namespace {

double group_norm(const PolicyParams& grad, bool (*in_group)(std::string_view)) {
  double sq = 0.0;
  grad.for_each([&](std::string_view name, const MatrixXd& g) {
    if (in_group(name)) sq += g.squaredNorm();
  });
  return std::sqrt(sq);
}

void scale_group(PolicyParams& grad, bool (*in_group)(std::string_view), double s) {
  grad.for_each([&](std::string_view name, MatrixXd& g) {
    if (in_group(name)) g *= s;
  });
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, PolicyModel model)
    : cfg_(std::move(cfg)),
      model_(std::move(model)),
      actor_opt_(actor_tensor_names(), cfg_.adam),
      critic_opt_(critic_tensor_names(), cfg_.adam) {
  validate(cfg_);
  if (model_.config.rank != cfg_.model.rank || model_.config.hidden != cfg_.model.hidden) {
    throw ConfigError("model shape does not match the training config");
  }
}

UpdateRecord Trainer::train_batch(std::span<const Instance> batch, int epoch,
                                  int index) {
  if (batch.empty()) throw ContractError("empty training batch");
  const PolicyParams& params = model_.params;
  Rng rng(derive_seed({cfg_.seed, 0x726f6c6cULL, static_cast<std::uint64_t>(epoch),
                       static_cast<std::uint64_t>(index)}));
  const std::vector<Rollout> rolls = rollout(batch, params.actor, rng, cfg_.reward);

  PolicyParams actor_grad = params.zeros_like();
  PolicyParams critic_grad = params.zeros_like();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  UpdateRecord rec;
  rec.epoch = epoch;
  rec.batch = index;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double R = rolls[i].penalty;
    const double V = critic_value(batch[i], params);
    const double lp = rolls[i].trace.total_log_prob();
    const Losses l = losses(lp, R, V);
    rec.mean_penalty += R * inv_b;
    rec.mean_value += V * inv_b;
    rec.actor_loss += l.actor * inv_b;
    rec.critic_loss += l.critic * inv_b;
    accumulate_log_prob_gradient(batch[i], params.actor, rolls[i].trace.order,
                                 (R - V) * inv_b, actor_grad);
    accumulate_critic_gradient(batch[i], params, -2.0 * (R - V) * inv_b, critic_grad);
  }
  rec.actor_grad_norm = group_norm(actor_grad, &is_actor_tensor);
  rec.critic_grad_norm = group_norm(critic_grad, &is_critic_tensor);

  if (!std::isfinite(rec.actor_loss) || !std::isfinite(rec.critic_loss) ||
      !std::isfinite(rec.actor_grad_norm) || !std::isfinite(rec.critic_grad_norm)) {
    std::string where;
    if (!diagnostic_path.empty()) {
      std::string dump = to_record(rec) + "\n";
      for (const Instance& inst : batch) dump += to_record(inst) + "\n";
      write_file_atomic(diagnostic_path, dump);
      where = "; batch written to " + diagnostic_path.string();
    }
    throw NumericError("non-finite loss or gradient at epoch " + std::to_string(epoch) +
                       " batch " + std::to_string(index) + where);
  }

  if (cfg_.clip_norm > 0.0) {
    if (rec.actor_grad_norm > cfg_.clip_norm) {
      scale_group(actor_grad, &is_actor_tensor, cfg_.clip_norm / rec.actor_grad_norm);
    }
    if (rec.critic_grad_norm > cfg_.clip_norm) {
      scale_group(critic_grad, &is_critic_tensor, cfg_.clip_norm / rec.critic_grad_norm);
    }
  }
  // Both gradients were taken at the same parameters; the shared encoder
  // receives both steps.
  actor_opt_.step(model_.params, actor_grad, cfg_.learning_rate);
  critic_opt_.step(model_.params, critic_grad, cfg_.learning_rate);
  return rec;
}

EpochRecord Trainer::run_epoch(std::span<const Instance> train,
                               std::span<const Instance> val, int epoch,
                               std::vector<UpdateRecord>* updates) {
  std::vector<int> perm(train.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffle_rng(derive_seed({cfg_.seed, 0x73687566ULL, static_cast<std::uint64_t>(epoch)}));
  std::shuffle(perm.begin(), perm.end(), shuffle_rng);

  const std::size_t batches = train.size() / cfg_.batch_size;
  std::vector<Instance> batch(cfg_.batch_size);
  for (std::size_t b = 0; b < batches; ++b) {
    for (int i = 0; i < cfg_.batch_size; ++i) batch[i] = train[perm[b * cfg_.batch_size + i]];
    UpdateRecord rec = train_batch(batch, epoch, static_cast<int>(b));
    if (updates != nullptr) updates->push_back(rec);
  }
  epochs_completed_ = epoch + 1;
  return {epoch, greedy_penalty(val, model_.params.actor, cfg_.reward)};
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ckpt = model_checkpoint(model_);
  ckpt.meta["train"] = to_json(cfg_);
  ckpt.meta["epochs_completed"] = epochs_completed_;
  actor_opt_.save(ckpt, "adam_actor");
  critic_opt_.save(ckpt, "adam_critic");
  return ckpt;
}

Trainer Trainer::from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.meta.contains("train")) throw ParseError("not a training checkpoint");
  try {
    Trainer t(train_config_from_json(ckpt.meta.at("train")), model_from_checkpoint(ckpt));
    t.epochs_completed_ = ckpt.meta.at("epochs_completed").get<int>();
    t.actor_opt_.load(ckpt, "adam_actor", t.model_.params);
    t.critic_opt_.load(ckpt, "adam_critic", t.model_.params);
    return t;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad training checkpoint: ") + e.what());
  }
}

TrainOutcome train(const TrainConfig& cfg, std::span<const Instance> train_set,
                   std::span<const Instance> val_set, const TrainOptions& options) {
  validate(cfg);
  if (train_set.size() < static_cast<std::size_t>(cfg.batch_size)) {
    throw ConfigError("training set smaller than one batch");
  }
  for (const Instance& inst : train_set) {
    if (inst.rank() != cfg.model.rank) throw ConfigError("training instance rank mismatch");
  }
  for (const Instance& inst : val_set) {
    if (inst.rank() != cfg.model.rank) throw ConfigError("validation instance rank mismatch");
  }

  const bool resuming = !options.resume_from.empty();
  auto resumed = [&] {
    Checkpoint ckpt = load_checkpoint(options.resume_from);
    if (ckpt.meta.contains("train") && ckpt.meta["train"].is_object()) {
      ckpt.meta["train"]["epochs"] = cfg.epochs;
    }
    return Trainer::from_checkpoint(ckpt);
  };
  Trainer trainer = resuming ? resumed() : Trainer(cfg, init_model(cfg.model));
  trainer.diagnostic_path = options.log_path.empty()
                                ? std::filesystem::path{}
                                : std::filesystem::path(options.log_path.string() +
                                                        ".nonfinite.jsonl");

  std::string log_text;
  if (resuming && !options.log_path.empty() && std::filesystem::exists(options.log_path)) {
    log_text = read_file(options.log_path);
  }

  TrainOutcome out;
  for (int epoch = trainer.epochs_completed(); epoch < cfg.epochs; ++epoch) {
    std::vector<UpdateRecord> updates;
    const EpochRecord er = trainer.run_epoch(train_set, val_set, epoch, &updates);
    for (const auto& u : updates) log_text += to_record(u) + "\n";
    log_text += to_record(er) + "\n";
    out.log.updates.insert(out.log.updates.end(), updates.begin(), updates.end());
    out.log.epochs.push_back(er);
    if (!options.log_path.empty()) write_file_atomic(options.log_path, log_text);
    if (!options.checkpoint_path.empty()) {
      save_checkpoint(trainer.checkpoint(), options.checkpoint_path);
    }
    if (options.on_epoch) options.on_epoch(er);
  }
  out.model = trainer.model();
  return out;
}

}  // namespace binpack
