#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/metrics.hpp"
#include "core/placement.hpp"
#include "core/policy.hpp"

namespace binpack {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  ModelConfig model;
  double learning_rate = 5e-4;
  int batch_size = 50;
  int epochs = 5;
  int train_size = 100000;
  int val_size = 10000;
  RewardConfig reward;
  std::uint64_t seed = 0;
  AdamConfig adam;
  double clip_norm = 0.0;  // 0 disables clipping; 2.0 when enabled from the CLI
};

void validate(const TrainConfig& cfg);

// Batches per run: epochs * floor(train_size / batch_size). Each batch makes
// one actor and one critic step.
std::int64_t planned_batches(const TrainConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Reduced configuration for a single laptop core: 2D, n=10, 10,000 training
// and 1,000 validation instances, 3 epochs.
TrainConfig desk_train_config();
GenConfig desk_gen_config();

struct Rollout {
  DecodeTrace trace;
  PackingResult result;
  double penalty = 0.0;
};

// Sample-mode decode, placement and penalty for each instance, drawing from
// rng in instance order.
std::vector<Rollout> rollout(std::span<const Instance> batch,
                             const ActorParams& params, Rng& rng,
                             const RewardConfig& reward);

struct Losses {
  double actor = 0.0;
  double critic = 0.0;
};

// actor = (R - V) * sum log P, critic = (R - V)^2. The advantage is a
// constant in the actor gradient.
Losses losses(double log_prob_sum, double penalty, double value);

// Adam over a fixed subset of named tensors.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<std::string> names, AdamConfig cfg);

  void step(PolicyParams& params, const PolicyParams& grad, double learning_rate);
  std::int64_t steps() const { return steps_; }

  void save(Checkpoint& ckpt, const std::string& prefix) const;
  void load(const Checkpoint& ckpt, const std::string& prefix,
            const PolicyParams& shapes);

 private:
  std::vector<std::string> names_;
  AdamConfig cfg_;
  std::map<std::string, MatrixXd> m_, v_;
  std::int64_t steps_ = 0;
};

struct UpdateRecord {
  int epoch = 0;
  int batch = 0;
  double mean_penalty = 0.0;
  double mean_value = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double actor_grad_norm = 0.0;
  double critic_grad_norm = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double val_penalty = 0.0;
};

struct TrainLog {
  std::vector<UpdateRecord> updates;
  std::vector<EpochRecord> epochs;
  // Number of optimizer steps: one actor and one critic step per batch.
  std::int64_t optimizer_steps() const {
    return 2 * static_cast<std::int64_t>(updates.size());
  }
};

std::string to_record(const UpdateRecord& r);
std::string to_record(const EpochRecord& r);

// Mean penalty of greedy decoding over a dataset.
double greedy_penalty(std::span<const Instance> instances, const ActorParams& params,
                      const RewardConfig& reward);

// Owns the model and both optimizers. The encoder is updated by both.
class Trainer {
 public:
  Trainer(TrainConfig cfg, PolicyModel model);

  // One rollout + one actor step + one critic step. Throws NumericError on
  // non-finite losses or gradients, after writing the batch to
  // diagnostic_path when set.
  UpdateRecord train_batch(std::span<const Instance> batch, int epoch, int index);

  // Runs one epoch over the training set and validates greedily.
  EpochRecord run_epoch(std::span<const Instance> train,
                        std::span<const Instance> val, int epoch,
                        std::vector<UpdateRecord>* updates);

  const PolicyModel& model() const { return model_; }
  const TrainConfig& config() const { return cfg_; }
  int epochs_completed() const { return epochs_completed_; }
  const Adam& actor_optimizer() const { return actor_opt_; }
  const Adam& critic_optimizer() const { return critic_opt_; }

  std::filesystem::path diagnostic_path;

  Checkpoint checkpoint() const;
  static Trainer from_checkpoint(const Checkpoint& ckpt);

 private:
  TrainConfig cfg_;
  PolicyModel model_;
  Adam actor_opt_;
  Adam critic_opt_;
  int epochs_completed_ = 0;
};

struct TrainOptions {
  std::filesystem::path checkpoint_path;  // written after every epoch
  std::filesystem::path log_path;         // newline-delimited records
  std::filesystem::path resume_from;      // training checkpoint
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainOutcome {
  PolicyModel model;
  TrainLog log;
};

// Trains until cfg.epochs epochs are complete. With resume_from set, the
// stored config, model, optimizer state and epoch counter are restored (only
// cfg.epochs is taken from the argument) and training continues from there;
// the log file is then appended to rather than replaced.
TrainOutcome train(const TrainConfig& cfg, std::span<const Instance> train_set,
                   std::span<const Instance> val_set, const TrainOptions& options = {});

}  // namespace binpack
