#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "core/instance.hpp"
#include "core/rng.hpp"

namespace binpack {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ModelConfig {
  int rank = 2;     // input channels
  int hidden = 128; // embedding / hidden width
  std::uint64_t init_seed = 0;
};

void validate(const ModelConfig& cfg);

// Pointer-network parameters. Vectors are single-column matrices so every
// tensor can be visited uniformly.
struct ActorParams {
  MatrixXd enc_w;      // hidden x rank, width-1 convolution
  MatrixXd enc_b;      // hidden x 1
  MatrixXd gru_w_in;   // 3h x h, gate rows ordered reset, update, candidate
  MatrixXd gru_w_hid;  // 3h x h
  MatrixXd gru_b_in;   // 3h x 1
  MatrixXd gru_b_hid;  // 3h x 1
  MatrixXd att_w1;     // h x h, applied to encodings
  MatrixXd att_w2;     // h x h, applied to decoder state
  MatrixXd att_v;      // h x 1
  MatrixXd h0;         // h x 1, initial decoder state
};

// Critic layers 2..4. Layer 1 is the actor encoder itself.
struct CriticParams {
  MatrixXd w2, b2;  // h x h, h x 1
  MatrixXd w3, b3;  // h x h, h x 1
  MatrixXd w4, b4;  // 1 x h, 1 x 1
};

struct PolicyParams {
  ActorParams actor;
  CriticParams critic;

  // f(std::string_view name, MatrixXd& tensor) over every tensor once.
  template <class F>
  void for_each(F&& f) {
    f("encoder.weight", actor.enc_w);
    f("encoder.bias", actor.enc_b);
    f("gru.weight_in", actor.gru_w_in);
    f("gru.weight_hidden", actor.gru_w_hid);
    f("gru.bias_in", actor.gru_b_in);
    f("gru.bias_hidden", actor.gru_b_hid);
    f("attention.w1", actor.att_w1);
    f("attention.w2", actor.att_w2);
    f("attention.v", actor.att_v);
    f("decoder.h0", actor.h0);
    f("critic.w2", critic.w2);
    f("critic.b2", critic.b2);
    f("critic.w3", critic.w3);
    f("critic.b3", critic.b3);
    f("critic.w4", critic.w4);
    f("critic.b4", critic.b4);
  }
  template <class F>
  void for_each(F&& f) const {
    const_cast<PolicyParams*>(this)->for_each(
        [&](std::string_view name, MatrixXd& m) { f(name, std::as_const(m)); });
  }

  PolicyParams zeros_like() const;
  std::size_t parameter_count() const;
  friend bool operator==(const PolicyParams& a, const PolicyParams& b);
};

// Tensor names updated by the actor step and by the critic step. The
// encoder appears in both.
const std::vector<std::string>& actor_tensor_names();
const std::vector<std::string>& critic_tensor_names();
bool is_actor_tensor(std::string_view name);
bool is_critic_tensor(std::string_view name);

struct PolicyModel {
  ModelConfig config;
  PolicyParams params;
};

// Weights uniform in [-1/sqrt(h), 1/sqrt(h)] from config.init_seed; biases
// and h0 zero.
PolicyModel init_model(const ModelConfig& cfg);

// Raw object dimensions, one column per object (rank x n).
MatrixXd object_features(const Instance& instance);

// Encoding matrix, one column e_j per object (hidden x n).
MatrixXd encode(const Instance& instance, const ActorParams& params);

// u_j = v . tanh(W1 e_j + W2 h_next)
VectorXd attention_logits(const MatrixXd& encodings, const VectorXd& h_next,
                          const ActorParams& params);

VectorXd gru_cell(const VectorXd& input, const VectorXd& hidden,
                  const ActorParams& params);

// Log-softmax over unmasked entries; masked entries are -inf. Throws
// ContractError when every entry is masked.
VectorXd masked_log_softmax(const VectorXd& logits,
                            const std::vector<char>& selected);

enum class DecodeMode { kSample, kGreedy };

struct DecoderContext {
  MatrixXd encodings;  // hidden x n
  MatrixXd keys;       // W1 * encodings
};
DecoderContext make_decoder_context(const Instance& instance,
                                    const ActorParams& params);

struct DecodeState {
  VectorXd hidden;
  VectorXd input;
  std::vector<char> selected;
};
DecodeState initial_decode_state(const DecoderContext& ctx,
                                 const ActorParams& params);

struct StepOutput {
  int choice = -1;
  double log_prob = 0.0;
  VectorXd hidden;  // h_{t+1}
  VectorXd probs;   // full masked distribution over objects
};

// One pointer step. Does not mutate state; advance() applies the choice.
StepOutput decode_step(const DecoderContext& ctx, const DecodeState& state,
                       const ActorParams& params, DecodeMode mode, Rng* rng);
void advance(DecodeState& state, const DecoderContext& ctx,
             const StepOutput& step);

struct DecodeTrace {
  PackingOrder order;
  std::vector<double> step_log_probs;
  DecodeMode mode = DecodeMode::kGreedy;
  double total_log_prob() const;
};

// rng may be null for greedy decoding.
DecodeTrace decode(const Instance& instance, const ActorParams& params,
                   DecodeMode mode, Rng* rng);

// Sum of step log-probabilities of a given order (teacher forced).
double sequence_log_prob(const Instance& instance, const ActorParams& params,
                         const PackingOrder& order);

// Adds coeff * d(sequence_log_prob)/d(actor params) into grad.actor and
// returns the log-probability.
double accumulate_log_prob_gradient(const Instance& instance,
                                    const ActorParams& params,
                                    const PackingOrder& order, double coeff,
                                    PolicyParams& grad);

// Shared encoder -> ReLU -> conv -> ReLU -> conv -> ReLU -> conv(1), then
// mean over objects.
double critic_value(const Instance& instance, const PolicyParams& params);

// Adds coeff * dV/d(params) into grad (critic layers and shared encoder) and
// returns V.
double accumulate_critic_gradient(const Instance& instance,
                                  const PolicyParams& params, double coeff,
                                  PolicyParams& grad);

}  // namespace binpack
