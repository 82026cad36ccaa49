#include "core/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace binpack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

VectorXd sigmoid(const VectorXd& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

std::vector<std::string> collect_names(bool (*pred)(std::string_view)) {
  std::vector<std::string> out;
  PolicyParams p;
  p.for_each([&](std::string_view name, MatrixXd&) {
    if (pred(name)) out.emplace_back(name);
  });
  return out;
}

}  // namespace

void validate(const ModelConfig& cfg) {
  if (cfg.rank != 2 && cfg.rank != 3) throw ConfigError("model rank must be 2 or 3");
  if (cfg.hidden < 1) throw ConfigError("hidden width must be >= 1");
}

PolicyParams PolicyParams::zeros_like() const {
  PolicyParams z = *this;
  z.for_each([](std::string_view, MatrixXd& m) { m.setZero(); });
  return z;
}

std::size_t PolicyParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const MatrixXd& m) { n += m.size(); });
  return n;
}

bool operator==(const PolicyParams& a, const PolicyParams& b) {
  std::vector<const MatrixXd*> lhs;
  a.for_each([&](std::string_view, const MatrixXd& m) { lhs.push_back(&m); });
  std::size_t i = 0;
  bool equal = true;
  b.for_each([&](std::string_view, const MatrixXd& m) {
    const MatrixXd& l = *lhs[i++];
    if (l.rows() != m.rows() || l.cols() != m.cols() || l != m) equal = false;
  });
  return equal;
}

bool is_actor_tensor(std::string_view name) {
  return !name.starts_with("critic.");
}

bool is_critic_tensor(std::string_view name) {
  return name.starts_with("critic.") || name.starts_with("encoder.");
}

const std::vector<std::string>& actor_tensor_names() {
  static const std::vector<std::string> names = collect_names(&is_actor_tensor);
  return names;
}

const std::vector<std::string>& critic_tensor_names() {
  static const std::vector<std::string> names = collect_names(&is_critic_tensor);
  return names;
}

PolicyModel init_model(const ModelConfig& cfg) {
  validate(cfg);
  const int h = cfg.hidden;
  PolicyModel model;
  model.config = cfg;
  ActorParams& a = model.params.actor;
  CriticParams& c = model.params.critic;
  a.enc_w.resize(h, cfg.rank);
  a.enc_b = MatrixXd::Zero(h, 1);
  a.gru_w_in.resize(3 * h, h);
  a.gru_w_hid.resize(3 * h, h);
  a.gru_b_in = MatrixXd::Zero(3 * h, 1);
  a.gru_b_hid = MatrixXd::Zero(3 * h, 1);
  a.att_w1.resize(h, h);
  a.att_w2.resize(h, h);
  a.att_v.resize(h, 1);
  a.h0 = MatrixXd::Zero(h, 1);
  c.w2.resize(h, h);
  c.b2 = MatrixXd::Zero(h, 1);
  c.w3.resize(h, h);
  c.b3 = MatrixXd::Zero(h, 1);
  c.w4.resize(1, h);
  c.b4 = MatrixXd::Zero(1, 1);

  Rng rng(cfg.init_seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  std::uniform_real_distribution<double> dist(-bound, bound);
  model.params.for_each([&](std::string_view name, MatrixXd& m) {
    const bool zero_init = name.find("bias") != std::string_view::npos ||
                           name.starts_with("critic.b") || name == "decoder.h0";
    if (zero_init) return;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    }
  });
  return model;
}

MatrixXd object_features(const Instance& instance) {
  MatrixXd s(instance.rank(), instance.size());
  for (int j = 0; j < instance.size(); ++j) {
    for (int a = 0; a < instance.rank(); ++a) s(a, j) = instance.objects[j][a];
  }
  return s;
}

MatrixXd encode(const Instance& instance, const ActorParams& params) {
  if (params.enc_w.cols() != instance.rank()) {
    throw ConfigError("instance rank " + std::to_string(instance.rank()) +
                      " does not match model input channels " +
                      std::to_string(params.enc_w.cols()));
  }
  MatrixXd e = params.enc_w * object_features(instance);
  e.colwise() += params.enc_b.col(0);
  return e;
}

VectorXd attention_logits(const MatrixXd& encodings, const VectorXd& h_next,
                          const ActorParams& params) {
  MatrixXd pre = params.att_w1 * encodings;
  pre.colwise() += params.att_w2 * h_next;
  return pre.array().tanh().matrix().transpose() * params.att_v.col(0);
}

VectorXd gru_cell(const VectorXd& input, const VectorXd& hidden,
                  const ActorParams& params) {
  const Eigen::Index h = hidden.size();
  const VectorXd gi = params.gru_w_in * input + params.gru_b_in.col(0);
  const VectorXd gh = params.gru_w_hid * hidden + params.gru_b_hid.col(0);
  const VectorXd r = sigmoid(gi.head(h) + gh.head(h));
  const VectorXd z = sigmoid(gi.segment(h, h) + gh.segment(h, h));
  const VectorXd cand =
      (gi.tail(h).array() + r.array() * gh.tail(h).array()).tanh().matrix();
  return ((1.0 - z.array()) * cand.array() + z.array() * hidden.array()).matrix();
}

VectorXd masked_log_softmax(const VectorXd& logits,
                            const std::vector<char>& selected) {
  double max_logit = kNegInf;
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    if (!selected[j]) max_logit = std::max(max_logit, logits[j]);
  }
  if (max_logit == kNegInf) throw ContractError("every object is masked");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    if (!selected[j]) sum += std::exp(logits[j] - max_logit);
  }
  const double log_norm = max_logit + std::log(sum);
  VectorXd out(logits.size());
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    out[j] = selected[j] ? kNegInf : logits[j] - log_norm;
  }
  return out;
}

DecoderContext make_decoder_context(const Instance& instance,
                                    const ActorParams& params) {
  DecoderContext ctx;
  ctx.encodings = encode(instance, params);
  ctx.keys = params.att_w1 * ctx.encodings;
  return ctx;
}

DecodeState initial_decode_state(const DecoderContext& ctx,
                                 const ActorParams& params) {
  DecodeState s;
  s.hidden = params.h0.col(0);
  s.input = VectorXd::Zero(ctx.encodings.rows());
  s.selected.assign(ctx.encodings.cols(), 0);
  return s;
}

StepOutput decode_step(const DecoderContext& ctx, const DecodeState& state,
                       const ActorParams& params, DecodeMode mode, Rng* rng) {
  StepOutput out;
  out.hidden = gru_cell(state.input, state.hidden, params);
  MatrixXd pre = ctx.keys;
  pre.colwise() += params.att_w2 * out.hidden;
  const VectorXd logits = pre.array().tanh().matrix().transpose() * params.att_v.col(0);
  const VectorXd logp = masked_log_softmax(logits, state.selected);
  out.probs = VectorXd::Zero(logp.size());
  for (Eigen::Index j = 0; j < logp.size(); ++j) {
    if (!state.selected[j]) out.probs[j] = std::exp(logp[j]);
  }

  const Eigen::Index n = logp.size();
  if (mode == DecodeMode::kGreedy) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (state.selected[j]) continue;
      if (out.choice < 0 || logp[j] > logp[out.choice]) out.choice = static_cast<int>(j);
    }
  } else {
    if (rng == nullptr) throw ContractError("sampling requires an rng");
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(*rng);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (state.selected[j]) continue;
      out.choice = static_cast<int>(j);  // last unmasked absorbs rounding
      acc += out.probs[j];
      if (u < acc) break;
    }
  }
  out.log_prob = logp[out.choice];
  return out;
}

void advance(DecodeState& state, const DecoderContext& ctx,
             const StepOutput& step) {
  state.hidden = step.hidden;
  state.input = ctx.encodings.col(step.choice);
  state.selected[step.choice] = 1;
}

double DecodeTrace::total_log_prob() const {
  double s = 0.0;
  for (double v : step_log_probs) s += v;
  return s;
}

DecodeTrace decode(const Instance& instance, const ActorParams& params,
                   DecodeMode mode, Rng* rng) {
  const DecoderContext ctx = make_decoder_context(instance, params);
  DecodeState state = initial_decode_state(ctx, params);
  DecodeTrace trace;
  trace.mode = mode;
  for (int t = 0; t < instance.size(); ++t) {
    const StepOutput step = decode_step(ctx, state, params, mode, rng);
    trace.order.push_back(step.choice);
    trace.step_log_probs.push_back(step.log_prob);
    advance(state, ctx, step);
  }
  return trace;
}

namespace {

// Per-step activations kept for the backward pass.
struct StepCache {
  VectorXd input, hidden, r, z, cand, gh_cand, next_hidden;
  MatrixXd att;  // tanh(keys + W2 h_next), hidden x n
  VectorXd probs;
  int choice;
};

}  // namespace

double sequence_log_prob(const Instance& instance, const ActorParams& params,
                         const PackingOrder& order) {
  if (!is_permutation_of(order, instance.size())) {
    throw ContractError("order is not a permutation");
  }
  const DecoderContext ctx = make_decoder_context(instance, params);
  DecodeState state = initial_decode_state(ctx, params);
  double total = 0.0;
  for (int choice : order) {
    const VectorXd h_next = gru_cell(state.input, state.hidden, params);
    MatrixXd pre = ctx.keys;
    pre.colwise() += params.att_w2 * h_next;
    const VectorXd logits = pre.array().tanh().matrix().transpose() * params.att_v.col(0);
    total += masked_log_softmax(logits, state.selected)[choice];
    state.hidden = h_next;
    state.input = ctx.encodings.col(choice);
    state.selected[choice] = 1;
  }
  return total;
}

double accumulate_log_prob_gradient(const Instance& instance,
                                    const ActorParams& params,
                                    const PackingOrder& order, double coeff,
                                    PolicyParams& grad) {
  if (!is_permutation_of(order, instance.size())) {
    throw ContractError("order is not a permutation");
  }
  const MatrixXd features = object_features(instance);
  const DecoderContext ctx = make_decoder_context(instance, params);
  const Eigen::Index h = params.h0.rows();
  const int n = instance.size();

  std::vector<StepCache> steps(n);
  std::vector<char> selected(n, 0);
  VectorXd hidden = params.h0.col(0);
  VectorXd input = VectorXd::Zero(h);
  double total = 0.0;
  for (int t = 0; t < n; ++t) {
    StepCache& c = steps[t];
    c.input = input;
    c.hidden = hidden;
    const VectorXd gi = params.gru_w_in * input + params.gru_b_in.col(0);
    const VectorXd gh = params.gru_w_hid * hidden + params.gru_b_hid.col(0);
    c.r = sigmoid(gi.head(h) + gh.head(h));
    c.z = sigmoid(gi.segment(h, h) + gh.segment(h, h));
    c.gh_cand = gh.tail(h);
    c.cand = (gi.tail(h).array() + c.r.array() * c.gh_cand.array()).tanh().matrix();
    c.next_hidden =
        ((1.0 - c.z.array()) * c.cand.array() + c.z.array() * hidden.array()).matrix();
    MatrixXd pre = ctx.keys;
    pre.colwise() += params.att_w2 * c.next_hidden;
    c.att = pre.array().tanh().matrix();
    const VectorXd logits = c.att.transpose() * params.att_v.col(0);
    const VectorXd logp = masked_log_softmax(logits, selected);
    c.choice = order[t];
    c.probs = VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (!selected[j]) c.probs[j] = std::exp(logp[j]);
    }
    total += logp[c.choice];
    selected[c.choice] = 1;
    hidden = c.next_hidden;
    input = ctx.encodings.col(c.choice);
  }

  ActorParams& g = grad.actor;
  MatrixXd d_keys = MatrixXd::Zero(h, n);
  MatrixXd d_enc = MatrixXd::Zero(h, n);
  VectorXd d_hidden = VectorXd::Zero(h);  // gradient w.r.t. h_{t+1}
  for (int t = n - 1; t >= 0; --t) {
    const StepCache& c = steps[t];
    VectorXd d_logits = -coeff * c.probs;  // masked entries are already 0
    d_logits[c.choice] += coeff;
    g.att_v.col(0) += c.att * d_logits;
    const MatrixXd d_pre =
        ((params.att_v.col(0) * d_logits.transpose()).array() *
         (1.0 - c.att.array().square()))
            .matrix();
    d_keys += d_pre;
    const VectorXd d_query = d_pre.rowwise().sum();
    g.att_w2 += d_query * c.next_hidden.transpose();
    d_hidden += params.att_w2.transpose() * d_query;

    // GRU backward.
    const VectorXd d_cand = (d_hidden.array() * (1.0 - c.z.array())).matrix();
    const VectorXd d_z = (d_hidden.array() * (c.hidden.array() - c.cand.array())).matrix();
    const VectorXd d_a_cand =
        (d_cand.array() * (1.0 - c.cand.array().square())).matrix();
    const VectorXd d_r = (d_a_cand.array() * c.gh_cand.array()).matrix();
    const VectorXd d_a_z = (d_z.array() * c.z.array() * (1.0 - c.z.array())).matrix();
    const VectorXd d_a_r = (d_r.array() * c.r.array() * (1.0 - c.r.array())).matrix();
    VectorXd d_gi(3 * h), d_gh(3 * h);
    d_gi << d_a_r, d_a_z, d_a_cand;
    d_gh << d_a_r, d_a_z, (d_a_cand.array() * c.r.array()).matrix();
    g.gru_w_in += d_gi * c.input.transpose();
    g.gru_b_in.col(0) += d_gi;
    g.gru_w_hid += d_gh * c.hidden.transpose();
    g.gru_b_hid.col(0) += d_gh;
    if (t > 0) d_enc.col(steps[t - 1].choice) += params.gru_w_in.transpose() * d_gi;
    d_hidden = (d_hidden.array() * c.z.array()).matrix() +
               params.gru_w_hid.transpose() * d_gh;
  }
  g.h0.col(0) += d_hidden;
  g.att_w1 += d_keys * ctx.encodings.transpose();
  d_enc += params.att_w1.transpose() * d_keys;
  g.enc_w += d_enc * features.transpose();
  g.enc_b.col(0) += d_enc.rowwise().sum();
  return total;
}

namespace {

struct CriticForward {
  MatrixXd features, enc, a1, z2, a2, z3, a3;
  double value;
};

CriticForward critic_forward(const Instance& instance, const PolicyParams& params) {
  CriticForward f;
  f.features = object_features(instance);
  f.enc = encode(instance, params.actor);
  f.a1 = f.enc.cwiseMax(0.0);
  f.z2 = params.critic.w2 * f.a1;
  f.z2.colwise() += params.critic.b2.col(0);
  f.a2 = f.z2.cwiseMax(0.0);
  f.z3 = params.critic.w3 * f.a2;
  f.z3.colwise() += params.critic.b3.col(0);
  f.a3 = f.z3.cwiseMax(0.0);
  const MatrixXd out = params.critic.w4 * f.a3;  // 1 x n
  f.value = out.mean() + params.critic.b4(0, 0);
  return f;
}

MatrixXd relu_grad(const MatrixXd& upstream, const MatrixXd& pre) {
  return (pre.array() > 0.0).select(upstream, 0.0);
}

}  // namespace

double critic_value(const Instance& instance, const PolicyParams& params) {
  return critic_forward(instance, params).value;
}

double accumulate_critic_gradient(const Instance& instance,
                                  const PolicyParams& params, double coeff,
                                  PolicyParams& grad) {
  const CriticForward f = critic_forward(instance, params);
  const double n = static_cast<double>(instance.size());
  CriticParams& g = grad.critic;
  const MatrixXd d_out = MatrixXd::Constant(1, instance.size(), coeff / n);
  g.b4(0, 0) += coeff;
  g.w4 += d_out * f.a3.transpose();
  const MatrixXd d_z3 = relu_grad(params.critic.w4.transpose() * d_out, f.z3);
  g.w3 += d_z3 * f.a2.transpose();
  g.b3.col(0) += d_z3.rowwise().sum();
  const MatrixXd d_z2 = relu_grad(params.critic.w3.transpose() * d_z3, f.z2);
  g.w2 += d_z2 * f.a1.transpose();
  g.b2.col(0) += d_z2.rowwise().sum();
  const MatrixXd d_enc = relu_grad(params.critic.w2.transpose() * d_z2, f.enc);
  grad.actor.enc_w += d_enc * f.features.transpose();
  grad.actor.enc_b.col(0) += d_enc.rowwise().sum();
  return f.value;
}

}  // namespace binpack
