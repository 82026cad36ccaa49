// Central finite-difference check of the hand-derived policy gradients.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "core/metrics.hpp"
#include "core/policy.hpp"
#include "core/trainer.hpp"

namespace oracle {

struct FdReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
};

// Per-tensor error ||analytic - numeric|| / max(||analytic||, ||numeric||);
// tensors whose gradient is numerically zero on both sides are compared
// absolutely against tol_zero.
template <class Objective>
FdReport compare(binpack::PolicyParams params, const binpack::PolicyParams& analytic,
                 Objective&& f, bool (*in_group)(std::string_view), double eps = 1e-4,
                 double tol_zero = 1e-7) {
  FdReport rep;
  std::vector<const Eigen::MatrixXd*> grads;
  analytic.for_each([&](std::string_view, const Eigen::MatrixXd& g) { grads.push_back(&g); });
  std::size_t k = 0;
  params.for_each([&](std::string_view name, Eigen::MatrixXd& t) {
    const Eigen::MatrixXd& a = *grads[k++];
    if (!in_group(name)) return;
    Eigen::MatrixXd num(t.rows(), t.cols());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double keep = t.data()[i];
      auto at = [&](double offset) {
        t.data()[i] = keep + offset;
        return f(params);
      };
      // Fourth-order central stencil.
      num.data()[i] = (-at(2 * eps) + 8 * at(eps) - 8 * at(-eps) + at(-2 * eps)) / (12 * eps);
      t.data()[i] = keep;
    }
    const double scale = std::max(a.norm(), num.norm());
    const double err = scale < tol_zero ? (a - num).norm() : (a - num).norm() / scale;
    if (err > rep.max_rel_error) {
      rep.max_rel_error = err;
      rep.worst_tensor = std::string(name);
    }
  });
  return rep;
}

// Random parameters (including biases and h0) for one draw.
inline binpack::PolicyModel fd_model(int rank, int hidden, std::uint64_t seed) {
  binpack::PolicyModel m = binpack::init_model({rank, hidden, seed});
  binpack::Rng rng(binpack::derive_seed({seed, 0x6664}));
  std::uniform_real_distribution<double> d(-0.8, 0.8);
  m.params.for_each([&](std::string_view, Eigen::MatrixXd& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = d(rng);
  });
  return m;
}

// Worst relative error of the actor and critic loss gradients for one random
// draw. The actor loss holds the advantage fixed at its current value, as
// the update does; the critic loss holds the penalty fixed.
inline FdReport gradient_check(int rank, int hidden, int n, std::uint64_t seed) {
  using namespace binpack;
  GenConfig g = default_gen_config(rank);
  g.objects = n;
  g.seed = seed;
  const Instance inst = generate_instance(g);
  const PolicyModel m = fd_model(rank, hidden, seed);
  Rng rng(seed);
  const PackingOrder order = decode(inst, m.params.actor, DecodeMode::kSample, &rng).order;
  const double R = penalty(pack_sequence(inst, order));
  const double V = critic_value(inst, m.params);
  const double lp = sequence_log_prob(inst, m.params.actor, order);

  PolicyParams ga = m.params.zeros_like();
  accumulate_log_prob_gradient(inst, m.params.actor, order, R - V, ga);
  FdReport actor = compare(
      m.params, ga,
      [&](const PolicyParams& p) {
        return losses(sequence_log_prob(inst, p.actor, order), R, V).actor;
      },
      &is_actor_tensor);

  PolicyParams gc = m.params.zeros_like();
  accumulate_critic_gradient(inst, m.params, -2.0 * (R - V), gc);
  FdReport critic = compare(
      m.params, gc,
      [&](const PolicyParams& p) { return losses(lp, R, critic_value(inst, p)).critic; },
      &is_critic_tensor);
  if (critic.max_rel_error > actor.max_rel_error) {
    critic.worst_tensor = "critic:" + critic.worst_tensor;
    return critic;
  }
  actor.worst_tensor = "actor:" + actor.worst_tensor;
  return actor;
}

}  // namespace oracle
