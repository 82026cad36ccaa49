#include <doctest.h>

#include <cmath>
#include <limits>

#include "core/checkpoint.hpp"
#include "core/errors.hpp"
#include "core/io_util.hpp"
#include "core/trainer.hpp"
#include "../support/fd_check.hpp"
#include "../support/temp_dir.hpp"

using namespace binpack;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.model = {2, 8, 3};
  cfg.batch_size = 10;
  cfg.epochs = 2;
  cfg.train_size = 40;
  cfg.val_size = 10;
  cfg.learning_rate = 1e-2;
  cfg.seed = 17;
  return cfg;
}

std::vector<Instance> tiny_data(int count, std::uint64_t seed) {
  GenConfig g = desk_gen_config();
  g.objects = 6;
  g.seed = seed;
  return generate_dataset(g, count);
}

bool bit_equal(const PolicyParams& a, const PolicyParams& b) { return a == b; }

}  // namespace

TEST_CASE("loss examples") {
  const Losses same = losses(-4.0, 0.6, 0.6);
  CHECK(same.actor == 0.0);
  CHECK(same.critic == 0.0);
  const Losses l = losses(-3.0, 0.75, 0.5);
  CHECK(l.actor == doctest::Approx(-0.75));
  CHECK(l.critic == doctest::Approx(0.0625));
}

TEST_CASE("hand-derived gradients agree with finite differences") {
  for (int rank : {2, 3}) {
    for (std::uint64_t s = 0; s < 8; ++s) {
      const auto rep = oracle::gradient_check(rank, 4, 3, 40 + s);
      INFO("rank " << rank << " draw " << s << " worst " << rep.worst_tensor);
      CHECK(rep.max_rel_error < 1e-4);
    }
  }
  const auto wide = oracle::gradient_check(2, 6, 5, 99);
  CHECK(wide.max_rel_error < 1e-4);
}

TEST_CASE("actor and critic gradients touch only their own tensors") {
  const PolicyModel m = oracle::fd_model(2, 4, 5);
  const Instance inst = tiny_data(1, 5)[0];
  PolicyParams ga = m.params.zeros_like();
  accumulate_log_prob_gradient(inst, m.params.actor, {0, 1, 2, 3, 4, 5}, 1.0, ga);
  PolicyParams gc = m.params.zeros_like();
  accumulate_critic_gradient(inst, m.params, 1.0, gc);
  ga.for_each([](std::string_view name, const MatrixXd& g) {
    if (!is_actor_tensor(name)) CHECK(g.isZero(0.0));
  });
  gc.for_each([](std::string_view name, const MatrixXd& g) {
    if (!is_critic_tensor(name)) CHECK(g.isZero(0.0));
  });
  CHECK(!ga.actor.enc_w.isZero(0.0));
  CHECK(!gc.actor.enc_w.isZero(0.0));
  CHECK(std::find(actor_tensor_names().begin(), actor_tensor_names().end(),
                  "encoder.weight") != actor_tensor_names().end());
  CHECK(std::find(critic_tensor_names().begin(), critic_tensor_names().end(),
                  "encoder.weight") != critic_tensor_names().end());
}

TEST_CASE("a batch update is one actor step then one critic step from the same gradients") {
  const TrainConfig cfg = tiny_config();
  const auto data = tiny_data(10, 1);
  const PolicyModel start = init_model(cfg.model);
  Trainer trainer(cfg, start);
  trainer.train_batch(data, 0, 0);

  // Replay by hand with the public pieces.
  Rng rng(derive_seed({cfg.seed, 0x726f6c6cULL, 0, 0}));
  const auto rolls = rollout(data, start.params.actor, rng, cfg.reward);
  PolicyParams ga = start.params.zeros_like(), gc = start.params.zeros_like();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double V = critic_value(data[i], start.params);
    const double adv = rolls[i].penalty - V;
    accumulate_log_prob_gradient(data[i], start.params.actor, rolls[i].trace.order,
                                 adv * (1.0 / 10), ga);
    accumulate_critic_gradient(data[i], start.params, -2.0 * adv * (1.0 / 10), gc);
  }
  PolicyModel both = start;
  Adam actor(actor_tensor_names(), cfg.adam), critic(critic_tensor_names(), cfg.adam);
  actor.step(both.params, ga, cfg.learning_rate);
  critic.step(both.params, gc, cfg.learning_rate);
  CHECK(bit_equal(both.params, trainer.model().params));

  PolicyModel actor_only = start;
  Adam a2(actor_tensor_names(), cfg.adam);
  a2.step(actor_only.params, ga, cfg.learning_rate);
  CHECK(actor_only.params.actor.enc_w != trainer.model().params.actor.enc_w);
  CHECK(actor_only.params.actor.gru_w_in == trainer.model().params.actor.gru_w_in);
  CHECK(start.params.critic.w2 != trainer.model().params.critic.w2);
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  TrainConfig cfg = tiny_config();
  cfg.learning_rate = 0.0;
  const PolicyModel start = init_model(cfg.model);
  const auto data = tiny_data(40, 2);
  const TrainOutcome out = train(cfg, data, tiny_data(10, 3));
  CHECK(bit_equal(out.model.params, start.params));
  CHECK(out.log.updates.size() == 8);
}

TEST_CASE("training is deterministic for fixed seeds") {
  const TrainConfig cfg = tiny_config();
  const auto data = tiny_data(40, 4), val = tiny_data(10, 5);
  const TrainOutcome a = train(cfg, data, val);
  const TrainOutcome b = train(cfg, data, val);
  CHECK(bit_equal(a.model.params, b.model.params));
  REQUIRE(a.log.updates.size() == b.log.updates.size());
  for (std::size_t i = 0; i < a.log.updates.size(); ++i)
    CHECK(to_record(a.log.updates[i]) == to_record(b.log.updates[i]));
  CHECK(a.log.epochs[1].val_penalty == b.log.epochs[1].val_penalty);
}

TEST_CASE("rollout of single-object instances") {
  GenConfig g = desk_gen_config();
  g.objects = 1;
  g.seed = 8;
  const auto data = generate_dataset(g, 3);
  const PolicyModel m = init_model({2, 4, 0});
  Rng rng(1);
  for (const Rollout& r : rollout(data, m.params.actor, rng, {})) {
    CHECK(r.trace.total_log_prob() == 0.0);
    CHECK(r.penalty == penalty(r.result));
    CHECK(r.result.boxes_used() == 1);
  }
}

TEST_CASE("update counts") {
  TrainConfig full;
  CHECK(planned_batches(full) == 10000);
  CHECK(2 * planned_batches(full) == 20000);
  TrainConfig cfg = tiny_config();
  cfg.train_size = 45;  // the partial last batch is dropped
  const auto out = train(cfg, tiny_data(45, 6), tiny_data(10, 7));
  CHECK(out.log.updates.size() == 8);
  CHECK(out.log.optimizer_steps() == 16);
  CHECK(planned_batches(cfg) == 8);
}

TEST_CASE("config validation and serialisation") {
  TrainConfig cfg = tiny_config();
  cfg.clip_norm = 2.0;
  const TrainConfig back = train_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  cfg.batch_size = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = tiny_config();
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  CHECK_THROWS_AS(train(tiny_config(), tiny_data(5, 1), tiny_data(5, 2)), ConfigError);
}

TEST_CASE("checkpoints round trip bit-exactly") {
  TempDir dir("ckpt");
  PolicyModel m = oracle::fd_model(3, 6, 9);
  m.params.actor.enc_w(0, 0) = std::nextafter(1.0, 2.0);
  m.params.critic.b4(0, 0) = -0.0;
  save_model(m, dir / "m.bin");
  const PolicyModel back = load_model(dir / "m.bin");
  CHECK(back.config.rank == 3);
  CHECK(back.config.hidden == 6);
  CHECK(bit_equal(back.params, m.params));
  CHECK(std::signbit(back.params.critic.b4(0, 0)));
  CHECK(serialize(model_checkpoint(back)) == serialize(model_checkpoint(m)));

  std::string bytes = read_file(dir / "m.bin");
  CHECK_THROWS_AS(deserialize(bytes.substr(0, bytes.size() - 3)), ParseError);
  bytes[0] = 'X';
  CHECK_THROWS_AS(deserialize(bytes), ParseError);
  CHECK_THROWS_AS(load_model(dir / "missing.bin"), IoError);
}

TEST_CASE("resumed training matches uninterrupted training") {
  TempDir dir("resume");
  TrainConfig cfg = tiny_config();
  cfg.epochs = 3;
  const auto data = tiny_data(40, 10), val = tiny_data(10, 11);

  TrainOptions full;
  full.checkpoint_path = dir / "full.ckpt";
  full.log_path = dir / "full.jsonl";
  const TrainOutcome a = train(cfg, data, val, full);

  TrainConfig first = cfg;
  first.epochs = 1;
  TrainOptions part;
  part.checkpoint_path = dir / "part.ckpt";
  part.log_path = dir / "part.jsonl";
  train(first, data, val, part);
  part.resume_from = dir / "part.ckpt";
  const TrainOutcome b = train(cfg, data, val, part);

  CHECK(bit_equal(a.model.params, b.model.params));
  CHECK(read_file(dir / "full.jsonl") == read_file(dir / "part.jsonl"));
  CHECK(read_file(dir / "full.ckpt") == read_file(dir / "part.ckpt"));
  CHECK(b.log.epochs.size() == 2);
  CHECK(b.log.epochs.front().epoch == 1);

  const Trainer t = Trainer::from_checkpoint(load_checkpoint(dir / "full.ckpt"));
  CHECK(t.epochs_completed() == 3);
  CHECK(t.actor_optimizer().steps() == 12);
  CHECK(t.critic_optimizer().steps() == 12);
  CHECK(bit_equal(load_model(dir / "full.ckpt").params, a.model.params));
}

TEST_CASE("non-finite gradients abort with a dump of the batch") {
  TempDir dir("nan");
  const TrainConfig cfg = tiny_config();
  PolicyModel m = init_model(cfg.model);
  m.params.critic.w4(0, 0) = std::numeric_limits<double>::quiet_NaN();
  Trainer t(cfg, m);
  t.diagnostic_path = dir / "dump.jsonl";
  const auto data = tiny_data(10, 12);
  CHECK_THROWS_AS(t.train_batch(data, 0, 0), NumericError);
  const std::string dump = read_file(dir / "dump.jsonl");
  CHECK(std::count(dump.begin(), dump.end(), '\n') == 11);
  CHECK(dump.find(to_record(data[3])) != std::string::npos);
}
