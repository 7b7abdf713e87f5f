#include <doctest.h>

#include <random>
#include <sstream>

#include "clrimpute/error.hpp"
#include "clrimpute/metrics.hpp"
#include "clrimpute/pso_adapter.hpp"
#include "clrimpute/sgd_trainer.hpp"
#include "clrimpute/synth.hpp"

using namespace clr;

namespace {

SwarmConfig wide_config() {
  SwarmConfig cfg;
  cfg.eta_bounds = {1e-4, 10.0};
  cfg.lambda_bounds = {0.0, 10.0};
  cfg.velocity_fraction = 1.0;
  return cfg;
}

Particle at(Hyperparams m, Hyperparams n, Hyperparams pb) {
  Particle p;
  p.position = m;
  p.velocity = n;
  p.best.position = pb;
  return p;
}

SplitData synth_splits(std::uint64_t seed) {
  SynthSpec spec;
  spec.dims = {6, 5, 40};
  spec.observed_fraction = 0.5;
  spec.seed = seed;
  const auto s = generate(spec);
  return partition(s.observed, split(s.observed, {0.4, 0.3, 0.3}, seed));
}

}  // namespace

TEST_CASE("inertia-only step translates by the velocity") {
  auto cfg = wide_config();
  cfg.inertia = 1.0;
  cfg.c1 = cfg.c2 = 0.0;
  std::vector<Particle> swarm{at({1.0, 2.0}, {0.5, -0.25}, {3.0, 3.0})};
  GlobalBest gb{{4.0, 4.0}, 0.1, 0};
  pso_step(swarm, gb, cfg, [] { return 0.5; });
  CHECK(swarm[0].velocity == Hyperparams{0.5, -0.25});
  CHECK(swarm[0].position.eta == doctest::Approx(1.5));
  CHECK(swarm[0].position.lambda == doctest::Approx(1.75));
}

TEST_CASE("full attraction moves onto the global best") {
  auto cfg = wide_config();
  cfg.inertia = 0.0;
  cfg.c1 = 0.0;
  cfg.c2 = 1.0;
  std::vector<Particle> swarm{at({1.0, 2.0}, {0.3, 0.3}, {3.0, 3.0})};
  GlobalBest gb{{4.0, 0.5}, 0.1, 0};
  pso_step(swarm, gb, cfg, [] { return 1.0; });
  CHECK(swarm[0].position.eta == doctest::Approx(4.0));
  CHECK(swarm[0].position.lambda == doctest::Approx(0.5));
}

TEST_CASE("velocity update with seeded draws matches hand evaluation") {
  auto cfg = wide_config();
  cfg.inertia = 0.7;
  cfg.c1 = cfg.c2 = 1.5;
  const Hyperparams m{0.4, 0.3}, n{0.05, -0.02}, pb{0.5, 0.1}, g{0.2, 0.6};
  std::vector<Particle> swarm{at(m, n, pb)};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> drawn;
  pso_step(swarm, {g, 0.1, 0}, cfg, [&] {
    drawn.push_back(unit(rng));
    return drawn.back();
  });
  REQUIRE(drawn.size() == 2);
  const double r1 = drawn[0], r2 = drawn[1];
  const double ne = 0.7 * 0.05 + 1.5 * r1 * (0.5 - 0.4) + 1.5 * r2 * (0.2 - 0.4);
  const double nl = 0.7 * -0.02 + 1.5 * r1 * (0.1 - 0.3) + 1.5 * r2 * (0.6 - 0.3);
  CHECK(swarm[0].velocity.eta == doctest::Approx(ne).epsilon(1e-15));
  CHECK(swarm[0].velocity.lambda == doctest::Approx(nl).epsilon(1e-15));
  CHECK(swarm[0].position.eta == doctest::Approx(0.4 + ne).epsilon(1e-15));
  CHECK(swarm[0].position.lambda == doctest::Approx(0.3 + nl).epsilon(1e-15));
}

TEST_CASE("velocity and position are clamped") {
  SwarmConfig cfg;  // eta in [1e-4, 0.1], velocity limit 0.2 of the range
  cfg.inertia = 1.0;
  cfg.c1 = cfg.c2 = 0.0;
  std::vector<Particle> swarm{at({0.09, 0.05}, {1.0, -1.0}, {0.05, 0.05})};
  pso_step(swarm, {{0.05, 0.05}, 0.1, 0}, cfg, [] { return 0.0; });
  CHECK(swarm[0].velocity.eta == doctest::Approx(0.2 * (0.1 - 1e-4)));
  CHECK(swarm[0].velocity.lambda == doctest::Approx(-0.2 * (0.1 - 1e-4)));
  CHECK(swarm[0].position.eta == 0.1);
  CHECK(swarm[0].position.lambda == doctest::Approx(0.05 - 0.2 * (0.1 - 1e-4)));
}

TEST_CASE("dead particles are not moved") {
  auto cfg = wide_config();
  std::vector<Particle> swarm{at({1.0, 1.0}, {0.5, 0.5}, {1.0, 1.0})};
  swarm[0].alive = false;
  int draws = 0;
  pso_step(swarm, {{2.0, 2.0}, 0.1, 0}, cfg, [&] { return ++draws, 0.5; });
  CHECK(draws == 0);
  CHECK(swarm[0].position == Hyperparams{1.0, 1.0});
}

TEST_CASE("fitness Q is validation RMSE") {
  auto zero = ClrParams::zeros({1, 1, 2}, 1, 1);
  const std::vector<Entry> targets{{{0, 0, 0}, 0.0}, {{0, 0, 1}, 1.0}};
  CHECK(fitness_Q(zero, targets) == doctest::Approx(0.5).epsilon(1e-15));
  const std::vector<Entry> perfect{{{0, 0, 0}, 0.5}};
  CHECK(fitness_Q(zero, perfect) == 0.0);
  CHECK_THROWS_AS(fitness_Q(zero, std::vector<Entry>{}), DataError);

  const auto splits = synth_splits(2);
  const auto p = init_positive({6, 5, 40}, 3, 3, 4);
  CHECK(fitness_Q(p, splits.validation) ==
        doctest::Approx(rmse(score(p, std::span<const Entry>(splits.validation)))).epsilon(1e-12));
}

TEST_CASE("relative fitness") {
  const std::vector<double> prev{0.7, 0.5}, curr{0.4, 0.45};
  CHECK(*relative_fitness_F(prev, curr, 1) == doctest::Approx(2.0).epsilon(1e-14));

  const std::vector<double> prev2{0.6, 0.5}, curr2{0.5, 0.4};
  CHECK(*relative_fitness_F(prev2, curr2, 1) == 0.0);

  const std::vector<double> flat{0.3, 0.3};
  CHECK_FALSE(relative_fitness_F(flat, flat, 1).has_value());
  CHECK_FALSE(relative_fitness_F(flat, flat, 2).has_value());
}

TEST_CASE("degenerate swarm equals fixed-hyperparameter training") {
  const auto splits = synth_splits(3);
  const auto init = init_positive({6, 5, 40}, 3, 3, 5);
  TrainConfig tc;
  tc.eta = 0.03;
  tc.lambda = 0.002;
  tc.max_epochs = 60;
  tc.shuffle_seed = 12;
  SwarmConfig sc;
  sc.particles = 1;
  sc.inertia = sc.c1 = sc.c2 = 0.0;
  sc.seed = 99;
  const auto tuned = tune_train(init, splits, sc, tc);
  const auto plain = train(init, splits, tc);
  CHECK(tuned.params == plain.params);
  REQUIRE(tuned.report.epochs.size() == plain.report.epochs.size());
  for (std::size_t t = 0; t < plain.report.epochs.size(); ++t) {
    CHECK(tuned.report.epochs[t].objective == plain.report.epochs[t].objective);
  }
  CHECK(tuned.report.stop == plain.report.stop);
}

TEST_CASE("global best trace is non-increasing and reproducible") {
  const auto splits = synth_splits(4);
  const auto init = init_positive({6, 5, 40}, 3, 3, 6);
  TrainConfig tc;
  tc.max_epochs = 40;
  SwarmConfig sc;
  sc.particles = 5;
  sc.seed = 3;
  const auto a = tune_train(init, splits, sc, tc);
  REQUIRE(!a.gb_q_trace.empty());
  for (std::size_t t = 1; t < a.gb_q_trace.size(); ++t) CHECK(a.gb_q_trace[t] <= a.gb_q_trace[t - 1]);
  const auto b = tune_train(init, splits, sc, tc);
  CHECK(a.gb_q_trace == b.gb_q_trace);
  CHECK(a.params == b.params);
  CHECK(a.trace.size() == a.gb_q_trace.size() * 5);
  CHECK_FALSE(a.trace.front().f.has_value());

  std::ostringstream out;
  write_swarm_trace(out, a.trace);
  CHECK(out.str().rfind("round\tparticle\teta\tlambda\tQ\tF", 0) == 0);
}

TEST_CASE("swarm config validation and total divergence") {
  SwarmConfig sc;
  sc.particles = 0;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = {};
  sc.eta_bounds = {0.1, 0.01};
  CHECK_THROWS_AS(sc.validate(), ConfigError);

  const auto splits = synth_splits(5);
  SwarmConfig huge;
  huge.particles = 2;
  huge.eta_bounds = {1e200, 1e201};
  TrainConfig tc;
  tc.eta = 1e200;
  CHECK_THROWS_AS(tune_train(init_positive({6, 5, 40}, 3, 3, 1), splits, huge, tc), SwarmDivergedError);
}
