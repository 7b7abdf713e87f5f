#include <doctest.h>

#include <random>

#include "clrimpute/baseline_cp.hpp"
#include "clrimpute/metrics.hpp"

using namespace clr;

namespace {

double linear_loss(const BiasCpParams& p, const Entry& e, double lambda) {
  const auto [i, j, k] = e.index;
  double x = std::clamp(e.value, 0.0, 1.0);
  double est = p.a[i] + p.e[j] + p.o[k];
  double reg = p.a[i] * p.a[i] + p.e[j] * p.e[j] + p.o[k] * p.o[k];
  for (std::size_t r = 0; r < p.rank; ++r) {
    est += p.S(i, r) * p.U(j, r) * p.V(k, r);
    reg += p.S(i, r) * p.S(i, r) + p.U(j, r) * p.U(j, r) + p.V(k, r) * p.V(k, r);
  }
  return 0.5 * (x - est) * (x - est) + 0.5 * lambda * reg;
}

BiasCpParams random_baseline(const Dims& d, std::size_t R, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  auto p = BiasCpParams::zeros(d, R);
  for (auto* m : {&p.S, &p.U, &p.V}) {
    for (double& x : m->data()) x = u(rng);
  }
  for (auto* v : {&p.a, &p.e, &p.o}) {
    for (double& x : *v) x = u(rng);
  }
  return p;
}

}  // namespace

TEST_CASE("linear estimate examples") {
  const auto zero = BiasCpParams::zeros({2, 2, 2}, 2);
  CHECK(predict_linear(zero, {1, 0, 1}) == 0.0);

  auto unit = BiasCpParams::zeros({1, 1, 1}, 1);
  unit.S(0, 0) = unit.U(0, 0) = unit.V(0, 0) = 1.0;
  CHECK(predict_linear(unit, {0, 0, 0}) == 1.0);

  auto two = BiasCpParams::zeros({1, 1, 1}, 2);
  two.S(0, 0) = 0.5, two.U(0, 0) = 2.0, two.V(0, 0) = 0.3;
  two.S(0, 1) = -1.0, two.U(0, 1) = 0.4, two.V(0, 1) = 0.25;
  two.a[0] = 0.1, two.e[0] = -0.05, two.o[0] = 0.2;
  CHECK(predict_linear(two, {0, 0, 0}) == doctest::Approx(0.3 - 0.1 + 0.1 - 0.05 + 0.2).epsilon(1e-15));
}

TEST_CASE("baseline gradients match central differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = 1e-6, lambda = 0.04;
  auto close = [](double a, double b) { return std::abs(a - b) <= std::max(1e-8, 1e-4 * std::abs(b)); };
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_baseline({3, 3, 4}, 3, rng);
    const Entry e{{rng() % 3, rng() % 3, rng() % 4}, unit(rng)};
    const auto g = per_sample_gradients(p, e, lambda);
    auto fd = [&](double& x) {
      const double x0 = x;
      x = x0 + h;
      const double up = linear_loss(p, e, lambda);
      x = x0 - h;
      const double down = linear_loss(p, e, lambda);
      x = x0;
      return (up - down) / (2 * h);
    };
    const auto [i, j, k] = e.index;
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(close(g.s[r], fd(p.S(i, r))));
      CHECK(close(g.u[r], fd(p.U(j, r))));
      CHECK(close(g.v[r], fd(p.V(k, r))));
    }
    CHECK(close(g.a, fd(p.a[i])));
    CHECK(close(g.e, fd(p.e[j])));
    CHECK(close(g.o, fd(p.o[k])));
    CHECK(sample_loss(p, e, lambda) == doctest::Approx(linear_loss(p, e, lambda)).epsilon(1e-13));
  }
}

TEST_CASE("zero learning rate leaves the baseline unchanged") {
  std::mt19937_64 rng(1);
  auto p = random_baseline({2, 2, 3}, 2, rng);
  const auto before = p;
  const std::vector<Entry> train{{{0, 0, 0}, 0.3}, {{1, 1, 2}, 0.8}};
  EpochOrder order(0);
  REQUIRE(sgd_epoch(p, train, 0.0, 0.1, order));
  CHECK(p == before);
}

TEST_CASE("baseline recovers an exactly representable tensor") {
  // Planted rank-2 biased model with values inside [0, 1].
  const Dims d{10, 8, 50};
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> f(0.2, 0.6), b(0.0, 0.1);
  auto planted = BiasCpParams::zeros(d, 2);
  for (auto* m : {&planted.S, &planted.U, &planted.V}) {
    for (double& x : m->data()) x = f(rng);
  }
  for (auto* v : {&planted.a, &planted.e, &planted.o}) {
    for (double& x : *v) x = b(rng);
  }
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < d.stations; ++i)
    for (std::size_t j = 0; j < d.parameters; ++j)
      for (std::size_t k = 0; k < d.slots; ++k) entries.push_back({{i, j, k}, predict_linear(planted, {i, j, k})});
  SplitData splits;
  splits.train = entries;

  TrainConfig cfg;
  cfg.eta = 0.1;
  cfg.lambda = 0.0;
  cfg.max_epochs = 500;
  cfg.tol = 1e-12;
  const auto result = train_baseline(init_positive_baseline(d, 2, 1), splits, cfg);
  const double err = rmse(score(result.params, std::span<const Entry>(splits.train)));
  INFO("epochs ", result.report.epochs.size(), " stop ", to_string(result.report.stop));
  CHECK(err < 1e-2);
  CHECK(result.report.epochs.size() <= 500);
}
