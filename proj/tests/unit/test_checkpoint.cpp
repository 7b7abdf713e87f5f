#include <doctest.h>

#include <random>
#include <sstream>

#include "clrimpute/checkpoint.hpp"
#include "clrimpute/error.hpp"
#include "oracles.hpp"

using namespace clr;

TEST_CASE("CLR checkpoint round trip preserves predictions") {
  std::mt19937_64 rng(10);
  const Dims d{3, 4, 6};
  Checkpoint ck{oracle::random_params(d, 3, 2, rng), NormStats{-2.5, 7.125}, 0.0123, 0.00045, 1.75};
  std::stringstream buf;
  write_checkpoint(buf, ck);
  const auto back = read_checkpoint(buf);
  CHECK(std::get<ClrParams>(back.model) == std::get<ClrParams>(ck.model));
  CHECK(back.norm->min == -2.5);
  CHECK(back.norm->max == 7.125);
  CHECK(back.eta == 0.0123);
  CHECK(back.lambda == 0.00045);
  CHECK(back.train_seconds == 1.75);
  for (std::size_t k = 0; k < d.slots; ++k) {
    CHECK(predict(back.model, {2, 3, k}) == predict(ck.model, {2, 3, k}));
  }
}

TEST_CASE("baseline checkpoint round trip") {
  auto p = init_positive_baseline({2, 2, 3}, 2, 4);
  p.a[1] = -1.0 / 3.0;
  Checkpoint ck{p, std::nullopt, 0.01, 0.001, 0.0};
  std::stringstream buf;
  write_checkpoint(buf, ck);
  const auto back = read_checkpoint(buf);
  CHECK(model_name(back.model) == "baseline");
  CHECK(std::get<BiasCpParams>(back.model) == p);
  CHECK_FALSE(back.norm.has_value());
}

TEST_CASE("malformed checkpoints are rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_checkpoint(empty), DataError);
  std::istringstream wrong("clrimpute-checkpoint 9\n");
  CHECK_THROWS_AS(read_checkpoint(wrong), DataError);

  Checkpoint ck{ClrParams::zeros({1, 1, 2}, 1, 1), std::nullopt, 0.01, 0.001, 0.0};
  std::stringstream buf;
  write_checkpoint(buf, ck);
  std::string text = buf.str();
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), DataError);
}
