#include "clrimpute/baseline_cp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "clrimpute/clr_model.hpp"
#include "clrimpute/error.hpp"

namespace clr {

namespace {

double unit_clamp(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

}  // namespace

BiasCpParams BiasCpParams::zeros(const Dims& dims, std::size_t rank) {
  if (rank == 0) throw ConfigError("rank must be positive");
  BiasCpParams p;
  p.dims = dims;
  p.rank = rank;
  p.S = Matrix(dims.stations, rank);
  p.U = Matrix(dims.parameters, rank);
  p.V = Matrix(dims.slots, rank);
  p.a.assign(dims.stations, 0.0);
  p.e.assign(dims.parameters, 0.0);
  p.o.assign(dims.slots, 0.0);
  return p;
}

BiasCpParams init_positive_baseline(const Dims& dims, std::size_t rank, std::uint64_t seed) {
  // Same draw sequence as the CLR initializer, minus the kernel.
  BiasCpParams p = BiasCpParams::zeros(dims, rank);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, kInitScale);
  auto fill = [&](std::span<double> values) {
    for (double& v : values) v = kInitScale - uniform(rng);
  };
  fill(p.S.data());
  fill(p.U.data());
  fill(p.V.data());
  fill(p.a);
  fill(p.e);
  fill(p.o);
  return p;
}

bool all_finite(const BiasCpParams& p) noexcept {
  return all_finite(p.S.data()) && all_finite(p.U.data()) && all_finite(p.V.data()) &&
         all_finite(std::span<const double>(p.a)) && all_finite(std::span<const double>(p.e)) &&
         all_finite(std::span<const double>(p.o));
}

void check_consistent(const BiasCpParams& p, const Dims& dims) {
  const bool ok = p.dims == dims && p.rank > 0 && p.S.rows() == dims.stations &&
                  p.S.cols() == p.rank && p.U.rows() == dims.parameters && p.U.cols() == p.rank &&
                  p.V.rows() == dims.slots && p.V.cols() == p.rank &&
                  p.a.size() == dims.stations && p.e.size() == dims.parameters &&
                  p.o.size() == dims.slots;
  if (!ok) throw ConfigError("baseline parameters are inconsistent with tensor dimensions");
}

double predict_linear(const BiasCpParams& p, const EntryIndex& idx) noexcept {
  const auto s = p.S.row(idx.i);
  const auto u = p.U.row(idx.j);
  const auto v = p.V.row(idx.k);
  double x = p.a[idx.i] + p.e[idx.j] + p.o[idx.k];
  for (std::size_t r = 0; r < p.rank; ++r) x += s[r] * u[r] * v[r];
  return x;
}

double sample_loss(const BiasCpParams& p, const Entry& entry, double lambda) noexcept {
  const auto& idx = entry.index;
  const double residual = unit_clamp(entry.value) - predict_linear(p, idx);
  double reg = p.a[idx.i] * p.a[idx.i] + p.e[idx.j] * p.e[idx.j] + p.o[idx.k] * p.o[idx.k];
  for (std::size_t r = 0; r < p.rank; ++r) {
    reg += p.S(idx.i, r) * p.S(idx.i, r) + p.U(idx.j, r) * p.U(idx.j, r) +
           p.V(idx.k, r) * p.V(idx.k, r);
  }
  return 0.5 * residual * residual + 0.5 * lambda * reg;
}

double objective(const BiasCpParams& p, std::span<const Entry> entries, double lambda) noexcept {
  double total = 0.0;
  for (const auto& e : entries) total += sample_loss(p, e, lambda);
  return total;
}

BiasCpGradients per_sample_gradients(const BiasCpParams& p, const Entry& entry, double lambda) {
  const auto& [i, j, k] = entry.index;
  const double g = -(unit_clamp(entry.value) - predict_linear(p, entry.index));
  BiasCpGradients grad;
  grad.s.resize(p.rank);
  grad.u.resize(p.rank);
  grad.v.resize(p.rank);
  for (std::size_t r = 0; r < p.rank; ++r) {
    const double s = p.S(i, r), u = p.U(j, r), v = p.V(k, r);
    grad.s[r] = g * u * v + lambda * s;
    grad.u[r] = g * s * v + lambda * u;
    grad.v[r] = g * s * u + lambda * v;
  }
  grad.a = g + lambda * p.a[i];
  grad.e = g + lambda * p.e[j];
  grad.o = g + lambda * p.o[k];
  return grad;
}

bool sgd_step(BiasCpParams& p, const Entry& entry, double eta, double lambda) {
  const auto& [i, j, k] = entry.index;
  const double g = -(unit_clamp(entry.value) - predict_linear(p, entry.index));
  if (!std::isfinite(g)) return false;
  double check = 0.0;
  for (std::size_t r = 0; r < p.rank; ++r) {
    const double s = p.S(i, r), u = p.U(j, r), v = p.V(k, r);
    p.S(i, r) = s - eta * (g * u * v + lambda * s);
    p.U(j, r) = u - eta * (g * s * v + lambda * u);
    p.V(k, r) = v - eta * (g * s * u + lambda * v);
    check += p.S(i, r) + p.U(j, r) + p.V(k, r);
  }
  p.a[i] -= eta * (g + lambda * p.a[i]);
  p.e[j] -= eta * (g + lambda * p.e[j]);
  p.o[k] -= eta * (g + lambda * p.o[k]);
  check += p.a[i] + p.e[j] + p.o[k];
  return std::isfinite(check);
}

bool sgd_epoch(BiasCpParams& p, std::span<const Entry> train, double eta, double lambda,
               EpochOrder& order) {
  for (std::size_t n : order.next(train.size())) {
    if (!sgd_step(p, train[n], eta, lambda)) return false;
  }
  return all_finite(p);
}

TrainResult<BiasCpParams> train_baseline(BiasCpParams params, const SplitData& splits,
                                         const TrainConfig& cfg) {
  check_consistent(params, params.dims);
  return run_training(std::move(params), splits, cfg);
}

}  // namespace clr
