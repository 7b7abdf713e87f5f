#include "clrimpute/clr_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "clrimpute/error.hpp"

namespace clr {

namespace {

void fill_positive(std::span<double> values, std::mt19937_64& rng) {
  // uniform_real_distribution draws [0, scale); reflecting gives (0, scale].
  std::uniform_real_distribution<double> uniform(0.0, kInitScale);
  for (double& v : values) v = kInitScale - uniform(rng);
}

double sq(double x) noexcept { return x * x; }

}  // namespace

ClrParams ClrParams::zeros(const Dims& dims, std::size_t rank, std::size_t kernel) {
  if (rank == 0) throw ConfigError("rank must be positive");
  if (kernel == 0) throw ConfigError("kernel length must be positive");
  ClrParams p;
  p.dims = dims;
  p.rank = rank;
  p.kernel = kernel;
  p.S = Matrix(dims.stations, rank);
  p.U = Matrix(dims.parameters, rank);
  p.V = Matrix(dims.slots, rank);
  p.W = Matrix(kernel, rank);
  p.a.assign(dims.stations, 0.0);
  p.e.assign(dims.parameters, 0.0);
  p.o.assign(dims.slots, 0.0);
  return p;
}

ClrParams init_positive(const Dims& dims, std::size_t rank, std::size_t kernel, std::uint64_t seed) {
  ClrParams p = ClrParams::zeros(dims, rank, kernel);
  std::mt19937_64 rng(seed);
  fill_positive(p.S.data(), rng);
  fill_positive(p.U.data(), rng);
  fill_positive(p.V.data(), rng);
  fill_positive(p.W.data(), rng);
  fill_positive(p.a, rng);
  fill_positive(p.e, rng);
  fill_positive(p.o, rng);
  return p;
}

bool all_finite(const ClrParams& p) noexcept {
  return all_finite(p.S.data()) && all_finite(p.U.data()) && all_finite(p.V.data()) &&
         all_finite(p.W.data()) && all_finite(std::span<const double>(p.a)) &&
         all_finite(std::span<const double>(p.e)) && all_finite(std::span<const double>(p.o));
}

void check_consistent(const ClrParams& p, const Dims& dims) {
  const bool ok = p.dims == dims && p.rank > 0 && p.kernel > 0 && p.S.rows() == dims.stations &&
                  p.S.cols() == p.rank && p.U.rows() == dims.parameters && p.U.cols() == p.rank &&
                  p.V.rows() == dims.slots && p.V.cols() == p.rank && p.W.rows() == p.kernel &&
                  p.W.cols() == p.rank && p.a.size() == dims.stations &&
                  p.e.size() == dims.parameters && p.o.size() == dims.slots;
  if (!ok) throw ConfigError("model parameters are inconsistent with tensor dimensions");
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

double causal_conv(const Matrix& V, const Matrix& W, std::size_t k, std::size_t r) noexcept {
  const std::size_t taps = std::min(W.rows(), k + 1);
  double acc = 0.0;
  for (std::size_t c = 0; c < taps; ++c) acc += V(k - c, r) * W(c, r);
  return acc;
}

double activated_temporal(const ClrParams& p, std::size_t k, std::size_t r) noexcept {
  return sigmoid(causal_conv(p.V, p.W, k, r));
}

double predict(const ClrParams& p, const EntryIndex& idx) noexcept {
  const auto s = p.S.row(idx.i);
  const auto u = p.U.row(idx.j);
  double z = p.a[idx.i] + p.e[idx.j] + p.o[idx.k];
  for (std::size_t r = 0; r < p.rank; ++r) z += s[r] * u[r] * activated_temporal(p, idx.k, r);
  return sigmoid(z);
}

double sample_loss(const ClrParams& p, const Entry& entry, double lambda) noexcept {
  const auto& idx = entry.index;
  const double residual = clamp_target(entry.value) - predict(p, idx);
  double reg = sq(p.a[idx.i]) + sq(p.e[idx.j]) + sq(p.o[idx.k]);
  for (std::size_t r = 0; r < p.rank; ++r) {
    reg += sq(p.S(idx.i, r)) + sq(p.U(idx.j, r)) + sq(p.V(idx.k, r));
  }
  for (double w : p.W.data()) reg += sq(w);
  return 0.5 * sq(residual) + 0.5 * lambda * reg;
}

double objective(const ClrParams& p, std::span<const Entry> entries, double lambda) noexcept {
  double total = 0.0;
  for (const auto& e : entries) total += sample_loss(p, e, lambda);
  return total;
}

}  // namespace clr
