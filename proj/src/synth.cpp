#include "clrimpute/synth.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>

#include "clrimpute/error.hpp"

namespace clr {

namespace {

void fill_ar(Matrix& m, std::size_t col, double rho, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double innovation = std::sqrt(1.0 - rho * rho);
  double prev = gauss(rng);
  m(0, col) = prev;
  for (std::size_t k = 1; k < m.rows(); ++k) {
    prev = rho * prev + innovation * gauss(rng);
    m(k, col) = prev;
  }
}

}  // namespace

void SynthSpec::validate() const {
  if (dims.cells() == 0) throw ConfigError("synthetic dimensions must be positive");
  if (rank == 0 || kernel == 0) throw ConfigError("rank and kernel must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
  if (!(bias_scale >= 0.0) || !(slot_bias_scale >= 0.0) || !(kernel_gain > 0.0)) {
    throw ConfigError("bias scales must be >= 0 and kernel gain > 0");
  }
  if (!(noise >= 0.0)) throw ConfigError("noise must be >= 0");
  if (!(observed_fraction > 0.0 && observed_fraction <= 1.0)) {
    throw ConfigError("observed fraction must lie in (0, 1]");
  }
  if (observed_fraction * static_cast<double>(dims.cells()) < 100.0) {
    throw ConfigError("observed fraction * cells must be at least 100");
  }
}

SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> factor(0.5, 1.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double rho = spec.mode == TemporalMode::iid ? 0.0 : spec.rho;
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.rank));

  ClrParams p = ClrParams::zeros(spec.dims, spec.rank, spec.kernel);
  for (double& s : p.S.data()) s = factor(rng) * scale;
  for (double& u : p.U.data()) u = factor(rng) * scale;
  for (std::size_t r = 0; r < spec.rank; ++r) fill_ar(p.V, r, rho, rng);

  double tap_sum = 0.0;
  for (std::size_t c = 0; c < spec.kernel; ++c) tap_sum += std::pow(0.5, static_cast<double>(c));
  for (std::size_t r = 0; r < spec.rank; ++r) {
    for (std::size_t c = 0; c < spec.kernel; ++c) {
      p.W(c, r) = spec.kernel_gain * std::pow(0.5, static_cast<double>(c)) / tap_sum;
    }
  }

  for (double& a : p.a) a = spec.bias_scale * gauss(rng);
  for (double& e : p.e) e = spec.bias_scale * gauss(rng);
  Matrix slot_bias(spec.dims.slots, 1);
  fill_ar(slot_bias, 0, rho, rng);
  for (std::size_t k = 0; k < spec.dims.slots; ++k) p.o[k] = spec.slot_bias_scale * slot_bias(k, 0);

  // Centre the mean pre-activation over all cells at zero.
  const Dims& d = spec.dims;
  Matrix vt(d.slots, spec.rank);
  for (std::size_t k = 0; k < d.slots; ++k) {
    for (std::size_t r = 0; r < spec.rank; ++r) vt(k, r) = activated_temporal(p, k, r);
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < d.stations; ++i) {
    for (std::size_t j = 0; j < d.parameters; ++j) {
      for (std::size_t k = 0; k < d.slots; ++k) {
        double z = p.a[i] + p.e[j] + p.o[k];
        for (std::size_t r = 0; r < spec.rank; ++r) z += p.S(i, r) * p.U(j, r) * vt(k, r);
        mean += z;
      }
    }
  }
  mean /= static_cast<double>(d.cells());
  for (double& a : p.a) a -= mean;

  SynthResult out;
  out.truth.resize(d.cells());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Entry> observed;
  for (std::size_t i = 0; i < d.stations; ++i) {
    for (std::size_t j = 0; j < d.parameters; ++j) {
      for (std::size_t k = 0; k < d.slots; ++k) {
        const EntryIndex idx{i, j, k};
        const double x = predict(p, idx);
        out.truth[linear_index(idx, d)] = x;
        const bool keep = unit(rng) < spec.observed_fraction;
        const double noise = gauss(rng) * spec.noise;
        if (keep) observed.push_back({idx, x + noise});
      }
    }
  }
  out.observed = SparseTensor(d, std::move(observed));
  out.planted = std::move(p);
  return out;
}

void write_synth(const SynthResult& result, const std::filesystem::path& coo_path,
                 const std::filesystem::path& truth_path) {
  write_coo(coo_path, result.observed);
  std::ofstream out(truth_path);
  if (!out) throw DataError("cannot open '" + truth_path.string() + "' for writing");
  const Dims& d = result.observed.dims();
  out << "i,j,k,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < d.stations; ++i) {
    for (std::size_t j = 0; j < d.parameters; ++j) {
      for (std::size_t k = 0; k < d.slots; ++k) {
        out << i << ',' << j << ',' << k << ',' << result.truth_at({i, j, k}) << '\n';
      }
    }
  }
}

double lag1_autocorrelation(std::span<const double> series) {
  if (series.size() < 2) return 0.0;
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double d = series[k] - mean;
    den += d * d;
    if (k > 0) num += d * (series[k - 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace clr
