#pragma once

// Synthetic tensors with planted low-rank, bias and temporal structure.
// Ground truth comes from the same generative form as the CLR model, so a
// perfect fit is representable.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "clrimpute/clr_model.hpp"
#include "clrimpute/tensor_store.hpp"

namespace clr {

enum class TemporalMode { iid, smooth_ar };

struct SynthSpec {
  Dims dims{10, 8, 100};
  std::size_t rank = 3;
  std::size_t kernel = 3;
  TemporalMode mode = TemporalMode::smooth_ar;
  double rho = 0.9;               // AR(1) coefficient in smooth_ar mode
  double noise = 0.01;            // observation noise standard deviation
  double observed_fraction = 0.2;
  std::uint64_t seed = 1;
  double bias_scale = 0.5;       // sd of station and parameter biases
  double slot_bias_scale = 0.0;  // sd of the AR(1) time-slot bias
  double kernel_gain = 2.0;      // sum of the planted kernel taps

  /// Throws ConfigError on an invalid spec, including fewer than 100
  /// expected observations.
  void validate() const;
};

struct SynthResult {
  SparseTensor observed;     // noisy observed entries
  ClrParams planted;         // generating parameters
  std::vector<double> truth; // noiseless value of every cell, row-major (i, j, k)

  double truth_at(const EntryIndex& idx) const { return truth[linear_index(idx, observed.dims())]; }
};

/// Planted structure:
///   s_ir, u_jr ~ U(0.5, 1.5) / sqrt(R)
///   v_{.,r}: stationary AR(1) with unit variance (rho = 0 in iid mode)
///   w_{.,r}: taps proportional to 2^-c, summing to kernel_gain
///   a_i, e_j ~ N(0, bias_scale²); o_k follows the same AR(1) as v, scaled
///   by slot_bias_scale
///   a shared offset centres the mean activation at zero
/// Observed cells are kept with probability observed_fraction and get additive
/// N(0, noise²) noise.
SynthResult generate(const SynthSpec& spec);

/// Writes the observed COO file and a sidecar with the noiseless value of
/// every cell.
void write_synth(const SynthResult& result, const std::filesystem::path& coo_path,
                 const std::filesystem::path& truth_path);

/// Lag-1 sample autocorrelation of a series.
double lag1_autocorrelation(std::span<const double> series);

}  // namespace clr
