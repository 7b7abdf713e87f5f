#pragma once

// Causal-convolutional low-rank model.
//
//   v̄_kr = sum_{c=0}^{C-1} v_{k-c, r} * w_{c, r}      (v_{<0} = 0)
//   ṽ_kr = sigmoid(v̄_kr)
//   x̃_ijk = sigmoid( sum_r s_ir u_jr ṽ_kr + a_i + e_j + o_k )
//
// Kernel taps are stored 0-based: row c of W multiplies v_{k-c}.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "clrimpute/matrix.hpp"
#include "clrimpute/tensor_store.hpp"

namespace clr {

inline constexpr std::size_t kDefaultRank = 10;
inline constexpr std::size_t kDefaultKernel = 3;
inline constexpr double kInitScale = 0.05;
/// Loss targets are clamped to [kTargetEpsilon, 1 - kTargetEpsilon].
inline constexpr double kTargetEpsilon = 1e-6;

struct ClrParams {
  Dims dims;
  std::size_t rank = 0;
  std::size_t kernel = 0;
  Matrix S;  // stations x rank
  Matrix U;  // parameters x rank
  Matrix V;  // slots x rank, raw temporal features
  Matrix W;  // kernel x rank
  std::vector<double> a;
  std::vector<double> e;
  std::vector<double> o;

  /// All-zero parameters of consistent shape.
  static ClrParams zeros(const Dims& dims, std::size_t rank, std::size_t kernel);

  friend bool operator==(const ClrParams&, const ClrParams&) = default;
};

/// Uniform draws in (0, kInitScale], seeded.
ClrParams init_positive(const Dims& dims, std::size_t rank, std::size_t kernel, std::uint64_t seed);

bool all_finite(const ClrParams& p) noexcept;

/// Throws ConfigError when shapes disagree with `dims`, rank or kernel.
void check_consistent(const ClrParams& p, const Dims& dims);

/// Logistic function, evaluated without overflow for any finite argument.
double sigmoid(double z) noexcept;

inline double clamp_target(double x) noexcept {
  return x < kTargetEpsilon ? kTargetEpsilon : (x > 1.0 - kTargetEpsilon ? 1.0 - kTargetEpsilon : x);
}

/// Zero-padded causal convolution of column r of V with column r of W at time k.
double causal_conv(const Matrix& V, const Matrix& W, std::size_t k, std::size_t r) noexcept;

/// sigmoid(causal_conv(V, W, k, r)).
double activated_temporal(const ClrParams& p, std::size_t k, std::size_t r) noexcept;

/// Model estimate for one cell, strictly inside (0, 1).
double predict(const ClrParams& p, const EntryIndex& idx) noexcept;

/// Squared-error term over `entries` plus the L2 term, the latter summed once
/// per observed entry:
///   1/2 sum (x - x̃)^2 + λ/2 sum_entries( sum_r s²+u²+v_k² + ||W||² + a²+e²+o² )
/// Targets are clamped with clamp_target.
double objective(const ClrParams& p, std::span<const Entry> entries, double lambda) noexcept;

/// One entry's contribution to objective().
double sample_loss(const ClrParams& p, const Entry& entry, double lambda) noexcept;

}  // namespace clr
