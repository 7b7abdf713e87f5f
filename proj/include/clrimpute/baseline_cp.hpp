#pragma once

// Biased CP baseline: x̃_ijk = sum_r s_ir u_jr v_kr + a_i + e_j + o_k, with no
// temporal convolution and no output sigmoid. Trained with the same per-sample
// SGD protocol as the CLR model.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "clrimpute/matrix.hpp"
#include "clrimpute/tensor_store.hpp"
#include "clrimpute/training.hpp"

namespace clr {

struct BiasCpParams {
  Dims dims;
  std::size_t rank = 0;
  Matrix S;
  Matrix U;
  Matrix V;
  std::vector<double> a;
  std::vector<double> e;
  std::vector<double> o;

  static BiasCpParams zeros(const Dims& dims, std::size_t rank);

  friend bool operator==(const BiasCpParams&, const BiasCpParams&) = default;
};

BiasCpParams init_positive_baseline(const Dims& dims, std::size_t rank, std::uint64_t seed);

bool all_finite(const BiasCpParams& p) noexcept;
void check_consistent(const BiasCpParams& p, const Dims& dims);

/// Unbounded linear estimate.
double predict_linear(const BiasCpParams& p, const EntryIndex& idx) noexcept;
inline double predict(const BiasCpParams& p, const EntryIndex& idx) noexcept {
  return predict_linear(p, idx);
}

/// Targets are clamped to [0, 1] before the residual is taken.
double sample_loss(const BiasCpParams& p, const Entry& entry, double lambda) noexcept;
double objective(const BiasCpParams& p, std::span<const Entry> entries, double lambda) noexcept;

struct BiasCpGradients {
  std::vector<double> s;
  std::vector<double> u;
  std::vector<double> v;
  double a = 0.0;
  double e = 0.0;
  double o = 0.0;
};

/// ds_ir = -(x - x̃) u_jr v_kr + λ s_ir (u, v symmetric); da_i = -(x - x̃) + λ a_i.
BiasCpGradients per_sample_gradients(const BiasCpParams& p, const Entry& entry, double lambda);

bool sgd_step(BiasCpParams& p, const Entry& entry, double eta, double lambda);
bool sgd_epoch(BiasCpParams& p, std::span<const Entry> train, double eta, double lambda,
               EpochOrder& order);

TrainResult<BiasCpParams> train_baseline(BiasCpParams params, const SplitData& splits,
                                         const TrainConfig& cfg);

}  // namespace clr
