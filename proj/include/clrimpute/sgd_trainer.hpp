#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "clrimpute/clr_model.hpp"
#include "clrimpute/matrix.hpp"
#include "clrimpute/training.hpp"

namespace clr {

/// Partial derivatives of one entry's loss (see sample_loss) with respect to
/// every parameter that entry touches.
struct ClrGradients {
  std::vector<double> s;  // d/ds_ir, r = 0..R-1
  std::vector<double> u;  // d/du_jr
  std::vector<double> v;  // d/dv_kr
  Matrix w;               // d/dw_cr, kernel x rank
  double a = 0.0;
  double e = 0.0;
  double o = 0.0;
};

/// Analytic per-sample gradients. With g = -(x - x̃) x̃ (1 - x̃) and
/// h_r = s_ir u_jr ṽ_kr (1 - ṽ_kr):
///   ds_ir = g u_jr ṽ_kr + λ s_ir          (u_jr symmetric)
///   dv_kr = g h_r w_0r + λ v_kr
///   dw_cr = g h_r v_{k-c,r} + λ w_cr       (zero padded)
///   da_i  = g + λ a_i                      (e_j, o_k symmetric)
ClrGradients per_sample_gradients(const ClrParams& p, const Entry& entry, double lambda);

/// θ <- θ - η ∇θ for one entry, every gradient taken at the pre-update values.
/// Returns false if the step produced a non-finite quantity.
bool sgd_step(ClrParams& p, const Entry& entry, double eta, double lambda);

/// One pass over `train` in the order drawn from `order`. Returns false (and
/// stops early) on divergence; the caller owns rollback.
bool sgd_epoch(ClrParams& p, std::span<const Entry> train, double eta, double lambda,
               EpochOrder& order);

/// Fixed-hyperparameter training until convergence, max_epochs or divergence.
TrainResult<ClrParams> train(ClrParams params, const SplitData& splits, const TrainConfig& cfg);

}  // namespace clr
