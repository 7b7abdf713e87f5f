#include "clrimpute/sgd_trainer.hpp"

#include <cmath>

namespace clr {

ClrGradients per_sample_gradients(const ClrParams& p, const Entry& entry, double lambda) {
  const auto& [i, j, k] = entry.index;
  const double x_hat = predict(p, entry.index);
  const double g = -(clamp_target(entry.value) - x_hat) * x_hat * (1.0 - x_hat);

  ClrGradients grad;
  grad.s.resize(p.rank);
  grad.u.resize(p.rank);
  grad.v.resize(p.rank);
  grad.w = Matrix(p.kernel, p.rank);
  for (std::size_t r = 0; r < p.rank; ++r) {
    const double vt = activated_temporal(p, k, r);
    const double s = p.S(i, r);
    const double u = p.U(j, r);
    const double h = s * u * vt * (1.0 - vt);
    grad.s[r] = g * u * vt + lambda * s;
    grad.u[r] = g * s * vt + lambda * u;
    grad.v[r] = g * h * p.W(0, r) + lambda * p.V(k, r);
    for (std::size_t c = 0; c < p.kernel; ++c) {
      const double v_lag = c <= k ? p.V(k - c, r) : 0.0;
      grad.w(c, r) = g * h * v_lag + lambda * p.W(c, r);
    }
  }
  grad.a = g + lambda * p.a[i];
  grad.e = g + lambda * p.e[j];
  grad.o = g + lambda * p.o[k];
  return grad;
}

bool sgd_step(ClrParams& p, const Entry& entry, double eta, double lambda) {
  const auto& [i, j, k] = entry.index;
  const double x_hat = predict(p, entry.index);
  const double g = -(clamp_target(entry.value) - x_hat) * x_hat * (1.0 - x_hat);
  if (!std::isfinite(g)) return false;

  // Column r of S, U, V, W is touched only by rank r, so updating rank by
  // rank still uses pre-update values everywhere.
  double check = 0.0;
  for (std::size_t r = 0; r < p.rank; ++r) {
    const double vt = activated_temporal(p, k, r);
    const double s = p.S(i, r);
    const double u = p.U(j, r);
    const double v = p.V(k, r);
    const double h = s * u * vt * (1.0 - vt);
    const double gh = g * h;
    const double w0 = p.W(0, r);
    for (std::size_t c = 0; c < p.kernel; ++c) {
      const double v_lag = c <= k ? p.V(k - c, r) : 0.0;
      double& w = p.W(c, r);
      w -= eta * (gh * v_lag + lambda * w);
      check += w;
    }
    p.S(i, r) = s - eta * (g * u * vt + lambda * s);
    p.U(j, r) = u - eta * (g * s * vt + lambda * u);
    p.V(k, r) = v - eta * (gh * w0 + lambda * v);
    check += p.S(i, r) + p.U(j, r) + p.V(k, r);
  }
  p.a[i] -= eta * (g + lambda * p.a[i]);
  p.e[j] -= eta * (g + lambda * p.e[j]);
  p.o[k] -= eta * (g + lambda * p.o[k]);
  check += p.a[i] + p.e[j] + p.o[k];
  return std::isfinite(check);
}

bool sgd_epoch(ClrParams& p, std::span<const Entry> train, double eta, double lambda,
               EpochOrder& order) {
  for (std::size_t n : order.next(train.size())) {
    if (!sgd_step(p, train[n], eta, lambda)) return false;
  }
  return all_finite(p);
}

TrainResult<ClrParams> train(ClrParams params, const SplitData& splits, const TrainConfig& cfg) {
  check_consistent(params, params.dims);
  return run_training(std::move(params), splits, cfg);
}

}  // namespace clr
