#pragma once

// Model-agnostic epoch loop shared by the CLR and baseline trainers.
//
// A model type `P` participates through these free functions (found by ADL):
//   bool   sgd_epoch(P&, std::span<const Entry>, double eta, double lambda, EpochOrder&);
//   double objective(const P&, std::span<const Entry>, double lambda);
//   double predict(const P&, const EntryIndex&);
//   bool   all_finite(const P&);

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "clrimpute/error.hpp"
#include "clrimpute/metrics.hpp"
#include "clrimpute/tensor_store.hpp"

namespace clr {

struct TrainConfig {
  double eta = 0.01;
  double lambda = 0.001;
  std::size_t max_epochs = 1000;
  double tol = 1e-5;
  std::uint64_t shuffle_seed = 0;

  /// Throws ConfigError unless eta > 0, lambda >= 0, max_epochs >= 1, tol > 0.
  void validate() const;
};

enum class StopReason { converged, max_epochs, diverged };

std::string_view to_string(StopReason r) noexcept;

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double objective = 0.0;
  double val_rmse = std::numeric_limits<double>::quiet_NaN();
  double val_mae = std::numeric_limits<double>::quiet_NaN();
  double eta = 0.0;
  double lambda = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  StopReason stop = StopReason::max_epochs;
  double seconds = 0.0;
};

/// Tab-separated convergence log: epoch, objective, val_rmse, val_mae, eta, lambda.
void write_epoch_log(std::ostream& out, const TrainReport& report);

/// Seeded visiting order for per-sample SGD. The generator state carries over
/// between epochs, so every epoch gets a fresh permutation.
class EpochOrder {
 public:
  explicit EpochOrder(std::uint64_t seed) : rng_(seed) {}

  std::span<const std::size_t> next(std::size_t n);

 private:
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
};

/// Predictions of `params` against the stored (unclamped) values.
template <typename Params>
std::vector<Scored> score(const Params& params, std::span<const Entry> entries) {
  std::vector<Scored> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back({e.value, predict(params, e.index)});
  return out;
}

/// Runs single epochs for one model and records metrics. On divergence the
/// parameters are rolled back to the start of the failing epoch.
template <typename Params>
class EpochRunner {
 public:
  EpochRunner(const SplitData& splits, std::uint64_t shuffle_seed)
      : splits_(&splits), order_(shuffle_seed) {}

  std::optional<EpochRecord> step(Params& params, double eta, double lambda) {
    Params snapshot = params;
    const bool ok = sgd_epoch(params, std::span<const Entry>(splits_->train), eta, lambda, order_);
    const double obj = ok ? objective(params, std::span<const Entry>(splits_->train), lambda)
                          : std::numeric_limits<double>::quiet_NaN();
    if (!ok || !std::isfinite(obj) || !all_finite(params)) {
      params = std::move(snapshot);
      return std::nullopt;
    }
    EpochRecord rec;
    rec.epoch = ++epoch_;
    rec.objective = obj;
    rec.eta = eta;
    rec.lambda = lambda;
    if (!splits_->validation.empty()) {
      const auto pairs = score(params, std::span<const Entry>(splits_->validation));
      rec.val_rmse = rmse(pairs);
      rec.val_mae = mae(pairs);
    }
    return rec;
  }

  std::size_t epochs_run() const noexcept { return epoch_; }

 private:
  const SplitData* splits_;
  EpochOrder order_;
  std::size_t epoch_ = 0;
};

template <typename Params>
struct TrainResult {
  Params params;
  TrainReport report;
};

/// Epoch loop with the |ε_t - ε_{t-1}| < tol stopping rule.
template <typename Params>
TrainResult<Params> run_training(Params params, const SplitData& splits, const TrainConfig& cfg) {
  cfg.validate();
  if (splits.train.empty()) throw DataError("training split is empty");
  const auto start = std::chrono::steady_clock::now();
  EpochRunner<Params> runner(splits, cfg.shuffle_seed);
  TrainReport report;
  report.stop = StopReason::max_epochs;
  std::optional<double> previous;
  for (std::size_t t = 1; t <= cfg.max_epochs; ++t) {
    auto rec = runner.step(params, cfg.eta, cfg.lambda);
    if (!rec) {
      report.stop = StopReason::diverged;
      break;
    }
    report.epochs.push_back(*rec);
    if (previous && std::abs(rec->objective - *previous) < cfg.tol) {
      report.stop = StopReason::converged;
      break;
    }
    previous = rec->objective;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(params), std::move(report)};
}

}  // namespace clr
