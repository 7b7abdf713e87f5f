#pragma once

// End-to-end helpers: prepare splits, fit a model, score held-out entries and
// repeat over seeded runs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "clrimpute/checkpoint.hpp"
#include "clrimpute/metrics.hpp"
#include "clrimpute/pso_adapter.hpp"
#include "clrimpute/tensor_store.hpp"
#include "clrimpute/training.hpp"

namespace clr {

enum class ModelKind { clr, baseline };

ModelKind parse_model_kind(std::string_view name);

struct Prepared {
  SparseTensor tensor;  // normalized with training statistics when requested
  SplitData splits;
  std::optional<NormStats> norm;
};

Prepared prepare(const SparseTensor& raw, const SplitAssignment& assignment, bool normalize = true);

struct FitOptions {
  ModelKind kind = ModelKind::clr;
  std::size_t rank = 10;
  std::size_t kernel = 3;
  TrainConfig train;
  std::optional<SwarmConfig> swarm;  // CLR only: adapt (eta, lambda) online
  std::uint64_t init_seed = 0;
};

struct FitOutcome {
  Checkpoint checkpoint;
  TrainReport report;
  std::vector<SwarmTraceRow> swarm_trace;
  std::vector<double> gb_q_trace;
};

FitOutcome fit(const Prepared& data, const FitOptions& options);

struct Score {
  double rmse = 0.0;
  double mae = 0.0;
};

/// Metrics of `model` on `entries` (stored on the normalized scale). With
/// `raw_scale`, truth and prediction are mapped back through `norm` first.
Score score_model(const Model& model, std::span<const Entry> entries,
                  const std::optional<NormStats>& norm, bool raw_scale);

struct ExperimentOptions {
  FitOptions fit;
  SplitRatios ratios;
  std::size_t runs = 20;
  std::uint64_t seed = 0;
  bool normalize = true;
  bool raw_metrics = false;
};

/// Run r (0-based) uses seed + r for the split, initialization, shuffling and
/// swarm draws, and scores the test split.
std::vector<RunResult> run_experiment(const SparseTensor& raw, const ExperimentOptions& options);

}  // namespace clr
