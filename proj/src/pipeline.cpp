#include "clrimpute/pipeline.hpp"

#include <string>

#include "clrimpute/baseline_cp.hpp"
#include "clrimpute/sgd_trainer.hpp"

namespace clr {

ModelKind parse_model_kind(std::string_view name) {
  if (name == "clr") return ModelKind::clr;
  if (name == "baseline") return ModelKind::baseline;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected clr or baseline)");
}

Prepared prepare(const SparseTensor& raw, const SplitAssignment& assignment, bool normalize) {
  Prepared out;
  if (normalize) {
    out.tensor = normalize_on_training(raw, assignment);
    out.norm = out.tensor.norm();
  } else {
    out.tensor = raw;
  }
  out.splits = partition(out.tensor, assignment);
  return out;
}

FitOutcome fit(const Prepared& data, const FitOptions& options) {
  options.train.validate();
  const Dims& dims = data.tensor.dims();
  FitOutcome out;
  out.checkpoint.norm = data.norm;
  out.checkpoint.eta = options.train.eta;
  out.checkpoint.lambda = options.train.lambda;

  if (options.kind == ModelKind::baseline) {
    if (options.swarm) throw ConfigError("swarm tuning applies to the clr model only");
    auto result = train_baseline(init_positive_baseline(dims, options.rank, options.init_seed),
                                 data.splits, options.train);
    out.checkpoint.model = std::move(result.params);
    out.report = std::move(result.report);
  } else if (options.swarm) {
    auto result = tune_train(init_positive(dims, options.rank, options.kernel, options.init_seed),
                             data.splits, *options.swarm, options.train);
    out.checkpoint.model = std::move(result.params);
    out.checkpoint.eta = result.gb.position.eta;
    out.checkpoint.lambda = result.gb.position.lambda;
    out.report = std::move(result.report);
    out.swarm_trace = std::move(result.trace);
    out.gb_q_trace = std::move(result.gb_q_trace);
  } else {
    auto result = train(init_positive(dims, options.rank, options.kernel, options.init_seed),
                        data.splits, options.train);
    out.checkpoint.model = std::move(result.params);
    out.report = std::move(result.report);
  }
  out.checkpoint.train_seconds = out.report.seconds;
  return out;
}

Score score_model(const Model& model, std::span<const Entry> entries,
                  const std::optional<NormStats>& norm, bool raw_scale) {
  std::vector<Scored> pairs;
  pairs.reserve(entries.size());
  for (const auto& e : entries) {
    double truth = e.value;
    double pred = predict(model, e.index);
    if (raw_scale && norm) {
      truth = norm->invert(truth);
      pred = norm->invert(pred);
    }
    pairs.push_back({truth, pred});
  }
  return {rmse(pairs), mae(pairs)};
}

std::vector<RunResult> run_experiment(const SparseTensor& raw, const ExperimentOptions& options) {
  if (options.runs < 1) throw ConfigError("runs must be >= 1");
  std::vector<RunResult> results;
  results.reserve(options.runs);
  for (std::size_t r = 0; r < options.runs; ++r) {
    const std::uint64_t seed = options.seed + r;
    const auto assignment = split(raw, options.ratios, seed);
    const auto data = prepare(raw, assignment, options.normalize);
    if (data.splits.test.empty()) throw DataError("test split is empty");
    FitOptions fo = options.fit;
    fo.init_seed = seed;
    fo.train.shuffle_seed = seed;
    if (fo.swarm) fo.swarm->seed = seed;
    const auto outcome = fit(data, fo);
    const auto s = score_model(outcome.checkpoint.model, data.splits.test, data.norm,
                               options.raw_metrics);
    results.push_back({s.rmse, s.mae, outcome.report.seconds});
  }
  return results;
}

}  // namespace clr
