#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace clr {

struct Scored {
  double truth = 0.0;
  double prediction = 0.0;
};

/// sqrt(mean squared residual). Throws DataError on an empty set.
double rmse(std::span<const Scored> pairs);
/// Mean absolute residual. Throws DataError on an empty set.
double mae(std::span<const Scored> pairs);

struct RunResult {
  double rmse = 0.0;
  double mae = 0.0;
  double seconds = 0.0;
};

struct MetricReport {
  std::vector<RunResult> runs;
  double mean_rmse = 0.0;
  double mean_mae = 0.0;
  double mean_seconds = 0.0;
  double stddev_rmse = 0.0;  // sample standard deviation, 0 for one run
  double stddev_mae = 0.0;
};

/// Averages the first `n_runs` results. Throws ConfigError if n_runs < 1 or
/// exceeds the number of results.
MetricReport multi_run(std::span<const RunResult> results, std::size_t n_runs);

/// One row of the results table.
struct ResultRow {
  std::string dataset;
  std::string model;
  std::string run;  // run number or "mean"
  double rmse = 0.0;
  double mae = 0.0;
  double seconds = 0.0;
};

/// Tab-separated: dataset, model, run, rmse, mae, seconds (with header).
void write_results(std::ostream& out, std::span<const ResultRow> rows);

/// Compact dataset x model grid of RMSE/MAE means.
void write_summary_grid(std::ostream& out, std::span<const ResultRow> mean_rows);

}  // namespace clr
