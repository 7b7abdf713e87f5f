#include "clrimpute/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "clrimpute/error.hpp"

namespace clr {

double rmse(std::span<const Scored> pairs) {
  if (pairs.empty()) throw DataError("rmse of an empty set");
  double acc = 0.0;
  for (const auto& p : pairs) {
    const double d = p.truth - p.prediction;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

double mae(std::span<const Scored> pairs) {
  if (pairs.empty()) throw DataError("mae of an empty set");
  double acc = 0.0;
  for (const auto& p : pairs) acc += std::abs(p.truth - p.prediction);
  return acc / static_cast<double>(pairs.size());
}

MetricReport multi_run(std::span<const RunResult> results, std::size_t n_runs) {
  if (n_runs < 1) throw ConfigError("multi_run needs at least one run");
  if (n_runs > results.size()) throw ConfigError("fewer results than requested runs");
  MetricReport report;
  report.runs.assign(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(n_runs));
  const double n = static_cast<double>(n_runs);
  for (const auto& r : report.runs) {
    report.mean_rmse += r.rmse / n;
    report.mean_mae += r.mae / n;
    report.mean_seconds += r.seconds / n;
  }
  if (n_runs > 1) {
    double vr = 0.0, vm = 0.0;
    for (const auto& r : report.runs) {
      vr += (r.rmse - report.mean_rmse) * (r.rmse - report.mean_rmse);
      vm += (r.mae - report.mean_mae) * (r.mae - report.mean_mae);
    }
    report.stddev_rmse = std::sqrt(vr / (n - 1));
    report.stddev_mae = std::sqrt(vm / (n - 1));
  }
  return report;
}

void write_results(std::ostream& out, std::span<const ResultRow> rows) {
  out << "dataset\tmodel\trun\trmse\tmae\tseconds\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  for (const auto& r : rows) {
    out << r.dataset << '\t' << r.model << '\t' << r.run << '\t' << std::setprecision(6)
        << std::fixed << r.rmse << '\t' << r.mae << '\t' << std::setprecision(3) << r.seconds
        << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

void write_summary_grid(std::ostream& out, std::span<const ResultRow> mean_rows) {
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  for (const auto& r : mean_rows) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
  }
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::left << std::setw(14) << "dataset" << std::setw(8) << "metric";
  for (const auto& m : models) out << std::setw(12) << m;
  out << '\n';
  for (const auto& d : datasets) {
    for (int metric = 0; metric < 2; ++metric) {
      out << std::setw(14) << d << std::setw(8) << (metric == 0 ? "RMSE" : "MAE");
      for (const auto& m : models) {
        auto it = std::find_if(mean_rows.begin(), mean_rows.end(),
                               [&](const ResultRow& r) { return r.dataset == d && r.model == m; });
        if (it == mean_rows.end()) {
          out << std::setw(12) << "-";
        } else {
          out << std::setw(12) << std::fixed << std::setprecision(4)
              << (metric == 0 ? it->rmse : it->mae);
        }
      }
      out << '\n';
    }
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace clr
