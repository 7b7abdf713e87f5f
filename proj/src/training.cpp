#include "clrimpute/training.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace clr {

void TrainConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("learning rate eta must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
}

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::diverged: return "diverged";
  }
  return "unknown";
}

void write_epoch_log(std::ostream& out, const TrainReport& report) {
  const auto prec = out.precision();
  out << "epoch\tobjective\tval_rmse\tval_mae\teta\tlambda\n" << std::setprecision(10);
  for (const auto& r : report.epochs) {
    out << r.epoch << '\t' << r.objective << '\t' << r.val_rmse << '\t' << r.val_mae << '\t'
        << r.eta << '\t' << r.lambda << '\n';
  }
  out << "# stop=" << to_string(report.stop) << '\n';
  out.precision(prec);
}

std::span<const std::size_t> EpochOrder::next(std::size_t n) {
  if (order_.size() != n) {
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng_() % i);
    std::swap(order_[i - 1], order_[j]);
  }
  return order_;
}

}  // namespace clr
