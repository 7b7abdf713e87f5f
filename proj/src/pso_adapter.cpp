#include "clrimpute/pso_adapter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "clrimpute/sgd_trainer.hpp"

namespace clr {

void SwarmConfig::validate() const {
  if (particles < 1) throw ConfigError("swarm needs at least one particle");
  if (!(inertia >= 0.0) || !(c1 >= 0.0) || !(c2 >= 0.0)) {
    throw ConfigError("inertia and acceleration factors must be >= 0");
  }
  if (!(eta_bounds.low < eta_bounds.high) || !(lambda_bounds.low < lambda_bounds.high)) {
    throw ConfigError("search bounds must satisfy low < high");
  }
  if (!(eta_bounds.low > 0.0)) throw ConfigError("learning-rate lower bound must be > 0");
  if (!(lambda_bounds.low >= 0.0)) throw ConfigError("lambda lower bound must be >= 0");
  if (!(velocity_fraction > 0.0)) throw ConfigError("velocity clamp must be > 0");
}

Hyperparams SwarmConfig::velocity_limit() const noexcept {
  return {velocity_fraction * (eta_bounds.high - eta_bounds.low),
          velocity_fraction * (lambda_bounds.high - lambda_bounds.low)};
}

Hyperparams SwarmConfig::clamp_position(Hyperparams m) const noexcept {
  return {std::clamp(m.eta, eta_bounds.low, eta_bounds.high),
          std::clamp(m.lambda, lambda_bounds.low, lambda_bounds.high)};
}

void pso_step(std::span<Particle> swarm, const GlobalBest& gb, const SwarmConfig& cfg,
              const UniformDraw& draw) {
  const Hyperparams vmax = cfg.velocity_limit();
  for (auto& p : swarm) {
    if (!p.alive) continue;
    const double r1 = draw();
    const double r2 = draw();
    Hyperparams& n = p.velocity;
    const Hyperparams& m = p.position;
    n.eta = cfg.inertia * n.eta + cfg.c1 * r1 * (p.best.position.eta - m.eta) +
            cfg.c2 * r2 * (gb.position.eta - m.eta);
    n.lambda = cfg.inertia * n.lambda + cfg.c1 * r1 * (p.best.position.lambda - m.lambda) +
               cfg.c2 * r2 * (gb.position.lambda - m.lambda);
    n.eta = std::clamp(n.eta, -vmax.eta, vmax.eta);
    n.lambda = std::clamp(n.lambda, -vmax.lambda, vmax.lambda);
    p.position = cfg.clamp_position({m.eta + n.eta, m.lambda + n.lambda});
  }
}

double fitness_Q(const ClrParams& params, std::span<const Entry> validation) {
  if (validation.empty()) throw DataError("validation set is empty");
  double acc = 0.0;
  for (const auto& e : validation) {
    const double d = e.value - predict(params, e.index);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(validation.size()));
}

std::optional<double> relative_fitness_F(std::span<const double> q_previous,
                                         std::span<const double> q_current, std::size_t p) {
  const std::size_t P = q_current.size();
  if (p < 1 || p > P || q_previous.size() != P) return std::nullopt;
  const double before = p == 1 ? q_previous[P - 1] : q_current[p - 2];
  const double numerator = q_current[p - 1] - before;
  const double denominator = q_current[P - 1] - q_previous[P - 1];
  if (denominator == 0.0 || !std::isfinite(numerator) || !std::isfinite(denominator)) {
    return std::nullopt;
  }
  return numerator / denominator;
}

void write_swarm_trace(std::ostream& out, std::span<const SwarmTraceRow> rows) {
  const auto prec = out.precision();
  out << "round\tparticle\teta\tlambda\tQ\tF\tpb_Q\tgb_eta\tgb_lambda\tgb_Q\n"
      << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.round << '\t' << r.particle << '\t' << r.position.eta << '\t' << r.position.lambda
        << '\t' << r.q << '\t';
    if (r.f) {
      out << *r.f;
    } else {
      out << "NA";
    }
    out << '\t' << r.pb_q << '\t' << r.gb.position.eta << '\t' << r.gb.position.lambda << '\t'
        << r.gb.q << '\n';
  }
  out.precision(prec);
}

TuneResult tune_train(const ClrParams& init, const SplitData& splits, const SwarmConfig& swarm_cfg,
                      const TrainConfig& train_cfg) {
  swarm_cfg.validate();
  train_cfg.validate();
  check_consistent(init, init.dims);
  if (splits.train.empty()) throw DataError("training split is empty");
  if (splits.validation.empty()) throw DataError("swarm tuning needs a validation split");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t P = swarm_cfg.particles;
  std::mt19937_64 rng(swarm_cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const UniformDraw draw = [&] { return unit(rng); };

  std::vector<Particle> swarm(P);
  std::vector<EpochRunner<ClrParams>> runners;
  runners.reserve(P);
  for (std::size_t p = 0; p < P; ++p) {
    auto& particle = swarm[p];
    if (p == 0) {
      particle.position = swarm_cfg.clamp_position({train_cfg.eta, train_cfg.lambda});
    } else {
      const auto& eb = swarm_cfg.eta_bounds;
      const auto& lb = swarm_cfg.lambda_bounds;
      particle.position = {eb.low + draw() * (eb.high - eb.low), lb.low + draw() * (lb.high - lb.low)};
    }
    particle.best.position = particle.position;
    particle.params = init;
    runners.emplace_back(splits, train_cfg.shuffle_seed + p);
  }

  TuneResult result;
  GlobalBest gb;
  gb.position = swarm[0].position;
  std::vector<double> q_prev;
  std::vector<double> q_curr(P);
  std::vector<std::optional<double>> last_objective(P);
  result.report.stop = StopReason::max_epochs;

  for (std::size_t round = 1; round <= train_cfg.max_epochs; ++round) {
    std::vector<std::optional<EpochRecord>> records(P);
    for (std::size_t p = 0; p < P; ++p) {
      auto& particle = swarm[p];
      if (!particle.alive) continue;
      records[p] = runners[p].step(particle.params, particle.position.eta, particle.position.lambda);
      if (!records[p]) particle.alive = false;
    }

    for (std::size_t p = 0; p < P; ++p) {
      q_curr[p] = swarm[p].alive ? fitness_Q(swarm[p].params, splits.validation)
                                 : std::numeric_limits<double>::infinity();
    }

    std::optional<std::size_t> round_best;
    for (std::size_t p = 0; p < P; ++p) {
      auto& particle = swarm[p];
      if (particle.alive && q_curr[p] < particle.best.q) {
        particle.best = {particle.position, q_curr[p]};
      }
      if (particle.alive && q_curr[p] < gb.q) gb = {particle.position, q_curr[p], p};
      if (particle.alive && (!round_best || q_curr[p] < q_curr[*round_best])) round_best = p;
    }

    for (std::size_t p = 0; p < P; ++p) {
      SwarmTraceRow row;
      row.round = round;
      row.particle = p + 1;
      row.position = swarm[p].position;
      row.q = q_curr[p];
      if (!q_prev.empty()) row.f = relative_fitness_F(q_prev, q_curr, p + 1);
      row.pb_q = swarm[p].best.q;
      row.gb = gb;
      result.trace.push_back(row);
    }
    q_prev = q_curr;

    if (!round_best) {
      std::optional<ClrParams> snapshot;
      if (std::isfinite(gb.q)) snapshot = swarm[gb.particle].params;
      throw SwarmDivergedError(gb, std::move(snapshot));
    }

    result.gb_q_trace.push_back(gb.q);
    const std::size_t b = *round_best;
    result.report.epochs.push_back(*records[b]);
    const auto prev_obj = last_objective[b];
    for (std::size_t p = 0; p < P; ++p) {
      if (records[p]) last_objective[p] = records[p]->objective;
    }
    if (prev_obj && std::abs(records[b]->objective - *prev_obj) < train_cfg.tol) {
      result.report.stop = StopReason::converged;
      break;
    }

    pso_step(swarm, gb, swarm_cfg, draw);
  }

  result.gb = gb;
  result.params = swarm[gb.particle].params;
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace clr
