#pragma once

// Online adaptation of (learning rate, regularization) by particle swarm.
// Every particle trains a private copy of the CLR model with its own
// hyperparameters; one SGD epoch per particle per swarm round.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "clrimpute/clr_model.hpp"
#include "clrimpute/error.hpp"
#include "clrimpute/training.hpp"

namespace clr {

/// A point in hyperparameter space, also used for velocities.
struct Hyperparams {
  double eta = 0.0;
  double lambda = 0.0;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct SwarmConfig {
  std::size_t particles = 10;
  double inertia = 0.729;
  double c1 = 1.494;
  double c2 = 1.494;
  Interval eta_bounds{1e-4, 1e-1};
  Interval lambda_bounds{1e-4, 1e-1};
  /// Velocity limit per coordinate as a fraction of that coordinate's range.
  double velocity_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  Hyperparams velocity_limit() const noexcept;
  Hyperparams clamp_position(Hyperparams m) const noexcept;
};

struct PersonalBest {
  Hyperparams position;
  double q = std::numeric_limits<double>::infinity();
};

struct GlobalBest {
  Hyperparams position;
  double q = std::numeric_limits<double>::infinity();
  std::size_t particle = 0;
};

struct Particle {
  Hyperparams position;
  Hyperparams velocity;
  PersonalBest best;
  ClrParams params;
  bool alive = true;
};

/// Source of uniform draws in [0, 1] for r1 and r2.
using UniformDraw = std::function<double()>;

/// n <- ω n + c1 r1 (pb - m) + c2 r2 (gb - m); m <- m + n.
/// r1 then r2 are drawn once per live particle. Velocities and positions are
/// clamped afterwards; dead particles are left untouched.
void pso_step(std::span<Particle> swarm, const GlobalBest& gb, const SwarmConfig& cfg,
              const UniformDraw& draw);

/// Validation RMSE of a particle's model. Throws DataError on an empty set.
double fitness_Q(const ClrParams& params, std::span<const Entry> validation);

/// Relative fitness of particle `p` (1-based) between rounds t and t+1:
///   (Q_p^{t+1} - Q_{p-1}^{t+1}) / (Q_P^{t+1} - Q_P^t),  with Q_0^{t+1} = Q_P^t.
/// Empty when the denominator is zero or any term is non-finite.
std::optional<double> relative_fitness_F(std::span<const double> q_previous,
                                         std::span<const double> q_current, std::size_t p);

struct SwarmTraceRow {
  std::size_t round = 0;
  std::size_t particle = 0;  // 1-based
  Hyperparams position;
  double q = 0.0;
  std::optional<double> f;
  double pb_q = 0.0;
  GlobalBest gb;
};

void write_swarm_trace(std::ostream& out, std::span<const SwarmTraceRow> rows);

struct TuneResult {
  ClrParams params;    // current model of the particle holding the global best
  TrainReport report;  // per round: record of that round's best particle
  GlobalBest gb;
  std::vector<double> gb_q_trace;  // gb.q after every round
  std::vector<SwarmTraceRow> trace;
};

/// Raised when every particle has diverged. Carries the last global best.
class SwarmDivergedError : public NumericError {
 public:
  SwarmDivergedError(GlobalBest gb, std::optional<ClrParams> params)
      : NumericError("every particle diverged"), gb_(gb), params_(std::move(params)) {}

  const GlobalBest& gb() const noexcept { return gb_; }
  const std::optional<ClrParams>& params() const noexcept { return params_; }

 private:
  GlobalBest gb_;
  std::optional<ClrParams> params_;
};

/// Swarm training loop. Particle 1 starts at (train.eta, train.lambda), the
/// others uniformly inside the bounds; all start from `init` with zero
/// velocity. Particle p shuffles with seed train.shuffle_seed + p - 1.
/// Stops when the round-best particle's objective changes by less than
/// train.tol, or after train.max_epochs rounds.
TuneResult tune_train(const ClrParams& init, const SplitData& splits, const SwarmConfig& swarm,
                      const TrainConfig& train);

}  // namespace clr
