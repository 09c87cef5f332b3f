#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "capscale/workload.hpp"

namespace capscale {

/// Cost rates: omega per unit of queued work per hour, beta per activated
/// server, theta per server-hour. `no_wait` models omega = infinity.
struct CostWeights {
  double omega = 1.0;
  double beta = 1.0;
  double theta = 1.0;
  bool no_wait = false;

  void validate() const;
  static CostWeights paper_dc();
};

/// What a policy sees at grid point k: the current arrival rate and queue,
/// plus the state it held over the previous step.
struct StepContext {
  std::size_t k = 0;
  double t = 0.0;
  double h = 0.0;
  double lambda = 0.0;
  double q = 0.0;
  double lambda_prev = 0.0;
  double q_prev = 0.0;
  double m_prev = 0.0;
};

/// Online controller. `level` is called once per grid point in order and
/// returns the server level held on [t_k, t_k + h).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void reset(const CostWeights& w, double h) = 0;
  virtual double level(const StepContext& ctx) = 0;
};

/// Sampled rollout. m[k] is the level held on [kh, (k+1)h); the level
/// before time zero is 0, so m[0] > 0 is an activation at 0+.
struct Trajectory {
  double h = 0.0;
  std::vector<double> m;
  std::vector<double> q;
  std::vector<double> lambda;  // rate used on each step
  ArrivalFunction lambda_ref;

  std::size_t steps() const { return m.empty() ? 0 : m.size() - 1; }
  double horizon() const { return h * static_cast<double>(steps()); }
};

struct CostBreakdown {
  double flow_time = 0.0;
  double switching = 0.0;
  double power = 0.0;
  double total = 0.0;
};

/// Incremental driver used by `simulate` and by adaptive adversaries.
class Rollout {
 public:
  Rollout(Policy& policy, const CostWeights& w, double h);

  /// Reveals the rate for the current grid point and returns the level the
  /// policy holds on the step that starts there.
  double decide(double lambda);
  /// Integrates the queue over the current step.
  void advance();

  std::size_t k() const { return m_.size(); }
  double time() const { return h_ * static_cast<double>(q_.size() - 1); }
  double q() const { return q_.back(); }
  const std::vector<double>& levels() const { return m_; }
  const std::vector<double>& queue() const { return q_; }

  /// Samples after the last decision; requires decide() to have been called
  /// at the final grid point.
  Trajectory finish(ArrivalFunction lambda_ref) const;

 private:
  Policy& policy_;
  CostWeights w_;
  double h_;
  std::vector<double> m_;
  std::vector<double> q_;
  std::vector<double> lambda_;
};

/// Number of integration steps per segment of `lambda`; throws unless h divides delta.
std::size_t steps_per_segment(const ArrivalFunction& lambda, double h);

Trajectory simulate(Policy& policy, const ArrivalFunction& lambda, const CostWeights& w, double h);

CostBreakdown cost(const Trajectory& traj, const CostWeights& w);

/// Cost contribution of step k -> k+1 (k = 0 also carries the activation at 0+).
CostBreakdown step_cost(const Trajectory& traj, const CostWeights& w, std::size_t k);

double competitive_ratio(double alg_cost, double opt_cost);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace capscale
