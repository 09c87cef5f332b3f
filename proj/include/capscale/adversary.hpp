#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "capscale/dynamics.hpp"
#include "capscale/workload.hpp"

namespace capscale {

/// Builds a fresh policy for an attack. The prediction covers the attack
/// horizon; purely online policies ignore it.
using PolicyFactory =
    std::function<std::unique_ptr<Policy>(const ArrivalFunction& prediction, const CostWeights& w)>;

struct AdversaryReport {
  std::string attack;
  std::string policy;
  ArrivalFunction instance{1.0, {0.0}};
  CostWeights weights;
  double h = 0.0;
  double alg_cost = 0.0;
  /// Simulated cost of the explicit feasible schedule named in `opt_schedule`.
  double opt_upper_bound = 0.0;
  std::string opt_schedule;
  double ratio = 0.0;
  double claimed_bound = 0.0;
  std::string branch;
  /// Construction parameters and the closed-form values they imply.
  std::map<std::string, double> details;
};

/// lambda = 1, beta = omega = 1, theta = 0, zero prediction. Stops at the
/// first grid time tau >= 10 h with m(tau) > 0.885 tau^2 if tau <= 1.225,
/// otherwise at T = 3.
AdversaryReport online_lower_bound(const PolicyFactory& factory, double h);

/// lambda = 2 until the policy first holds m >= 1, then bursts of height 1
/// and length epsilon every tau. Attacks Timer(tau) unless `factory` is set.
AdversaryReport timer_lower_bound(double tau, double horizon, double epsilon, const CostWeights& w,
                                  double h, const PolicyFactory& factory = {});

/// Prediction 2 on [0, T] with T = 2 + sqrt(2) delta (window rounded to the
/// grid). The continuation is 2 if m stays below 1 on the window, else 0.
AdversaryReport consistency_tradeoff(const PolicyFactory& factory, double delta, double h);

/// Activation latency t0, theta = 0, lambda = 0 on [0, t0] and rho on (t0, 2 t0].
AdversaryReport setup_time_lower_bound(const PolicyFactory& factory, double t0, const CostWeights& w,
                                       double h);

/// lambda = epsilon on [0, 1/epsilon], no-wait, beta = 0, theta = 1; ratio of
/// the integer optimum to the fractional one.
AdversaryReport integrality_gap(double epsilon);

/// Requested capacity becomes available t0 after the request; releases are
/// immediate. The held level is the minimum request over the last t0.
class SetupLatencyPolicy final : public Policy {
 public:
  SetupLatencyPolicy(std::unique_ptr<Policy> inner, double t0);
  std::string name() const override;
  void reset(const CostWeights& w, double h) override;
  double level(const StepContext& ctx) override;

 private:
  std::unique_ptr<Policy> inner_;
  double t0_;
  std::size_t lag_ = 0;
  std::deque<double> requests_;
};

}  // namespace capscale
