#pragma once

#include <deque>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "capscale/dynamics.hpp"
#include "capscale/offline.hpp"
#include "capscale/workload.hpp"

namespace capscale {

struct ABCSParams {
  double r1 = 2.0;
  double r2 = 1.0;
  double R1 = 2.0;
  double R2 = 1.0;

  /// Throws unless R1 >= r1 >= 0 and R2 >= r2 >= 0.
  void validate() const;
  static ABCSParams bcs(double r1, double r2) { return {r1, r2, r1, r2}; }
};

double bcs_derivative(double q, double m, const CostWeights& w, double r1, double r2);

/// Rates (r1_hat, r2_hat) chosen from the own and advised states.
std::pair<double, double> abcs_rates(double q, double m, double q_adv, double m_adv,
                                     const CostWeights& w, const ABCSParams& p);

/// Offline component on the prediction plus the online pulse constants.
struct APDecomposition {
  LPSolution m1;
  ArrivalFunction prediction;
  double pulse_gain = 0.0;
  double pulse_width = 0.0;
};

APDecomposition ap_policy(const ArrivalFunction& prediction, const CostWeights& w, double lp_delta);

class BcsPolicy final : public Policy {
 public:
  BcsPolicy(double r1, double r2);
  std::string name() const override;
  void reset(const CostWeights& w, double h) override;
  double level(const StepContext& ctx) override;

 private:
  double r1_, r2_;
  CostWeights w_;
};

/// m = m1 + m2, where m2 is pulse_gain times the excess arrival volume over
/// the trailing pulse_width window.
class ApPolicy final : public Policy {
 public:
  explicit ApPolicy(std::shared_ptr<const APDecomposition> plan);
  std::string name() const override { return "ap"; }
  void reset(const CostWeights& w, double h) override;
  double level(const StepContext& ctx) override;

  const APDecomposition& plan() const { return *plan_; }
  /// Online component at each decided grid point.
  const std::vector<double>& online_component() const { return m2_; }

 private:
  double excess_volume_before(double t) const;

  std::shared_ptr<const APDecomposition> plan_;
  double h_ = 0.0;
  double predicted_prev_ = 0.0;
  std::vector<double> cumulative_;  // excess volume over [0, k h]
  std::vector<double> m2_;
};

class AbcsPolicy final : public Policy {
 public:
  AbcsPolicy(std::shared_ptr<const APDecomposition> plan, const ABCSParams& p);
  std::string name() const override;
  void reset(const CostWeights& w, double h) override;
  double level(const StepContext& ctx) override;

  const ABCSParams& params() const { return p_; }
  /// Advised trajectory (m_adv, q_adv) tracked in lockstep.
  const std::vector<double>& advised_m() const { return m_adv_; }
  const std::vector<double>& advised_q() const { return q_adv_; }

 private:
  ApPolicy advisor_;
  ABCSParams p_;
  CostWeights w_;
  std::vector<double> m_adv_;
  std::vector<double> q_adv_;
};

/// Activates capacity up to the arrival rate and retires each capacity layer
/// after it has been idle for tau.
class TimerPolicy final : public Policy {
 public:
  explicit TimerPolicy(double tau);
  std::string name() const override;
  void reset(const CostWeights& w, double h) override;
  double level(const StepContext& ctx) override;
  double tau() const { return tau_; }

 private:
  struct Mark {
    double time;
    double busy;
  };
  double tau_;
  std::deque<Mark> marks_;  // busy levels, strictly decreasing front to back
};

/// No-wait BCS: track the arrival rate from above, otherwise decay at theta/beta.
class NowaitBcsPolicy final : public Policy {
 public:
  std::string name() const override { return "nowait_bcs"; }
  void reset(const CostWeights& w, double h) override;
  double level(const StepContext& ctx) override;

 private:
  CostWeights w_;
};

/// Follows a fixed schedule; used for offline optima and explicit bounds.
class SchedulePolicy final : public Policy {
 public:
  SchedulePolicy(std::string label, std::vector<double> levels, double delta);
  static SchedulePolicy constant(double level);
  static SchedulePolicy from_lp(const LPSolution& sol);
  std::string name() const override { return label_; }
  void reset(const CostWeights&, double) override {}
  double level(const StepContext& ctx) override;

 private:
  std::string label_;
  std::vector<double> levels_;
  double delta_;
};

}  // namespace capscale
