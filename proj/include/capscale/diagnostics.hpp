#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "capscale/algorithms.hpp"
#include "capscale/bounds.hpp"
#include "capscale/dynamics.hpp"

namespace capscale {

struct QueueState {
  double q = 0.0;
  double m = 0.0;
};

/// Potential against a reference schedule (worst-case analysis).
double potential_pcr(QueueState s, QueueState ref, const GuaranteeConstants& g, const CostWeights& w);
double potential_pcr(QueueState s, QueueState ref, const ABCSParams& p, const CostWeights& w);

/// Potential against the advised trajectory (prediction-following analysis).
double potential_ocr(QueueState s, QueueState adv, const GuaranteeConstants& g, const CostWeights& w);
double potential_ocr(QueueState s, QueueState adv, const ABCSParams& p, const CostWeights& w);

enum class PotentialKind { kPcr, kOcr };

struct PotentialSeries {
  double h = 0.0;
  double cr_target = 0.0;
  std::vector<double> phi;
  /// drift[k] = dPhi + dCost_alg - cr_target * dCost_ref over the step ending
  /// at sample k; drift[0] covers the activation at 0+ from the empty state.
  std::vector<double> drift;
  double max_drift_violation = 0.0;
  std::size_t worst_step = 0;
  /// Whether the reference level changes at the worst step.
  bool worst_at_reference_jump = false;
  double min_phi = 0.0;
  double alg_cost = 0.0;
  double ref_cost = 0.0;
  /// |alg_cost - (cr_target * ref_cost + phi(0-) - phi(T) + sum(drift))|.
  double telescoping_residual = 0.0;
};

PotentialSeries drift_check(const Trajectory& alg, const Trajectory& ref, PotentialKind kind,
                            double cr_target, const GuaranteeConstants& g, const CostWeights& w);

/// The advised trajectory recorded by an ABCS rollout.
Trajectory advised_trajectory(const AbcsPolicy& policy, const Trajectory& alg);

void write_potential_csv(std::ostream& out, const PotentialSeries& series);

}  // namespace capscale
