#include "capscale/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace capscale {

namespace {

double distance(double r, QueueState s, QueueState ref, const CostWeights& w) {
  const double dq = std::max(s.q - ref.q, 0.0);
  const double dm = s.m - ref.m;
  return std::sqrt(r * w.omega * dq * dq / w.beta + dm * dm);
}

}  // namespace

double potential_pcr(QueueState s, QueueState ref, const GuaranteeConstants& g, const CostWeights& w) {
  const ABCSParams& p = g.params;
  const double branch = s.m > ref.m ? g.c5 * w.beta * (distance(p.R1, s, ref, w) - s.m + ref.m)
                                    : g.c6 * w.beta * (distance(p.r1, s, ref, w) - s.m + ref.m);
  return branch + w.beta * s.m / p.r2 + g.c6 * p.R2 * w.theta * std::max(s.q - ref.q, 0.0);
}

double potential_pcr(QueueState s, QueueState ref, const ABCSParams& p, const CostWeights& w) {
  return potential_pcr(s, ref, guarantee_constants(p, Ordering::kFlag), w);
}

double potential_ocr(QueueState s, QueueState adv, const GuaranteeConstants& g, const CostWeights& w) {
  const ABCSParams& p = g.params;
  // Branch on the gate of abcs_rates rather than on the returned rate, which
  // is ambiguous when r1 == R1.
  const bool low_gain = s.m - adv.m > std::max(s.q - adv.q, 0.0) * std::sqrt(w.omega / (2.0 * w.beta));
  const double branch = low_gain
                            ? g.c1 * w.beta * (distance(p.r1, s, adv, w) - s.m + adv.m)
                            : g.c2 * w.beta * distance(p.R1, s, adv, w) - g.c3 * w.beta * (s.m - adv.m);
  return branch + w.beta * s.m / p.R2 + g.c4 * w.theta * std::max(s.q - adv.q, 0.0);
}

double potential_ocr(QueueState s, QueueState adv, const ABCSParams& p, const CostWeights& w) {
  return potential_ocr(s, adv, guarantee_constants(p, Ordering::kFlag), w);
}

PotentialSeries drift_check(const Trajectory& alg, const Trajectory& ref, PotentialKind kind,
                            double cr_target, const GuaranteeConstants& g, const CostWeights& w) {
  if (alg.m.size() != ref.m.size() || alg.q.size() != ref.q.size() ||
      std::abs(alg.h - ref.h) > 1e-12 * alg.h) {
    throw std::invalid_argument("trajectories are on different grids");
  }
  PotentialSeries s;
  s.h = alg.h;
  s.cr_target = cr_target;
  const std::size_t n = alg.m.size();
  s.phi.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const QueueState a{alg.q[k], alg.m[k]};
    const QueueState r{ref.q[k], ref.m[k]};
    s.phi[k] = kind == PotentialKind::kPcr ? potential_pcr(a, r, g, w) : potential_ocr(a, r, g, w);
  }
  s.min_phi = n > 0 ? *std::min_element(s.phi.begin(), s.phi.end()) : 0.0;
  if (n == 0) return s;
  // Entry 0 covers the activation at 0+ from the empty state; entry k >= 1
  // covers the step that ends at sample k.
  const QueueState empty{0.0, 0.0};
  const double phi_start = kind == PotentialKind::kPcr ? potential_pcr(empty, empty, g, w)
                                                        : potential_ocr(empty, empty, g, w);
  s.max_drift_violation = -std::numeric_limits<double>::infinity();
  double drift_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double da = 0.0, dr = 0.0, dphi = 0.0;
    if (k == 0) {
      da = w.beta * alg.m[0];
      dr = w.beta * ref.m[0];
      dphi = s.phi[0] - phi_start;
    } else {
      da = step_cost(alg, w, k - 1).total;
      dr = step_cost(ref, w, k - 1).total;
      if (k == 1) {
        da -= w.beta * alg.m[0];
        dr -= w.beta * ref.m[0];
      }
      dphi = s.phi[k] - s.phi[k - 1];
    }
    s.alg_cost += da;
    s.ref_cost += dr;
    const double drift = dphi + da - cr_target * dr;
    s.drift.push_back(drift);
    drift_sum += drift;
    if (drift > s.max_drift_violation) {
      s.max_drift_violation = drift;
      s.worst_step = k;
      s.worst_at_reference_jump = k == 0 ? ref.m[0] != 0.0 : ref.m[k] != ref.m[k - 1];
    }
  }
  s.telescoping_residual =
      std::abs(s.alg_cost - (cr_target * s.ref_cost + phi_start - s.phi.back() + drift_sum));
  return s;
}

Trajectory advised_trajectory(const AbcsPolicy& policy, const Trajectory& alg) {
  if (policy.advised_m().size() != alg.m.size()) throw std::invalid_argument("policy history does not match the trajectory");
  return Trajectory{alg.h, policy.advised_m(), policy.advised_q(), alg.lambda, alg.lambda_ref};
}

void write_potential_csv(std::ostream& out, const PotentialSeries& series) {
  std::ostringstream buf;
  buf.precision(12);
  buf << "t,phi,drift\n";
  for (std::size_t k = 0; k < series.phi.size(); ++k) {
    buf << series.h * static_cast<double>(k) << ',' << series.phi[k] << ',';
    buf << (k < series.drift.size() ? series.drift[k] : 0.0) << '\n';
  }
  out << buf.str();
}

}  // namespace capscale
