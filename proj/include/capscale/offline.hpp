#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "capscale/dynamics.hpp"
#include "capscale/simplex.hpp"
#include "capscale/workload.hpp"

namespace capscale {

/// Offline program on a delta grid with n slots.
///
/// Variables are m_1..m_n, d_1..d_n and q_1..q_{n+1} (q dropped in no-wait
/// mode). Rows are the workload balance per slot, the activation increments,
/// and q_1 <= 0 (or m_i >= lambda_i in no-wait mode).
struct LpInstance {
  lp::Problem problem;
  lp::Options options;
  std::size_t n = 0;
  double delta = 0.0;
  bool no_wait = false;
  CostWeights weights;

  int m_col(std::size_t i) const { return static_cast<int>(i); }
  int d_col(std::size_t i) const { return static_cast<int>(n + i); }
  /// Column of q_{i+1} in one-based notation, i.e. the boundary value at i*delta.
  int q_col(std::size_t i) const { return static_cast<int>(2 * n + i); }
};

struct LPSolution {
  double delta = 0.0;
  std::vector<double> m;  // n
  std::vector<double> d;  // n
  std::vector<double> q;  // n + 1, q[0] = 0; all zero in no-wait mode
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  double complementarity = 0.0;
  int iterations = 0;

  /// Server level at time t under m(i*delta + s) = m_i.
  double level(double t) const;
  double horizon() const { return delta * static_cast<double>(m.size()); }
};

LpInstance build_lp(const ArrivalFunction& lambda, const CostWeights& w, double delta, bool no_wait);

LPSolution solve_lp(const LpInstance& instance);

/// The LP objective with the multiplicative factor that bounds it against
/// the continuous optimum.
struct OptResult {
  double cost = 0.0;
  double guarantee_factor = 1.0;
  LPSolution solution;
};

double guarantee_factor(const CostWeights& w, double delta);

OptResult opt_cost(const ArrivalFunction& lambda, const CostWeights& w, double delta);

/// Objective of the program evaluated at given vectors.
double lp_objective(const CostWeights& w, double delta, const std::vector<double>& m,
                    const std::vector<double>& d, const std::vector<double>& q, bool no_wait);

void write_lp_json(std::ostream& out, const LPSolution& sol);

}  // namespace capscale
