#include "capscale/offline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace capscale {

namespace {

void validate_lp_weights(const CostWeights& w, bool no_wait) {
  if (!no_wait && !(w.omega > 0.0 && std::isfinite(w.omega))) throw std::invalid_argument("omega must be positive");
  if (!(w.beta >= 0.0 && std::isfinite(w.beta))) throw std::invalid_argument("beta must be nonnegative");
  if (!(w.theta >= 0.0 && std::isfinite(w.theta))) throw std::invalid_argument("theta must be nonnegative");
}

}  // namespace

double LPSolution::level(double t) const {
  if (m.empty()) return 0.0;
  if (t <= 0.0) return m.front();
  const auto i = static_cast<std::size_t>(std::floor(t / delta + 1e-9));
  return m[std::min(i, m.size() - 1)];
}

LpInstance build_lp(const ArrivalFunction& lambda, const CostWeights& w, double delta, bool no_wait) {
  validate_lp_weights(w, no_wait);
  if (!lambda.regular_at(delta)) throw std::invalid_argument("arrival function is not regular at the requested delta");
  const ArrivalFunction grid = lambda.resampled(delta);
  const std::size_t n = grid.size();

  LpInstance inst;
  inst.n = n;
  inst.delta = grid.delta();
  inst.no_wait = no_wait;
  inst.weights = w;
  const double dt = inst.delta;
  lp::Problem& p = inst.problem;

  const std::size_t cols = no_wait ? 2 * n : 3 * n + 1;
  p.columns.resize(cols);
  p.cost.assign(cols, 0.0);
  p.num_rows = static_cast<int>(no_wait ? 2 * n : 2 * n + 1);
  p.rhs.assign(p.num_rows, 0.0);
  auto add = [&](int col, int row, double v) {
    p.columns[col].rows.push_back(row);
    p.columns[col].values.push_back(v);
  };

  const int balance0 = 0;
  const int switch0 = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int row = balance0 + static_cast<int>(i);
    const int srow = switch0 + static_cast<int>(i);
    p.cost[inst.m_col(i)] = w.theta * dt;
    p.cost[inst.d_col(i)] = w.beta;
    if (no_wait) {
      add(inst.m_col(i), row, 1.0);
      p.rhs[row] = grid.rate(i);
    } else {
      add(inst.q_col(i), row, -1.0);
      add(inst.q_col(i + 1), row, 1.0);
      add(inst.m_col(i), row, dt);
      p.rhs[row] = grid.rate(i) * dt;
    }
    add(inst.d_col(i), srow, 1.0);
    add(inst.m_col(i), srow, -1.0);
    if (i > 0) add(inst.m_col(i - 1), srow, 1.0);
  }
  if (!no_wait) {
    for (std::size_t i = 0; i <= n; ++i) {
      p.cost[inst.q_col(i)] = (i == 0 || i == n) ? w.omega * dt / 2.0 : w.omega * dt;
    }
    add(inst.q_col(0), static_cast<int>(2 * n), -1.0);
  }

  // Feasible starting basis: serve nothing and let the queue absorb all work,
  // or (no-wait) track the arrival rate exactly.
  const int surplus0 = static_cast<int>(cols);
  std::vector<int>& basis = inst.options.initial_basis;
  basis.resize(p.num_rows);
  for (std::size_t i = 0; i < n; ++i) {
    if (no_wait) {
      basis[i] = inst.m_col(i);
      const double prev = i > 0 ? grid.rate(i - 1) : 0.0;
      basis[n + i] = grid.rate(i) > prev ? inst.d_col(i) : surplus0 + static_cast<int>(n + i);
    } else {
      basis[i] = inst.q_col(i + 1);
      basis[n + i] = surplus0 + static_cast<int>(n + i);
    }
  }
  if (!no_wait) basis[2 * n] = surplus0 + static_cast<int>(2 * n);
  for (std::size_t i = 0; i < n; ++i) inst.options.tie_break.push_back(inst.m_col(i));
  return inst;
}

double lp_objective(const CostWeights& w, double delta, const std::vector<double>& m,
                    const std::vector<double>& d, const std::vector<double>& q, bool no_wait) {
  double flow = 0.0, rise = 0.0, power = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!no_wait) flow += (q[i] + q[i + 1]) / 2.0;
    rise += d[i];
    power += m[i];
  }
  return (no_wait ? 0.0 : w.omega * delta * flow) + w.beta * rise + w.theta * delta * power;
}

LPSolution solve_lp(const LpInstance& inst) {
  const lp::Solution s = lp::solve(inst.problem, inst.options);
  if (s.status != lp::Status::kOptimal) throw std::runtime_error("offline program has no optimal solution");
  LPSolution out;
  out.delta = inst.delta;
  out.m.resize(inst.n);
  out.d.resize(inst.n);
  out.q.assign(inst.n + 1, 0.0);
  for (std::size_t i = 0; i < inst.n; ++i) {
    out.m[i] = std::max(s.x[inst.m_col(i)], 0.0);
    out.d[i] = std::max(s.x[inst.d_col(i)], 0.0);
  }
  if (!inst.no_wait) {
    for (std::size_t i = 0; i <= inst.n; ++i) out.q[i] = std::max(s.x[inst.q_col(i)], 0.0);
  }
  out.objective = lp_objective(inst.weights, inst.delta, out.m, out.d, out.q, inst.no_wait);
  out.primal_residual = s.primal_residual;
  out.dual_residual = s.dual_residual;
  out.duality_gap = std::max(s.duality_gap, std::abs(out.objective - s.dual_objective));
  out.complementarity = s.complementarity;
  out.iterations = s.iterations;
  return out;
}

double guarantee_factor(const CostWeights& w, double delta) {
  const double first = w.theta > 0.0 ? 1.0 + w.omega * delta / (2.0 * w.theta)
                                     : std::numeric_limits<double>::infinity();
  return first * (1.0 + w.omega * delta * delta / w.beta);
}

OptResult opt_cost(const ArrivalFunction& lambda, const CostWeights& w, double delta) {
  OptResult r;
  r.solution = solve_lp(build_lp(lambda, w, delta, w.no_wait));
  r.cost = r.solution.objective;
  r.guarantee_factor = w.no_wait ? 1.0 : guarantee_factor(w, delta);
  return r;
}

void write_lp_json(std::ostream& out, const LPSolution& sol) {
  nlohmann::json j;
  j["delta"] = sol.delta;
  j["objective"] = sol.objective;
  j["m"] = sol.m;
  j["q"] = sol.q;
  j["d"] = sol.d;
  j["duality_gap"] = sol.duality_gap;
  j["primal_residual"] = sol.primal_residual;
  out << j.dump(2) << '\n';
}

}  // namespace capscale
