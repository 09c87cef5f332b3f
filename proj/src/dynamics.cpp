#include "capscale/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace capscale {

void CostWeights::validate() const {
  if (!no_wait && !(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(theta >= 0.0)) throw std::invalid_argument("theta must be nonnegative");
  if (!std::isfinite(beta) || !std::isfinite(theta) || (!no_wait && !std::isfinite(omega))) {
    throw std::invalid_argument("cost weights must be finite");
  }
}

CostWeights CostWeights::paper_dc() { return {0.1, 0.51, 0.1275, false}; }

Rollout::Rollout(Policy& policy, const CostWeights& w, double h) : policy_(policy), w_(w), h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step must be positive");
  w_.validate();
  policy_.reset(w_, h_);
  q_.push_back(0.0);
}

double Rollout::decide(double lambda) {
  if (m_.size() != q_.size() - 1) throw std::logic_error("decide called twice for one grid point");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("arrival rate must be finite and nonnegative");
  StepContext ctx;
  ctx.k = m_.size();
  ctx.t = h_ * static_cast<double>(ctx.k);
  ctx.h = h_;
  ctx.lambda = lambda;
  ctx.q = q_.back();
  if (ctx.k > 0) {
    ctx.lambda_prev = lambda_.back();
    ctx.q_prev = q_[ctx.k - 1];
    ctx.m_prev = m_.back();
  }
  double level = policy_.level(ctx);
  if (!std::isfinite(level)) throw std::runtime_error("policy " + policy_.name() + " returned a non-finite level");
  level = std::max(level, 0.0);
  if (w_.no_wait) level = std::max(level, lambda);
  m_.push_back(level);
  lambda_.push_back(lambda);
  return level;
}

void Rollout::advance() {
  if (m_.size() != q_.size()) throw std::logic_error("advance called before decide");
  q_.push_back(std::max(q_.back() + h_ * (lambda_.back() - m_.back()), 0.0));
}

Trajectory Rollout::finish(ArrivalFunction lambda_ref) const {
  if (m_.size() != q_.size()) throw std::logic_error("rollout finished between decide and advance");
  return Trajectory{h_, m_, q_, lambda_, std::move(lambda_ref)};
}

std::size_t steps_per_segment(const ArrivalFunction& lambda, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
  const std::size_t k = whole_multiple(lambda.delta(), h);
  if (k == 0) throw std::invalid_argument("step must divide the arrival grid");
  return k;
}

Trajectory simulate(Policy& policy, const ArrivalFunction& lambda, const CostWeights& w, double h) {
  const std::size_t per = steps_per_segment(lambda, h);
  const std::size_t n = per * lambda.size();
  Rollout rollout(policy, w, h);
  for (std::size_t k = 0; k <= n; ++k) {
    rollout.decide(lambda.rate(std::min(k / per, lambda.size() - 1)));
    if (k < n) rollout.advance();
  }
  return rollout.finish(lambda);
}

CostBreakdown step_cost(const Trajectory& traj, const CostWeights& w, std::size_t k) {
  CostBreakdown c;
  const double h = traj.h;
  if (!w.no_wait) c.flow_time = w.omega * h * (traj.q[k] + traj.q[k + 1]) / 2.0;
  c.switching = w.beta * std::max(traj.m[k + 1] - traj.m[k], 0.0);
  if (k == 0) c.switching += w.beta * traj.m[0];
  c.power = w.theta * h * (traj.m[k] + traj.m[k + 1]) / 2.0;
  c.total = c.flow_time + c.switching + c.power;
  return c;
}

CostBreakdown cost(const Trajectory& traj, const CostWeights& w) {
  CostBreakdown c;
  if (traj.m.empty()) return c;
  double q_sum = 0.0, m_sum = 0.0, rise = traj.m[0];
  for (std::size_t k = 0; k + 1 < traj.m.size(); ++k) {
    q_sum += (traj.q[k] + traj.q[k + 1]) / 2.0;
    m_sum += (traj.m[k] + traj.m[k + 1]) / 2.0;
    rise += std::max(traj.m[k + 1] - traj.m[k], 0.0);
  }
  c.flow_time = w.no_wait ? 0.0 : w.omega * traj.h * q_sum;
  c.switching = w.beta * rise;
  c.power = w.theta * traj.h * m_sum;
  c.total = c.flow_time + c.switching + c.power;
  return c;
}

double competitive_ratio(double alg_cost, double opt_cost) {
  if (alg_cost < 0.0 || opt_cost < 0.0) throw std::invalid_argument("costs must be nonnegative");
  if (opt_cost == 0.0) return alg_cost == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return alg_cost / opt_cost;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  std::ostringstream buf;
  buf.precision(12);
  buf << "t,lambda,m,q\n";
  for (std::size_t k = 0; k < traj.m.size(); ++k) {
    buf << traj.h * static_cast<double>(k) << ',' << traj.lambda[k] << ',' << traj.m[k] << ','
        << traj.q[k] << '\n';
  }
  out << buf.str();
}

}  // namespace capscale
