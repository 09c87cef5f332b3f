#include "capscale/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace capscale {

void ABCSParams::validate() const {
  for (double v : {r1, r2, R1, R2}) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("reaction rates must be finite and nonnegative");
  }
  if (R1 < r1) throw std::invalid_argument("R1 must be at least r1");
  if (R2 < r2) throw std::invalid_argument("R2 must be at least r2");
}

double bcs_derivative(double q, double m, const CostWeights& w, double r1, double r2) {
  if (!(w.beta > 0.0)) throw std::invalid_argument("beta must be positive");
  return (r1 * w.omega * q - r2 * w.theta * m) / w.beta;
}

std::pair<double, double> abcs_rates(double q, double m, double q_adv, double m_adv,
                                     const CostWeights& w, const ABCSParams& p) {
  const double gate = std::max(q - q_adv, 0.0) * std::sqrt(w.omega / (2.0 * w.beta));
  const double r1_hat = m - m_adv > gate ? p.r1 : p.R1;
  const double r2_hat = (m > m_adv && q <= q_adv) ? p.R2 : p.r2;
  return {r1_hat, r2_hat};
}

APDecomposition ap_policy(const ArrivalFunction& prediction, const CostWeights& w, double lp_delta) {
  w.validate();
  if (w.no_wait) throw std::invalid_argument("the prediction-following policy needs finite omega");
  if (!(w.beta > 0.0)) throw std::invalid_argument("the prediction-following policy needs beta > 0");
  APDecomposition plan{LPSolution{}, prediction, std::sqrt(w.omega / (2.0 * w.beta)),
                       std::sqrt(2.0 * w.beta / w.omega)};
  if (prediction.total_work() == 0.0) {
    const std::size_t n = prediction.resampled(lp_delta).size();
    plan.m1.delta = prediction.resampled(lp_delta).delta();
    plan.m1.m.assign(n, 0.0);
    plan.m1.d.assign(n, 0.0);
    plan.m1.q.assign(n + 1, 0.0);
  } else {
    plan.m1 = solve_lp(build_lp(prediction, w, lp_delta, false));
  }
  return plan;
}

BcsPolicy::BcsPolicy(double r1, double r2) : r1_(r1), r2_(r2) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0)) throw std::invalid_argument("reaction rates must be nonnegative");
}

std::string BcsPolicy::name() const {
  std::ostringstream s;
  s << "bcs{r1=" << r1_ << ",r2=" << r2_ << "}";
  return s.str();
}

void BcsPolicy::reset(const CostWeights& w, double) {
  if (w.no_wait) throw std::invalid_argument("bcs needs finite omega; use nowait_bcs");
  w_ = w;
}

double BcsPolicy::level(const StepContext& ctx) {
  if (ctx.k == 0) return 0.0;
  return ctx.m_prev + ctx.h * bcs_derivative(ctx.q_prev, ctx.m_prev, w_, r1_, r2_);
}

ApPolicy::ApPolicy(std::shared_ptr<const APDecomposition> plan) : plan_(std::move(plan)) {
  if (!plan_) throw std::invalid_argument("missing plan");
}

void ApPolicy::reset(const CostWeights&, double h) {
  h_ = h;
  cumulative_.assign(1, 0.0);
  m2_.clear();
  predicted_prev_ = 0.0;
}

double ApPolicy::excess_volume_before(double t) const {
  if (t <= 0.0) return 0.0;
  const double pos = t / h_;
  auto j = static_cast<std::size_t>(std::floor(pos + 1e-9));
  if (j + 1 >= cumulative_.size()) return cumulative_.back();
  const double frac = std::max(pos - static_cast<double>(j), 0.0);
  return cumulative_[j] + frac * (cumulative_[j + 1] - cumulative_[j]);
}

double ApPolicy::level(const StepContext& ctx) {
  // cumulative_[k] holds the excess volume over [0, t_k]; extend it with the
  // previous step's excess before reading the trailing window.
  if (ctx.k > 0) {
    const double excess_prev = std::max(ctx.lambda_prev - predicted_prev_, 0.0);
    cumulative_.push_back(cumulative_.back() + ctx.h * excess_prev);
  }
  predicted_prev_ = plan_->prediction(ctx.t);
  const double window = cumulative_.back() - excess_volume_before(ctx.t - plan_->pulse_width);
  const double m2 = plan_->pulse_gain * std::max(window, 0.0);
  m2_.push_back(m2);
  return plan_->m1.level(ctx.t) + m2;
}

AbcsPolicy::AbcsPolicy(std::shared_ptr<const APDecomposition> plan, const ABCSParams& p)
    : advisor_(std::move(plan)), p_(p) {
  p_.validate();
}

std::string AbcsPolicy::name() const {
  std::ostringstream s;
  s << "abcs{r1=" << p_.r1 << ",r2=" << p_.r2 << ",R1=" << p_.R1 << ",R2=" << p_.R2 << "}";
  return s.str();
}

void AbcsPolicy::reset(const CostWeights& w, double h) {
  if (w.no_wait) throw std::invalid_argument("abcs needs finite omega");
  w_ = w;
  advisor_.reset(w, h);
  m_adv_.clear();
  q_adv_.clear();
}

double AbcsPolicy::level(const StepContext& ctx) {
  if (ctx.k == 0) {
    q_adv_.push_back(0.0);
  } else {
    q_adv_.push_back(std::max(q_adv_.back() + ctx.h * (ctx.lambda_prev - m_adv_.back()), 0.0));
  }
  const double previous_adv_m = m_adv_.empty() ? 0.0 : m_adv_.back();
  m_adv_.push_back(std::max(advisor_.level(ctx), 0.0));
  if (ctx.k == 0) return 0.0;
  const double q_adv_prev = q_adv_[ctx.k - 1];
  const auto [r1_hat, r2_hat] = abcs_rates(ctx.q_prev, ctx.m_prev, q_adv_prev, previous_adv_m, w_, p_);
  const double euler = ctx.m_prev + ctx.h * bcs_derivative(ctx.q_prev, ctx.m_prev, w_, r1_hat, r2_hat);

  // The rates switch on the surface m - m_adv = [q - q_adv]^+ sqrt(omega / 2 beta).
  // A step that crosses it is limited to the point of the interval spanned by
  // the Euler steps of both sides that lies closest to the surface, so the
  // state slides along the surface instead of chattering across it.
  const double gain = std::sqrt(w_.omega / (2.0 * w_.beta));
  const bool above = ctx.m_prev - previous_adv_m > std::max(ctx.q_prev - q_adv_prev, 0.0) * gain;
  const double surface = m_adv_.back() + std::max(ctx.q - q_adv_.back(), 0.0) * gain;
  if ((euler > surface) == above) return euler;
  const double r1_other = above ? p_.R1 : p_.r1;
  const double r2_other = above ? p_.r2 : (ctx.q_prev <= q_adv_prev ? p_.R2 : p_.r2);
  const double other = ctx.m_prev + ctx.h * bcs_derivative(ctx.q_prev, ctx.m_prev, w_, r1_other, r2_other);
  return std::clamp(surface, std::min(euler, other), std::max(euler, other));
}

TimerPolicy::TimerPolicy(double tau) : tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
}

std::string TimerPolicy::name() const {
  std::ostringstream s;
  s << "timer{tau=" << tau_ << "}";
  return s.str();
}

void TimerPolicy::reset(const CostWeights&, double) { marks_.clear(); }

double TimerPolicy::level(const StepContext& ctx) {
  if (ctx.k > 0) {
    const double busy = ctx.q_prev > 0.0 ? ctx.m_prev : std::min(ctx.m_prev, ctx.lambda_prev);
    while (!marks_.empty() && marks_.back().busy <= busy) marks_.pop_back();
    marks_.push_back({ctx.t, busy});
  }
  const double slack = 1e-9 * std::max(1.0, tau_);
  while (!marks_.empty() && ctx.t - marks_.front().time >= tau_ - slack) marks_.pop_front();
  const double held = marks_.empty() ? 0.0 : marks_.front().busy;
  return std::max(ctx.lambda, held);
}

void NowaitBcsPolicy::reset(const CostWeights& w, double) {
  if (!w.no_wait) throw std::invalid_argument("nowait_bcs requires no-wait mode");
  if (!(w.beta > 0.0)) throw std::invalid_argument("nowait_bcs needs beta > 0");
  w_ = w;
}

double NowaitBcsPolicy::level(const StepContext& ctx) {
  if (ctx.k == 0) return ctx.lambda;
  const double decayed = ctx.m_prev - ctx.h * w_.theta * ctx.m_prev / w_.beta;
  return std::max(ctx.lambda, decayed);
}

SchedulePolicy::SchedulePolicy(std::string label, std::vector<double> levels, double delta)
    : label_(std::move(label)), levels_(std::move(levels)), delta_(delta) {
  if (levels_.empty() || !(delta_ > 0.0)) throw std::invalid_argument("schedule needs levels and a positive delta");
  for (double v : levels_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("schedule levels must be finite and nonnegative");
  }
}

SchedulePolicy SchedulePolicy::constant(double level) {
  std::ostringstream s;
  s << "constant{m=" << level << "}";
  return SchedulePolicy(s.str(), {level}, std::numeric_limits<double>::infinity());
}

SchedulePolicy SchedulePolicy::from_lp(const LPSolution& sol) {
  return SchedulePolicy("offline", sol.m, sol.delta);
}

double SchedulePolicy::level(const StepContext& ctx) {
  if (!std::isfinite(delta_) || ctx.t <= 0.0) return levels_.front();
  const auto i = static_cast<std::size_t>(std::floor(ctx.t / delta_ + 1e-9));
  return levels_[std::min(i, levels_.size() - 1)];
}

}  // namespace capscale
