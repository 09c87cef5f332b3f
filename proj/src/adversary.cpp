#include "capscale/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "capscale/algorithms.hpp"

namespace capscale {

namespace {

std::size_t grid_steps(double length, double h, const char* what) {
  const std::size_t n = whole_multiple(length, h);
  if (n == 0) throw std::invalid_argument(std::string(what) + " is not a multiple of the step");
  return n;
}

double schedule_cost(SchedulePolicy schedule, const ArrivalFunction& instance, const CostWeights& w,
                     double h) {
  return cost(simulate(schedule, instance, w, h), w).total;
}

void finish_report(AdversaryReport& r) {
  r.ratio = competitive_ratio(r.alg_cost, r.opt_upper_bound);
}

}  // namespace

AdversaryReport online_lower_bound(const PolicyFactory& factory, double h) {
  if (!factory) throw std::invalid_argument("no policy to attack");
  const CostWeights w{1.0, 1.0, 0.0, false};
  const std::size_t last = grid_steps(3.0, h, "horizon 3");
  const std::size_t first_check = 10;
  if (last <= first_check) throw std::invalid_argument("step too coarse for the threshold test");
  const ArrivalFunction prediction(3.0, {0.0});
  const std::unique_ptr<Policy> policy = factory(prediction, w);

  Rollout rollout(*policy, w, h);
  std::size_t stop = last;
  double tau = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= last; ++k) {
    const double t = h * static_cast<double>(k);
    const double m = rollout.decide(1.0);
    if (k >= first_check && t <= 1.225 && m > 0.885 * t * t) {
      stop = k;
      tau = t;
      break;
    }
    if (k < last) rollout.advance();
  }

  AdversaryReport r;
  r.attack = "online";
  r.policy = policy->name();
  r.weights = w;
  r.h = h;
  r.instance = ArrivalFunction(h, std::vector<double>(stop, 1.0));
  r.alg_cost = cost(rollout.finish(r.instance), w).total;
  r.claimed_bound = 2.549;
  r.details["threshold_coefficient"] = 0.885;
  r.details["cutoff"] = h * static_cast<double>(first_check);
  const double horizon = h * static_cast<double>(stop);
  r.details["horizon"] = horizon;
  if (std::isfinite(tau)) {
    r.branch = "early";
    r.details["tau"] = tau;
    r.opt_schedule = "constant{m=0}";
    r.opt_upper_bound = schedule_cost(SchedulePolicy::constant(0.0), r.instance, w, h);
    r.details["opt_formula"] = tau * tau / 2.0;
  } else {
    r.branch = "late";
    r.opt_schedule = "constant{m=1}";
    r.opt_upper_bound = schedule_cost(SchedulePolicy::constant(1.0), r.instance, w, h);
    r.details["opt_formula"] = 1.0;
  }
  finish_report(r);
  return r;
}

AdversaryReport timer_lower_bound(double tau, double horizon, double epsilon, const CostWeights& w,
                                  double h, const PolicyFactory& factory) {
  if (!(epsilon > 0.0) || !(epsilon < tau)) throw std::invalid_argument("need 0 < epsilon < tau");
  w.validate();
  if (w.no_wait) throw std::invalid_argument("the timer attack needs a finite omega");
  const std::size_t n = grid_steps(horizon, h, "horizon");
  const std::size_t period = grid_steps(tau, h, "tau");
  const std::size_t burst = grid_steps(epsilon, h, "epsilon");
  const ArrivalFunction prediction(horizon, {0.0});
  std::unique_ptr<Policy> policy = factory ? factory(prediction, w) : std::make_unique<TimerPolicy>(tau);

  Rollout rollout(*policy, w, h);
  std::vector<double> rates;
  rates.reserve(n);
  std::size_t k0 = n + 1;  // grid index of t0
  for (std::size_t k = 0; k <= n; ++k) {
    double lambda = 2.0;
    if (k >= k0) lambda = (k - k0) % period < burst ? 1.0 : 0.0;
    const double m = rollout.decide(lambda);
    if (k0 > n && m >= 1.0) k0 = k + 1;
    if (k < n) {
      rates.push_back(lambda);
      rollout.advance();
    }
  }

  AdversaryReport r;
  r.attack = "timer";
  r.policy = policy->name();
  r.weights = w;
  r.h = h;
  r.instance = ArrivalFunction(h, rates);
  r.alg_cost = cost(rollout.finish(r.instance), w).total;
  r.details["tau"] = tau;
  r.details["epsilon"] = epsilon;
  r.details["horizon"] = horizon;
  const double T = horizon;
  if (k0 >= n) {
    r.branch = "never";
    r.opt_schedule = "constant{m=2}";
    r.opt_upper_bound = schedule_cost(SchedulePolicy::constant(2.0), r.instance, w, h);
    r.details["opt_formula"] = 2.0 * w.beta + 2.0 * w.theta * T;
    r.claimed_bound = w.omega * T * T / (4.0 * w.beta + 2.0 * w.theta * T);
  } else {
    const double t0 = h * static_cast<double>(k0);
    r.branch = "bursts";
    r.details["t0"] = t0;
    std::vector<double> levels(n + 1, epsilon / tau);
    std::fill(levels.begin(), levels.begin() + static_cast<std::ptrdiff_t>(k0), 2.0);
    std::ostringstream label;
    label << "two_level{m=2 until " << t0 << ", then " << epsilon / tau << "}";
    r.opt_schedule = label.str();
    r.opt_upper_bound = schedule_cost(SchedulePolicy(label.str(), levels, h), r.instance, w, h);
    const double opt_formula =
        2.0 * w.beta + 2.0 * w.theta * t0 + epsilon * w.theta * T / tau + epsilon * w.omega * T / 2.0;
    r.details["opt_formula"] = opt_formula;
    r.claimed_bound = (w.beta + w.theta * (T - t0)) / opt_formula;
  }
  finish_report(r);
  return r;
}

AdversaryReport consistency_tradeoff(const PolicyFactory& factory, double delta, double h) {
  if (!factory) throw std::invalid_argument("no policy to attack");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
  const CostWeights w{1.0, 1.0, 0.0, false};
  const auto window = static_cast<std::size_t>(std::llround(std::sqrt(2.0) * delta / h));
  if (window == 0) throw std::invalid_argument("step too coarse for the observation window");
  const std::size_t n = grid_steps(2.0, h, "horizon 2") + window;
  const double T = h * static_cast<double>(n);
  const ArrivalFunction prediction(T, {2.0});
  const std::unique_ptr<Policy> policy = factory(prediction, w);

  Rollout rollout(*policy, w, h);
  std::vector<double> rates;
  rates.reserve(n);
  double mbar = 0.0;
  double continuation = 2.0;
  for (std::size_t k = 0; k <= n; ++k) {
    if (k == window) continuation = mbar < 1.0 ? 2.0 : 0.0;
    const double lambda = k < window ? 2.0 : continuation;
    const double m = rollout.decide(lambda);
    if (k < window) mbar = std::max(mbar, m);
    if (k < n) {
      rates.push_back(lambda);
      rollout.advance();
    }
  }

  AdversaryReport r;
  r.attack = "tradeoff";
  r.policy = policy->name();
  r.weights = w;
  r.h = h;
  r.instance = ArrivalFunction(h, rates);
  r.alg_cost = cost(rollout.finish(r.instance), w).total;
  r.details["delta"] = delta;
  r.details["window"] = h * static_cast<double>(window);
  r.details["horizon"] = T;
  r.details["mbar"] = mbar;
  if (continuation == 2.0) {
    r.branch = "consistency";
    r.opt_schedule = "constant{m=2}";
    r.opt_upper_bound = schedule_cost(SchedulePolicy::constant(2.0), r.instance, w, h);
    r.details["opt_formula"] = 2.0;
    r.claimed_bound = 1.0 + delta;
  } else {
    r.branch = "robustness";
    r.opt_schedule = "constant{m=2delta}";
    r.opt_upper_bound = schedule_cost(SchedulePolicy::constant(2.0 * delta), r.instance, w, h);
    // Queue peaks at (2 - 2 delta) w and drains at rate 2 delta.
    const double w_len = h * static_cast<double>(window);
    r.details["opt_formula"] = 2.0 * delta + (1.0 - delta) * w_len * w_len / delta;
    r.details["prediction_l1_error"] = 2.0 * (T - h * static_cast<double>(window));
    r.claimed_bound = 1.0 / (4.0 * delta);
  }
  finish_report(r);
  return r;
}

AdversaryReport setup_time_lower_bound(const PolicyFactory& factory, double t0, const CostWeights& w_in,
                                       double h) {
  if (!factory) throw std::invalid_argument("no policy to attack");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw std::invalid_argument("setup time must be positive");
  CostWeights w = w_in;
  w.theta = 0.0;
  w.validate();
  if (w.no_wait) throw std::invalid_argument("the setup-time attack needs a finite omega");
  const std::size_t k0 = grid_steps(t0, h, "setup time");
  const std::size_t n = 2 * k0;
  const ArrivalFunction prediction(2.0 * t0, {0.0});

  // A deterministic policy behaves identically on [0, t0] under both
  // continuations, so the adversary may inspect the rho = 0 run first.
  auto run = [&](double rho, std::string& name) {
    std::vector<double> rates(n, 0.0);
    std::fill(rates.begin() + static_cast<std::ptrdiff_t>(k0), rates.end(), rho);
    ArrivalFunction instance(h, rates);
    SetupLatencyPolicy policy(factory(prediction, w), t0);
    name = policy.name();
    const Trajectory traj = simulate(policy, instance, w, h);
    return std::make_pair(instance, cost(traj, w).total);
  };

  AdversaryReport r;
  r.attack = "setup";
  r.weights = w;
  r.h = h;
  r.details["t0"] = t0;
  auto [idle_instance, idle_cost] = run(0.0, r.policy);
  if (idle_cost > 0.0) {
    r.branch = "preactivated";
    r.instance = idle_instance;
    r.alg_cost = idle_cost;
    r.opt_schedule = "constant{m=0}";
    r.opt_upper_bound = schedule_cost(SchedulePolicy::constant(0.0), r.instance, w, h);
    r.details["opt_formula"] = 0.0;
    r.claimed_bound = std::numeric_limits<double>::infinity();
  } else {
    auto [busy_instance, busy_cost] = run(1.0, r.policy);
    r.branch = "idle";
    r.instance = busy_instance;
    r.alg_cost = busy_cost;
    r.opt_schedule = "constant{m=1}";
    r.opt_upper_bound = schedule_cost(SchedulePolicy::constant(1.0), r.instance, w, h);
    r.details["opt_formula"] = w.beta;
    r.claimed_bound = w.omega * t0 * t0 / (2.0 * w.beta);
  }
  finish_report(r);
  return r;
}

AdversaryReport integrality_gap(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  const CostWeights w{1.0, 0.0, 1.0, true};
  const double T = 1.0 / epsilon;
  AdversaryReport r;
  r.attack = "intgap";
  r.policy = "integer_optimum";
  r.weights = w;
  r.h = T;
  r.instance = ArrivalFunction(T, {epsilon});
  // With beta = 0 the cost separates over time, so the integer optimum holds
  // ceil(lambda) pointwise and the fractional optimum holds lambda.
  r.alg_cost = schedule_cost(SchedulePolicy::constant(std::ceil(epsilon)), r.instance, w, T);
  r.opt_schedule = "constant{m=epsilon}";
  r.opt_upper_bound = schedule_cost(SchedulePolicy::constant(epsilon), r.instance, w, T);
  r.details["epsilon"] = epsilon;
  r.details["horizon"] = T;
  r.details["lp_optimum"] = opt_cost(r.instance, w, T).cost;
  r.details["opt_formula"] = 1.0;
  r.claimed_bound = 1.0 / epsilon;
  r.branch = "pointwise";
  finish_report(r);
  return r;
}

SetupLatencyPolicy::SetupLatencyPolicy(std::unique_ptr<Policy> inner, double t0)
    : inner_(std::move(inner)), t0_(t0) {
  if (!inner_) throw std::invalid_argument("no policy to delay");
  if (!(t0 > 0.0)) throw std::invalid_argument("setup time must be positive");
}

std::string SetupLatencyPolicy::name() const {
  std::ostringstream s;
  s << inner_->name() << "+setup{t0=" << t0_ << "}";
  return s.str();
}

void SetupLatencyPolicy::reset(const CostWeights& w, double h) {
  lag_ = grid_steps(t0_, h, "setup time");
  requests_.assign(lag_, 0.0);
  inner_->reset(w, h);
}

double SetupLatencyPolicy::level(const StepContext& ctx) {
  requests_.push_back(std::max(inner_->level(ctx), 0.0));
  if (requests_.size() > lag_ + 1) requests_.pop_front();
  return *std::min_element(requests_.begin(), requests_.end());
}

}  // namespace capscale
