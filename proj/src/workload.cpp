#include "capscale/workload.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace capscale {

namespace {

constexpr double kGridTol = 1e-9;

void require_grid(double delta, double horizon) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
}

std::size_t segment_count(double horizon, double delta) {
  require_grid(delta, horizon);
  const std::size_t n = whole_multiple(horizon, delta);
  if (n == 0) throw std::invalid_argument("horizon is not a multiple of delta");
  return n;
}

std::size_t floor_index(double x) {
  return static_cast<std::size_t>(std::floor(x + kGridTol));
}

}  // namespace

std::size_t whole_multiple(double whole, double part) {
  if (!(part > 0.0) || !(whole > 0.0)) return 0;
  const double ratio = whole / part;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > kGridTol * std::max(1.0, n)) return 0;
  return static_cast<std::size_t>(n);
}

ArrivalFunction::ArrivalFunction(double delta, std::vector<double> rates)
    : delta_(delta), rates_(std::move(rates)) {
  if (!(delta_ > 0.0) || !std::isfinite(delta_)) throw std::invalid_argument("delta must be positive");
  if (rates_.empty()) throw std::invalid_argument("arrival function needs at least one segment");
  for (double r : rates_) {
    if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("rates must be finite and nonnegative");
  }
}

double ArrivalFunction::operator()(double t) const {
  if (t <= 0.0) return rates_.front();
  return rates_[std::min(floor_index(t / delta_), rates_.size() - 1)];
}

double ArrivalFunction::integral(double a, double b) const {
  const double horizon_t = horizon();
  a = std::clamp(a, 0.0, horizon_t);
  b = std::clamp(b, 0.0, horizon_t);
  if (b <= a) return 0.0;
  const std::size_t first = std::min(static_cast<std::size_t>(a / delta_), rates_.size() - 1);
  double total = 0.0;
  for (std::size_t i = first; i < rates_.size(); ++i) {
    const double lo = std::max(a, static_cast<double>(i) * delta_);
    const double hi = std::min(b, static_cast<double>(i + 1) * delta_);
    if (hi <= lo) {
      if (static_cast<double>(i) * delta_ >= b) break;
      continue;
    }
    total += rates_[i] * (hi - lo);
  }
  return total;
}

double ArrivalFunction::total_work() const {
  double total = 0.0;
  for (double r : rates_) total += r * delta_;
  return total;
}

double ArrivalFunction::max_rate() const { return *std::max_element(rates_.begin(), rates_.end()); }

bool ArrivalFunction::regular_at(double delta) const {
  if (whole_multiple(delta_, delta) != 0) return true;
  const std::size_t k = whole_multiple(delta, delta_);
  if (k == 0 || rates_.size() % k != 0) return false;
  for (std::size_t i = 0; i < rates_.size(); i += k) {
    for (std::size_t j = 1; j < k; ++j) {
      if (rates_[i + j] != rates_[i]) return false;
    }
  }
  return true;
}

ArrivalFunction ArrivalFunction::resampled(double delta) const {
  if (const std::size_t k = whole_multiple(delta_, delta); k != 0) {
    if (k == 1) return ArrivalFunction(delta_, rates_);
    std::vector<double> fine;
    fine.reserve(rates_.size() * k);
    for (double r : rates_) fine.insert(fine.end(), k, r);
    return ArrivalFunction(delta_ / static_cast<double>(k), std::move(fine));
  }
  if (!regular_at(delta)) throw std::invalid_argument("arrival function is not regular at the requested delta");
  const std::size_t k = whole_multiple(delta, delta_);
  std::vector<double> coarse;
  for (std::size_t i = 0; i < rates_.size(); i += k) coarse.push_back(rates_[i]);
  return ArrivalFunction(delta_ * static_cast<double>(k), std::move(coarse));
}

ArrivalFunction make_constant(double rate, double horizon, double delta) {
  const std::size_t n = segment_count(horizon, delta);
  if (!(rate >= 0.0)) throw std::invalid_argument("rate must be nonnegative");
  return ArrivalFunction(delta, std::vector<double>(n, rate));
}

ArrivalFunction make_sinusoid(double mean, double amplitude, double period, double horizon,
                              double delta) {
  const std::size_t n = segment_count(horizon, delta);
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("amplitude must be nonnegative");
  if (amplitude > mean) throw std::invalid_argument("amplitude exceeds mean");
  std::vector<double> rates(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * delta;
    const double value = mean + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
    rates[i] = value < 0.0 ? 0.0 : value;
  }
  return ArrivalFunction(delta, std::move(rates));
}

ArrivalFunction make_step(double low, double high, double half_period, double horizon,
                          double delta) {
  const std::size_t n = segment_count(horizon, delta);
  if (!(low >= 0.0) || !(high >= low)) throw std::invalid_argument("need 0 <= low <= high");
  const std::size_t k = whole_multiple(half_period, delta);
  if (k == 0) throw std::invalid_argument("half period is not a multiple of delta");
  std::vector<double> rates(n);
  for (std::size_t i = 0; i < n; ++i) rates[i] = (i / k) % 2 == 0 ? low : high;
  return ArrivalFunction(delta, std::move(rates));
}

ArrivalFunction make_poisson(const ArrivalFunction& intensity, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double delta = intensity.delta();
  std::vector<double> rates(intensity.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double mean = intensity.rate(i) * delta;
    if (mean > 0.0) {
      std::poisson_distribution<long long> draw(mean);
      rates[i] = static_cast<double>(draw(rng)) / delta;
    }
  }
  return ArrivalFunction(delta, std::move(rates));
}

ArrivalFunction ingest_trace(std::span<const TraceRow> rows, double delta) {
  if (rows.empty()) throw std::invalid_argument("empty trace");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double start = rows.front().time;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rows[i].count >= 0.0)) throw std::invalid_argument("negative request count");
    if (i > 0 && rows[i].time < rows[i - 1].time) throw std::invalid_argument("timestamps must be nondecreasing");
  }
  const std::size_t n = floor_index((rows.back().time - start) / delta) + 1;
  std::vector<double> counts(n, 0.0);
  for (const TraceRow& row : rows) {
    counts[std::min(floor_index((row.time - start) / delta), n - 1)] += row.count;
  }
  for (double& c : counts) c /= delta;
  return ArrivalFunction(delta, std::move(counts));
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("trace row without comma: " + line);
    const std::string ts = line.substr(0, comma);
    const std::string count = line.substr(comma + 1);
    if (first) {
      first = false;
      if (ts == "timestamp") continue;
    }
    const double seconds = std::stod(ts);
    const double c = std::stod(count);
    rows.push_back({seconds / 3600.0, c});
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const ArrivalFunction& lambda) {
  std::ostringstream buf;
  buf.precision(12);
  buf << "timestamp,requests\n";
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    buf << static_cast<double>(i) * lambda.delta() * 3600.0 << ',' << lambda.rate(i) * lambda.delta()
        << '\n';
  }
  out << buf.str();
}

std::string to_string(const PredictionSpec& spec) {
  std::ostringstream s;
  switch (spec.kind) {
    case PredictionKind::kZero: return "zero";
    case PredictionKind::kPerfect: return "perfect";
    case PredictionKind::kConstant: s << "constant(" << spec.value << ")"; break;
    case PredictionKind::kOpposite: s << "opposite(" << spec.value << ")"; break;
    case PredictionKind::kMovingAverage: s << "moving_average(" << spec.value << ")"; break;
  }
  return s.str();
}

ArrivalFunction make_prediction(const PredictionSpec& spec, const ArrivalFunction& lambda) {
  const std::size_t n = lambda.size();
  const double delta = lambda.delta();
  std::vector<double> rates(n, 0.0);
  switch (spec.kind) {
    case PredictionKind::kZero:
      break;
    case PredictionKind::kPerfect:
      rates.assign(lambda.rates().begin(), lambda.rates().end());
      break;
    case PredictionKind::kConstant:
      if (!(spec.value >= 0.0)) throw std::invalid_argument("constant prediction must be nonnegative");
      rates.assign(n, spec.value);
      break;
    case PredictionKind::kOpposite:
      if (spec.value < lambda.max_rate()) throw std::invalid_argument("cap is below the maximum rate");
      for (std::size_t i = 0; i < n; ++i) rates[i] = spec.value - lambda.rate(i);
      break;
    case PredictionKind::kMovingAverage: {
      if (!(spec.value > 0.0)) throw std::invalid_argument("window must be positive");
      const double half = spec.value / 2.0;
      const double horizon = lambda.horizon();
      for (std::size_t i = 0; i < n; ++i) {
        const double t = (static_cast<double>(i) + 0.5) * delta;
        const double lo = std::max(t - half, 0.0);
        const double hi = std::min(t + half, horizon);
        rates[i] = std::max(lambda.integral(lo, hi) / (hi - lo), 0.0);
      }
      break;
    }
  }
  return ArrivalFunction(delta, std::move(rates));
}

double mae(const ArrivalFunction& predicted, const ArrivalFunction& actual) {
  if (predicted.size() != actual.size() ||
      std::abs(predicted.delta() - actual.delta()) > kGridTol * actual.delta()) {
    throw std::invalid_argument("mae requires matching grids");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    total += actual.delta() * std::abs(predicted.rate(i) - actual.rate(i));
  }
  return total / actual.horizon();
}

AccuracyReport accuracy_eta(const ArrivalFunction& predicted, const ArrivalFunction& actual,
                            double opt_cost) {
  if (!(opt_cost >= 0.0)) throw std::invalid_argument("optimum cost must be nonnegative");
  AccuracyReport report;
  report.mae = mae(predicted, actual);
  report.opt_used = opt_cost;
  if (opt_cost > 0.0) {
    report.eta = report.mae * actual.horizon() / opt_cost;
  } else {
    report.eta = report.mae > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return report;
}

}  // namespace capscale
