#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace capscale {

/// Piecewise-constant arrival rate on a uniform grid.
///
/// Segment i covers [i*delta, (i+1)*delta) and carries rates[i] (work units
/// per hour). The same type is used for predictions.
class ArrivalFunction {
 public:
  ArrivalFunction(double delta, std::vector<double> rates);

  double delta() const { return delta_; }
  double horizon() const { return delta_ * static_cast<double>(rates_.size()); }
  std::size_t size() const { return rates_.size(); }
  std::span<const double> rates() const { return rates_; }
  double rate(std::size_t i) const { return rates_.at(i); }

  /// Right-continuous evaluation; t at or beyond the horizon returns the last rate.
  double operator()(double t) const;
  /// Exact integral of the rate over [a, b] clipped to [0, T].
  double integral(double a, double b) const;
  double total_work() const;
  double max_rate() const;

  /// Re-expresses the function on a grid of width `delta`, which must be an
  /// integer divisor of delta(), or an integer multiple over which the rate
  /// is constant.
  ArrivalFunction resampled(double delta) const;
  bool regular_at(double delta) const;

 private:
  double delta_;
  std::vector<double> rates_;
};

/// Returns n when `whole` is n times `part` up to rounding, otherwise 0.
std::size_t whole_multiple(double whole, double part);

ArrivalFunction make_constant(double rate, double horizon, double delta);
ArrivalFunction make_sinusoid(double mean, double amplitude, double period,
                              double horizon, double delta);
ArrivalFunction make_step(double low, double high, double half_period,
                          double horizon, double delta);
/// Bucket counts drawn as Poisson(intensity_i * delta); rate = count / delta.
ArrivalFunction make_poisson(const ArrivalFunction& intensity, std::uint64_t seed);

struct TraceRow {
  double time;   // hours
  double count;  // requests observed at `time`
};

ArrivalFunction ingest_trace(std::span<const TraceRow> rows, double delta);
/// Reads `timestamp,requests` rows; POSIX seconds are converted to hours.
std::vector<TraceRow> read_trace_csv(std::istream& in);
/// Writes one row per segment: segment start in seconds and its request count.
void write_trace_csv(std::ostream& out, const ArrivalFunction& lambda);

enum class PredictionKind { kZero, kPerfect, kConstant, kOpposite, kMovingAverage };

struct PredictionSpec {
  PredictionKind kind = PredictionKind::kZero;
  double value = 0.0;  // c, cap, or window length depending on kind

  static PredictionSpec zero() { return {PredictionKind::kZero, 0.0}; }
  static PredictionSpec perfect() { return {PredictionKind::kPerfect, 0.0}; }
  static PredictionSpec constant(double c) { return {PredictionKind::kConstant, c}; }
  static PredictionSpec opposite(double cap) { return {PredictionKind::kOpposite, cap}; }
  static PredictionSpec moving_average(double w) { return {PredictionKind::kMovingAverage, w}; }
};

std::string to_string(const PredictionSpec& spec);

ArrivalFunction make_prediction(const PredictionSpec& spec, const ArrivalFunction& lambda);

double mae(const ArrivalFunction& predicted, const ArrivalFunction& actual);

struct AccuracyReport {
  double mae = 0.0;
  double eta = 0.0;
  double opt_used = 0.0;
};

AccuracyReport accuracy_eta(const ArrivalFunction& predicted, const ArrivalFunction& actual,
                            double opt_cost);

}  // namespace capscale
