#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "capscale/workload.hpp"

using namespace capscale;

namespace {

std::vector<double> as_vector(const ArrivalFunction& f) { return {f.rates().begin(), f.rates().end()}; }

// Independent integral of the truncated moving-average window.
double window_average(const ArrivalFunction& f, double t, double w) {
  const double lo = std::max(0.0, t - w / 2.0), hi = std::min(f.horizon(), t + w / 2.0);
  const int steps = 20000;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) sum += f(lo + (hi - lo) * (i + 0.5) / steps);
  return sum / steps;
}

}  // namespace

TEST_CASE("constant workloads") {
  const auto zero = make_constant(0.0, 1.0, 0.1);
  CHECK(zero.size() == 10);
  for (double r : zero.rates()) CHECK(r == 0.0);

  CHECK(as_vector(make_constant(2.0, 3.0, 1.0)) == std::vector<double>{2, 2, 2});

  const auto half = make_constant(1.0, 1.0, 0.5);
  CHECK(as_vector(half) == std::vector<double>{1, 1});
  CHECK(half.horizon() == doctest::Approx(1.0));
}

TEST_CASE("arrival function rejects bad input") {
  CHECK_THROWS_AS(ArrivalFunction(0.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ArrivalFunction(1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(ArrivalFunction(1.0, {-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ArrivalFunction(1.0, {NAN}), std::invalid_argument);
  CHECK_THROWS(make_constant(1.0, 1.0, 0.3));
}

TEST_CASE("evaluation and integral") {
  const ArrivalFunction f(0.5, {1.0, 3.0, 0.0, 2.0});
  CHECK(f(0.0) == 1.0);
  CHECK(f(0.49) == 1.0);
  CHECK(f(0.5) == 3.0);
  CHECK(f(5.0) == 2.0);
  CHECK(f.integral(0.0, 2.0) == doctest::Approx(3.0));
  CHECK(f.integral(0.25, 0.75) == doctest::Approx(0.25 * 1.0 + 0.25 * 3.0));
  CHECK(f.integral(-1.0, 10.0) == doctest::Approx(f.total_work()));
  CHECK(f.max_rate() == 3.0);
}

TEST_CASE("resampling") {
  const ArrivalFunction f(1.0, {1.0, 2.0});
  CHECK(as_vector(f.resampled(0.5)) == std::vector<double>{1, 1, 2, 2});
  CHECK(f.regular_at(0.25));
  CHECK_FALSE(f.regular_at(2.0));
  CHECK(as_vector(make_constant(3.0, 4.0, 1.0).resampled(2.0)) == std::vector<double>{3, 3});
  CHECK(whole_multiple(1.0, 0.01) == 100);
  CHECK(whole_multiple(1.0, 0.3) == 0);
}

TEST_CASE("sinusoid") {
  const auto s = make_sinusoid(500, 500, 24, 24, 1);
  CHECK(s.size() == 24);
  double lo = 1e9, hi = -1e9;
  for (double r : s.rates()) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo >= 0.0);
  CHECK(hi <= 1000.0);
  CHECK(s.total_work() / s.horizon() == doctest::Approx(500.0).epsilon(1e-9));

  for (double r : as_vector(make_sinusoid(1, 0, 10, 10, 1))) CHECK(r == doctest::Approx(1.0));

  // Peak of 500 + 500 sin(2 pi t / 24) is at t = 6; the segment starting there must carry it.
  const auto fine = make_sinusoid(500, 500, 24, 24, 0.5);
  CHECK(fine(6.0) == doctest::Approx(500.0 + 500.0 * std::sin(2.0 * M_PI * 6.0 / 24.0)));
  CHECK(fine(6.0) == doctest::Approx(1000.0));
}

TEST_CASE("step") {
  const auto s = make_step(0, 1000, 6, 24, 1);
  for (std::size_t i = 0; i < 24; ++i) CHECK(s.rate(i) == ((i / 6) % 2 == 0 ? 0.0 : 1000.0));
  for (double r : as_vector(make_step(5, 5, 1, 2, 1))) CHECK(r == 5.0);
  CHECK(as_vector(make_step(0, 2, 1, 4, 0.5)) == std::vector<double>{0, 0, 2, 2, 0, 0, 2, 2});
}

TEST_CASE("random generator parameters yield valid functions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double mean = 1000 * u(rng), amp = mean * u(rng), period = 1 + 47 * u(rng);
    const double delta = trial % 2 ? 1.0 : 0.5;
    const double horizon = delta * (1 + static_cast<int>(48 * u(rng)));
    const auto s = make_sinusoid(mean, amp, period, horizon, delta);
    CHECK(s.horizon() == doctest::Approx(horizon));
    for (double r : s.rates()) CHECK((r >= 0.0 && std::isfinite(r)));

    const double low = 100 * u(rng), high = low + 100 * u(rng);
    const auto st = make_step(low, high, delta * (1 + trial % 5), horizon, delta);
    for (double r : st.rates()) CHECK((r == low || r == high));
  }
}

TEST_CASE("poisson buckets are deterministic per seed") {
  const auto intensity = make_sinusoid(50, 50, 24, 24, 1);
  const auto a = make_poisson(intensity, 3), b = make_poisson(intensity, 3), c = make_poisson(intensity, 4);
  CHECK(as_vector(a) == as_vector(b));
  CHECK(as_vector(a) != as_vector(c));
  for (double r : a.rates()) CHECK(r == std::floor(r));
  CHECK(a.total_work() == doctest::Approx(intensity.total_work()).epsilon(0.2));
}

TEST_CASE("trace ingestion") {
  const std::vector<TraceRow> one{{0.1, 1}, {0.2, 1}, {0.9, 1}};
  CHECK(as_vector(ingest_trace(one, 1.0)) == std::vector<double>{3});

  const std::vector<TraceRow> two{{0.5, 1}, {1.5, 1}};
  CHECK(as_vector(ingest_trace(two, 1.0)) == std::vector<double>{1, 1});

  std::vector<TraceRow> uniform;
  for (int i = 0; i < 3600; ++i) uniform.push_back({i / 3600.0, 1});
  CHECK(as_vector(ingest_trace(uniform, 0.5)) == std::vector<double>{3600, 3600});

  CHECK_THROWS(ingest_trace(std::vector<TraceRow>{}, 1.0));
  CHECK_THROWS(ingest_trace(std::vector<TraceRow>{{0.0, -1}}, 1.0));
}

TEST_CASE("trace csv roundtrip") {
  const ArrivalFunction f(0.5, {4.0, 0.0, 10.0});
  std::stringstream buf;
  write_trace_csv(buf, f);
  const auto rows = read_trace_csv(buf);
  CHECK(as_vector(ingest_trace(rows, 0.5)) == as_vector(f));

  std::istringstream secs("timestamp,requests\n0,3\n1800,1\n3600,2\n");
  CHECK(as_vector(ingest_trace(read_trace_csv(secs), 0.5)) == std::vector<double>{6, 2, 4});

  std::istringstream bad("timestamp,requests\n0,x\n");
  CHECK_THROWS(read_trace_csv(bad));
}

TEST_CASE("predictions") {
  const auto lambda = make_sinusoid(500, 500, 24, 24, 1);
  CHECK(as_vector(make_prediction(PredictionSpec::perfect(), lambda)) == as_vector(lambda));
  CHECK(mae(make_prediction(PredictionSpec::perfect(), lambda), lambda) == 0.0);
  for (double r : as_vector(make_prediction(PredictionSpec::zero(), lambda))) CHECK(r == 0.0);
  for (double r : as_vector(make_prediction(PredictionSpec::constant(500), lambda))) CHECK(r == 500.0);

  const auto opp = make_prediction(PredictionSpec::opposite(1000), lambda);
  for (std::size_t i = 0; i < lambda.size(); ++i) CHECK(opp.rate(i) == doctest::Approx(1000.0 - lambda.rate(i)));
  CHECK_THROWS(make_prediction(PredictionSpec::opposite(10), lambda));

  for (double r : as_vector(make_prediction(PredictionSpec::moving_average(3), make_constant(7, 10, 1)))) {
    CHECK(r == doctest::Approx(7.0));
  }
}

TEST_CASE("moving average matches a quadrature oracle") {
  const auto lambda = make_step(0, 10, 3, 12, 1);
  const auto ma = make_prediction(PredictionSpec::moving_average(3), lambda);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double mid = (static_cast<double>(i) + 0.5) * lambda.delta();
    CHECK(ma.rate(i) == doctest::Approx(window_average(lambda, mid, 3.0)).epsilon(1e-3));
  }
}

TEST_CASE("moving average nearly preserves total work") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> rates(24);
    for (double& r : rates) r = u(rng);
    const ArrivalFunction lambda(1.0, rates);
    const double w = 1.0 + trial % 6;
    const auto ma = make_prediction(PredictionSpec::moving_average(w), lambda);
    CHECK(std::abs(ma.total_work() - lambda.total_work()) <= w / 2.0 * lambda.max_rate() + 1e-9);
  }
}

TEST_CASE("mean absolute error") {
  const auto lambda = make_constant(3, 5, 1);
  CHECK(mae(lambda, lambda) == 0.0);
  CHECK(mae(make_constant(0, 5, 1), lambda) == doctest::Approx(3.0));
  CHECK(mae(ArrivalFunction(1, {0, 2}), ArrivalFunction(1, {2, 0})) == doctest::Approx(2.0));
  CHECK_THROWS(mae(make_constant(1, 5, 1), make_constant(1, 4, 1)));
}

TEST_CASE("mae is a metric on a fixed grid") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  auto draw = [&] {
    std::vector<double> r(12);
    for (double& x : r) x = u(rng);
    return ArrivalFunction(0.5, r);
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = draw(), b = draw(), c = draw();
    CHECK(mae(a, a) == 0.0);
    CHECK(mae(a, b) >= 0.0);
    CHECK(mae(a, b) == doctest::Approx(mae(b, a)));
    CHECK(mae(a, c) <= mae(a, b) + mae(b, c) + 1e-12);
  }
}

TEST_CASE("accuracy eta") {
  const auto lambda = make_constant(2, 10, 1);
  CHECK(accuracy_eta(lambda, lambda, 4.0).eta == 0.0);

  const auto r = accuracy_eta(make_constant(1, 10, 1), make_constant(2, 10, 1), 5.0);
  CHECK(r.mae == doctest::Approx(1.0));
  CHECK(r.eta == doctest::Approx(2.0));
  CHECK(r.opt_used == 5.0);

  // Prediction 2 everywhere, actual 2 then 0 with Opt at most 4 delta.
  const double delta = 0.25;
  const ArrivalFunction predicted(delta, std::vector<double>(12, 2.0));
  std::vector<double> actual(12, 0.0);
  for (int i = 0; i < 4; ++i) actual[i] = 2.0;
  const auto acc = accuracy_eta(predicted, ArrivalFunction(delta, actual), 4 * delta);
  CHECK(acc.mae * predicted.horizon() == doctest::Approx(4.0));
  CHECK(acc.eta == doctest::Approx(1.0 / delta));
}
