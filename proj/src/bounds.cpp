#include "capscale/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace capscale {

namespace mp = boost::multiprecision;

GuaranteeConstants guarantee_constants(const ABCSParams& p, Ordering ordering) {
  for (double v : {p.r1, p.r2, p.R1, p.R2}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("reaction rates must be positive and finite");
  }
  GuaranteeConstants g;
  g.params = p;
  g.ordering_violation = p.R1 < p.r1 || p.R2 < p.r2;
  if (g.ordering_violation && ordering == Ordering::kEnforce) {
    throw std::invalid_argument("guarantee constants need R1 >= r1 and R2 >= r2");
  }
  const double s1 = std::sqrt(1.0 + 2.0 * p.r1);
  const double S1 = std::sqrt(1.0 + 2.0 * p.R1);
  g.c1 = 1.0 + 1.0 / p.r1 + 1.0 / p.R2;
  g.c3 = 1.0 + 1.0 / p.R1 + 1.0 / p.R2;
  g.c2 = (g.c1 * s1 - g.c1 + g.c3) / S1;
  g.c4 = 1.0 + p.r2 + p.r2 / p.R1 + g.c2 * p.r2;
  g.c5 = 1.0 + 1.0 / p.r1 + 1.0 / p.r2;
  g.c6 = g.c5 * std::sqrt(p.R1 / p.r1);
  g.ocr = std::max({g.c1 * p.r1, g.c2 * p.R1 / S1, g.c2 + g.c3, g.c4});
  g.pcr = std::max({g.c5 * p.R1, 2.0 * g.c6, 2.0 * g.c6 * p.R2 + 1.0 - p.R2 / p.r2});
  return g;
}

ABCSParams corollary_params(double r) {
  if (!(r >= 1.1) || !std::isfinite(r)) throw std::invalid_argument("confidence must be at least 1.1");
  return {1.0 / r, 1.0 / r, 8.0 * r * (r - 1.0), 2.0 * r};
}

ABCSParams confidence_params(double r) {
  if (r == 1.0) return ABCSParams::bcs(2.0, 1.0);
  return corollary_params(r);
}

double pcr_envelope(double r) { return 16.0 * std::sqrt(2.0) * std::pow(r, 3.5); }

double ocr_expansion(double r) { return 1.0 + 1.0 / r + 5.0 / (8.0 * r * r); }

double accuracy_slope(const CostWeights& w) { return std::sqrt(2.0 * w.omega * w.beta) + w.theta; }

double cr_bound(double eta, const GuaranteeConstants& g, const CostWeights& w) {
  if (!(eta >= 0.0)) throw std::invalid_argument("accuracy must be nonnegative");
  if (std::isinf(eta)) return g.pcr;
  return std::min((1.0 + accuracy_slope(w) * eta) * g.ocr, g.pcr);
}

double crossover_eta(const GuaranteeConstants& g, const CostWeights& w) {
  if (g.pcr <= g.ocr) return 0.0;
  const double slope = accuracy_slope(w);
  if (slope == 0.0) return std::numeric_limits<double>::infinity();
  return (g.pcr / g.ocr - 1.0) / slope;
}

ExpectedCr expected_cr(std::span<const EtaSample> samples, const GuaranteeConstants& g,
                       const CostWeights& w) {
  if (samples.empty()) throw std::invalid_argument("no accuracy samples");
  double total_weight = 0.0;
  for (const EtaSample& s : samples) {
    if (!(s.weight >= 0.0) || !(s.eta >= 0.0)) throw std::invalid_argument("samples need nonnegative eta and weight");
    total_weight += s.weight;
  }
  if (std::abs(total_weight - 1.0) > 1e-9) throw std::invalid_argument("sample weights must sum to 1");
  ExpectedCr e;
  e.crossover = crossover_eta(g, w);
  e.zeta = (g.pcr - g.ocr) / (2.0 * g.ocr);
  for (const EtaSample& s : samples) {
    e.value += s.weight * cr_bound(s.eta, g, w);
    if (s.eta <= e.crossover) {
      e.prob_below += s.weight;
      e.mean_eta_below += s.weight * s.eta;
    }
  }
  e.decomposition = accuracy_slope(w) * g.ocr * e.mean_eta_below + g.ocr * e.prob_below +
                    g.pcr * (total_weight - e.prob_below);
  return e;
}

namespace {

Surd normalized(Surd s) {
  if (s.b == 0) s.radicand = 1;
  return s;
}

Rational common_radicand(const Surd& x, const Surd& y) {
  if (x.b == 0) return y.radicand;
  if (y.b == 0) return x.radicand;
  if (x.radicand != y.radicand) throw std::domain_error("surds lie in different quadratic fields");
  return x.radicand;
}

// sqrt(x) for rational x >= 0 as s/q * sqrt(D) with squarefree integer D.
Surd exact_sqrt(const Rational& x) {
  if (x < 0) throw std::domain_error("square root of a negative number");
  const mp::cpp_int num = mp::numerator(x);
  const mp::cpp_int den = mp::denominator(x);
  mp::cpp_int n = num * den;
  mp::cpp_int square = 1;
  const mp::cpp_int limit = 1000000;
  for (mp::cpp_int f = 2; f <= limit && f * f <= n; ++f) {
    while (n % (f * f) == 0) {
      n /= f * f;
      square *= f;
    }
  }
  if (n > limit * limit) {
    const mp::cpp_int root = mp::sqrt(n);
    if (root * root != n) throw std::domain_error("radicand too large to certify as squarefree");
    square *= root;
    n = 1;
  }
  const Rational coef = Rational(square) / Rational(den);
  if (n == 1) return Surd{coef, 0, 1};
  return Surd{0, coef, Rational(n)};
}

Surd max_of(std::initializer_list<Surd> xs) {
  Surd best = *xs.begin();
  for (const Surd& x : xs) {
    if (best < x) best = x;
  }
  return best;
}

Surd lift(const Rational& r) { return Surd{r, 0, 1}; }

}  // namespace

double Surd::to_double() const {
  return a.convert_to<double>() + b.convert_to<double>() * std::sqrt(radicand.convert_to<double>());
}

std::string Surd::to_string() const {
  std::ostringstream s;
  s << a;
  if (b != 0) s << (b > 0 ? " + " : " - ") << mp::abs(b) << "*sqrt(" << radicand << ")";
  return s.str();
}

int Surd::sign() const {
  const int sa = a.sign();
  const int sb = b.sign();
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  const Rational lhs = a * a;
  const Rational rhs = b * b * radicand;
  if (lhs == rhs) return 0;
  return lhs > rhs ? sa : sb;
}

Surd operator+(const Surd& x, const Surd& y) {
  return normalized({x.a + y.a, x.b + y.b, common_radicand(x, y)});
}

Surd operator-(const Surd& x, const Surd& y) {
  return normalized({x.a - y.a, x.b - y.b, common_radicand(x, y)});
}

Surd operator*(const Surd& x, const Surd& y) {
  const Rational d = common_radicand(x, y);
  return normalized({x.a * y.a + x.b * y.b * d, x.a * y.b + x.b * y.a, d});
}

Surd operator/(const Surd& x, const Surd& y) {
  const Rational norm = y.a * y.a - y.b * y.b * y.radicand;
  if (norm == 0) throw std::domain_error("division by zero");
  const Surd conjugate{y.a / norm, -y.b / norm, y.radicand};
  return x * normalized(conjugate);
}

bool operator==(const Surd& x, const Surd& y) { return (x - y).sign() == 0; }

bool operator<(const Surd& x, const Surd& y) { return (x - y).sign() < 0; }

ExactConstants exact_guarantee_constants(const Rational& r1, const Rational& r2, const Rational& R1,
                                         const Rational& R2) {
  if (r1 <= 0 || r2 <= 0 || R1 <= 0 || R2 <= 0) throw std::invalid_argument("reaction rates must be positive");
  const Surd one = lift(1);
  const Surd s1 = exact_sqrt(1 + 2 * r1);
  const Surd S1 = exact_sqrt(1 + 2 * R1);
  ExactConstants e;
  e.c1 = lift(1 + 1 / r1 + 1 / R2);
  e.c3 = lift(1 + 1 / R1 + 1 / R2);
  e.c2 = (e.c1 * s1 - e.c1 + e.c3) / S1;
  e.c4 = lift(1 + r2 + r2 / R1) + e.c2 * lift(r2);
  e.c5 = lift(1 + 1 / r1 + 1 / r2);
  e.c6 = e.c5 * exact_sqrt(R1 / r1);
  e.ocr = max_of({e.c1 * lift(r1), e.c2 * lift(R1) / S1, e.c2 + e.c3, e.c4});
  const Surd two = lift(2);
  e.pcr = max_of({e.c5 * lift(R1), two * e.c6, two * e.c6 * lift(R2) + one - lift(R2 / r2)});
  return e;
}

}  // namespace capscale
