#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <span>
#include <string>

#include "capscale/algorithms.hpp"
#include "capscale/dynamics.hpp"

namespace capscale {

struct GuaranteeConstants {
  ABCSParams params;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0, c6 = 0.0;
  double ocr = 0.0;
  double pcr = 0.0;
  /// Set when R1 < r1 or R2 < r2 was accepted under Ordering::kFlag.
  bool ordering_violation = false;
};

enum class Ordering { kEnforce, kFlag };

GuaranteeConstants guarantee_constants(const ABCSParams& p, Ordering ordering = Ordering::kEnforce);

/// Confidence map R1 = 8r(r-1), r1 = 1/r, R2 = 2r, r2 = 1/r for r >= 1.1.
ABCSParams corollary_params(double r);
/// Like corollary_params, but r = 1 (no confidence) selects (2, 1, 2, 1).
ABCSParams confidence_params(double r);

double pcr_envelope(double r);   // 16 sqrt(2) r^(7/2)
double ocr_expansion(double r);  // 1 + 1/r + 5/(8 r^2)

/// Coefficient of eta in the optimistic branch: sqrt(2 omega beta) + theta.
double accuracy_slope(const CostWeights& w);

double cr_bound(double eta, const GuaranteeConstants& g, const CostWeights& w);
/// Accuracy at which both branches of cr_bound coincide.
double crossover_eta(const GuaranteeConstants& g, const CostWeights& w);

struct EtaSample {
  double eta = 0.0;
  double weight = 0.0;
};

struct ExpectedCr {
  double value = 0.0;
  double crossover = 0.0;
  /// (PCR - OCR) / (2 OCR): the crossover when the accuracy slope equals 2.
  double zeta = 0.0;
  double prob_below = 0.0;       // P(eta <= crossover)
  double mean_eta_below = 0.0;   // E[eta; eta <= crossover]
  /// slope * OCR * E[eta; below] + OCR * P(below) + PCR * P(above).
  double decomposition = 0.0;
};

ExpectedCr expected_cr(std::span<const EtaSample> samples, const GuaranteeConstants& g,
                       const CostWeights& w);

using Rational = boost::multiprecision::cpp_rational;

/// Element a + b sqrt(radicand) of a real quadratic field.
struct Surd {
  Rational a;
  Rational b;
  Rational radicand = 1;

  double to_double() const;
  std::string to_string() const;
  int sign() const;
};

Surd operator+(const Surd& x, const Surd& y);
Surd operator-(const Surd& x, const Surd& y);
Surd operator*(const Surd& x, const Surd& y);
Surd operator/(const Surd& x, const Surd& y);
bool operator==(const Surd& x, const Surd& y);
bool operator<(const Surd& x, const Surd& y);

struct ExactConstants {
  Surd c1, c2, c3, c4, c5, c6, ocr, pcr;
};

/// Exact evaluation for rational parameters whose square roots all lie in a
/// single quadratic field; throws std::domain_error otherwise.
ExactConstants exact_guarantee_constants(const Rational& r1, const Rational& r2, const Rational& R1,
                                         const Rational& R2);

}  // namespace capscale
