// Acceptance run: one PASS/FAIL line per criterion. Exit code is nonzero iff a
// gating criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "capscale/adversary.hpp"
#include "capscale/algorithms.hpp"
#include "capscale/bounds.hpp"
#include "capscale/diagnostics.hpp"
#include "capscale/experiment.hpp"
#include "capscale/offline.hpp"
#include "suite.hpp"

using namespace capscale;
using capscale::acceptance::PredictionType;
using capscale::acceptance::SuiteInstance;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

int gating_failures = 0;

void verdict(int id, const std::string& title, bool pass, const std::string& detail, bool gating = true) {
  std::printf("%s [%2d] %s%s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(),
              gating ? "" : " (soft, non-gating)", detail.c_str());
  std::fflush(stdout);
  if (gating && !pass) ++gating_failures;
}

void note(const std::string& line) { std::printf("       %s\n", line.c_str()); }

double ratio(double alg, double opt) { return competitive_ratio(alg, opt); }

/// Every LP solved during the run, for the certification criterion.
struct LpRecord {
  std::string what;
  double objective;
  double gap;
};
std::vector<LpRecord> lp_log;

const LPSolution& logged(const std::string& what, const LPSolution& sol) {
  lp_log.push_back({what, sol.objective, sol.duality_gap});
  return sol;
}

OptResult logged_opt(const std::string& what, const ArrivalFunction& lambda, const CostWeights& w, double delta) {
  OptResult r = opt_cost(lambda, w, delta);
  logged(what, r.solution);
  return r;
}

constexpr double kH = 0.01;

struct Case {
  const SuiteInstance* instance;
  PredictionType type;
  ArrivalFunction prediction;
  std::shared_ptr<const APDecomposition> plan;
};

struct Suite {
  const CostWeights w = CostWeights::paper_dc();
  std::vector<SuiteInstance> instances = acceptance::suite();
  std::vector<OptResult> opt1;      // delta = 1
  std::vector<Trajectory> bcs;      // BCS(2, 1) at kH
  std::vector<std::vector<Case>> cases;
};

void criterion_1() {
  const auto start = Clock::now();
  const auto e = exact_guarantee_constants(2, 1, 2, 1);
  const double elapsed = seconds_since(start);
  const Surd five{5, 0, 1};
  const bool pass = e.ocr == five && e.pcr == five && elapsed < 1e-3;
  verdict(1, "exact constants at (2,1,2,1)", pass,
          fmt("OCR = %s, PCR = %s, %.3f ms", e.ocr.to_string().c_str(), e.pcr.to_string().c_str(), elapsed * 1e3));
}

void criterion_2() {
  const auto start = Clock::now();
  bool pass = true;
  double previous = std::numeric_limits<double>::infinity();
  std::string detail;
  for (double r : {1.5, 2.0, 3.0, 5.0, 8.0, 10.0}) {
    const auto g = guarantee_constants(corollary_params(r));
    pass = pass && g.pcr <= pcr_envelope(r) && g.ocr < previous;
    previous = g.ocr;
    detail += fmt("r=%g OCR %.4f PCR %.4g; ", r, g.ocr, g.pcr);
  }
  const double elapsed = seconds_since(start);
  pass = pass && previous < 1.2 && elapsed < 1e-3;
  verdict(2, "confidence envelope", pass, detail + fmt("%.3f ms", elapsed * 1e3));
}

void criterion_3(Suite& s) {
  const auto start = Clock::now();
  bool pass = true;
  double worst = 0.0, worst_strict = 0.0;
  for (const auto& inst : s.instances) {
    const OptResult opt = logged_opt(inst.name + " delta=0.05", inst.lambda, s.w, 0.05);
    BcsPolicy bcs(2, 1);
    s.bcs.push_back(simulate(bcs, inst.lambda, s.w, kH));
    const double alg = cost(s.bcs.back(), s.w).total;
    const double bound = 5.0 * opt.cost * opt.guarantee_factor * 1.01;
    pass = pass && alg <= bound + 1e-9;
    worst = std::max(worst, ratio(alg, opt.cost * opt.guarantee_factor));
    worst_strict = std::max(worst_strict, ratio(alg, opt.cost / opt.guarantee_factor));
  }
  const double elapsed = seconds_since(start);
  pass = pass && elapsed < 120.0;
  verdict(3, "BCS(2,1) within 5 Opt", pass,
          fmt("max Cost/(OptLP factor) = %.4f, max Cost/(OptLP/factor) = %.4f, %zu instances, %.1f s", worst,
              worst_strict, s.instances.size(), elapsed));
}

void criterion_4(Suite& s) {
  CostWeights w = s.w;
  w.no_wait = true;
  bool pass = true;
  double worst = 0.0;
  for (const auto& inst : s.instances) {
    const OptResult opt = logged_opt(inst.name + " no-wait", inst.lambda, w, 1.0);
    NowaitBcsPolicy policy;
    const double alg = cost(simulate(policy, inst.lambda, w, kH), w).total;
    pass = pass && alg <= 2.0 * opt.cost * 1.01 + 1e-9;
    worst = std::max(worst, ratio(alg, opt.cost));
  }
  verdict(4, "no-wait BCS within 2 Opt", pass, fmt("max ratio %.4f", worst));
}

void prepare_cases(Suite& s) {
  for (const auto& inst : s.instances) {
    s.opt1.push_back(logged_opt(inst.name + " delta=1", inst.lambda, s.w, 1.0));
    std::vector<Case> row;
    for (const auto& type : acceptance::prediction_types(inst.lambda)) {
      Case c{&inst, type, make_prediction(type.spec, inst.lambda), nullptr};
      auto plan = std::make_shared<const APDecomposition>(ap_policy(c.prediction, s.w, 1.0));
      logged(inst.name + " plan " + type.name, plan->m1);
      c.plan = std::move(plan);
      row.push_back(std::move(c));
    }
    s.cases.push_back(std::move(row));
  }
}

void criterion_5(const Suite& s) {
  const double slope = accuracy_slope(s.w);
  bool pass = true;
  double worst = 0.0, worst_perfect = 0.0;
  for (std::size_t i = 0; i < s.instances.size(); ++i) {
    const auto& lambda = s.instances[i].lambda;
    const double opt = s.opt1[i].cost;
    for (const auto& c : s.cases[i]) {
      ApPolicy ap(c.plan);
      const double alg = cost(simulate(ap, lambda, s.w, kH), s.w).total;
      const double rhs = opt + slope * lambda.horizon() * mae(c.prediction, lambda);
      pass = pass && alg <= rhs * 1.02 + 1e-9;
      if (rhs > 0.0) worst = std::max(worst, alg / rhs);
      if (c.type.spec.kind == PredictionKind::kPerfect) {
        const double dev = opt > 0.0 ? std::abs(alg - opt) / opt : std::abs(alg);
        pass = pass && dev <= 0.02;
        worst_perfect = std::max(worst_perfect, dev);
      }
    }
  }
  verdict(5, "AP within Opt plus prediction error", pass,
          fmt("max Cost/bound %.4f, max |Cost/Opt - 1| with perfect prediction %.2e", worst, worst_perfect));
}

void criterion_6(const Suite& s) {
  bool pass = true, bitwise = true;
  std::map<double, double> worst;
  for (std::size_t i = 0; i < s.instances.size(); ++i) {
    const auto& lambda = s.instances[i].lambda;
    const double opt = s.opt1[i].cost;
    for (const auto& c : s.cases[i]) {
      const double eta = accuracy_eta(c.prediction, lambda, opt).eta;
      for (double r : {1.0, 3.0, 5.0}) {
        AbcsPolicy abcs(c.plan, confidence_params(r));
        const Trajectory traj = simulate(abcs, lambda, s.w, kH);
        const double alg = cost(traj, s.w).total;
        const double bound = cr_bound(eta, guarantee_constants(abcs.params()), s.w) * opt;
        pass = pass && alg <= bound * 1.02 + 1e-9;
        if (bound > 0.0) worst[r] = std::max(worst[r], alg / bound);
        if (r == 1.0) bitwise = bitwise && traj.m == s.bcs[i].m && traj.q == s.bcs[i].q;
      }
    }
  }
  verdict(6, "ABCS within the accuracy-dependent bound", pass && bitwise,
          fmt("max Cost/bound r=1 %.4f, r=3 %.4f, r=5 %.4f; ABCS(2,1,2,1) == BCS(2,1) bitwise: %s", worst[1.0],
              worst[3.0], worst[5.0], bitwise ? "yes" : "no"));
}

double fuzz_min_potential() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ABCSParams> params;
  for (double r : {1.0, 3.0, 5.0}) params.push_back(confidence_params(r));
  for (double r : {1.5, 2.0, 8.0}) params.push_back(corollary_params(r));
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& w : {CostWeights::paper_dc(), CostWeights{1, 1, 1, false}}) {
    for (const auto& p : params) {
      const auto g = guarantee_constants(p);
      for (int i = 0; i < 10000; ++i) {
        const double scale = std::pow(10.0, 5 * u(rng) - 2);
        const QueueState a{scale * u(rng), scale * u(rng)};
        QueueState b{scale * u(rng), scale * u(rng)};
        if (i % 5 == 0) b.q = a.q;
        if (i % 7 == 0) b.m = a.m;
        lowest = std::min({lowest, potential_pcr(a, b, g, w), potential_ocr(a, b, g, w)});
      }
    }
  }
  return lowest;
}

bool halves(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i - 1] <= 1e-9) continue;
    if (v[i] > 0.625 * v[i - 1]) return false;
  }
  return true;
}

void criterion_7(const Suite& s) {
  const auto start = Clock::now();
  const double fuzz = fuzz_min_potential();
  const std::vector<double> steps{0.02, 0.01, 0.005};
  std::vector<double> v_pcr, v_ocr;
  double min_phi = std::numeric_limits<double>::infinity();
  for (double h : steps) {
    double pcr_worst = 0.0, ocr_worst = 0.0;
    for (std::size_t i = 0; i < s.instances.size(); ++i) {
      const auto& lambda = s.instances[i].lambda;
      auto schedule = SchedulePolicy::from_lp(s.opt1[i].solution);
      const Trajectory ref = simulate(schedule, lambda, s.w, h);
      for (const auto& c : s.cases[i]) {
        for (double r : {1.0, 3.0, 5.0}) {
          AbcsPolicy abcs(c.plan, confidence_params(r));
          const Trajectory traj = simulate(abcs, lambda, s.w, h);
          const auto g = guarantee_constants(abcs.params());
          const auto p = drift_check(traj, ref, PotentialKind::kPcr, g.pcr, g, s.w);
          const auto o = drift_check(traj, advised_trajectory(abcs, traj), PotentialKind::kOcr, g.ocr, g, s.w);
          pcr_worst = std::max(pcr_worst, p.max_drift_violation);
          ocr_worst = std::max(ocr_worst, o.max_drift_violation);
          min_phi = std::min({min_phi, p.min_phi, o.min_phi});
        }
      }
    }
    v_pcr.push_back(pcr_worst);
    v_ocr.push_back(ocr_worst);
  }
  double c_ocr = 0.0, c_pcr = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    c_ocr = std::max(c_ocr, v_ocr[i] / steps[i]);
    c_pcr = std::max(c_pcr, v_pcr[i] / steps[i]);
    note(fmt("h=%g: max drift violation pessimistic %.3e, optimistic %.3e", steps[i], v_pcr[i], v_ocr[i]));
  }
  const bool pass = fuzz >= -1e-9 && min_phi >= -1e-9 && halves(v_pcr) && halves(v_ocr);
  verdict(7, "potential certificates", pass,
          fmt("min potential fuzzed %.2e, along trajectories %.2e; violation <= C h with C = %.3g (optimistic), "
              "%.3g (pessimistic); %.1f s",
              fuzz, min_phi, c_ocr, c_pcr, seconds_since(start)));
}

PolicyFactory bcs_factory() {
  return [](const ArrivalFunction&, const CostWeights&) { return std::make_unique<BcsPolicy>(2, 1); };
}

void criterion_8() {
  const auto start = Clock::now();
  const auto r = online_lower_bound(bcs_factory(), 1e-3);
  const double elapsed = seconds_since(start);
  verdict(8, "online lower bound against BCS", r.ratio >= 2.49 && elapsed < 10.0,
          fmt("ratio %.4f (branch %s), %.2f s", r.ratio, r.branch.c_str(), elapsed));
}

void criterion_9() {
  const CostWeights dc = CostWeights::paper_dc();
  const double tau = dc.beta / dc.theta;
  const double r100 = timer_lower_bound(tau, 100.0, 0.01, dc, kH).ratio;
  const double r1000 = timer_lower_bound(tau, 1000.0, 0.01, dc, kH).ratio;
  const double unit = timer_lower_bound(1.0, 100.0, 0.01, CostWeights{1, 1, 1, false}, kH).ratio;
  verdict(9, "timer lower bound grows", r1000 > r100 && unit > 10.0,
          fmt("tau=%g: ratio %.3f at T=100, %.3f at T=1000; unit weights tau=1 T=100: %.3f", tau, r100, r1000, unit));
}

void criterion_10() {
  const std::vector<std::string> policies{"bcs", "timer{tau=1}", "ap", "abcs{r=1}", "abcs{r=3}", "abcs{r=5}"};
  bool pass = true;
  std::string detail;
  for (double delta : {0.1, 0.25}) {
    for (const auto& name : policies) {
      const auto r = consistency_tradeoff(policy_factory(parse_spec(name)), delta, 1e-3);
      const bool ok = r.branch == "consistency" ? r.alg_cost > (1.0 + delta) * r.opt_upper_bound
                                                : r.ratio >= 0.98 / (4.0 * delta);
      pass = pass && ok;
      note(fmt("delta=%g %-12s branch %-11s ratio %.3f %s", delta, name.c_str(), r.branch.c_str(), r.ratio,
               ok ? "ok" : "neither"));
    }
  }
  verdict(10, "consistency-robustness tradeoff", pass,
          fmt("%zu policies x 2 values of delta", policies.size()));
}

void criterion_11() {
  const double a = integrality_gap(0.1).ratio;
  const double b = integrality_gap(0.05).ratio;
  verdict(11, "integrality gap", a == 10.0 && b == 20.0, fmt("eps=0.1: %.17g, eps=0.05: %.17g", a, b));
}

void criterion_12(const Suite& s) {
  bool monotone = true;
  for (const auto& inst : s.instances) {
    double previous = std::numeric_limits<double>::infinity();
    for (double delta : {1.0, 0.5, 0.25, 0.05}) {
      const double obj = logged_opt(inst.name + fmt(" refine %g", delta), inst.lambda, s.w, delta).cost;
      monotone = monotone && obj <= previous + 1e-9 * (1.0 + std::abs(obj));
      previous = obj;
    }
  }
  bool certified = true;
  double worst = 0.0;
  for (const auto& r : lp_log) {
    const double scaled = r.gap / (1.0 + std::abs(r.objective));
    worst = std::max(worst, scaled);
    if (scaled > 1e-8) {
      certified = false;
      note("uncertified: " + r.what);
    }
  }
  verdict(12, "LP self-certification", certified && monotone,
          fmt("%zu programs, max gap/(1+|obj|) %.2e, refinement monotone: %s", lp_log.size(), worst,
              monotone ? "yes" : "no"));
}

struct ReferenceRow {
  const char* workload;
  const char* prediction;
  std::vector<std::pair<const char*, double>> cells;
};

void criterion_13() {
  const CostWeights w = CostWeights::paper_dc();
  const std::vector<ReferenceRow> reference{
      {"sinusoid", "zero", {{"ap", 1.1}, {"bcs", 1.4}, {"timer", 1.2}}},
      {"step", "zero", {{"ap", 1.8}, {"bcs", 2.2}, {"timer", 1.3}}},
      {"sinusoid", "zero", {{"ap", 1.10}, {"abcs{r=1}", 1.43}, {"abcs{r=3}", 1.16}, {"abcs{r=5}", 1.12}}},
      {"sinusoid", "constant{c=500}", {{"ap", 1.21}, {"abcs{r=1}", 1.43}, {"abcs{r=3}", 1.18}, {"abcs{r=5}", 1.14}}},
      {"sinusoid", "opposite{cap=1000}", {{"ap", 1.46}, {"abcs{r=1}", 1.43}, {"abcs{r=3}", 1.17}, {"abcs{r=5}", 1.17}}},
      {"sinusoid", "perfect", {{"ap", 1.00}, {"abcs{r=1}", 1.43}, {"abcs{r=3}", 1.11}, {"abcs{r=5}", 1.15}}},
      {"step", "zero", {{"ap", 1.85}, {"abcs{r=1}", 2.17}, {"abcs{r=3}", 1.68}, {"abcs{r=5}", 1.64}}},
      {"step", "constant{c=500}", {{"ap", 1.72}, {"abcs{r=1}", 2.17}, {"abcs{r=3}", 1.61}, {"abcs{r=5}", 1.56}}},
      {"step", "opposite{cap=1000}", {{"ap", 1.90}, {"abcs{r=1}", 2.17}, {"abcs{r=3}", 1.68}, {"abcs{r=5}", 1.63}}},
      {"step", "perfect", {{"ap", 1.00}, {"abcs{r=1}", 2.17}, {"abcs{r=3}", 1.37}, {"abcs{r=5}", 1.15}}},
  };
  int within = 0, total = 0;
  for (const auto& row : reference) {
    const ArrivalFunction lambda = make_workload(parse_spec(row.workload));
    const ArrivalFunction prediction = make_prediction(make_prediction_spec(parse_spec(row.prediction)), lambda);
    const double opt = logged_opt(std::string(row.workload) + " reference", lambda, w, 1.0).cost;
    std::string line = fmt("%-8s %-18s", row.workload, row.prediction);
    for (const auto& [policy, expected] : row.cells) {
      auto p = make_policy(parse_spec(policy), prediction, w);
      const double cr = ratio(cost(simulate(*p, lambda, w, kH), w).total, opt);
      const bool close = std::abs(cr - expected) <= 0.3;
      within += close ? 1 : 0;
      ++total;
      line += fmt(" %s %.2f (ref %.2f)%s", policy, cr, expected, close ? "" : "*");
    }
    note(line);
  }
  verdict(13, "reference ratios on sinusoid and step workloads", within == total,
          fmt("%d of %d cells within 0.3 (* marks the others)", within, total), false);
}

}  // namespace

int main() {
  const auto start = Clock::now();
  Suite s;
  criterion_1();
  criterion_2();
  criterion_3(s);
  criterion_4(s);
  prepare_cases(s);
  criterion_5(s);
  criterion_6(s);
  criterion_7(s);
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12(s);
  criterion_13();
  std::printf("%d gating criteria failed, %.1f s total\n", gating_failures, seconds_since(start));
  return gating_failures == 0 ? 0 : 1;
}
