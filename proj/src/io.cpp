#include "capscale/io.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace capscale {

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json weights_json(const CostWeights& w) {
  return {{"omega", w.no_wait ? nlohmann::json(nullptr) : number(w.omega)},
          {"beta", w.beta},
          {"theta", w.theta},
          {"no_wait", w.no_wait}};
}

}  // namespace

void write_constants_json(std::ostream& out, const GuaranteeConstants& g, const CostWeights& w,
                          const ExactConstants* exact) {
  nlohmann::json j;
  j["params"] = {{"r1", g.params.r1}, {"r2", g.params.r2}, {"R1", g.params.R1}, {"R2", g.params.R2}};
  j["weights"] = weights_json(w);
  j["c1"] = g.c1;
  j["c2"] = g.c2;
  j["c3"] = g.c3;
  j["c4"] = g.c4;
  j["c5"] = g.c5;
  j["c6"] = g.c6;
  j["ocr"] = g.ocr;
  j["pcr"] = g.pcr;
  j["ordering_violation"] = g.ordering_violation;

  nlohmann::json curve = nlohmann::json::array();
  const double crossover = crossover_eta(g, w);
  for (double eta : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    curve.push_back({{"eta", eta}, {"cr", cr_bound(eta, g, w)}});
  }
  j["consistency"] = g.ocr;
  j["robustness"] = {{"slope", accuracy_slope(w)}, {"crossover_eta", number(crossover)}, {"curve", curve}};
  j["competitiveness"] = g.pcr;

  if (exact) {
    j["exact"] = {{"c1", exact->c1.to_string()}, {"c2", exact->c2.to_string()},
                  {"c3", exact->c3.to_string()}, {"c4", exact->c4.to_string()},
                  {"c5", exact->c5.to_string()}, {"c6", exact->c6.to_string()},
                  {"ocr", exact->ocr.to_string()}, {"pcr", exact->pcr.to_string()}};
  }
  out << j.dump(2) << '\n';
}

void write_adversary_json(std::ostream& out, const AdversaryReport& r) {
  nlohmann::json details = nlohmann::json::object();
  for (const auto& [key, value] : r.details) details[key] = number(value);
  nlohmann::json j = {{"attack", r.attack},
                      {"policy", r.policy},
                      {"branch", r.branch},
                      {"weights", weights_json(r.weights)},
                      {"h", r.h},
                      {"horizon", r.instance.horizon()},
                      {"alg_cost", number(r.alg_cost)},
                      {"opt_upper_bound", number(r.opt_upper_bound)},
                      {"opt_schedule", r.opt_schedule},
                      {"ratio", number(r.ratio)},
                      {"claimed_bound", number(r.claimed_bound)},
                      {"details", details}};
  out << j.dump(2) << '\n';
}

}  // namespace capscale
