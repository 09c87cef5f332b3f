#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "capscale/adversary.hpp"
#include "capscale/dynamics.hpp"
#include "capscale/workload.hpp"

namespace capscale {

/// A named component with parameters, written `name{key=value,...}`.
struct Spec {
  std::string name;
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
};

Spec parse_spec(std::string_view text);
std::string to_string(const Spec& spec);

/// constant{rate,T,delta}, sinusoid{mean,amplitude,period,T,delta},
/// step{low,high,half_period,T,delta}, poisson{mean,amplitude,period,T,delta,seed},
/// trace{path,delta}.
ArrivalFunction make_workload(const Spec& spec);

/// zero, perfect, constant{c}, opposite{cap}, moving_average{window}.
PredictionSpec make_prediction_spec(const Spec& spec);

/// "paper-dc" or "unit".
CostWeights weights_preset(const std::string& name);

/// bcs{r1,r2}, ap{delta}, abcs{r} or abcs{r1,r2,R1,R2}, timer{tau}, nowait_bcs.
/// AP and ABCS plan on the prediction at `delta` (default: the prediction's grid).
std::unique_ptr<Policy> make_policy(const Spec& spec, const ArrivalFunction& prediction,
                                    const CostWeights& w);
PolicyFactory policy_factory(const Spec& spec);

struct InstanceConfig {
  std::string name;
  Spec workload;
  Spec prediction;
};

struct ExperimentConfig {
  std::vector<InstanceConfig> instances;
  CostWeights weights = CostWeights::paper_dc();
  std::vector<Spec> policies;
  double h = 0.01;
  double lp_delta = 0.0;  // 0: the workload grid
  std::string output;
  std::string trajectory_dir;
};

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

struct ResultRow {
  std::string instance;
  std::string policy;
  CostBreakdown cost;
  double opt = 0.0;
  double cr = 0.0;
  double eta = 0.0;
  double duality_gap = 0.0;
  bool certified = false;
};

/// Worker count from CAPSCALE_THREADS (default: hardware concurrency, at least 1).
unsigned thread_limit();

/// One row per (instance, policy) in config order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, unsigned threads = 0);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace capscale
