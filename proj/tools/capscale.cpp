#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "capscale/adversary.hpp"
#include "capscale/algorithms.hpp"
#include "capscale/bounds.hpp"
#include "capscale/diagnostics.hpp"
#include "capscale/dynamics.hpp"
#include "capscale/experiment.hpp"
#include "capscale/io.hpp"
#include "capscale/offline.hpp"

using namespace capscale;

namespace {

struct WeightOptions {
  std::string preset = "paper-dc";
  std::optional<double> omega, beta, theta;
  bool no_wait = false;

  void attach(CLI::App* app) {
    app->add_option("--weights", preset, "Weight preset (paper-dc, unit)");
    app->add_option("--omega", omega, "Flow-time weight");
    app->add_option("--beta", beta, "Switching weight");
    app->add_option("--theta", theta, "Power weight");
    app->add_flag("--no-wait", no_wait, "Require capacity to cover demand at all times");
  }

  CostWeights resolve() const {
    CostWeights w = weights_preset(preset);
    if (omega) w.omega = *omega;
    if (beta) w.beta = *beta;
    if (theta) w.theta = *theta;
    w.no_wait = w.no_wait || no_wait;
    w.validate();
    return w;
  }
};

// Writes to `path`, or to stdout when it is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write(out);
}

Rational parse_rational(const std::string& text) {
  std::string s = text;
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  Rational value;
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    value = Rational(boost::multiprecision::cpp_int(s.substr(0, slash))) /
            Rational(boost::multiprecision::cpp_int(s.substr(slash + 1)));
  } else {
    const auto dot = s.find('.');
    std::string digits = s;
    std::size_t decimals = 0;
    if (dot != std::string::npos) {
      digits = s.substr(0, dot) + s.substr(dot + 1);
      decimals = s.size() - dot - 1;
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("'" + text + "' is not a decimal or a fraction");
    }
    value = Rational(boost::multiprecision::cpp_int(digits));
    for (std::size_t i = 0; i < decimals; ++i) value /= 10;
  }
  return negative ? -value : value;
}

void print_cost(std::ostream& out, const CostBreakdown& c) {
  out << "flow=" << c.flow_time << " switch=" << c.switching << " power=" << c.power
      << " total=" << c.total << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online capacity scaling: policies, offline optimum, bounds and lower-bound instances"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Roll out one policy and write its trajectory as CSV");
  std::string sim_workload, sim_prediction = "zero", sim_policy = "bcs", sim_out;
  double sim_h = 0.01;
  WeightOptions sim_w;
  sim->add_option("--workload", sim_workload, "Workload spec, e.g. sinusoid{T=24}")->required();
  sim->add_option("--prediction", sim_prediction, "Prediction spec");
  sim->add_option("--policy", sim_policy, "Policy spec");
  sim->add_option("--step", sim_h, "Integration step h (hours)");
  sim->add_option("-o,--out", sim_out, "Trajectory CSV (default stdout)");
  sim_w.attach(sim);

  // optimum
  auto* opt = app.add_subcommand("optimum", "Solve the offline program and write it as JSON");
  std::string opt_workload, opt_out;
  double opt_delta = 0.0;
  WeightOptions opt_w;
  opt->add_option("--workload", opt_workload, "Workload spec")->required();
  opt->add_option("--delta", opt_delta, "Program grid (default: workload grid)");
  opt->add_option("-o,--out", opt_out, "JSON output (default stdout)");
  opt_w.attach(opt);

  // compare
  auto* cmp = app.add_subcommand("compare", "Run an experiment config and write the results table");
  std::string cmp_config, cmp_out;
  cmp->add_option("config", cmp_config, "JSON experiment config")->required();
  cmp->add_option("-o,--out", cmp_out, "CSV output (overrides the config)");

  // adversary
  auto* adv = app.add_subcommand("adversary", "Run a lower-bound construction against a policy");
  std::string adv_attack, adv_policy = "bcs", adv_report, adv_instance;
  double adv_h = 1e-3, adv_tau = 1.0, adv_T = 100.0, adv_eps = 0.01, adv_delta = 0.1, adv_t0 = 2.0;
  double adv_gap_eps = 0.1;
  WeightOptions adv_w;
  adv_w.preset = "unit";
  adv->add_option("--attack", adv_attack, "online, timer, tradeoff, setup or intgap")
      ->required()
      ->check(CLI::IsMember({"online", "timer", "tradeoff", "setup", "intgap"}));
  adv->add_option("--policy", adv_policy, "Policy spec (timer attack default: timer{tau})");
  adv->add_option("--step", adv_h, "Integration step h");
  adv->add_option("--tau", adv_tau, "Timer timeout");
  adv->add_option("--T", adv_T, "Timer attack horizon");
  adv->add_option("--epsilon", adv_eps, "Timer burst length");
  adv->add_option("--delta", adv_delta, "Consistency slack");
  adv->add_option("--t0", adv_t0, "Setup time");
  adv->add_option("--gap-epsilon", adv_gap_eps, "Arrival rate of the integrality instance");
  adv->add_option("--report", adv_report, "Report JSON (default stdout)");
  adv->add_option("--instance", adv_instance, "Instance trace CSV");
  adv_w.attach(adv);

  // constants
  auto* con = app.add_subcommand("constants", "Print guarantee constants as JSON");
  std::string con_r, con_r1 = "2", con_r2 = "1", con_R1 = "2", con_R2 = "1", con_out;
  WeightOptions con_w;
  con->add_option("--r", con_r, "Confidence level (overrides the explicit rates)");
  con->add_option("--r1", con_r1, "Decimal or fraction");
  con->add_option("--r2", con_r2, "Decimal or fraction");
  con->add_option("--R1", con_R1, "Decimal or fraction");
  con->add_option("--R2", con_R2, "Decimal or fraction");
  con->add_option("-o,--out", con_out, "JSON output (default stdout)");
  con_w.attach(con);

  // diagnose
  auto* dia = app.add_subcommand("diagnose", "Evaluate a potential along an ABCS rollout");
  std::string dia_workload, dia_prediction = "perfect", dia_policy = "abcs{r=3}", dia_potential = "pcr",
                            dia_out;
  double dia_h = 0.01, dia_lp_delta = 0.0;
  std::optional<double> dia_cr;
  WeightOptions dia_w;
  dia->add_option("--workload", dia_workload, "Workload spec")->required();
  dia->add_option("--prediction", dia_prediction, "Prediction spec");
  dia->add_option("--policy", dia_policy, "ABCS policy spec");
  dia->add_option("--potential", dia_potential, "pcr (against the offline schedule) or ocr (against the advice)")
      ->check(CLI::IsMember({"pcr", "ocr"}));
  dia->add_option("--step", dia_h, "Integration step h");
  dia->add_option("--lp-delta", dia_lp_delta, "Grid of the offline reference (default: workload grid)");
  dia->add_option("--cr", dia_cr, "Target ratio (default: PCR or OCR)");
  dia->add_option("-o,--out", dia_out, "CSV output (default stdout)");
  dia_w.attach(dia);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const CostWeights w = sim_w.resolve();
      const ArrivalFunction lambda = make_workload(parse_spec(sim_workload));
      const ArrivalFunction prediction = make_prediction(make_prediction_spec(parse_spec(sim_prediction)), lambda);
      const std::unique_ptr<Policy> policy = make_policy(parse_spec(sim_policy), prediction, w);
      const Trajectory traj = simulate(*policy, lambda, w, sim_h);
      emit(sim_out, [&](std::ostream& out) { write_trajectory_csv(out, traj); });
      std::cerr << policy->name() << ": ";
      print_cost(std::cerr, cost(traj, w));
      return 0;
    }
    if (*opt) {
      const CostWeights w = opt_w.resolve();
      const ArrivalFunction lambda = make_workload(parse_spec(opt_workload));
      const OptResult r = opt_cost(lambda, w, opt_delta > 0.0 ? opt_delta : lambda.delta());
      emit(opt_out, [&](std::ostream& out) { write_lp_json(out, r.solution); });
      const double gap = r.solution.duality_gap;
      std::cerr << "objective=" << r.cost << " guarantee_factor=" << r.guarantee_factor << " duality_gap=" << gap
                << '\n';
      return gap <= 1e-8 * (1.0 + std::abs(r.cost)) ? 0 : 2;
    }
    if (*cmp) {
      const ExperimentConfig config = load_config(cmp_config);
      const std::vector<ResultRow> rows = run_experiment(config);
      emit(cmp_out.empty() ? config.output : cmp_out,
           [&](std::ostream& out) { write_results_csv(out, rows); });
      for (const ResultRow& r : rows) {
        if (!r.certified) {
          std::cerr << "uncertified optimum for " << r.instance << " (duality gap " << r.duality_gap << ")\n";
          return 2;
        }
      }
      return 0;
    }
    if (*adv) {
      const PolicyFactory factory = policy_factory(parse_spec(adv_policy));
      AdversaryReport report;
      if (adv_attack == "online") {
        report = online_lower_bound(factory, adv_h);
      } else if (adv_attack == "timer") {
        const bool custom = adv->count("--policy") > 0;
        report = timer_lower_bound(adv_tau, adv_T, adv_eps, adv_w.resolve(), adv_h,
                                   custom ? factory : PolicyFactory{});
      } else if (adv_attack == "tradeoff") {
        report = consistency_tradeoff(factory, adv_delta, adv_h);
      } else if (adv_attack == "setup") {
        report = setup_time_lower_bound(factory, adv_t0, adv_w.resolve(), adv_h);
      } else {
        report = integrality_gap(adv_gap_eps);
      }
      emit(adv_report, [&](std::ostream& out) { write_adversary_json(out, report); });
      if (!adv_instance.empty()) {
        emit(adv_instance, [&](std::ostream& out) { write_trace_csv(out, report.instance); });
      }
      return 0;
    }
    if (*con) {
      const CostWeights w = con_w.resolve();
      Rational r1, r2, R1, R2;
      if (!con_r.empty()) {
        const Rational r = parse_rational(con_r);
        if (r == 1) {
          r1 = 2, r2 = 1, R1 = 2, R2 = 1;
        } else {
          r1 = 1 / r, r2 = 1 / r, R1 = 8 * r * (r - 1), R2 = 2 * r;
        }
      } else {
        r1 = parse_rational(con_r1);
        r2 = parse_rational(con_r2);
        R1 = parse_rational(con_R1);
        R2 = parse_rational(con_R2);
      }
      const ABCSParams p{r1.convert_to<double>(), r2.convert_to<double>(), R1.convert_to<double>(),
                         R2.convert_to<double>()};
      if (!con_r.empty() && con_r != "1") corollary_params(parse_rational(con_r).convert_to<double>());
      const GuaranteeConstants g = guarantee_constants(p, Ordering::kFlag);
      std::optional<ExactConstants> exact;
      try {
        exact = exact_guarantee_constants(r1, r2, R1, R2);
      } catch (const std::domain_error&) {
        // Square roots from different quadratic fields: doubles only.
      }
      emit(con_out, [&](std::ostream& out) { write_constants_json(out, g, w, exact ? &*exact : nullptr); });
      if (g.ordering_violation) std::cerr << "warning: R1 >= r1 and R2 >= r2 do not hold\n";
      return 0;
    }
    if (*dia) {
      const CostWeights w = dia_w.resolve();
      const ArrivalFunction lambda = make_workload(parse_spec(dia_workload));
      const ArrivalFunction prediction = make_prediction(make_prediction_spec(parse_spec(dia_prediction)), lambda);
      const Spec spec = parse_spec(dia_policy);
      if (spec.name != "abcs") throw std::invalid_argument("diagnose needs an abcs policy");
      std::unique_ptr<Policy> base = make_policy(spec, prediction, w);
      auto& abcs = dynamic_cast<AbcsPolicy&>(*base);
      const Trajectory alg = simulate(abcs, lambda, w, dia_h);
      const GuaranteeConstants g = guarantee_constants(abcs.params(), Ordering::kFlag);
      PotentialSeries series;
      if (dia_potential == "pcr") {
        const OptResult ref = opt_cost(lambda, w, dia_lp_delta > 0.0 ? dia_lp_delta : lambda.delta());
        SchedulePolicy schedule = SchedulePolicy::from_lp(ref.solution);
        const Trajectory ref_traj = simulate(schedule, lambda, w, dia_h);
        series = drift_check(alg, ref_traj, PotentialKind::kPcr, dia_cr.value_or(g.pcr), g, w);
      } else {
        series = drift_check(alg, advised_trajectory(abcs, alg), PotentialKind::kOcr, dia_cr.value_or(g.ocr), g, w);
      }
      emit(dia_out, [&](std::ostream& out) { write_potential_csv(out, series); });
      std::cerr << "cr_target=" << series.cr_target << " max_drift_violation=" << series.max_drift_violation
                << " min_phi=" << series.min_phi << " alg_cost=" << series.alg_cost
                << " ref_cost=" << series.ref_cost << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
