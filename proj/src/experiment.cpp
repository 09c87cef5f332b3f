#include "capscale/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "capscale/algorithms.hpp"
#include "capscale/bounds.hpp"
#include "capscale/offline.hpp"

namespace capscale {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, const std::string& what) {
  text = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw std::invalid_argument("'" + std::string(text) + "' is not a number for " + what);
  }
  return v;
}

void check_keys(const Spec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.params) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw std::invalid_argument("unknown parameter '" + key + "' for " + spec.name);
    }
  }
}

// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the
// first failure in index order.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string file_stem(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  }
  return s;
}

Spec spec_field(const nlohmann::json& j, const char* key, const char* fallback) {
  if (!j.contains(key)) return parse_spec(fallback);
  return parse_spec(j.at(key).get<std::string>());
}

}  // namespace

double Spec::number(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw std::invalid_argument(name + " needs parameter '" + key + "'");
  return parse_number(it->second, name + "." + key);
}

double Spec::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::string Spec::text(const std::string& key, const std::string& fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Spec parse_spec(std::string_view text) {
  text = trim(text);
  Spec spec;
  const std::size_t open = text.find('{');
  spec.name = std::string(trim(text.substr(0, open)));
  if (spec.name.empty()) throw std::invalid_argument("empty component name in '" + std::string(text) + "'");
  if (open == std::string_view::npos) return spec;
  if (text.back() != '}') throw std::invalid_argument("unterminated parameter list in '" + std::string(text) + "'");
  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  while (!trim(body).empty()) {
    const std::size_t comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("expected key=value in '" + std::string(text) + "'");
    const std::string key(trim(item.substr(0, eq)));
    if (key.empty() || spec.params.count(key)) throw std::invalid_argument("bad or repeated key in '" + std::string(text) + "'");
    spec.params[key] = std::string(trim(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return spec;
}

std::string to_string(const Spec& spec) {
  if (spec.params.empty()) return spec.name;
  std::string s = spec.name + "{";
  bool first = true;
  for (const auto& [key, value] : spec.params) {
    if (!first) s += ",";
    s += key + "=" + value;
    first = false;
  }
  return s + "}";
}

ArrivalFunction make_workload(const Spec& s) {
  if (s.name == "constant") {
    check_keys(s, {"rate", "T", "delta"});
    return make_constant(s.number("rate"), s.number("T", 24.0), s.number("delta", 1.0));
  }
  if (s.name == "sinusoid") {
    check_keys(s, {"mean", "amplitude", "period", "T", "delta"});
    return make_sinusoid(s.number("mean", 500.0), s.number("amplitude", 500.0), s.number("period", 24.0),
                         s.number("T", 24.0), s.number("delta", 1.0));
  }
  if (s.name == "step") {
    check_keys(s, {"low", "high", "half_period", "T", "delta"});
    return make_step(s.number("low", 0.0), s.number("high", 1000.0), s.number("half_period", 6.0),
                     s.number("T", 24.0), s.number("delta", 1.0));
  }
  if (s.name == "poisson") {
    check_keys(s, {"mean", "amplitude", "period", "T", "delta", "seed"});
    const double seed = s.number("seed", 1.0);
    if (!(seed >= 0.0) || seed != std::floor(seed)) throw std::invalid_argument("seed must be a nonnegative integer");
    const ArrivalFunction intensity =
        make_sinusoid(s.number("mean", 500.0), s.number("amplitude", 0.0), s.number("period", 24.0),
                      s.number("T", 24.0), s.number("delta", 1.0));
    return make_poisson(intensity, static_cast<std::uint64_t>(seed));
  }
  if (s.name == "trace") {
    check_keys(s, {"path", "delta"});
    const std::string path = s.text("path", "");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
    const std::vector<TraceRow> rows = read_trace_csv(in);
    return ingest_trace(rows, s.number("delta", 1.0));
  }
  throw std::invalid_argument("unknown workload '" + s.name + "'");
}

PredictionSpec make_prediction_spec(const Spec& s) {
  if (s.name == "zero") {
    check_keys(s, {});
    return PredictionSpec::zero();
  }
  if (s.name == "perfect") {
    check_keys(s, {});
    return PredictionSpec::perfect();
  }
  if (s.name == "constant") {
    check_keys(s, {"c"});
    return PredictionSpec::constant(s.number("c"));
  }
  if (s.name == "opposite") {
    check_keys(s, {"cap"});
    return PredictionSpec::opposite(s.number("cap", 1000.0));
  }
  if (s.name == "moving_average") {
    check_keys(s, {"window"});
    return PredictionSpec::moving_average(s.number("window", 3.0));
  }
  throw std::invalid_argument("unknown prediction '" + s.name + "'");
}

CostWeights weights_preset(const std::string& name) {
  if (name == "paper-dc") return CostWeights::paper_dc();
  if (name == "unit") return CostWeights{1.0, 1.0, 1.0, false};
  throw std::invalid_argument("unknown weight preset '" + name + "'");
}

std::unique_ptr<Policy> make_policy(const Spec& s, const ArrivalFunction& prediction, const CostWeights& w) {
  if (s.name == "bcs") {
    check_keys(s, {"r1", "r2"});
    return std::make_unique<BcsPolicy>(s.number("r1", 2.0), s.number("r2", 1.0));
  }
  if (s.name == "ap" || s.name == "abcs") {
    const double delta = s.number("delta", prediction.delta());
    auto plan = std::make_shared<const APDecomposition>(ap_policy(prediction, w, delta));
    if (s.name == "ap") {
      check_keys(s, {"delta"});
      return std::make_unique<ApPolicy>(std::move(plan));
    }
    check_keys(s, {"r", "r1", "r2", "R1", "R2", "delta"});
    if (s.has("r")) {
      if (s.has("r1") || s.has("r2") || s.has("R1") || s.has("R2")) {
        throw std::invalid_argument("abcs takes either r or (r1, r2, R1, R2)");
      }
      return std::make_unique<AbcsPolicy>(std::move(plan), confidence_params(s.number("r")));
    }
    const ABCSParams p{s.number("r1", 2.0), s.number("r2", 1.0), s.number("R1", 2.0), s.number("R2", 1.0)};
    return std::make_unique<AbcsPolicy>(std::move(plan), p);
  }
  if (s.name == "timer") {
    check_keys(s, {"tau"});
    if (!s.has("tau") && !(w.theta > 0.0)) throw std::invalid_argument("timer needs tau when theta = 0");
    return std::make_unique<TimerPolicy>(s.number("tau", w.beta / w.theta));
  }
  if (s.name == "nowait_bcs") {
    check_keys(s, {});
    return std::make_unique<NowaitBcsPolicy>();
  }
  throw std::invalid_argument("unknown policy '" + s.name + "'");
}

PolicyFactory policy_factory(const Spec& spec) {
  return [spec](const ArrivalFunction& prediction, const CostWeights& w) {
    return make_policy(spec, prediction, w);
  };
}

ExperimentConfig parse_config(std::string_view json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  ExperimentConfig c;
  if (j.contains("weights")) {
    const nlohmann::json& w = j.at("weights");
    if (w.is_string()) {
      c.weights = weights_preset(w.get<std::string>());
    } else {
      c.weights.omega = w.value("omega", c.weights.omega);
      c.weights.beta = w.value("beta", c.weights.beta);
      c.weights.theta = w.value("theta", c.weights.theta);
      c.weights.no_wait = w.value("no_wait", false);
    }
  }
  c.weights.validate();
  c.h = j.value("h", c.h);
  c.lp_delta = j.value("lp_delta", c.lp_delta);
  c.output = j.value("output", std::string());
  c.trajectory_dir = j.value("trajectory_dir", std::string());
  if (j.contains("instances")) {
    for (const nlohmann::json& inst : j.at("instances")) {
      InstanceConfig ic;
      ic.workload = spec_field(inst, "workload", "");
      ic.prediction = spec_field(inst, "prediction", "zero");
      ic.name = inst.value("name", to_string(ic.workload));
      c.instances.push_back(std::move(ic));
    }
  } else if (j.contains("workload")) {
    InstanceConfig ic;
    ic.workload = spec_field(j, "workload", "");
    ic.prediction = spec_field(j, "prediction", "zero");
    ic.name = j.value("name", to_string(ic.workload));
    c.instances.push_back(std::move(ic));
  }
  if (c.instances.empty()) throw std::invalid_argument("config has no workload");
  for (const nlohmann::json& p : j.at("policies")) c.policies.push_back(parse_spec(p.get<std::string>()));
  if (c.policies.empty()) throw std::invalid_argument("config has no policies");
  if (!(c.h > 0.0)) throw std::invalid_argument("h must be positive");
  if (c.lp_delta < 0.0) throw std::invalid_argument("lp_delta must be nonnegative");
  for (const InstanceConfig& ic : c.instances) make_prediction_spec(ic.prediction);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

unsigned thread_limit() {
  if (const char* env = std::getenv("CAPSCALE_THREADS"); env && *env) {
    const double v = parse_number(env, "CAPSCALE_THREADS");
    if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument("CAPSCALE_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, unsigned threads) {
  if (threads == 0) threads = thread_limit();
  const CostWeights& w = config.weights;
  struct Prepared {
    ArrivalFunction lambda{1.0, {0.0}};
    ArrivalFunction prediction{1.0, {0.0}};
    OptResult opt;
  };
  std::vector<Prepared> prepared(config.instances.size());
  parallel_for(prepared.size(), threads, [&](std::size_t i) {
    const InstanceConfig& ic = config.instances[i];
    Prepared& p = prepared[i];
    p.lambda = make_workload(ic.workload);
    steps_per_segment(p.lambda, config.h);
    p.prediction = make_prediction(make_prediction_spec(ic.prediction), p.lambda);
    const double delta = config.lp_delta > 0.0 ? config.lp_delta : p.lambda.delta();
    p.opt = opt_cost(p.lambda, w, delta);
  });

  const std::size_t np = config.policies.size();
  std::vector<ResultRow> rows(prepared.size() * np);
  if (!config.trajectory_dir.empty()) std::filesystem::create_directories(config.trajectory_dir);
  parallel_for(rows.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx / np;
    const Prepared& p = prepared[i];
    const Spec& spec = config.policies[idx % np];
    const std::unique_ptr<Policy> policy = make_policy(spec, p.prediction, w);
    const Trajectory traj = simulate(*policy, p.lambda, w, config.h);
    ResultRow& r = rows[idx];
    r.instance = config.instances[i].name;
    r.policy = to_string(spec);
    r.cost = cost(traj, w);
    r.opt = p.opt.cost;
    r.cr = competitive_ratio(r.cost.total, r.opt);
    r.eta = accuracy_eta(p.prediction, p.lambda, r.opt).eta;
    r.duality_gap = p.opt.solution.duality_gap;
    r.certified = r.duality_gap <= 1e-8 * (1.0 + std::abs(r.opt));
    if (!config.trajectory_dir.empty()) {
      const std::filesystem::path dir(config.trajectory_dir);
      std::ofstream out(dir / (file_stem(r.instance) + "__" + file_stem(r.policy) + ".csv"));
      if (!out) throw std::runtime_error("cannot write trajectory into '" + config.trajectory_dir + "'");
      write_trajectory_csv(out, traj);
    }
  });
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  std::ostringstream buf;
  buf.precision(10);
  buf << "instance,policy,flow,switch,power,total,opt,cr,eta\n";
  auto quoted = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const ResultRow& r : rows) {
    buf << quoted(r.instance) << ',' << quoted(r.policy) << ',' << r.cost.flow_time << ','
        << r.cost.switching << ',' << r.cost.power << ',' << r.cost.total << ',' << r.opt << ','
        << r.cr << ',' << r.eta << '\n';
  }
  out << buf.str();
}

}  // namespace capscale
