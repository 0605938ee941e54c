#include "locsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "locsim/errors.hpp"

namespace locsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
}

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
T get(const json& j, std::string_view where, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + "." + key + " is required");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

template <class T>
T get_or(const json& j, std::string_view where, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, where, key) : fallback;
}

template <class T, class Parse>
std::vector<T> parse_list(const json& j, std::string_view where, const char* key, Parse parse, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const auto names = get<std::vector<std::string>>(j, where, key);
  std::vector<T> out;
  for (const auto& n : names) out.push_back(parse(n));
  if (out.empty()) throw ConfigError(std::string(where) + "." + key + " must not be empty");
  return out;
}

void check_load(double rho, std::string_view what) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError(std::string(what) + " must lie in (0, 1)");
}

void check_horizon(double horizon, double warmup, std::string_view where) {
  if (!(horizon > 0.0)) throw ConfigError(std::string(where) + ".horizon must be positive");
  if (!(warmup >= 0.0 && warmup <= 0.5)) throw ConfigError(std::string(where) + ".warmup must lie in [0, 0.5]");
}

std::optional<std::size_t> parse_threshold(const json& j, std::string_view where) {
  if (!j.contains("instability_threshold")) return std::nullopt;
  const auto v = get<std::int64_t>(j, where, "instability_threshold");
  if (v <= 0) throw ConfigError(std::string(where) + ".instability_threshold must be positive");
  return static_cast<std::size_t>(v);
}

PerturbationPlan parse_perturbation(const json& j) {
  reject_unknown(j, "simulation.perturbation", {"epsilon", "direction", "mode"});
  PerturbationPlan p;
  p.epsilon = get_or(j, "simulation.perturbation", "epsilon", 0.0);
  p.direction = parse_direction(get_or<std::string>(j, "simulation.perturbation", "direction", "lower"));
  p.mode = parse_mode(get_or<std::string>(j, "simulation.perturbation", "mode", "independent"));
  if (!(p.epsilon >= 0.0 && p.epsilon <= 0.5)) throw ConfigError("perturbation epsilon must lie in [0, 0.5]");
  return p;
}

WorkloadSpec parse_workload(const json& j, const RackTopology& topology) {
  require_object(j, "workload");
  WorkloadSpec w;
  w.generator = parse_generator(get<std::string>(j, "workload", "generator"));
  switch (w.generator) {
    case GeneratorKind::Uniform:
      reject_unknown(j, "workload", {"generator", "target_rho"});
      w.target_rho = get<double>(j, "workload", "target_rho");
      check_load(w.target_rho, "workload.target_rho");
      break;
    case GeneratorKind::HotRack:
      reject_unknown(j, "workload", {"generator", "target_rho", "hot_fraction"});
      w.target_rho = get<double>(j, "workload", "target_rho");
      w.hot_fraction = get<double>(j, "workload", "hot_fraction");
      check_load(w.target_rho, "workload.target_rho");
      if (!(w.hot_fraction >= 0.0 && w.hot_fraction <= 1.0)) {
        throw ConfigError("workload.hot_fraction must lie in [0, 1]");
      }
      break;
    case GeneratorKind::Explicit: {
      reject_unknown(j, "workload", {"generator", "tasks"});
      if (!j.contains("tasks") || !j["tasks"].is_array()) throw ConfigError("workload.tasks must be an array");
      std::vector<ArrivalEntry> entries;
      for (const auto& t : j["tasks"]) {
        reject_unknown(t, "workload.tasks[]", {"type", "rate"});
        const auto ids = get<std::vector<int>>(t, "workload.tasks[]", "type");
        if (ids.size() != 3) throw ConfigError("workload task type must list three servers");
        try {
          TaskType type(ids[0], ids[1], ids[2]);
          topology.check(type);
          entries.push_back({type, get<double>(t, "workload.tasks[]", "rate")});
        } catch (const InputError& e) {
          throw ConfigError(e.what());
        }
      }
      if (entries.empty()) throw ConfigError("workload is empty");
      try {
        w.explicit_rates = ArrivalSpec(std::move(entries));
      } catch (const InputError& e) {
        throw ConfigError(e.what());
      }
      if (!(w.explicit_rates.total_rate() > 0.0)) throw ConfigError("workload is empty");
      break;
    }
  }
  return w;
}

SimulationSection parse_simulation(const json& j) {
  reject_unknown(j, "simulation",
                 {"scheduler", "horizon", "warmup", "seed", "instability_threshold", "perturbation", "estimated_rates"});
  SimulationSection s;
  s.scheduler = parse_scheduler(get_or<std::string>(j, "simulation", "scheduler", to_string(s.scheduler)));
  s.horizon = get_or(j, "simulation", "horizon", s.horizon);
  s.warmup = get_or(j, "simulation", "warmup", s.warmup);
  s.seed = get_or<std::uint64_t>(j, "simulation", "seed", s.seed);
  s.instability_threshold = parse_threshold(j, "simulation");
  check_horizon(s.horizon, s.warmup, "simulation");
  if (j.contains("perturbation")) s.perturbation = parse_perturbation(j["perturbation"]);
  if (j.contains("estimated_rates")) {
    const auto& e = j["estimated_rates"];
    reject_unknown(e, "simulation.estimated_rates", {"alpha", "beta", "gamma"});
    s.estimated_rates = EstimatedRates{get<double>(e, "simulation.estimated_rates", "alpha"),
                                       get<double>(e, "simulation.estimated_rates", "beta"),
                                       get<double>(e, "simulation.estimated_rates", "gamma")};
    s.estimated_rates->validate();
    if (s.perturbation.epsilon > 0.0) {
      throw ConfigError("simulation.estimated_rates and a nonzero perturbation are mutually exclusive");
    }
  }
  return s;
}

SweepSection parse_sweep(const json& j) {
  reject_unknown(j, "sweep",
                 {"schedulers", "loads", "epsilons", "modes", "directions", "replications", "horizon", "warmup", "seed",
                  "instability_threshold"});
  SweepSection s;
  s.schedulers = parse_list(j, "sweep", "schedulers", parse_scheduler, s.schedulers);
  s.modes = parse_list(j, "sweep", "modes", parse_mode, s.modes);
  s.directions = parse_list(j, "sweep", "directions", parse_direction, s.directions);
  s.loads = get_or(j, "sweep", "loads", s.loads);
  s.epsilons = get_or(j, "sweep", "epsilons", s.epsilons);
  s.replications = get_or(j, "sweep", "replications", s.replications);
  s.horizon = get_or(j, "sweep", "horizon", s.horizon);
  s.warmup = get_or(j, "sweep", "warmup", s.warmup);
  s.seed = get_or<std::uint64_t>(j, "sweep", "seed", s.seed);
  s.instability_threshold = parse_threshold(j, "sweep");
  if (s.loads.empty()) throw ConfigError("sweep.loads must not be empty");
  if (s.epsilons.empty()) throw ConfigError("sweep.epsilons must not be empty");
  for (double rho : s.loads) check_load(rho, "sweep.loads entries");
  for (double e : s.epsilons) {
    if (!(e >= 0.0 && e <= 0.5)) throw ConfigError("sweep.epsilons entries must lie in [0, 0.5]");
  }
  if (s.replications < 1) throw ConfigError("sweep.replications must be at least 1");
  check_horizon(s.horizon, s.warmup, "sweep");
  return s;
}

}  // namespace

ConfigFile parse_config(const json& doc) {
  reject_unknown(doc, "config", {"topology", "rates", "workload", "service_distribution", "simulation", "sweep", "output"});
  ConfigFile c;

  if (!doc.contains("topology")) throw ConfigError("config.topology is required");
  const auto& t = doc["topology"];
  reject_unknown(t, "topology", {"num_servers", "rack_size", "locality_levels"});
  try {
    c.topology = RackTopology(get<int>(t, "topology", "num_servers"), get<int>(t, "topology", "rack_size"),
                              get_or(t, "topology", "locality_levels", 3));
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }

  if (!doc.contains("rates")) throw ConfigError("config.rates is required");
  const auto& r = doc["rates"];
  reject_unknown(r, "rates", {"alpha", "beta", "gamma"});
  c.rates = ServiceRates{get<double>(r, "rates", "alpha"), get<double>(r, "rates", "beta"),
                         get<double>(r, "rates", "gamma")};
  c.rates.validate();

  if (doc.contains("workload")) c.workload = parse_workload(doc["workload"], c.topology);

  if (doc.contains("service_distribution")) {
    const auto& s = doc["service_distribution"];
    reject_unknown(s, "service_distribution", {"kind", "shape"});
    c.service.kind = parse_service_kind(get<std::string>(s, "service_distribution", "kind"));
    c.service.pareto_shape = get_or(s, "service_distribution", "shape", c.service.pareto_shape);
    c.service.validate();
  }

  if (doc.contains("simulation")) c.simulation = parse_simulation(doc["simulation"]);
  if (doc.contains("sweep")) c.sweep = parse_sweep(doc["sweep"]);

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    reject_unknown(o, "output", {"path", "format"});
    if (o.contains("path")) c.output.path = get<std::string>(o, "output", "path");
    c.output.format = get_or<std::string>(o, "output", "format", c.output.format);
    if (c.output.format != "csv" && c.output.format != "json") throw ConfigError("output.format must be csv or json");
  }
  return c;
}

ConfigFile parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

template <class T>
ordered_json names(const std::vector<T>& xs) {
  ordered_json out = ordered_json::array();
  for (const auto& x : xs) out.push_back(to_string(x));
  return out;
}

}  // namespace

ordered_json to_json(const ConfigFile& c) {
  ordered_json j;
  j["topology"] = {{"num_servers", c.topology.num_servers()},
                   {"rack_size", c.topology.rack_size()},
                   {"locality_levels", c.topology.locality_levels()}};
  j["rates"] = {{"alpha", c.rates.alpha}, {"beta", c.rates.beta}, {"gamma", c.rates.gamma}};
  if (c.workload) {
    const auto& w = *c.workload;
    ordered_json wj;
    wj["generator"] = to_string(w.generator);
    switch (w.generator) {
      case GeneratorKind::Uniform: wj["target_rho"] = w.target_rho; break;
      case GeneratorKind::HotRack:
        wj["target_rho"] = w.target_rho;
        wj["hot_fraction"] = w.hot_fraction;
        break;
      case GeneratorKind::Explicit: {
        ordered_json tasks = ordered_json::array();
        for (const auto& e : w.explicit_rates.entries()) {
          tasks.push_back({{"type", {e.type[0].value, e.type[1].value, e.type[2].value}}, {"rate", e.rate}});
        }
        wj["tasks"] = tasks;
        break;
      }
    }
    j["workload"] = wj;
  }
  j["service_distribution"] = {{"kind", to_string(c.service.kind)}, {"shape", c.service.pareto_shape}};
  if (c.simulation) {
    const auto& s = *c.simulation;
    ordered_json sj;
    sj["scheduler"] = to_string(s.scheduler);
    sj["horizon"] = s.horizon;
    sj["warmup"] = s.warmup;
    sj["seed"] = s.seed;
    if (s.instability_threshold) sj["instability_threshold"] = *s.instability_threshold;
    sj["perturbation"] = {{"epsilon", s.perturbation.epsilon},
                          {"direction", to_string(s.perturbation.direction)},
                          {"mode", to_string(s.perturbation.mode)}};
    if (s.estimated_rates) {
      sj["estimated_rates"] = {{"alpha", s.estimated_rates->alpha_hat},
                               {"beta", s.estimated_rates->beta_hat},
                               {"gamma", s.estimated_rates->gamma_hat}};
    }
    j["simulation"] = sj;
  }
  if (c.sweep) {
    const auto& s = *c.sweep;
    ordered_json sj;
    sj["schedulers"] = names(s.schedulers);
    sj["loads"] = s.loads;
    sj["epsilons"] = s.epsilons;
    sj["modes"] = names(s.modes);
    sj["directions"] = names(s.directions);
    sj["replications"] = s.replications;
    sj["horizon"] = s.horizon;
    sj["warmup"] = s.warmup;
    sj["seed"] = s.seed;
    if (s.instability_threshold) sj["instability_threshold"] = *s.instability_threshold;
    j["sweep"] = sj;
  }
  ordered_json oj;
  if (c.output.path) oj["path"] = *c.output.path;
  oj["format"] = c.output.format;
  j["output"] = oj;
  return j;
}

SimConfig simulation_config(const ConfigFile& c) {
  if (!c.workload) throw ConfigError("config.workload is required");
  const SimulationSection s = c.simulation.value_or(SimulationSection{});
  SimConfig cfg;
  cfg.topology = c.topology;
  cfg.true_rates = c.rates;
  cfg.scheduler = s.scheduler;
  cfg.service = c.service;
  cfg.horizon = s.horizon;
  cfg.warmup_fraction = s.warmup;
  cfg.seed = s.seed;
  cfg.instability_threshold = s.instability_threshold;
  try {
    cfg.arrivals = c.workload->build(c.topology, c.rates);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  if (s.estimated_rates) {
    cfg.estimated = *s.estimated_rates;
  } else {
    Rng rng(stream_seed(cfg.seed, Stream::Perturbation));
    cfg.estimated = perturb(c.rates, s.perturbation, rng);
  }
  cfg.validate();
  return cfg;
}

SweepPlan sweep_plan(const ConfigFile& c) {
  if (!c.workload) throw ConfigError("config.workload is required");
  if (!c.sweep) throw ConfigError("config.sweep is required");
  const SweepSection& s = *c.sweep;
  SweepPlan plan;
  plan.schedulers = s.schedulers;
  plan.loads = s.loads;
  for (double eps : s.epsilons)
    for (auto mode : s.modes)
      for (auto dir : s.directions) plan.perturbations.push_back({eps, dir, mode});
  plan.replications = s.replications;
  plan.base.topology = c.topology;
  plan.base.true_rates = c.rates;
  plan.base.estimated = EstimatedRates{c.rates.alpha, c.rates.beta, c.rates.gamma};
  plan.base.service = c.service;
  plan.base.horizon = s.horizon;
  plan.base.warmup_fraction = s.warmup;
  plan.base.instability_threshold = s.instability_threshold;
  plan.workload = *c.workload;
  plan.master_seed = s.seed;
  plan.validate();
  return plan;
}

}  // namespace locsim
