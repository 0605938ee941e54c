#include "locsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "locsim/errors.hpp"
#include "locsim/simplex.hpp"

namespace locsim {

void ServiceRates::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("service rates must satisfy gamma > 0");
  if (!(beta > gamma)) throw ConfigError("service rates must satisfy beta > gamma");
  if (!(alpha > beta)) throw ConfigError("service rates must satisfy alpha > beta");
  if (!std::isfinite(alpha)) throw ConfigError("service rate alpha must be finite");
}

ArrivalSpec::ArrivalSpec(std::vector<ArrivalEntry> entries) : entries_(std::move(entries)) {
  std::set<TaskType> seen;
  for (const auto& e : entries_) {
    if (!std::isfinite(e.rate) || e.rate < 0.0) {
      throw InputError("arrival rate for type " + e.type.to_string() + " must be finite and nonnegative");
    }
    if (!seen.insert(e.type).second) throw InputError("duplicate task type " + e.type.to_string());
    total_ += e.rate;
  }
}

ArrivalSpec ArrivalSpec::scaled(double factor) const {
  if (!(factor > 0.0)) throw InputError("scale factor must be positive");
  std::vector<ArrivalEntry> out = entries_;
  for (auto& e : out) e.rate *= factor;
  return ArrivalSpec(std::move(out));
}

LoadFactor load_factor(const ArrivalSpec& spec, const ServiceRates& rates, const RackTopology& topology) {
  if (spec.empty() || !(spec.total_rate() > 0.0)) throw InputError("arrival spec is empty");
  const auto num_servers = static_cast<std::size_t>(topology.num_servers());

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < spec.entries().size(); ++i) {
    topology.check(spec.entries()[i].type);
    if (spec.entries()[i].rate > 0.0) active.push_back(i);
  }

  // Columns: x[k][m] for each active type k, then the max-load t, then one slack per server.
  const std::size_t t_col = active.size() * num_servers;
  LinearProgram lp;
  lp.num_vars = t_col + 1 + num_servers;
  lp.objective.assign(lp.num_vars, 0.0);
  lp.objective[t_col] = 1.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (std::size_t m = 0; m < num_servers; ++m) row[k * num_servers + m] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(spec.entries()[active[k]].rate);
  }
  for (std::size_t m = 0; m < num_servers; ++m) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Locality l = topology.locality(spec.entries()[active[k]].type, ServerId::from_index(m));
      row[k * num_servers + m] = 1.0 / rates.for_locality(l);
    }
    row[t_col] = -1.0;
    row[t_col + 1 + m] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(0.0);
  }

  const LpSolution sol = solve_lp(lp);

  LoadFactor out;
  out.split.assign(spec.entries().size(), std::vector<double>(num_servers, 0.0));
  out.server_loads.assign(num_servers, 0.0);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const TaskType& type = spec.entries()[active[k]].type;
    for (std::size_t m = 0; m < num_servers; ++m) {
      const double x = std::max(0.0, sol.x[k * num_servers + m]);
      out.split[active[k]][m] = x;
      out.server_loads[m] += x / rates.for_locality(topology.locality(type, ServerId::from_index(m)));
    }
  }
  out.rho = *std::max_element(out.server_loads.begin(), out.server_loads.end());
  if (std::abs(out.rho - sol.objective) > 1e-6 * std::max(1.0, out.rho)) {
    throw SolverError("load factor witness disagrees with LP objective");
  }
  return out;
}

namespace {

void check_target(double target_rho) {
  if (!(target_rho > 0.0 && target_rho < 1.0)) throw InputError("target load must lie in (0, 1)");
}

}  // namespace

ArrivalSpec uniform_workload(const RackTopology& topology, const ServiceRates& rates, double target_rho) {
  check_target(target_rho);
  const auto types = topology.enumerate_task_types();
  const double total = target_rho * topology.num_servers() * rates.alpha;
  const double each = total / static_cast<double>(types.size());
  std::vector<ArrivalEntry> entries;
  entries.reserve(types.size());
  for (const auto& t : types) entries.push_back({t, each});
  return ArrivalSpec(std::move(entries));
}

ArrivalSpec hot_rack_workload(const RackTopology& topology, const ServiceRates& rates, double target_rho,
                              double hot_fraction) {
  check_target(target_rho);
  if (!(hot_fraction >= 0.0 && hot_fraction <= 1.0)) throw InputError("hot_fraction must lie in [0, 1]");

  std::vector<TaskType> hot, cold;
  for (const auto& t : topology.enumerate_task_types()) {
    const bool in_rack_one = topology.rack_of(t[2]) == 1;
    (in_rack_one ? hot : cold).push_back(t);
  }
  if (hot_fraction > 0.0 && hot.empty()) {
    throw SolverError("hot-rack calibration infeasible: rack 1 holds fewer than three servers");
  }
  if (hot_fraction < 1.0 && cold.empty()) {
    throw SolverError("hot-rack calibration infeasible: no task types outside rack 1");
  }

  std::vector<ArrivalEntry> entries;
  if (hot_fraction > 0.0) {
    for (const auto& t : hot) entries.push_back({t, hot_fraction / static_cast<double>(hot.size())});
  }
  if (hot_fraction < 1.0) {
    for (const auto& t : cold) entries.push_back({t, (1.0 - hot_fraction) / static_cast<double>(cold.size())});
  }
  const ArrivalSpec shape(std::move(entries));

  // load_factor is positively homogeneous, so a single rescale hits the target.
  const double base = load_factor(shape, rates, topology).rho;
  ArrivalSpec calibrated = shape.scaled(target_rho / base);
  const double achieved = load_factor(calibrated, rates, topology).rho;
  if (std::abs(achieved - target_rho) > 1e-3) {
    throw SolverError("hot-rack calibration missed target load: got " + std::to_string(achieved));
  }
  return calibrated;
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Uniform: return "uniform";
    case GeneratorKind::HotRack: return "hot_rack";
    case GeneratorKind::Explicit: return "explicit";
  }
  return "?";
}

GeneratorKind parse_generator(const std::string& name) {
  if (name == "uniform") return GeneratorKind::Uniform;
  if (name == "hot_rack") return GeneratorKind::HotRack;
  if (name == "explicit") return GeneratorKind::Explicit;
  throw ConfigError("unknown workload generator '" + name + "'");
}

ArrivalSpec WorkloadSpec::build(const RackTopology& topology, const ServiceRates& rates) const {
  if (generator == GeneratorKind::Explicit) return explicit_rates;
  return at_load(topology, rates, target_rho);
}

ArrivalSpec WorkloadSpec::at_load(const RackTopology& topology, const ServiceRates& rates, double rho) const {
  switch (generator) {
    case GeneratorKind::Uniform: return uniform_workload(topology, rates, rho);
    case GeneratorKind::HotRack: return hot_rack_workload(topology, rates, rho, hot_fraction);
    case GeneratorKind::Explicit: {
      check_target(rho);
      const double base = load_factor(explicit_rates, rates, topology).rho;
      return explicit_rates.scaled(rho / base);
    }
  }
  throw InternalError("unknown workload generator");
}

std::vector<Arrival> sample_arrivals(const ArrivalSpec& spec, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  std::vector<Arrival> out;
  out.reserve(static_cast<std::size_t>(spec.total_rate() * horizon * 1.05) + 16);
  for (const auto& e : spec.entries()) {
    if (e.rate <= 0.0) continue;
    for (double t = rng.exponential(e.rate); t < horizon; t += rng.exponential(e.rate)) {
      out.push_back({t, e.type});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Arrival& a, const Arrival& b) { return a.time < b.time; });
  return out;
}

void ServiceDistribution::validate() const {
  if (kind == ServiceKind::Pareto && !(pareto_shape > 1.0)) {
    throw ConfigError("pareto shape must exceed 1 for a finite mean");
  }
}

double ServiceDistribution::draw(double mean, Rng& rng) const {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw ConfigError("service mean must be positive and finite");
  switch (kind) {
    case ServiceKind::Exponential:
      return -std::log(rng.uniform()) * mean;
    case ServiceKind::Geometric: {
      // Slots of unit length with success probability 1/mean.
      if (mean < 1.0) throw ConfigError("geometric service needs mean >= 1 slot (rate <= 1)");
      const double p = 1.0 / mean;
      if (p >= 1.0) return 1.0;
      return std::max(1.0, std::ceil(std::log(rng.uniform()) / std::log1p(-p)));
    }
    case ServiceKind::Pareto: {
      const double scale = mean * (pareto_shape - 1.0) / pareto_shape;
      return scale * std::pow(rng.uniform(), -1.0 / pareto_shape);
    }
  }
  throw InternalError("unknown service kind");
}

std::string to_string(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::Exponential: return "exponential";
    case ServiceKind::Geometric: return "geometric";
    case ServiceKind::Pareto: return "pareto";
  }
  return "?";
}

ServiceKind parse_service_kind(const std::string& name) {
  if (name == "exponential") return ServiceKind::Exponential;
  if (name == "geometric") return ServiceKind::Geometric;
  if (name == "pareto") return ServiceKind::Pareto;
  throw ConfigError("unknown service distribution '" + name + "'");
}

}  // namespace locsim
