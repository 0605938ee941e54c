#include "locsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "locsim/errors.hpp"

namespace locsim {

std::string to_string(Direction d) { return d == Direction::Lower ? "lower" : "higher"; }

std::string to_string(PerturbationMode m) {
  switch (m) {
    case PerturbationMode::CoScaled: return "co_scaled";
    case PerturbationMode::Independent: return "independent";
    case PerturbationMode::SkewSlowTiers: return "skew_slow_tiers";
  }
  return "?";
}

Direction parse_direction(const std::string& name) {
  if (name == "lower") return Direction::Lower;
  if (name == "higher") return Direction::Higher;
  throw ConfigError("unknown perturbation direction '" + name + "'");
}

PerturbationMode parse_mode(const std::string& name) {
  for (auto m : {PerturbationMode::CoScaled, PerturbationMode::Independent, PerturbationMode::SkewSlowTiers}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown perturbation mode '" + name + "'");
}

void PerturbationPlan::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InputError("perturbation epsilon must lie in [0, 1)");
  if (epsilon > 0.5) throw InputError("perturbation epsilon must not exceed 0.5");
}

EstimatedRates perturb(const ServiceRates& rates, const PerturbationPlan& plan, Rng& rng) {
  plan.validate();
  const double eps = plan.epsilon;
  const double sign = plan.direction == Direction::Lower ? -1.0 : 1.0;
  switch (plan.mode) {
    case PerturbationMode::CoScaled: {
      const double f = 1.0 + sign * eps;
      return {rates.alpha * f, rates.beta * f, rates.gamma * f};
    }
    case PerturbationMode::Independent: {
      auto factor = [&] { return 1.0 - eps + 2.0 * eps * rng.uniform(); };
      const double fa = factor();
      const double fb = factor();
      const double fg = factor();
      return {rates.alpha * fa, rates.beta * fb, rates.gamma * fg};
    }
    case PerturbationMode::SkewSlowTiers: {
      const double f = 1.0 + sign * eps;
      return {rates.alpha, rates.beta * f, rates.gamma * f};
    }
  }
  throw InternalError("unknown perturbation mode");
}

void SweepPlan::validate() const {
  if (schedulers.empty()) throw ConfigError("sweep needs at least one scheduler");
  if (loads.empty()) throw ConfigError("sweep needs at least one load");
  if (perturbations.empty()) throw ConfigError("sweep needs at least one perturbation");
  if (replications < 1) throw ConfigError("sweep replications must be at least 1");
  for (double rho : loads) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("sweep loads must lie in (0, 1)");
  }
  for (const auto& p : perturbations) {
    try {
      p.validate();
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  }
  base.true_rates.validate();
  base.service.validate();
}

std::uint64_t cell_seed(std::uint64_t master_seed, SchedulerKind scheduler, double load,
                        const PerturbationPlan& perturbation, int replication) noexcept {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(scheduler), std::bit_cast<std::uint64_t>(load),
                                   std::bit_cast<std::uint64_t>(perturbation.epsilon),
                                   static_cast<std::uint64_t>(perturbation.direction),
                                   static_cast<std::uint64_t>(perturbation.mode),
                                   static_cast<std::uint64_t>(replication)});
}

SimConfig cell_config(const SweepPlan& plan, const ArrivalSpec& arrivals, SchedulerKind scheduler,
                      const PerturbationPlan& perturbation, std::uint64_t seed) {
  SimConfig cfg = plan.base;
  cfg.arrivals = arrivals;
  cfg.scheduler = scheduler;
  cfg.seed = seed;
  Rng rng(stream_seed(seed, Stream::Perturbation));
  cfg.estimated = perturb(cfg.true_rates, perturbation, rng);
  return cfg;
}

SweepResult run_sweep(const SweepPlan& plan, int jobs, const ProgressFn& progress) {
  plan.validate();
  std::vector<ArrivalSpec> specs;
  specs.reserve(plan.loads.size());
  for (double rho : plan.loads) specs.push_back(plan.workload.at_load(plan.base.topology, plan.base.true_rates, rho));

  struct Cell {
    std::size_t load_index;
    SweepRow row;
  };
  std::vector<Cell> cells;
  for (SchedulerKind s : plan.schedulers)
    for (std::size_t li = 0; li < plan.loads.size(); ++li)
      for (const auto& p : plan.perturbations)
        for (int r = 0; r < plan.replications; ++r) {
          SweepRow row;
          row.scheduler = s;
          row.load = plan.loads[li];
          row.perturbation = p;
          row.replication = r;
          row.seed = cell_seed(plan.master_seed, s, plan.loads[li], p, r);
          cells.push_back({li, row});
        }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepRow& row = cells[i].row;
      try {
        const SimConfig cfg = cell_config(plan, specs[cells[i].load_index], row.scheduler, row.perturbation, row.seed);
        const MetricsReport rep = run(cfg);
        row.mean_completion_time = rep.mean_completion_time;
        row.tasks_completed = rep.tasks_completed;
        row.unstable = rep.unstable;
      } catch (const std::exception& e) {
        row.error = e.what();
        row.mean_completion_time = std::nan("");
      }
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, cells.size());
      }
    }
  };

  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, cells.size()); ++t) pool.emplace_back(worker);
  }

  SweepResult result;
  result.rows.reserve(cells.size());
  for (auto& c : cells) result.rows.push_back(std::move(c.row));
  return result;
}

double t_critical_95(std::size_t degrees_of_freedom) {
  if (degrees_of_freedom == 0) throw InputError("t quantile needs at least one degree of freedom");
  boost::math::students_t dist(static_cast<double>(degrees_of_freedom));
  return boost::math::quantile(dist, 0.975);
}

namespace {

using CellKey = std::tuple<int, double, double, int, int>;

CellKey key_of(SchedulerKind s, double load, const PerturbationPlan& p) {
  return {static_cast<int>(s), load, p.epsilon, static_cast<int>(p.direction), static_cast<int>(p.mode)};
}

}  // namespace

std::vector<CellSummary> aggregate(const SweepResult& result) {
  std::vector<CellSummary> out;
  std::map<CellKey, std::size_t> index;
  std::vector<std::vector<double>> samples;
  for (const auto& row : result.rows) {
    const CellKey key = key_of(row.scheduler, row.load, row.perturbation);
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) {
      CellSummary c;
      c.scheduler = row.scheduler;
      c.load = row.load;
      c.perturbation = row.perturbation;
      out.push_back(c);
      samples.emplace_back();
    }
    CellSummary& cell = out[it->second];
    if (row.error) {
      ++cell.failures;
      continue;
    }
    cell.any_unstable = cell.any_unstable || row.unstable;
    samples[it->second].push_back(row.mean_completion_time);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& xs = samples[i];
    CellSummary& c = out[i];
    c.replications = xs.size();
    if (xs.empty()) {
      c.mean = std::nan("");
      continue;
    }
    double sum = 0.0;
    for (double x : xs) sum += x;
    c.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - c.mean) * (x - c.mean);
      c.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
      c.ci_half_width = t_critical_95(xs.size() - 1) * c.stddev / std::sqrt(static_cast<double>(xs.size()));
    }
  }
  return out;
}

std::vector<SensitivityRow> sensitivity(const SweepResult& result) {
  const auto cells = aggregate(result);
  std::map<CellKey, const CellSummary*> by_key;
  for (const auto& c : cells) by_key[key_of(c.scheduler, c.load, c.perturbation)] = &c;

  std::vector<SensitivityRow> out;
  for (const auto& c : cells) {
    if (c.perturbation.epsilon == 0.0) continue;
    PerturbationPlan base_plan = c.perturbation;
    base_plan.epsilon = 0.0;
    const auto it = by_key.find(key_of(c.scheduler, c.load, base_plan));
    if (it == by_key.end()) {
      throw InputError("missing epsilon = 0 baseline for " + to_string(c.scheduler) + " at load " +
                       std::to_string(c.load));
    }
    const CellSummary& base = *it->second;
    SensitivityRow row;
    row.scheduler = c.scheduler;
    row.load = c.load;
    row.perturbation = c.perturbation;
    row.degradation = (c.mean - base.mean) / base.mean;
    if (c.replications > 1 && base.replications > 1) {
      // Delta method for the ratio of two independent sample means.
      const double se_c = c.stddev / std::sqrt(static_cast<double>(c.replications));
      const double se_b = base.stddev / std::sqrt(static_cast<double>(base.replications));
      const double ratio = c.mean / base.mean;
      const double se = std::sqrt(se_c * se_c + ratio * ratio * se_b * se_b) / base.mean;
      row.ci_half_width = t_critical_95(std::min(c.replications, base.replications) - 1) * se;
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace locsim
