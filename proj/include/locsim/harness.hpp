#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "locsim/engine.hpp"

namespace locsim {

enum class Direction { Lower, Higher };
enum class PerturbationMode { CoScaled, Independent, SkewSlowTiers };

std::string to_string(Direction d);
std::string to_string(PerturbationMode m);
Direction parse_direction(const std::string& name);
PerturbationMode parse_mode(const std::string& name);

struct PerturbationPlan {
  double epsilon = 0.0;
  Direction direction = Direction::Lower;
  PerturbationMode mode = PerturbationMode::Independent;

  void validate() const;

  friend bool operator==(const PerturbationPlan&, const PerturbationPlan&) = default;
};

// CoScaled: every rate times (1 -/+ eps). Independent: each rate times its own
// U[1-eps, 1+eps] factor, direction ignored. SkewSlowTiers: alpha exact, beta
// and gamma times (1 -/+ eps).
EstimatedRates perturb(const ServiceRates& rates, const PerturbationPlan& plan, Rng& rng);

struct SweepPlan {
  std::vector<SchedulerKind> schedulers;
  std::vector<double> loads;
  std::vector<PerturbationPlan> perturbations;
  int replications = 20;
  // Topology, true rates, service, horizon, warmup and threshold; arrivals,
  // scheduler, estimates and seed are filled per run.
  SimConfig base;
  WorkloadSpec workload;
  std::uint64_t master_seed = 1;

  void validate() const;
};

struct SweepRow {
  SchedulerKind scheduler = SchedulerKind::BalancedPandas;
  double load = 0.0;
  PerturbationPlan perturbation;
  int replication = 0;
  std::uint64_t seed = 0;
  double mean_completion_time = 0.0;
  std::size_t tasks_completed = 0;
  bool unstable = false;
  std::optional<std::string> error;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

std::uint64_t cell_seed(std::uint64_t master_seed, SchedulerKind scheduler, double load,
                        const PerturbationPlan& perturbation, int replication) noexcept;

// Configuration of one sweep run (estimates already perturbed).
SimConfig cell_config(const SweepPlan& plan, const ArrivalSpec& arrivals, SchedulerKind scheduler,
                      const PerturbationPlan& perturbation, std::uint64_t seed);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Runs every (scheduler, load, perturbation, replication) cell, up to `jobs`
// at a time. Row order and content do not depend on `jobs`.
SweepResult run_sweep(const SweepPlan& plan, int jobs = 1, const ProgressFn& progress = {});

struct CellSummary {
  SchedulerKind scheduler = SchedulerKind::BalancedPandas;
  double load = 0.0;
  PerturbationPlan perturbation;
  std::size_t replications = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<double> ci_half_width;  // 95%, Student-t; absent with one replication
  bool any_unstable = false;
};

std::vector<CellSummary> aggregate(const SweepResult& result);

struct SensitivityRow {
  SchedulerKind scheduler = SchedulerKind::BalancedPandas;
  double load = 0.0;
  PerturbationPlan perturbation;
  double degradation = 0.0;
  std::optional<double> ci_half_width;
};

// Relative change of mean completion time against the epsilon = 0 cell with
// the same scheduler, load, mode and direction. Throws InputError when a
// baseline is missing.
std::vector<SensitivityRow> sensitivity(const SweepResult& result);

// Two-sided 95% Student-t critical value.
double t_critical_95(std::size_t degrees_of_freedom);

}  // namespace locsim
