#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "locsim/engine.hpp"
#include "locsim/harness.hpp"

namespace locsim {

// Single engine run (the `simulate` command).
struct SimulationSection {
  SchedulerKind scheduler = SchedulerKind::BalancedPandas;
  double horizon = 12000.0;
  double warmup = 0.2;
  std::uint64_t seed = 1;
  std::optional<std::size_t> instability_threshold;
  PerturbationPlan perturbation;
  // Explicit estimates; mutually exclusive with a nonzero perturbation.
  std::optional<EstimatedRates> estimated_rates;

  friend bool operator==(const SimulationSection&, const SimulationSection&) = default;
};

struct SweepSection {
  std::vector<SchedulerKind> schedulers{SchedulerKind::BalancedPandas, SchedulerKind::JsqMaxWeight,
                                        SchedulerKind::Priority, SchedulerKind::Fifo};
  std::vector<double> loads{0.5, 0.7, 0.8, 0.9, 0.95, 0.99};
  std::vector<double> epsilons{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  std::vector<PerturbationMode> modes{PerturbationMode::Independent};
  std::vector<Direction> directions{Direction::Lower, Direction::Higher};
  int replications = 20;
  double horizon = 12000.0;
  double warmup = 0.2;
  std::uint64_t seed = 1;
  std::optional<std::size_t> instability_threshold;

  friend bool operator==(const SweepSection&, const SweepSection&) = default;
};

struct OutputSection {
  std::optional<std::string> path;
  std::string format = "csv";

  friend bool operator==(const OutputSection&, const OutputSection&) = default;
};

struct ConfigFile {
  RackTopology topology{12, 4, 3};
  ServiceRates rates;
  std::optional<WorkloadSpec> workload;
  ServiceDistribution service;
  std::optional<SimulationSection> simulation;
  std::optional<SweepSection> sweep;
  OutputSection output;

  friend bool operator==(const ConfigFile&, const ConfigFile&) = default;
};

// Strict parse: unknown keys and invariant violations throw ConfigError.
ConfigFile parse_config(const nlohmann::json& doc);
ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ConfigFile& config);

// Single-run configuration; estimates drawn from the run's perturbation stream.
SimConfig simulation_config(const ConfigFile& config);

SweepPlan sweep_plan(const ConfigFile& config);

}  // namespace locsim
