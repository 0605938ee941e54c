#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "locsim/engine.hpp"
#include "locsim/harness.hpp"
#include "locsim/workload.hpp"

namespace locsim {

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

inline constexpr std::string_view kSweepCsvHeader =
    "scheduler,load,epsilon,direction,mode,replication,seed,mean_completion_time,tasks_completed,unstable";

void write_sweep_csv(std::ostream& out, const SweepResult& result);

// Throws ConfigError when the header or a row does not match the schema.
SweepResult read_sweep_csv(std::istream& in);

nlohmann::ordered_json report_json(const MetricsReport& report, SchedulerKind scheduler, const EstimatedRates& est);
void write_report_csv(std::ostream& out, const MetricsReport& report, SchedulerKind scheduler);

nlohmann::ordered_json summary_json(const SweepResult& result);

nlohmann::ordered_json capacity_json(const LoadFactor& lf, const ArrivalSpec& spec);
void write_capacity_text(std::ostream& out, const LoadFactor& lf);

// Servers whose witness load is within tolerance of rho (1-based).
std::vector<int> bottleneck_servers(const LoadFactor& lf, double tolerance = 1e-6);

inline constexpr std::string_view kTraceCsvHeader = "time,kind,server,task,queue_lengths";
void write_trace_row(std::ostream& out, const TraceRecord& record);

// One row of a figure-style long table.
struct FigureRow {
  std::string figure;  // F1, F2, F3, F4, F5, F6
  std::string panel;   // a-f for F3/F5, empty otherwise
  SchedulerKind series = SchedulerKind::BalancedPandas;
  double load = 0.0;
  double epsilon = 0.0;
  double x = 0.0;  // load for F1/F2/F3/F5, epsilon for F4/F6
  double y = 0.0;  // mean completion time, or sensitivity for F4/F6
  std::optional<double> y_ci95;
  bool unstable = false;
};

inline constexpr std::string_view kFigureCsvHeader = "figure,panel,series,load,epsilon,x,y,y_ci95,unstable";

// Pivots sweep rows into per-figure tables for perturbation `mode`.
std::vector<FigureRow> figure_tables(const SweepResult& result, PerturbationMode mode);
void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows);

}  // namespace locsim
