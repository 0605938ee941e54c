// locsim: command-line front end for the rack-aware load-balancing simulator.
//
//   locsim simulate --config run.json [--seed N] [--output PATH] [--format json|csv] [--trace PATH]
//   locsim sweep    --config sweep.json [--seed N] [--output PATH] [--format csv|json] [--summary PATH] [--jobs N]
//   locsim capacity --config run.json [--format json|csv]
//   locsim compare  results.csv... [--mode independent] [--output PATH]
//
// Exit codes: 0 ok, 2 config/validation error, 3 runtime error.
#include <stdexcept>
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "locsim/config.hpp"
#include "locsim/errors.hpp"
#include "locsim/output.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format;
  std::string trace;
  std::string summary;
  int jobs = 1;
  std::vector<std::string> inputs;
  std::string mode = "independent";
};

// Writes to the file when a path is given, otherwise stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw std::runtime_error("cannot open output file " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string pick_format(const Options& opt, const locsim::ConfigFile& cfg, const std::string& fallback) {
  if (!opt.format.empty()) return opt.format;
  return cfg.output.format.empty() ? fallback : cfg.output.format;
}

std::string pick_output(const Options& opt, const locsim::ConfigFile& cfg) {
  if (!opt.output.empty()) return opt.output;
  return cfg.output.path.value_or("");
}

int cmd_simulate(const Options& opt) {
  auto cfg = locsim::load_config(opt.config);
  if (!cfg.simulation) cfg.simulation = locsim::SimulationSection{};
  if (opt.seed) cfg.simulation->seed = *opt.seed;
  const locsim::SimConfig sim = locsim::simulation_config(cfg);

  locsim::RunHooks hooks;
  std::unique_ptr<std::ofstream> trace;
  if (!opt.trace.empty()) {
    trace = std::make_unique<std::ofstream>(opt.trace, std::ios::binary);
    if (!*trace) throw std::runtime_error("cannot open trace file " + opt.trace);
    *trace << locsim::kTraceCsvHeader << '\n';
    hooks.trace = [&trace](const locsim::TraceRecord& r) { locsim::write_trace_row(*trace, r); };
  }
  const auto report = locsim::run(sim, std::move(hooks));

  Sink sink(pick_output(opt, cfg));
  // Single-run reports default to JSON unless csv is asked for explicitly.
  const std::string format = opt.format.empty() ? "json" : opt.format;
  if (format == "csv") {
    locsim::write_report_csv(sink.stream(), report, sim.scheduler);
  } else {
    sink.stream() << locsim::report_json(report, sim.scheduler, sim.estimated).dump(2) << '\n';
  }
  return 0;
}

int cmd_sweep(const Options& opt) {
  auto cfg = locsim::load_config(opt.config);
  if (!cfg.sweep) throw locsim::ConfigError("config.sweep is required for the sweep command");
  if (opt.seed) cfg.sweep->seed = *opt.seed;
  const auto plan = locsim::sweep_plan(cfg);
  if (opt.jobs < 1) throw locsim::ConfigError("--jobs must be at least 1");

  const auto result = locsim::run_sweep(plan, opt.jobs, [](std::size_t done, std::size_t total) {
    if (done == total || done % 50 == 0) std::cerr << "sweep: " << done << "/" << total << " runs\n";
  });

  std::size_t failures = 0;
  for (const auto& row : result.rows) {
    if (row.error) {
      ++failures;
      std::cerr << "run failed (" << locsim::to_string(row.scheduler) << ", load " << row.load << ", seed "
                << row.seed << "): " << *row.error << '\n';
    }
  }

  const std::string output = pick_output(opt, cfg);
  {
    Sink sink(output);
    if (pick_format(opt, cfg, "csv") == "json") {
      sink.stream() << locsim::summary_json(result).dump(2) << '\n';
    } else {
      locsim::write_sweep_csv(sink.stream(), result);
    }
  }
  std::string summary = opt.summary;
  if (summary.empty() && !output.empty() && pick_format(opt, cfg, "csv") == "csv") summary = output + ".summary.json";
  if (!summary.empty()) {
    Sink sink(summary);
    sink.stream() << locsim::summary_json(result).dump(2) << '\n';
  }
  return failures == result.rows.size() ? kExitRuntime : 0;
}

int cmd_capacity(const Options& opt) {
  const auto cfg = locsim::load_config(opt.config);
  if (!cfg.workload) throw locsim::ConfigError("config.workload is required for the capacity command");
  locsim::ArrivalSpec spec;
  try {
    spec = cfg.workload->build(cfg.topology, cfg.rates);
  } catch (const locsim::InputError& e) {
    throw locsim::ConfigError(e.what());
  }
  if (spec.empty() || !(spec.total_rate() > 0.0)) throw locsim::ConfigError("workload is empty");
  const auto lf = locsim::load_factor(spec, cfg.rates, cfg.topology);
  Sink sink(opt.output);
  if (opt.format == "json") {
    sink.stream() << locsim::capacity_json(lf, spec).dump(2) << '\n';
  } else {
    locsim::write_capacity_text(sink.stream(), lf);
  }
  return 0;
}

int cmd_compare(const Options& opt) {
  if (opt.inputs.empty()) throw locsim::ConfigError("compare needs at least one sweep CSV");
  locsim::SweepResult merged;
  for (const auto& path : opt.inputs) {
    std::ifstream in(path);
    if (!in) throw locsim::ConfigError("cannot read " + path);
    auto part = locsim::read_sweep_csv(in);
    merged.rows.insert(merged.rows.end(), part.rows.begin(), part.rows.end());
  }
  if (merged.rows.empty()) throw locsim::ConfigError("sweep CSVs contain no rows");
  const auto tables = locsim::figure_tables(merged, locsim::parse_mode(opt.mode));
  Sink sink(opt.output);
  locsim::write_figure_csv(sink.stream(), tables);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rack-aware data-center load-balancing simulator"};
  app.require_subcommand(1);
  Options opt;

  auto* simulate = app.add_subcommand("simulate", "Run one simulation and print its metrics report");
  simulate->add_option("--config", opt.config, "Config file (JSON)")->required();
  simulate->add_option("--seed", opt.seed, "Override the run seed");
  simulate->add_option("--output", opt.output, "Write the report here instead of stdout");
  simulate->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--trace", opt.trace, "Write a per-event CSV trace");

  auto* sweep = app.add_subcommand("sweep", "Run a scheduler x load x perturbation x replication grid");
  sweep->add_option("--config", opt.config, "Config file (JSON)")->required();
  sweep->add_option("--seed", opt.seed, "Override the master seed");
  sweep->add_option("--output", opt.output, "Result path (CSV rows, or JSON summary with --format json)");
  sweep->add_option("--format", opt.format, "csv rows or json summary")->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--summary", opt.summary, "Aggregate JSON path");
  sweep->add_option("--jobs", opt.jobs, "Concurrent runs");

  auto* capacity = app.add_subcommand("capacity", "Solve the load-factor LP for the configured workload");
  capacity->add_option("--config", opt.config, "Config file (JSON)")->required();
  capacity->add_option("--output", opt.output, "Write here instead of stdout");
  capacity->add_option("--format", opt.format, "json, or csv-style text (default)")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* compare = app.add_subcommand("compare", "Pivot sweep CSVs into figure tables");
  compare->add_option("inputs", opt.inputs, "Sweep result CSVs");
  compare->add_option("--mode", opt.mode, "Perturbation mode to tabulate");
  compare->add_option("--output", opt.output, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(opt);
    if (*sweep) return cmd_sweep(opt);
    if (*capacity) return cmd_capacity(opt);
    if (*compare) return cmd_compare(opt);
  } catch (const locsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const locsim::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
