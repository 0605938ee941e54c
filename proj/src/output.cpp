#include "locsim/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "locsim/errors.hpp"

namespace locsim {

using nlohmann::ordered_json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << to_string(r.scheduler) << ',' << format_double(r.load) << ',' << format_double(r.perturbation.epsilon) << ','
        << to_string(r.perturbation.direction) << ',' << to_string(r.perturbation.mode) << ',' << r.replication << ','
        << r.seed << ',' << format_double(r.mean_completion_time) << ',' << r.tasks_completed << ','
        << (r.unstable ? "true" : "false") << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& s, std::size_t line_no) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    if (s == "nan") return std::nan("");
  }
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("sweep CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return value;
}

}  // namespace

SweepResult read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("sweep CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) throw ConfigError("sweep CSV header does not match schema");
  SweepResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw ConfigError("sweep CSV line " + std::to_string(line_no) + ": expected 10 fields");
    SweepRow r;
    r.scheduler = parse_scheduler(f[0]);
    r.load = parse_number<double>(f[1], line_no);
    r.perturbation.epsilon = parse_number<double>(f[2], line_no);
    r.perturbation.direction = parse_direction(f[3]);
    r.perturbation.mode = parse_mode(f[4]);
    r.replication = parse_number<int>(f[5], line_no);
    r.seed = parse_number<std::uint64_t>(f[6], line_no);
    r.mean_completion_time = parse_number<double>(f[7], line_no);
    r.tasks_completed = parse_number<std::size_t>(f[8], line_no);
    if (f[9] != "true" && f[9] != "false") throw ConfigError("sweep CSV line " + std::to_string(line_no) + ": bad flag");
    r.unstable = f[9] == "true";
    if (std::isnan(r.mean_completion_time)) r.error = "run failed";
    result.rows.push_back(r);
  }
  return result;
}

ordered_json report_json(const MetricsReport& r, SchedulerKind scheduler, const EstimatedRates& est) {
  ordered_json j;
  j["scheduler"] = to_string(scheduler);
  j["seed"] = r.seed;
  j["estimated_rates"] = {{"alpha", est.alpha_hat}, {"beta", est.beta_hat}, {"gamma", est.gamma_hat}};
  j["tasks_arrived"] = r.tasks_arrived;
  j["tasks_completed"] = r.tasks_completed;
  j["measured_tasks"] = r.measured_tasks;
  j["mean_completion_time"] = r.mean_completion_time;
  j["completion_time_stddev"] = r.completion_time_stddev;
  j["served_local"] = r.served_by_locality[0];
  j["served_rack_local"] = r.served_by_locality[1];
  j["served_remote"] = r.served_by_locality[2];
  j["mean_tasks_in_system"] = r.mean_tasks_in_system;
  j["final_in_system"] = r.final_in_system;
  j["unstable"] = r.unstable;
  return j;
}

void write_report_csv(std::ostream& out, const MetricsReport& r, SchedulerKind scheduler) {
  out << "scheduler,seed,tasks_arrived,tasks_completed,measured_tasks,mean_completion_time,completion_time_stddev,"
         "served_local,served_rack_local,served_remote,mean_tasks_in_system,final_in_system,unstable\n";
  out << to_string(scheduler) << ',' << r.seed << ',' << r.tasks_arrived << ',' << r.tasks_completed << ','
      << r.measured_tasks << ',' << format_double(r.mean_completion_time) << ','
      << format_double(r.completion_time_stddev) << ',' << r.served_by_locality[0] << ',' << r.served_by_locality[1]
      << ',' << r.served_by_locality[2] << ',' << format_double(r.mean_tasks_in_system) << ',' << r.final_in_system
      << ',' << (r.unstable ? "true" : "false") << '\n';
}

namespace {

ordered_json plan_json(const PerturbationPlan& p) {
  return {{"epsilon", p.epsilon}, {"direction", to_string(p.direction)}, {"mode", to_string(p.mode)}};
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

ordered_json summary_json(const SweepResult& result) {
  ordered_json cells = ordered_json::array();
  for (const auto& c : aggregate(result)) {
    ordered_json j;
    j["scheduler"] = to_string(c.scheduler);
    j["load"] = c.load;
    j["perturbation"] = plan_json(c.perturbation);
    j["replications"] = c.replications;
    j["failures"] = c.failures;
    j["mean"] = std::isnan(c.mean) ? ordered_json(nullptr) : ordered_json(c.mean);
    j["stddev"] = c.stddev;
    j["ci95_half_width"] = optional_json(c.ci_half_width);
    j["any_unstable"] = c.any_unstable;
    cells.push_back(j);
  }
  ordered_json sens = ordered_json::array();
  bool have_baselines = true;
  try {
    for (const auto& s : sensitivity(result)) {
      ordered_json j;
      j["scheduler"] = to_string(s.scheduler);
      j["load"] = s.load;
      j["perturbation"] = plan_json(s.perturbation);
      j["degradation"] = s.degradation;
      j["ci95_half_width"] = optional_json(s.ci_half_width);
      sens.push_back(j);
    }
  } catch (const InputError&) {
    have_baselines = false;
  }
  ordered_json out;
  out["cells"] = cells;
  out["sensitivity"] = have_baselines ? sens : ordered_json(nullptr);
  return out;
}

std::vector<int> bottleneck_servers(const LoadFactor& lf, double tolerance) {
  std::vector<int> out;
  for (std::size_t m = 0; m < lf.server_loads.size(); ++m) {
    if (lf.server_loads[m] >= lf.rho - tolerance) out.push_back(static_cast<int>(m) + 1);
  }
  return out;
}

ordered_json capacity_json(const LoadFactor& lf, const ArrivalSpec& spec) {
  ordered_json j;
  j["rho"] = lf.rho;
  j["feasible"] = lf.rho < 1.0;
  j["total_rate"] = spec.total_rate();
  j["server_loads"] = lf.server_loads;
  j["bottleneck_servers"] = bottleneck_servers(lf);
  ordered_json witness = ordered_json::array();
  for (std::size_t i = 0; i < spec.entries().size(); ++i) {
    const auto& t = spec.entries()[i].type;
    witness.push_back({{"type", {t[0].value, t[1].value, t[2].value}}, {"split", lf.split[i]}});
  }
  j["witness"] = witness;
  return j;
}

void write_capacity_text(std::ostream& out, const LoadFactor& lf) {
  out << "rho " << format_double(lf.rho) << '\n';
  out << "feasible " << (lf.rho < 1.0 ? "yes" : "no") << '\n';
  out << "server,load\n";
  for (std::size_t m = 0; m < lf.server_loads.size(); ++m) {
    out << m + 1 << ',' << format_double(lf.server_loads[m]) << '\n';
  }
  out << "bottleneck";
  for (int m : bottleneck_servers(lf)) out << ' ' << m;
  out << '\n';
}

void write_trace_row(std::ostream& out, const TraceRecord& r) {
  out << format_double(r.time) << ',' << to_string(r.kind) << ',' << r.server.value << ',' << r.task << ',';
  for (std::size_t i = 0; i < r.queue_lengths.size(); ++i) {
    if (i > 0) out << ';';
    out << r.queue_lengths[i];
  }
  out << '\n';
}

namespace {

bool is_headline(SchedulerKind s) { return s == SchedulerKind::BalancedPandas || s == SchedulerKind::JsqMaxWeight; }

std::optional<Direction> baseline_direction(const std::vector<CellSummary>& cells, PerturbationMode mode) {
  std::optional<Direction> found;
  for (const auto& c : cells) {
    if (c.perturbation.epsilon != 0.0 || c.perturbation.mode != mode) continue;
    if (c.perturbation.direction == Direction::Lower) return Direction::Lower;
    found = c.perturbation.direction;
  }
  return found;
}

}  // namespace

std::vector<FigureRow> figure_tables(const SweepResult& result, PerturbationMode mode) {
  if (result.rows.empty()) throw ConfigError("no sweep rows to compare");
  const auto cells = aggregate(result);
  std::vector<FigureRow> out;

  auto cell_row = [](const CellSummary& c, std::string figure, std::string panel) {
    FigureRow r;
    r.figure = std::move(figure);
    r.panel = std::move(panel);
    r.series = c.scheduler;
    r.load = c.load;
    r.epsilon = c.perturbation.epsilon;
    r.x = c.load;
    r.y = c.mean;
    r.y_ci95 = c.ci_half_width;
    r.unstable = c.any_unstable;
    return r;
  };

  if (const auto dir = baseline_direction(cells, mode)) {
    for (const auto& c : cells) {
      if (c.perturbation.epsilon != 0.0 || c.perturbation.mode != mode || c.perturbation.direction != *dir) continue;
      out.push_back(cell_row(c, "F1", ""));
    }
    for (const auto& c : cells) {
      if (c.perturbation.epsilon != 0.0 || c.perturbation.mode != mode || c.perturbation.direction != *dir) continue;
      if (is_headline(c.scheduler) && c.load >= 0.9) out.push_back(cell_row(c, "F2", ""));
    }
  }

  std::vector<SensitivityRow> sens;
  try {
    sens = sensitivity(result);
  } catch (const InputError&) {
  }
  std::map<std::tuple<int, double, double, int>, bool> unstable;
  for (const auto& c : cells) {
    if (c.perturbation.mode != mode) continue;
    unstable[{static_cast<int>(c.scheduler), c.load, c.perturbation.epsilon, static_cast<int>(c.perturbation.direction)}] =
        c.any_unstable;
  }

  for (auto [dir, panels_fig, sens_fig] :
       {std::tuple{Direction::Lower, "F3", "F4"}, std::tuple{Direction::Higher, "F5", "F6"}}) {
    std::set<double> eps;
    for (const auto& c : cells) {
      if (c.perturbation.mode == mode && c.perturbation.direction == dir && c.perturbation.epsilon > 0.0) {
        eps.insert(c.perturbation.epsilon);
      }
    }
    char panel = 'a';
    for (double e : eps) {
      for (const auto& c : cells) {
        if (c.perturbation.mode == mode && c.perturbation.direction == dir && c.perturbation.epsilon == e) {
          out.push_back(cell_row(c, panels_fig, std::string(1, panel)));
        }
      }
      ++panel;
    }
    for (const auto& s : sens) {
      if (s.perturbation.mode != mode || s.perturbation.direction != dir || !is_headline(s.scheduler)) continue;
      FigureRow r;
      r.figure = sens_fig;
      r.series = s.scheduler;
      r.load = s.load;
      r.epsilon = s.perturbation.epsilon;
      r.x = s.perturbation.epsilon;
      r.y = s.degradation;
      r.y_ci95 = s.ci_half_width;
      r.unstable = unstable[{static_cast<int>(s.scheduler), s.load, s.perturbation.epsilon, static_cast<int>(dir)}];
      out.push_back(r);
    }
  }
  return out;
}

void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows) {
  out << kFigureCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.figure << ',' << r.panel << ',' << to_string(r.series) << ',' << format_double(r.load) << ','
        << format_double(r.epsilon) << ',' << format_double(r.x) << ',' << format_double(r.y) << ','
        << (r.y_ci95 ? format_double(*r.y_ci95) : std::string()) << ',' << (r.unstable ? "true" : "false") << '\n';
  }
}

}  // namespace locsim
