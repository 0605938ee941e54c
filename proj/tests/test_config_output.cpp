#include <doctest.h>

#include <sstream>

#include "locsim/config.hpp"
#include "locsim/errors.hpp"
#include "locsim/output.hpp"

using namespace locsim;

namespace {

const char* kFull = R"({
  "topology": {"num_servers": 6, "rack_size": 3, "locality_levels": 3},
  "rates": {"alpha": 1.0, "beta": 0.8, "gamma": 0.4},
  "workload": {"generator": "hot_rack", "target_rho": 0.7, "hot_fraction": 0.3},
  "service_distribution": {"kind": "pareto", "shape": 3.0},
  "simulation": {"scheduler": "jsq_maxweight", "horizon": 500, "warmup": 0.1, "seed": 9,
                 "instability_threshold": 777,
                 "perturbation": {"epsilon": 0.2, "direction": "higher", "mode": "skew_slow_tiers"}},
  "sweep": {"schedulers": ["balanced_pandas", "fifo"], "loads": [0.5, 0.9], "epsilons": [0, 0.1],
            "modes": ["co_scaled", "independent"], "directions": ["lower"], "replications": 2,
            "horizon": 300, "warmup": 0.25, "seed": 5},
  "output": {"path": "out.csv", "format": "csv"}
})";

SweepRow make_row(SchedulerKind s, double load, double eps, Direction dir, int rep, double ct) {
  SweepRow r;
  r.scheduler = s;
  r.load = load;
  r.perturbation = {eps, dir, PerturbationMode::Independent};
  r.replication = rep;
  r.seed = 1000 + static_cast<std::uint64_t>(rep);
  r.mean_completion_time = ct;
  r.tasks_completed = 50;
  return r;
}

}  // namespace

TEST_CASE("config parses every section") {
  const auto c = parse_config_text(kFull);
  CHECK(c.topology == RackTopology(6, 3, 3));
  CHECK(c.rates == ServiceRates{1.0, 0.8, 0.4});
  REQUIRE(c.workload.has_value());
  CHECK(c.workload->generator == GeneratorKind::HotRack);
  CHECK(c.service.kind == ServiceKind::Pareto);
  CHECK(c.service.pareto_shape == 3.0);
  REQUIRE(c.simulation.has_value());
  CHECK(c.simulation->scheduler == SchedulerKind::JsqMaxWeight);
  CHECK(c.simulation->instability_threshold == std::optional<std::size_t>(777));
  CHECK(c.simulation->perturbation.mode == PerturbationMode::SkewSlowTiers);
  REQUIRE(c.sweep.has_value());
  CHECK(c.sweep->modes.size() == 2);

  const auto sim = simulation_config(c);
  CHECK(sim.seed == 9);
  CHECK(sim.estimated.alpha_hat == 1.0);
  CHECK(sim.estimated.beta_hat == doctest::Approx(0.96));

  const auto plan = sweep_plan(c);
  CHECK(plan.perturbations.size() == 4);  // 2 epsilons x 2 modes x 1 direction
  CHECK(plan.replications == 2);
  CHECK(plan.base.horizon == 300.0);
  CHECK(plan.master_seed == 5);
}

TEST_CASE("config round-trips through json") {
  const auto c = parse_config_text(kFull);
  CHECK(parse_config(to_json(c)) == c);
  const auto minimal = parse_config_text(R"({"topology": {"num_servers": 3, "rack_size": 3}, "rates": {"alpha": 1, "beta": 0.9, "gamma": 0.5}})");
  CHECK(parse_config(to_json(minimal)) == minimal);
  auto explicit_cfg = parse_config_text(R"({
    "topology": {"num_servers": 6, "rack_size": 3}, "rates": {"alpha": 1, "beta": 0.9, "gamma": 0.5},
    "workload": {"generator": "explicit", "tasks": [{"type": [1, 2, 3], "rate": 0.5}, {"type": [2, 4, 6], "rate": 0.25}]}
  })");
  CHECK(parse_config(to_json(explicit_cfg)) == explicit_cfg);
  CHECK(explicit_cfg.workload->explicit_rates.entries().size() == 2);
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_config_text(R"({"topology": {"num_servers": 12, "rack_size": 4, "colour": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"extra": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"rates": {"alpha": 0.5, "beta": 0.9, "gamma": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"topology": {"num_servers": 10, "rack_size": 4}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"workload": {"generator": "zipf", "target_rho": 0.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"simulation": {"scheduler": "lottery"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"simulation": {"warmup": 0.7}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"output": {"format": "xml"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sweep": {"epsilons": [0.9]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"simulation": {"perturbation": {"epsilon": 0.1},
                                        "estimated_rates": {"alpha": 1, "beta": 1, "gamma": 1}}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/locsim.json"), ConfigError);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("sweep csv golden output") {
  SweepResult r;
  r.rows.push_back(make_row(SchedulerKind::BalancedPandas, 0.9, 0.0, Direction::Lower, 0, 3.25));
  auto u = make_row(SchedulerKind::Fifo, 0.95, 0.05, Direction::Higher, 1, 1000.5);
  u.unstable = true;
  r.rows.push_back(u);
  std::ostringstream out;
  write_sweep_csv(out, r);
  CHECK(out.str() ==
        "scheduler,load,epsilon,direction,mode,replication,seed,mean_completion_time,tasks_completed,unstable\n"
        "balanced_pandas,0.9,0,lower,independent,0,1000,3.25,50,false\n"
        "fifo,0.95,0.05,higher,independent,1,1001,1000.5,50,true\n");

  std::istringstream in(out.str());
  CHECK(read_sweep_csv(in) == r);
}

TEST_CASE("sweep csv reader rejects schema drift") {
  std::istringstream wrong_header("scheduler,load\nbalanced_pandas,0.9\n");
  CHECK_THROWS_AS(read_sweep_csv(wrong_header), ConfigError);
  std::istringstream short_row(std::string(kSweepCsvHeader) + "\nbalanced_pandas,0.9,0\n");
  CHECK_THROWS_AS(read_sweep_csv(short_row), ConfigError);
  std::istringstream bad_value(std::string(kSweepCsvHeader) +
                               "\nbalanced_pandas,abc,0,lower,independent,0,1,2,3,false\n");
  CHECK_THROWS_AS(read_sweep_csv(bad_value), ConfigError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_sweep_csv(empty), ConfigError);
}

TEST_CASE("capacity text and bottlenecks") {
  const RackTopology topo(3, 3);
  const ArrivalSpec spec({{TaskType(1, 2, 3), 4.0}});
  const auto lf = load_factor(spec, ServiceRates{}, topo);
  std::ostringstream out;
  write_capacity_text(out, lf);
  const auto text = out.str();
  CHECK(text.rfind("rho 1.333", 0) == 0);
  CHECK(text.find("feasible no") != std::string::npos);
  CHECK(bottleneck_servers(lf) == std::vector<int>{1, 2, 3});
  const auto j = capacity_json(lf, spec);
  CHECK(j["rho"].get<double>() == doctest::Approx(4.0 / 3.0));
  CHECK(j["feasible"].get<bool>() == false);
}

TEST_CASE("trace rows") {
  std::ostringstream out;
  write_trace_row(out, {1.5, EventKind::Start, ServerId{2}, 7, {0, 1, 3}});
  CHECK(out.str() == "1.5,start,2,7,0;1;3\n");
}

TEST_CASE("report json carries the run fields") {
  MetricsReport rep;
  rep.seed = 7;
  rep.tasks_completed = 3;
  rep.mean_completion_time = 1.25;
  const auto j = report_json(rep, SchedulerKind::Priority, EstimatedRates{});
  CHECK(j["seed"].get<std::uint64_t>() == 7);
  CHECK(j["scheduler"].get<std::string>() == "priority");
  CHECK(j["mean_completion_time"].get<double>() == 1.25);
}

TEST_CASE("figure tables pivot the sweep") {
  SweepResult r;
  for (auto s : {SchedulerKind::BalancedPandas, SchedulerKind::JsqMaxWeight, SchedulerKind::Fifo})
    for (double load : {0.5, 0.9, 0.95})
      for (double eps : {0.0, 0.1})
        for (auto dir : {Direction::Lower, Direction::Higher})
          for (int rep = 0; rep < 2; ++rep)
            r.rows.push_back(make_row(s, load, eps, dir, rep, 2.0 + load + eps + 0.1 * rep));
  const auto rows = figure_tables(r, PerturbationMode::Independent);
  int f1 = 0, f2 = 0, f3 = 0, f4 = 0, f5 = 0, f6 = 0;
  for (const auto& row : rows) {
    if (row.figure == "F1") ++f1;
    if (row.figure == "F2") {
      ++f2;
      CHECK(row.load >= 0.9);
      CHECK(row.series != SchedulerKind::Fifo);
    }
    if (row.figure == "F3") {
      ++f3;
      CHECK(row.panel == "a");
    }
    if (row.figure == "F4") {
      ++f4;
      CHECK(row.x == row.epsilon);
      // y is a relative degradation, not a time
      CHECK(row.y == doctest::Approx(0.1 / (2.05 + row.load)));
    }
    if (row.figure == "F5") ++f5;
    if (row.figure == "F6") ++f6;
  }
  CHECK(f1 == 9);
  CHECK(f2 == 4);
  CHECK(f3 == 9);
  CHECK(f4 == 6);
  CHECK(f5 == 9);
  CHECK(f6 == 6);

  std::ostringstream out;
  write_figure_csv(out, rows);
  CHECK(out.str().rfind(std::string(kFigureCsvHeader) + "\n", 0) == 0);

  CHECK(figure_tables(r, PerturbationMode::CoScaled).empty());
  CHECK_THROWS_AS(figure_tables(SweepResult{}, PerturbationMode::Independent), ConfigError);
}

TEST_CASE("summary json has cells and sensitivity") {
  SweepResult r;
  for (int rep = 0; rep < 3; ++rep) {
    r.rows.push_back(make_row(SchedulerKind::BalancedPandas, 0.9, 0.0, Direction::Lower, rep, 3.0 + rep));
    r.rows.push_back(make_row(SchedulerKind::BalancedPandas, 0.9, 0.1, Direction::Lower, rep, 4.0 + rep));
  }
  const auto j = summary_json(r);
  CHECK(j["cells"].size() == 2);
  CHECK(j["sensitivity"].size() == 1);
  SweepResult orphan{{make_row(SchedulerKind::BalancedPandas, 0.9, 0.1, Direction::Lower, 0, 4.0)}};
  CHECK(summary_json(orphan)["sensitivity"].is_null());
}
