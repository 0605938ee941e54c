#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "locsim/rng.hpp"
#include "locsim/schedulers.hpp"
#include "locsim/topology.hpp"
#include "locsim/workload.hpp"

namespace locsim {

struct SimConfig {
  RackTopology topology{12, 4, 3};
  ServiceRates true_rates;
  EstimatedRates estimated;
  SchedulerKind scheduler = SchedulerKind::BalancedPandas;
  ArrivalSpec arrivals;
  ServiceDistribution service;
  double horizon = 12000.0;
  double warmup_fraction = 0.2;
  std::uint64_t seed = 1;
  // Tasks in system at the horizon above which a run is flagged unstable.
  // Defaults to max(10^4, 100 * num_servers).
  std::optional<std::size_t> instability_threshold;

  void validate() const;
  std::size_t effective_threshold() const;
};

struct MetricsReport {
  std::uint64_t seed = 0;
  std::size_t tasks_arrived = 0;
  std::size_t tasks_completed = 0;
  // Completed tasks that arrived after the warmup cutoff; the statistics below use only these.
  std::size_t measured_tasks = 0;
  double mean_completion_time = 0.0;
  double completion_time_stddev = 0.0;
  // Indexed by Locality: tasks started locally, rack-locally, remotely.
  std::array<std::size_t, 3> served_by_locality{};
  double mean_tasks_in_system = 0.0;
  std::size_t final_in_system = 0;
  bool unstable = false;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

enum class EventKind { Arrival, Start, Departure };

std::string to_string(EventKind kind);

struct TraceRecord {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  ServerId server;  // routed server on Arrival (0 for the global queue)
  TaskId task = 0;
  std::vector<int> queue_lengths;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Test and debugging hooks. Scripted arrivals replace Poisson sampling and a
// service override replaces the configured distribution.
struct RunHooks {
  std::optional<std::vector<Arrival>> arrivals;
  std::function<double(const Task& task, ServerId server, double mean)> service_time;
  std::function<void(const TraceRecord&)> trace;
};

class Simulation {
 public:
  explicit Simulation(SimConfig config, RunHooks hooks = {});

  // Processes the next event at or before the horizon; false once none remain.
  bool step();

  MetricsReport run();
  MetricsReport report() const;

  QueueSnapshot snapshot() const { return scheduler_->snapshot(); }
  double now() const noexcept { return now_; }
  std::size_t arrived() const noexcept { return tasks_.size(); }
  std::size_t completed() const noexcept { return completed_; }
  const std::vector<Task>& tasks() const noexcept { return tasks_; }

 private:
  struct Departure {
    double time;
    std::uint64_t sequence;
    ServerId server;
  };
  struct Later {
    bool operator()(const Departure& a, const Departure& b) const noexcept {
      return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
    }
  };

  void advance_clock(double t);
  void on_arrival(const Arrival& a);
  void on_departure(const Departure& d);
  bool try_start(ServerId server);
  void emit(EventKind kind, ServerId server, TaskId task);

  SimConfig config_;
  RunHooks hooks_;
  std::unique_ptr<Scheduler> scheduler_;
  Rng service_rng_;
  Rng tie_rng_;

  std::vector<Arrival> arrivals_;
  std::size_t next_arrival_ = 0;
  std::priority_queue<Departure, std::vector<Departure>, Later> departures_;
  std::uint64_t sequence_ = 0;

  std::vector<Task> tasks_;
  std::vector<std::optional<TaskId>> running_;
  std::vector<ServerId> idle_scratch_;
  double now_ = 0.0;
  double warmup_cutoff_ = 0.0;
  std::size_t completed_ = 0;

  // Welford accumulators over measured completion times.
  std::size_t measured_ = 0;
  double ct_mean_ = 0.0;
  double ct_m2_ = 0.0;
  std::array<std::size_t, 3> served_{};
  double in_system_area_ = 0.0;
};

MetricsReport run(const SimConfig& config, RunHooks hooks = {});

}  // namespace locsim
