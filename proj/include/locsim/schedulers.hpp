#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locsim/rng.hpp"
#include "locsim/topology.hpp"
#include "locsim/workload.hpp"

namespace locsim {

// Rates as believed by the scheduler. Only positivity is required: a
// perturbation may invert the true ordering.
struct EstimatedRates {
  double alpha_hat = 1.0;
  double beta_hat = 0.9;
  double gamma_hat = 0.5;

  void validate() const;

  double for_locality(Locality l) const noexcept {
    switch (l) {
      case Locality::Local: return alpha_hat;
      case Locality::RackLocal: return beta_hat;
      case Locality::Remote: return gamma_hat;
    }
    return gamma_hat;
  }

  friend bool operator==(const EstimatedRates&, const EstimatedRates&) = default;
};

enum class SchedulerKind { BalancedPandas, JsqMaxWeight, Priority, Fifo };

std::string to_string(SchedulerKind kind);
SchedulerKind parse_scheduler(const std::string& name);

enum class QueueClass { Local, RackLocal, Remote, Global };

std::string to_string(QueueClass q);

using TaskId = std::uint32_t;

struct Task {
  TaskId id = 0;
  TaskType type;
  double arrival_time = 0.0;
  std::optional<double> start_time;
  std::optional<ServerId> serving_server;
};

// Queue lengths of one server under Balanced-PANDAS, in-service task included.
struct PandasCounts {
  int local = 0;
  int rack_local = 0;
  int remote = 0;

  int& operator[](Locality l) noexcept {
    return l == Locality::Local ? local : l == Locality::RackLocal ? rack_local : remote;
  }
  int total() const noexcept { return local + rack_local + remote; }
};

// Service rate actually experienced; never reads estimates.
double true_rate(const ServiceRates& rates, const TaskType& type, ServerId server, const RackTopology& topology);

double workload_of(const PandasCounts& counts, const EstimatedRates& est) noexcept;

// Relative tolerance under which two decision scores count as tied.
inline constexpr double kTieTolerance = 1e-12;

// Decision rules. Each returns the full tie set in increasing server order.

// argmin over all servers of W_m / rate_hat(locality(type, m)).
std::vector<ServerId> pandas_route_set(const RackTopology& topology, const TaskType& type,
                                       std::span<const double> workloads, const EstimatedRates& est);

// Shortest queue among the three local servers.
std::vector<ServerId> jsq_route_set(const TaskType& type, std::span<const int> lengths);

// argmax over servers n with waiting work of weight(relation(n, idle)) * length_n.
std::vector<ServerId> maxweight_schedule_set(const RackTopology& topology, ServerId idle,
                                             std::span<const int> lengths, std::span<const int> waiting,
                                             const EstimatedRates& est);

// Longest queue among servers with waiting work.
std::vector<ServerId> longest_queue_set(std::span<const int> lengths, std::span<const int> waiting);

ServerId pick_uniform(std::span<const ServerId> candidates, Rng& rng);

struct RouteDecision {
  ServerId server;  // value 0 for the global FIFO queue
  QueueClass queue;
};

struct Dispatch {
  TaskId task;
  ServerId source;  // home server of the queue the task came from; 0 for global
  QueueClass queue;
};

struct ServerView {
  int waiting = 0;
  bool busy = false;
  // Per-class counts including the in-service task (Balanced-PANDAS only;
  // single-queue schedulers report everything as local).
  PandasCounts classes;
  double workload = 0.0;
};

struct QueueSnapshot {
  std::vector<ServerView> servers;
  int global_waiting = 0;

  int total_waiting() const noexcept;
  int in_service() const noexcept;
  // Queue length per server as used by the decision rules.
  std::vector<int> lengths() const;
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;

  SchedulerKind kind() const noexcept { return kind_; }
  const RackTopology& topology() const noexcept { return topology_; }
  const EstimatedRates& estimates() const noexcept { return est_; }
  bool busy(ServerId m) const { return busy_.at(m.index()); }

  // Picks a destination for an arriving task and enqueues it there.
  virtual RouteDecision route(const Task& task, Rng& rng) = 0;

  // Picks the next task for an idle server and marks the server busy, or
  // returns nothing when no candidate queue holds a waiting task.
  virtual std::optional<Dispatch> schedule(ServerId idle, Rng& rng) = 0;

  // Service at `server` finished.
  virtual void release(ServerId server);

  virtual QueueSnapshot snapshot() const = 0;

 protected:
  Scheduler(SchedulerKind kind, RackTopology topology, EstimatedRates est);

  void require_idle(ServerId m) const;

  SchedulerKind kind_;
  RackTopology topology_;
  EstimatedRates est_;
  std::vector<bool> busy_;
};

std::unique_ptr<Scheduler> make_scheduler(SchedulerKind kind, const RackTopology& topology,
                                          const EstimatedRates& est);

}  // namespace locsim
