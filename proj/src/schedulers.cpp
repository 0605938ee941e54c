#include "locsim/schedulers.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "locsim/errors.hpp"

namespace locsim {

void EstimatedRates::validate() const {
  for (double r : {alpha_hat, beta_hat, gamma_hat}) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("estimated rates must be positive and finite");
  }
}

std::string to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::BalancedPandas: return "balanced_pandas";
    case SchedulerKind::JsqMaxWeight: return "jsq_maxweight";
    case SchedulerKind::Priority: return "priority";
    case SchedulerKind::Fifo: return "fifo";
  }
  return "?";
}

SchedulerKind parse_scheduler(const std::string& name) {
  for (auto k : {SchedulerKind::BalancedPandas, SchedulerKind::JsqMaxWeight, SchedulerKind::Priority,
                 SchedulerKind::Fifo}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown scheduler '" + name + "'");
}

std::string to_string(QueueClass q) {
  switch (q) {
    case QueueClass::Local: return "local";
    case QueueClass::RackLocal: return "rack_local";
    case QueueClass::Remote: return "remote";
    case QueueClass::Global: return "global";
  }
  return "?";
}

double true_rate(const ServiceRates& rates, const TaskType& type, ServerId server, const RackTopology& topology) {
  return rates.for_locality(topology.locality(type, server));
}

double workload_of(const PandasCounts& c, const EstimatedRates& est) noexcept {
  return c.local / est.alpha_hat + c.rack_local / est.beta_hat + c.remote / est.gamma_hat;
}

namespace {

QueueClass to_queue_class(Locality l) noexcept {
  switch (l) {
    case Locality::Local: return QueueClass::Local;
    case Locality::RackLocal: return QueueClass::RackLocal;
    case Locality::Remote: return QueueClass::Remote;
  }
  return QueueClass::Remote;
}

// Tie set of the minimum (or maximum) score seen so far.
class ExtremeSet {
 public:
  explicit ExtremeSet(bool minimize) : minimize_(minimize) {}

  void offer(double score, ServerId m) {
    if (set_.empty()) {
      best_ = score;
      set_.push_back(m);
      return;
    }
    const double tol = kTieTolerance * std::max({std::abs(score), std::abs(best_), 1e-300});
    const double diff = minimize_ ? best_ - score : score - best_;
    if (diff > tol) {
      best_ = score;
      set_.clear();
      set_.push_back(m);
    } else if (diff >= -tol) {
      set_.push_back(m);
    }
  }

  std::vector<ServerId> take() { return std::move(set_); }

 private:
  bool minimize_;
  double best_ = 0.0;
  std::vector<ServerId> set_;
};

}  // namespace

std::vector<ServerId> pandas_route_set(const RackTopology& topology, const TaskType& type,
                                       std::span<const double> workloads, const EstimatedRates& est) {
  if (workloads.size() != static_cast<std::size_t>(topology.num_servers())) {
    throw InputError("workload vector does not match topology");
  }
  ExtremeSet best(true);
  for (std::size_t i = 0; i < workloads.size(); ++i) {
    const ServerId m = ServerId::from_index(i);
    best.offer(workloads[i] / est.for_locality(topology.locality(type, m)), m);
  }
  return best.take();
}

std::vector<ServerId> jsq_route_set(const TaskType& type, std::span<const int> lengths) {
  ExtremeSet best(true);
  for (ServerId m : type.locals()) {
    if (m.index() >= lengths.size()) throw InputError("task type outside queue vector");
    best.offer(lengths[m.index()], m);
  }
  return best.take();
}

std::vector<ServerId> maxweight_schedule_set(const RackTopology& topology, ServerId idle,
                                             std::span<const int> lengths, std::span<const int> waiting,
                                             const EstimatedRates& est) {
  ExtremeSet best(false);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (waiting[i] <= 0) continue;
    const ServerId n = ServerId::from_index(i);
    best.offer(est.for_locality(topology.relation(n, idle)) * lengths[i], n);
  }
  return best.take();
}

std::vector<ServerId> longest_queue_set(std::span<const int> lengths, std::span<const int> waiting) {
  ExtremeSet best(false);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (waiting[i] > 0) best.offer(lengths[i], ServerId::from_index(i));
  }
  return best.take();
}

ServerId pick_uniform(std::span<const ServerId> candidates, Rng& rng) {
  if (candidates.empty()) throw InternalError("tie-break over an empty candidate set");
  if (candidates.size() == 1) return candidates.front();
  return candidates[rng.below(candidates.size())];
}

int QueueSnapshot::total_waiting() const noexcept {
  int n = global_waiting;
  for (const auto& s : servers) n += s.waiting;
  return n;
}

int QueueSnapshot::in_service() const noexcept {
  int n = 0;
  for (const auto& s : servers) n += s.busy ? 1 : 0;
  return n;
}

std::vector<int> QueueSnapshot::lengths() const {
  std::vector<int> out;
  out.reserve(servers.size());
  for (const auto& s : servers) out.push_back(s.waiting + (s.busy ? 1 : 0));
  return out;
}

Scheduler::Scheduler(SchedulerKind kind, RackTopology topology, EstimatedRates est)
    : kind_(kind), topology_(topology), est_(est), busy_(static_cast<std::size_t>(topology.num_servers()), false) {
  est_.validate();
}

void Scheduler::require_idle(ServerId m) const {
  topology_.check(m);
  if (busy_[m.index()]) throw InternalError("schedule called on busy server " + std::to_string(m.value));
}

void Scheduler::release(ServerId server) {
  topology_.check(server);
  if (!busy_[server.index()]) throw InternalError("release on idle server " + std::to_string(server.value));
  busy_[server.index()] = false;
}

namespace {

// Three queues per server; routes on normalized weighted workload and
// serves local, then rack-local, then remote.
class PandasScheduler final : public Scheduler {
 public:
  PandasScheduler(const RackTopology& topology, const EstimatedRates& est)
      : Scheduler(SchedulerKind::BalancedPandas, topology, est),
        queues_(static_cast<std::size_t>(topology.num_servers())),
        counts_(queues_.size()),
        in_service_(queues_.size()),
        workloads_(queues_.size(), 0.0) {}

  RouteDecision route(const Task& task, Rng& rng) override {
    for (std::size_t i = 0; i < counts_.size(); ++i) workloads_[i] = workload_of(counts_[i], est_);
    const auto set = pandas_route_set(topology_, task.type, workloads_, est_);
    const ServerId m = pick_uniform(set, rng);
    const Locality l = topology_.locality(task.type, m);
    queues_[m.index()][static_cast<int>(l)].push_back(task.id);
    counts_[m.index()][l] += 1;
    return {m, to_queue_class(l)};
  }

  std::optional<Dispatch> schedule(ServerId idle, Rng&) override {
    require_idle(idle);
    auto& qs = queues_[idle.index()];
    for (Locality l : {Locality::Local, Locality::RackLocal, Locality::Remote}) {
      auto& q = qs[static_cast<int>(l)];
      if (q.empty()) continue;
      const TaskId id = q.front();
      q.pop_front();
      busy_[idle.index()] = true;
      in_service_[idle.index()] = l;
      return Dispatch{id, idle, to_queue_class(l)};
    }
    return std::nullopt;
  }

  void release(ServerId server) override {
    Scheduler::release(server);
    auto& l = in_service_[server.index()];
    counts_[server.index()][*l] -= 1;
    l.reset();
  }

  QueueSnapshot snapshot() const override {
    QueueSnapshot s;
    for (std::size_t i = 0; i < queues_.size(); ++i) {
      ServerView v;
      for (const auto& q : queues_[i]) v.waiting += static_cast<int>(q.size());
      v.busy = busy_[i];
      v.classes = counts_[i];
      v.workload = workload_of(counts_[i], est_);
      s.servers.push_back(v);
    }
    return s;
  }

 private:
  std::vector<std::array<std::deque<TaskId>, 3>> queues_;
  std::vector<PandasCounts> counts_;
  std::vector<std::optional<Locality>> in_service_;
  std::vector<double> workloads_;
};

// One queue per server holding only tasks local to it; JSQ routing over the
// three local servers. Idle servers use MaxWeight or Priority stealing.
class SingleQueueScheduler final : public Scheduler {
 public:
  SingleQueueScheduler(SchedulerKind kind, const RackTopology& topology, const EstimatedRates& est)
      : Scheduler(kind, topology, est),
        queues_(static_cast<std::size_t>(topology.num_servers())),
        lengths_(queues_.size(), 0),
        waiting_(queues_.size(), 0) {}

  RouteDecision route(const Task& task, Rng& rng) override {
    const auto set = jsq_route_set(task.type, lengths_);
    const ServerId m = pick_uniform(set, rng);
    queues_[m.index()].push_back(task.id);
    lengths_[m.index()] += 1;
    waiting_[m.index()] += 1;
    return {m, QueueClass::Local};
  }

  std::optional<Dispatch> schedule(ServerId idle, Rng& rng) override {
    require_idle(idle);
    std::optional<ServerId> source;
    if (kind_ == SchedulerKind::Priority && waiting_[idle.index()] > 0) {
      source = idle;
    } else {
      const auto set = kind_ == SchedulerKind::Priority
                           ? longest_queue_set(lengths_, waiting_)
                           : maxweight_schedule_set(topology_, idle, lengths_, waiting_, est_);
      if (!set.empty()) source = pick_uniform(set, rng);
    }
    if (!source) return std::nullopt;

    auto& q = queues_[source->index()];
    const TaskId id = q.front();
    q.pop_front();
    lengths_[source->index()] -= 1;
    waiting_[source->index()] -= 1;
    // The in-service task counts toward the server doing the work.
    lengths_[idle.index()] += 1;
    busy_[idle.index()] = true;
    return Dispatch{id, *source, to_queue_class(topology_.relation(*source, idle))};
  }

  void release(ServerId server) override {
    Scheduler::release(server);
    lengths_[server.index()] -= 1;
  }

  QueueSnapshot snapshot() const override {
    QueueSnapshot s;
    for (std::size_t i = 0; i < queues_.size(); ++i) {
      ServerView v;
      v.waiting = waiting_[i];
      v.busy = busy_[i];
      v.classes.local = lengths_[i];
      v.workload = workload_of(v.classes, est_);
      s.servers.push_back(v);
    }
    return s;
  }

 private:
  std::vector<std::deque<TaskId>> queues_;
  std::vector<int> lengths_;  // waiting + in service
  std::vector<int> waiting_;
};

// Locality-blind global arrival-order queue.
class FifoScheduler final : public Scheduler {
 public:
  FifoScheduler(const RackTopology& topology, const EstimatedRates& est)
      : Scheduler(SchedulerKind::Fifo, topology, est) {}

  RouteDecision route(const Task& task, Rng&) override {
    queue_.push_back(task.id);
    return {ServerId{0}, QueueClass::Global};
  }

  std::optional<Dispatch> schedule(ServerId idle, Rng&) override {
    require_idle(idle);
    if (queue_.empty()) return std::nullopt;
    const TaskId id = queue_.front();
    queue_.pop_front();
    busy_[idle.index()] = true;
    return Dispatch{id, ServerId{0}, QueueClass::Global};
  }

  QueueSnapshot snapshot() const override {
    QueueSnapshot s;
    s.global_waiting = static_cast<int>(queue_.size());
    for (std::size_t i = 0; i < busy_.size(); ++i) {
      ServerView v;
      v.busy = busy_[i];
      v.classes.local = v.busy ? 1 : 0;
      v.workload = workload_of(v.classes, est_);
      s.servers.push_back(v);
    }
    return s;
  }

 private:
  std::deque<TaskId> queue_;
};

}  // namespace

std::unique_ptr<Scheduler> make_scheduler(SchedulerKind kind, const RackTopology& topology,
                                          const EstimatedRates& est) {
  switch (kind) {
    case SchedulerKind::BalancedPandas: return std::make_unique<PandasScheduler>(topology, est);
    case SchedulerKind::JsqMaxWeight:
    case SchedulerKind::Priority: return std::make_unique<SingleQueueScheduler>(kind, topology, est);
    case SchedulerKind::Fifo: return std::make_unique<FifoScheduler>(topology, est);
  }
  throw InternalError("unknown scheduler kind");
}

}  // namespace locsim
