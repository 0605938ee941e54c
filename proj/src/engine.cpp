#include "locsim/engine.hpp"

#include <algorithm>
#include <cmath>

#include "locsim/errors.hpp"

namespace locsim {

void SimConfig::validate() const {
  true_rates.validate();
  estimated.validate();
  service.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 0.5)) throw ConfigError("warmup fraction must lie in [0, 0.5]");
  if (instability_threshold && *instability_threshold == 0) throw ConfigError("instability threshold must be positive");
  for (const auto& e : arrivals.entries()) topology.check(e.type);
}

std::size_t SimConfig::effective_threshold() const {
  if (instability_threshold) return *instability_threshold;
  return std::max<std::size_t>(10000, 100 * static_cast<std::size_t>(topology.num_servers()));
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Arrival: return "arrival";
    case EventKind::Start: return "start";
    case EventKind::Departure: return "departure";
  }
  return "?";
}

Simulation::Simulation(SimConfig config, RunHooks hooks)
    : config_(std::move(config)),
      hooks_(std::move(hooks)),
      service_rng_(stream_seed(config_.seed, Stream::Service)),
      tie_rng_(stream_seed(config_.seed, Stream::TieBreak)) {
  config_.validate();
  scheduler_ = make_scheduler(config_.scheduler, config_.topology, config_.estimated);
  if (hooks_.arrivals) {
    arrivals_ = std::move(*hooks_.arrivals);
    hooks_.arrivals.reset();
    for (std::size_t i = 0; i < arrivals_.size(); ++i) {
      config_.topology.check(arrivals_[i].type);
      if (i > 0 && arrivals_[i].time < arrivals_[i - 1].time) throw InputError("scripted arrivals must be sorted");
    }
  } else {
    Rng arrival_rng(stream_seed(config_.seed, Stream::Arrivals));
    arrivals_ = sample_arrivals(config_.arrivals, config_.horizon, arrival_rng);
  }
  running_.assign(static_cast<std::size_t>(config_.topology.num_servers()), std::nullopt);
  warmup_cutoff_ = config_.warmup_fraction * config_.horizon;
  tasks_.reserve(arrivals_.size());
}

void Simulation::advance_clock(double t) {
  if (t < now_) throw InternalError("event time moved backwards");
  const std::size_t in_system = tasks_.size() - completed_;
  in_system_area_ += static_cast<double>(in_system) * (t - now_);
  now_ = t;
}

bool Simulation::step() {
  const bool have_arrival = next_arrival_ < arrivals_.size() && arrivals_[next_arrival_].time <= config_.horizon;
  const bool have_departure = !departures_.empty() && departures_.top().time <= config_.horizon;
  if (!have_arrival && !have_departure) return false;
  // Departures go first at equal timestamps.
  if (have_departure && (!have_arrival || departures_.top().time <= arrivals_[next_arrival_].time)) {
    const Departure d = departures_.top();
    departures_.pop();
    on_departure(d);
  } else {
    on_arrival(arrivals_[next_arrival_++]);
  }
  return true;
}

void Simulation::on_arrival(const Arrival& a) {
  advance_clock(a.time);
  const auto id = static_cast<TaskId>(tasks_.size());
  tasks_.push_back(Task{id, a.type, a.time, std::nullopt, std::nullopt});
  const RouteDecision decision = scheduler_->route(tasks_.back(), tie_rng_);
  emit(EventKind::Arrival, decision.server, id);

  if (decision.queue != QueueClass::Global && !scheduler_->busy(decision.server)) {
    if (try_start(decision.server)) return;
  }
  if (config_.scheduler == SchedulerKind::BalancedPandas) return;

  // Any idle server may take the new task; poll them in random order.
  idle_scratch_.clear();
  for (int m = 1; m <= config_.topology.num_servers(); ++m) {
    if (!scheduler_->busy(ServerId{m})) idle_scratch_.push_back(ServerId{m});
  }
  while (!idle_scratch_.empty()) {
    const std::size_t pick = idle_scratch_.size() == 1 ? 0 : tie_rng_.below(idle_scratch_.size());
    const ServerId m = idle_scratch_[pick];
    if (try_start(m)) return;
    idle_scratch_.erase(idle_scratch_.begin() + static_cast<std::ptrdiff_t>(pick));
  }
}

bool Simulation::try_start(ServerId server) {
  const auto dispatch = scheduler_->schedule(server, tie_rng_);
  if (!dispatch) return false;
  Task& task = tasks_.at(dispatch->task);
  task.start_time = now_;
  task.serving_server = server;
  const Locality actual = config_.topology.locality(task.type, server);
  served_[static_cast<std::size_t>(actual)] += 1;

  const double mean = 1.0 / true_rate(config_.true_rates, task.type, server, config_.topology);
  const double duration = hooks_.service_time ? hooks_.service_time(task, server, mean)
                                              : config_.service.draw(mean, service_rng_);
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("service duration must be positive");
  running_[server.index()] = task.id;
  departures_.push(Departure{now_ + duration, sequence_++, server});
  emit(EventKind::Start, server, task.id);
  return true;
}

void Simulation::on_departure(const Departure& d) {
  advance_clock(d.time);
  auto& slot = running_[d.server.index()];
  if (!slot) throw InternalError("departure from idle server");
  const Task& task = tasks_[*slot];
  slot.reset();
  scheduler_->release(d.server);
  ++completed_;
  if (task.arrival_time >= warmup_cutoff_) {
    const double ct = now_ - task.arrival_time;
    ++measured_;
    const double delta = ct - ct_mean_;
    ct_mean_ += delta / static_cast<double>(measured_);
    ct_m2_ += delta * (ct - ct_mean_);
  }
  emit(EventKind::Departure, d.server, task.id);
  try_start(d.server);
}

void Simulation::emit(EventKind kind, ServerId server, TaskId task) {
  if (!hooks_.trace) return;
  hooks_.trace(TraceRecord{now_, kind, server, task, scheduler_->snapshot().lengths()});
}

MetricsReport Simulation::run() {
  while (step()) {
  }
  advance_clock(std::max(now_, config_.horizon));
  return report();
}

MetricsReport Simulation::report() const {
  MetricsReport r;
  r.seed = config_.seed;
  r.tasks_arrived = tasks_.size();
  r.tasks_completed = completed_;
  r.measured_tasks = measured_;
  r.mean_completion_time = measured_ > 0 ? ct_mean_ : 0.0;
  r.completion_time_stddev = measured_ > 1 ? std::sqrt(ct_m2_ / static_cast<double>(measured_ - 1)) : 0.0;
  r.served_by_locality = served_;
  r.mean_tasks_in_system = now_ > 0.0 ? in_system_area_ / now_ : 0.0;
  r.final_in_system = tasks_.size() - completed_;
  r.unstable = r.final_in_system > config_.effective_threshold();
  return r;
}

MetricsReport run(const SimConfig& config, RunHooks hooks) { return Simulation(config, std::move(hooks)).run(); }

}  // namespace locsim
