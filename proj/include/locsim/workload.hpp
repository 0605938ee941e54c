#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locsim/rng.hpp"
#include "locsim/topology.hpp"

namespace locsim {

// True processing rates for local, rack-local and remote service.
struct ServiceRates {
  double alpha = 1.0;
  double beta = 0.9;
  double gamma = 0.5;

  // Throws ConfigError unless alpha > beta > gamma > 0.
  void validate() const;

  double for_locality(Locality l) const noexcept {
    switch (l) {
      case Locality::Local: return alpha;
      case Locality::RackLocal: return beta;
      case Locality::Remote: return gamma;
    }
    return gamma;
  }

  friend bool operator==(const ServiceRates&, const ServiceRates&) = default;
};

struct ArrivalEntry {
  TaskType type;
  double rate;

  friend bool operator==(const ArrivalEntry&, const ArrivalEntry&) = default;
};

// Per-type Poisson arrival rates.
class ArrivalSpec {
 public:
  ArrivalSpec() = default;
  // Throws InputError on negative/non-finite rates or duplicate types.
  explicit ArrivalSpec(std::vector<ArrivalEntry> entries);

  const std::vector<ArrivalEntry>& entries() const noexcept { return entries_; }
  double total_rate() const noexcept { return total_; }
  bool empty() const noexcept { return entries_.empty(); }

  ArrivalSpec scaled(double factor) const;

  friend bool operator==(const ArrivalSpec&, const ArrivalSpec&) = default;

 private:
  std::vector<ArrivalEntry> entries_;
  double total_ = 0.0;
};

struct LoadFactor {
  double rho = 0.0;
  // split[i][m] = rate of entry i's tasks processed by server m (0-based index).
  std::vector<std::vector<double>> split;
  std::vector<double> server_loads;
};

// Minimum over decompositions of the maximum per-server load.
LoadFactor load_factor(const ArrivalSpec& spec, const ServiceRates& rates, const RackTopology& topology);

ArrivalSpec uniform_workload(const RackTopology& topology, const ServiceRates& rates, double target_rho);

// hot_fraction of the load spread over types whose replicas all sit in rack 1,
// the rest spread over every other type, scaled so load_factor = target_rho.
ArrivalSpec hot_rack_workload(const RackTopology& topology, const ServiceRates& rates, double target_rho,
                              double hot_fraction);

enum class GeneratorKind { Uniform, HotRack, Explicit };

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator(const std::string& name);

// A workload recipe that can be instantiated at any target load.
struct WorkloadSpec {
  GeneratorKind generator = GeneratorKind::Uniform;
  double target_rho = 0.9;
  double hot_fraction = 0.5;
  ArrivalSpec explicit_rates;

  // Arrival rates at the recipe's own target (explicit rates are taken as given).
  ArrivalSpec build(const RackTopology& topology, const ServiceRates& rates) const;
  // Arrival rates scaled to load factor `rho`.
  ArrivalSpec at_load(const RackTopology& topology, const ServiceRates& rates, double rho) const;

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

struct Arrival {
  double time;
  TaskType type;
};

// Superposition of one Poisson process per type on [0, horizon), sorted by time.
std::vector<Arrival> sample_arrivals(const ArrivalSpec& spec, double horizon, Rng& rng);

enum class ServiceKind { Exponential, Geometric, Pareto };

struct ServiceDistribution {
  ServiceKind kind = ServiceKind::Exponential;
  double pareto_shape = 2.5;

  void validate() const;
  // Strictly positive draw with the given mean. Geometric draws are whole slots.
  double draw(double mean, Rng& rng) const;

  friend bool operator==(const ServiceDistribution&, const ServiceDistribution&) = default;
};

std::string to_string(ServiceKind kind);
ServiceKind parse_service_kind(const std::string& name);

}  // namespace locsim
