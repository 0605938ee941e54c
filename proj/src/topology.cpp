#include "locsim/topology.hpp"

#include "locsim/errors.hpp"

namespace locsim {

TaskType::TaskType(ServerId m1, ServerId m2, ServerId m3) : locals_{m1, m2, m3} {
  if (m1.value < 1 || !(m1 < m2) || !(m2 < m3)) {
    throw InputError("task type must satisfy 1 <= m1 < m2 < m3, got " + to_string());
  }
}

std::string TaskType::to_string() const {
  return "(" + std::to_string(locals_[0].value) + "," + std::to_string(locals_[1].value) + "," +
         std::to_string(locals_[2].value) + ")";
}

std::string_view to_string(Locality l) noexcept {
  switch (l) {
    case Locality::Local: return "local";
    case Locality::RackLocal: return "rack_local";
    case Locality::Remote: return "remote";
  }
  return "?";
}

RackTopology::RackTopology(int num_servers, int rack_size, int locality_levels)
    : num_servers_(num_servers), rack_size_(rack_size), locality_levels_(locality_levels) {
  if (num_servers < 3) throw InputError("num_servers must be at least 3");
  if (rack_size < 1) throw InputError("rack_size must be positive");
  if (num_servers % rack_size != 0) throw InputError("num_servers must be a multiple of rack_size");
  if (locality_levels != 2 && locality_levels != 3) throw InputError("locality_levels must be 2 or 3");
}

void RackTopology::check(ServerId m) const {
  if (!valid(m)) {
    throw InputError("server id " + std::to_string(m.value) + " outside 1.." + std::to_string(num_servers_));
  }
}

void RackTopology::check(const TaskType& type) const {
  if (!valid(type[2])) throw InputError("task type " + type.to_string() + " outside topology");
}

int RackTopology::rack_of(ServerId m) const {
  check(m);
  return rack_unchecked(m);
}

Locality RackTopology::locality(const TaskType& type, ServerId m) const {
  check(type);
  check(m);
  if (type.contains(m)) return Locality::Local;
  if (locality_levels_ == 2) return Locality::Remote;
  const int r = rack_unchecked(m);
  for (ServerId local : type.locals()) {
    if (rack_unchecked(local) == r) return Locality::RackLocal;
  }
  return Locality::Remote;
}

Locality RackTopology::relation(ServerId home, ServerId server) const {
  check(home);
  check(server);
  if (home == server) return Locality::Local;
  if (locality_levels_ == 3 && rack_unchecked(home) == rack_unchecked(server)) return Locality::RackLocal;
  return Locality::Remote;
}

std::vector<ServerId> RackTopology::servers_with(const TaskType& type, Locality l) const {
  std::vector<ServerId> out;
  for (int m = 1; m <= num_servers_; ++m) {
    if (locality(type, ServerId{m}) == l) out.push_back(ServerId{m});
  }
  return out;
}

std::vector<TaskType> RackTopology::enumerate_task_types() const {
  std::vector<TaskType> types;
  const int n = num_servers_;
  types.reserve(static_cast<std::size_t>(n) * (n - 1) * (n - 2) / 6);
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      for (int c = b + 1; c <= n; ++c) types.emplace_back(a, b, c);
  return types;
}

}  // namespace locsim
