#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace locsim {

// 1-based server label, as used in configs and reports.
struct ServerId {
  int value = 0;

  constexpr std::size_t index() const noexcept { return static_cast<std::size_t>(value - 1); }
  static constexpr ServerId from_index(std::size_t i) noexcept { return ServerId{static_cast<int>(i) + 1}; }

  friend constexpr auto operator<=>(ServerId, ServerId) = default;
};

// The three servers holding replicas of a task's data chunk, strictly increasing.
class TaskType {
 public:
  // Throws InputError unless m1 < m2 < m3 and m1 >= 1.
  TaskType(ServerId m1, ServerId m2, ServerId m3);
  TaskType(int m1, int m2, int m3) : TaskType(ServerId{m1}, ServerId{m2}, ServerId{m3}) {}

  const std::array<ServerId, 3>& locals() const noexcept { return locals_; }
  ServerId operator[](std::size_t i) const noexcept { return locals_[i]; }
  bool contains(ServerId m) const noexcept {
    return locals_[0] == m || locals_[1] == m || locals_[2] == m;
  }

  std::string to_string() const;

  friend auto operator<=>(const TaskType&, const TaskType&) = default;

 private:
  std::array<ServerId, 3> locals_;
};

enum class Locality { Local = 0, RackLocal = 1, Remote = 2 };

std::string_view to_string(Locality l) noexcept;

// Servers grouped into equal contiguous racks. With two locality levels every
// non-local server is classified Remote.
class RackTopology {
 public:
  RackTopology(int num_servers, int rack_size, int locality_levels = 3);

  int num_servers() const noexcept { return num_servers_; }
  int rack_size() const noexcept { return rack_size_; }
  int num_racks() const noexcept { return num_servers_ / rack_size_; }
  int locality_levels() const noexcept { return locality_levels_; }

  bool valid(ServerId m) const noexcept { return m.value >= 1 && m.value <= num_servers_; }
  void check(ServerId m) const;
  void check(const TaskType& type) const;

  // Rack label in 1..num_racks.
  int rack_of(ServerId m) const;

  Locality locality(const TaskType& type, ServerId m) const;

  // Relation of queue home server `home` to serving server `server`:
  // Local when equal, RackLocal when they share a rack (three-level mode only).
  Locality relation(ServerId home, ServerId server) const;

  std::vector<ServerId> servers_with(const TaskType& type, Locality l) const;

  std::vector<TaskType> enumerate_task_types() const;

  friend bool operator==(const RackTopology&, const RackTopology&) = default;

 private:
  int rack_unchecked(ServerId m) const noexcept { return (m.value - 1) / rack_size_ + 1; }

  int num_servers_;
  int rack_size_;
  int locality_levels_;
};

}  // namespace locsim
