#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace locsim {

// SplitMix64 finalizer; used for every seed derivation in the project.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Child seed from a parent seed and a list of integer coordinates.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> coords) noexcept;

// Child seed from a parent seed and a stream name (FNV-1a of the name, then mixed).
std::uint64_t derive_seed(std::uint64_t parent, std::string_view name) noexcept;

// Named streams split from one run seed.
enum class Stream : std::uint64_t { Arrivals = 1, Service = 2, TieBreak = 3, Perturbation = 4 };

std::uint64_t stream_seed(std::uint64_t run_seed, Stream stream) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform() noexcept {
    for (;;) {
      double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    // Lemire-style rejection keeps the draw exactly uniform.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    for (;;) {
      const std::uint64_t r = engine_();
      if (r < limit) return r % n;
    }
  }

  double exponential(double rate) noexcept;

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace locsim
