#include "locsim/rng.hpp"

#include <cmath>

namespace locsim {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = mix64(parent);
  for (std::uint64_t c : coords) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view name) noexcept {
  std::uint64_t fnv = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    fnv ^= c;
    fnv *= 0x100000001b3ULL;
  }
  return derive_seed(parent, {fnv});
}

std::uint64_t stream_seed(std::uint64_t run_seed, Stream stream) noexcept {
  return derive_seed(run_seed, {static_cast<std::uint64_t>(stream)});
}

double Rng::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

}  // namespace locsim
