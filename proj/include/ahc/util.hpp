#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ahc {

// 64-bit FNV-1a, used to derive per-entity RNG substreams from string ids.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic generator (splitmix64 stream). std:: distributions are
// implementation-defined, so draws are produced here directly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool next_bool() { return (next_u64() & 1u) != 0; }

 private:
  std::uint64_t state_;
};

// Independent substream for a named entity under a scenario seed.
inline Rng substream(std::uint64_t seed, std::string_view label) {
  return Rng(splitmix64(seed ^ fnv1a64(label)));
}

// Fixed-decimal formatting; all user-visible numbers go through here so
// output bytes are stable.
inline std::string format_fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return std::string(buf);
}

// Shortest round-trippable representation, for the canonical scenario writer.
inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // Try shorter forms first for readability.
    for (int prec = 1; prec <= 16; ++prec) {
      char tmp[64];
      std::snprintf(tmp, sizeof(tmp), "%.*g", prec, v);
      std::sscanf(tmp, "%lf", &back);
      if (back == v) return std::string(tmp);
    }
  }
  return std::string(buf);
}

}  // namespace ahc
