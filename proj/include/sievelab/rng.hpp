#pragma once

#include <cstdint>

namespace sievelab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Key of the independent stream addressed by (seed, counter). Any counter can be
// drawn without touching the others, which is what lets a residue assignment be
// evaluated for an arbitrary subset of primes.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t counter) {
  return mix64(mix64(seed + kGolden) ^ mix64(counter * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
}

// SplitMix64 sequence started at a derived key.
class Stream {
 public:
  constexpr explicit Stream(std::uint64_t key) : state_(key) {}

  constexpr std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Exactly uniform on [0, n); n > 0. Lemire's multiply-shift with rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    std::uint64_t x = next();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = next();
        m = static_cast<unsigned __int128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace sievelab::rng
