#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sievelab {

// |{x < n <= x + y : every prime factor of n exceeds z}|.
std::uint64_t interval_count_S(std::uint64_t x, std::uint64_t y, double z);

enum class ExtremumMethod { exact_scan, tuple_search };

struct SieveExtremum {
  std::uint64_t y;
  double z;
  std::uint64_t value;
  ExtremumMethod method;
  bool certified;  // true only for exact scans
  std::uint64_t offset = 0;              // window (offset, offset + y] for exact scans
  std::vector<std::uint64_t> primes;     // primes <= z
  std::vector<std::uint64_t> residues;   // sifted class per prime; for a scan, -offset mod p
};

// Survivors in [1, y] of sifting class residues[i] mod primes[i].
std::uint64_t tuple_survivors(std::uint64_t y, const std::vector<std::uint64_t>& primes,
                              const std::vector<std::uint64_t>& residues);

// Recounts the witness (the offset for scans, the residues otherwise).
std::uint64_t replay(const SieveExtremum& e);

inline constexpr std::uint64_t kPeriodCap = 1'000'000'000;

// Product of primes <= z, or 0 if it exceeds kPeriodCap.
std::uint64_t sieve_period(double z);

// min over offsets x in one period of S(x, y, z); ties go to the smallest x.
SieveExtremum s_minus_exact(std::uint64_t y, double z);

// Greedy residue choice followed by local search with random restarts;
// an upper bound on the minimum.
SieveExtremum s_minus_search(std::uint64_t y, double z, std::uint64_t budget = 20000, std::uint64_t seed = 0);

// S^-(floor(z^v), z) / (e^{-gamma} z^v / log z), a finite-scale proxy.
double f_hat_estimate(double v, double z, ExtremumMethod method, std::uint64_t budget = 20000,
                      std::uint64_t seed = 0);

std::string extremum_json(const SieveExtremum& e);

}  // namespace sievelab
