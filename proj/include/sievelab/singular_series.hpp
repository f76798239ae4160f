#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sievelab {

// Strictly sorted, non-empty set of non-negative offsets.
class OffsetTuple {
 public:
  explicit OffsetTuple(std::vector<std::int64_t> offsets);  // sorts and validates

  const std::vector<std::int64_t>& offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }
  std::int64_t diameter() const { return offsets_.back() - offsets_.front(); }
  OffsetTuple shifted(std::int64_t c) const;

 private:
  std::vector<std::int64_t> offsets_;
};

// Twin-prime constant 2 prod_{p>2} (1 - 1/(p-1)^2).
inline constexpr double kTwinPrimeConstant = 1.3203236316937391;

struct SingularSeriesValue {
  double value;
  std::uint64_t truncation_prime;  // largest prime whose factor is exact
  double tail_bound;               // relative error bound from primes above it
  bool is_zero;
};

// |H mod p|.
std::size_t residues_mod(const OffsetTuple& H, std::uint64_t p);

// Smallest truncation accepted by singular_series.
std::uint64_t exact_regime_threshold(const OffsetTuple& H);
std::uint64_t default_truncation(const OffsetTuple& H);

SingularSeriesValue singular_series(const OffsetTuple& H, std::uint64_t trunc);
inline SingularSeriesValue singular_series(const OffsetTuple& H) { return singular_series(H, default_truncation(H)); }

enum class AverageMode { exhaustive, sampled };

struct GallagherAverage {
  std::uint64_t y;
  std::uint64_t k;
  double ratio;   // mean of S(H) over k-subsets of {0..y}
  double stderr_; // 0 for exhaustive
  std::uint64_t subsets;  // enumerated or sampled
};

inline constexpr std::uint64_t kGallagherEnumerationCap = 10'000'000;

GallagherAverage gallagher_average(std::uint64_t y, std::uint64_t k, AverageMode mode,
                                   std::uint64_t samples = 0, std::uint64_t seed = 0);

// S({0, k}) from the closed pair formula.
double pair_singular_series(std::uint64_t k);
// sum_{k <= w} S({0, k}).
double pair_series_sum(std::uint64_t w);

// One tuple per line, offsets separated by commas.
std::vector<OffsetTuple> read_tuple_list(std::istream& in);
void write_gallagher_csv(std::ostream& out, const std::vector<GallagherAverage>& rows);

}  // namespace sievelab
