#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sievelab/prime_engine.hpp"

namespace sievelab {

using BigInt = boost::multiprecision::cpp_int;

// C(n, j), taken as 0 when n < 0, j < 0 or j > n.
BigInt binomial(std::int64_t n, std::int64_t j);

// sum_{l=k}^{K} (-1)^{l-k} C(l, k) C(u, l); zero when K < k.
BigInt delta_K(std::uint64_t u, std::uint64_t k, std::uint64_t K);
// 1 if u == k else 0.
int delta(std::uint64_t u, std::uint64_t k);

struct BonferroniViolation {
  std::string kind;  // "upper", "lower" or "remainder"
  std::uint64_t u, k, K;
  BigInt truncated;
};

struct BonferroniReport {
  std::uint64_t u_max, k_max, K_max;
  std::uint64_t checked = 0;  // (u, k, K) triples with k <= K
  std::vector<BonferroniViolation> violations;
  bool ok() const { return violations.empty(); }
};

// For every u <= u_max, k <= k_max, k <= K <= K_max: delta <= delta_K when K = k (mod 2),
// delta >= delta_K otherwise, and delta = delta_K + (-1)^{K-k+1} C(u,k) C(u-k-1, K-k).
BonferroniReport bonferroni_check(std::uint64_t u_max, std::uint64_t k_max, std::uint64_t K_max);
std::string bonferroni_json(const BonferroniReport& r);

// Integers in (lo, hi].
struct IntegerRange {
  std::uint64_t lo;
  std::uint64_t hi;
};

// hist[v] = #{n in N : |{h in omega : n + h in A}| = v}, v = 0..|omega|.
std::vector<std::uint64_t> shift_histogram(const IntegerSet& A, IntegerRange N, const std::vector<std::uint64_t>& omega);

// #{n in N : nu(n) = k}, counted directly.
std::uint64_t direct_count_T(const IntegerSet& A, IntegerRange N, const std::vector<std::uint64_t>& omega,
                             std::uint64_t k);

inline constexpr std::uint64_t kSubsetBudget = 10'000'000;

// Truncated inclusion-exclusion count U_K through the histogram of nu.
// Throws std::length_error when the subsets of sizes k..K of omega exceed kSubsetBudget.
BigInt truncated_count_U(const IntegerSet& A, IntegerRange N, const std::vector<std::uint64_t>& omega,
                         std::uint64_t k, std::uint64_t K);

// n in N n A with no member in [n+1, n+y].
std::uint64_t fixed_point_count_T(const IntegerSet& A, IntegerRange N, std::uint64_t y);

// The fixed-point variant U'_K: terms carry the shift 0 in every subset.
BigInt truncated_count_Uprime(const IntegerSet& A, IntegerRange N, std::uint64_t y, std::uint64_t K);

}  // namespace sievelab
