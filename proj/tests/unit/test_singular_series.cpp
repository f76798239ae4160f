#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "sievelab/singular_series.hpp"

using namespace sievelab;

namespace {
const std::vector<std::uint64_t>& oracle_primes() {
  static const std::vector<std::uint64_t> primes = [] {
    constexpr std::uint64_t n = 2'000'000;
    std::vector<bool> composite(n + 1, false);
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 2; i <= n; ++i) {
      if (composite[i]) continue;
      out.push_back(i);
      for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
    }
    return out;
  }();
  return primes;
}

// Direct Euler product over p <= 2e6 with residues counted by a set; the tail
// uses the prime zeta values P(2), P(3) minus the partial sums.
double oracle_series(const std::vector<std::int64_t>& h) {
  constexpr long double P2 = 0.452247420041065498506543364832247934L;
  constexpr long double P3 = 0.174762639299443536423113314665706701L;
  const long double k = static_cast<long double>(h.size());
  long double lv = 0, s2 = 0, s3 = 0;
  for (std::uint64_t p : oracle_primes()) {
    std::set<std::int64_t> res;
    for (auto a : h) res.insert(a % static_cast<std::int64_t>(p));
    const long double pd = static_cast<long double>(p);
    if (res.size() == p) return 0.0;
    lv += std::log(1 - res.size() / pd) - k * std::log(1 - 1 / pd);
    s2 += 1 / (pd * pd);
    s3 += 1 / (pd * pd * pd);
  }
  lv += (k - k * k) / 2 * (P2 - s2) + (k - k * k * k) / 3 * (P3 - s3);
  return static_cast<double>(std::exp(lv));
}
}  // namespace

TEST_CASE("offset tuples validate") {
  CHECK_THROWS_AS(OffsetTuple({}), std::invalid_argument);
  CHECK_THROWS_AS(OffsetTuple({0, 2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(OffsetTuple({-1, 2}), std::invalid_argument);
  const OffsetTuple h({6, 0, 2});
  CHECK(h.offsets() == std::vector<std::int64_t>{0, 2, 6});
  CHECK(h.diameter() == 6);
  CHECK(h.shifted(5).offsets() == std::vector<std::int64_t>{5, 7, 11});
  CHECK(residues_mod(h, 3) == 2);
  CHECK(residues_mod(h, 2) == 1);
  CHECK(residues_mod(h, 7) == 3);
  CHECK_THROWS_AS(residues_mod(h, 1), std::invalid_argument);
}

TEST_CASE("twin-prime constant") {
  const auto v = singular_series(OffsetTuple({0, 2}));
  CHECK_FALSE(v.is_zero);
  CHECK(std::abs(v.value - 1.32032363169373914785562422) < 1e-9);
  CHECK(v.tail_bound < 1e-9);
  CHECK(v.truncation_prime <= 10'000);
  CHECK(std::abs(v.value - oracle_series({0, 2})) < 1e-10);
}

TEST_CASE("inadmissible tuples vanish") {
  CHECK(singular_series(OffsetTuple({0, 1})).is_zero);
  CHECK(singular_series(OffsetTuple({0, 2, 4})).is_zero);
  CHECK(singular_series(OffsetTuple({0, 2, 4})).value == 0.0);
  CHECK(singular_series(OffsetTuple({0, 2, 6, 8, 12, 14})).is_zero == (oracle_series({0, 2, 6, 8, 12, 14}) == 0));
  CHECK_FALSE(singular_series(OffsetTuple({0, 2, 6})).is_zero);
  CHECK(singular_series(OffsetTuple({0})).value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("singular series matches a direct Euler product") {
  const std::vector<std::vector<std::int64_t>> tuples{
      {0, 2}, {0, 4}, {0, 6}, {0, 30}, {0, 2, 6}, {0, 4, 6}, {0, 2, 6, 8}, {0, 6, 12, 18}, {0, 4, 10, 12, 16}};
  for (const auto& h : tuples) {
    const double want = oracle_series(h);
    const auto got = singular_series(OffsetTuple(h));
    CHECK(got.value == doctest::Approx(want).epsilon(1e-9));
    CHECK(std::abs(got.value - want) <= got.value * got.tail_bound + 1e-12);
  }
}

TEST_CASE("singular series is shift invariant and converges in the truncation") {
  const OffsetTuple h({0, 2, 6, 8});
  const double base = singular_series(h).value;
  for (std::int64_t c : {1, 7, 30, 1001})
    CHECK(singular_series(h.shifted(c)).value == doctest::Approx(base).epsilon(1e-13));
  const double exact = oracle_series(h.offsets());
  double prev_bound = 1e300;
  for (std::uint64_t t : {9ULL, 20ULL, 100ULL, 1000ULL, 100000ULL}) {
    const auto v = singular_series(h, t);
    CHECK(std::abs(v.value - exact) <= v.value * v.tail_bound + 1e-12);
    CHECK(v.tail_bound <= prev_bound);
    prev_bound = v.tail_bound;
  }
  CHECK(exact_regime_threshold(h) == 9);
  CHECK_THROWS_AS(singular_series(h, 8), std::invalid_argument);
  CHECK(default_truncation(OffsetTuple({0, 5000})) == 50'000);
}

TEST_CASE("pair formula matches the product") {
  for (std::uint64_t k = 1; k <= 60; ++k) {
    const double pair = pair_singular_series(k);
    const auto full = singular_series(OffsetTuple({0, static_cast<std::int64_t>(k)}));
    CHECK(pair == doctest::Approx(full.value).epsilon(1e-9));
    if (k % 2 == 1) CHECK(pair == 0.0);
  }
  CHECK(pair_singular_series(6) == doctest::Approx(2 * kTwinPrimeConstant).epsilon(1e-15));
  CHECK_THROWS_AS(pair_singular_series(0), std::invalid_argument);
  CHECK(pair_series_sum(100) == doctest::Approx(97.22566827322134).epsilon(1e-12));
  CHECK(pair_series_sum(1000) == doctest::Approx(996.0816741113538).epsilon(1e-12));
  CHECK(pair_series_sum(1) == 0.0);
}

TEST_CASE("Gallagher averages") {
  CHECK(gallagher_average(20, 2, AverageMode::exhaustive).ratio == doctest::Approx(0.832432613505958).epsilon(1e-9));
  CHECK(gallagher_average(50, 2, AverageMode::exhaustive).ratio == doctest::Approx(0.9143980134372545).epsilon(1e-9));
  CHECK(gallagher_average(100, 2, AverageMode::exhaustive).ratio == doctest::Approx(0.950109087536507).epsilon(1e-9));
  CHECK(gallagher_average(20, 3, AverageMode::exhaustive).ratio == doctest::Approx(0.550696392972219).epsilon(1e-9));

  // Brute-force mean over all 3-subsets of {0..9}.
  double sum = 0;
  std::uint64_t count = 0;
  for (int a = 0; a <= 9; ++a)
    for (int b = a + 1; b <= 9; ++b)
      for (int c = b + 1; c <= 9; ++c) {
        sum += oracle_series({a, b, c});
        ++count;
      }
  const auto g = gallagher_average(9, 3, AverageMode::exhaustive);
  CHECK(g.subsets == count);
  CHECK(g.stderr_ == 0.0);
  CHECK(g.ratio == doctest::Approx(sum / static_cast<double>(count)).epsilon(1e-9));

  CHECK(gallagher_average(5, 1, AverageMode::exhaustive).ratio == doctest::Approx(1.0).epsilon(1e-14));

  const auto s = gallagher_average(100, 2, AverageMode::sampled, 20000, 7);
  CHECK(s.subsets == 20000);
  CHECK(std::abs(s.ratio - 0.950109087536507) < 5 * s.stderr_);
  CHECK(gallagher_average(100, 2, AverageMode::sampled, 5000, 3).ratio ==
        gallagher_average(100, 2, AverageMode::sampled, 5000, 3).ratio);

  CHECK_THROWS_AS(gallagher_average(10, 0, AverageMode::exhaustive), std::invalid_argument);
  CHECK_THROWS_AS(gallagher_average(10, 12, AverageMode::exhaustive), std::invalid_argument);
  CHECK_THROWS_AS(gallagher_average(1000, 5, AverageMode::exhaustive), std::invalid_argument);
  CHECK_THROWS_AS(gallagher_average(100, 2, AverageMode::sampled, 1), std::invalid_argument);
}

TEST_CASE("tuple list parsing") {
  std::stringstream in("# pairs\n0,2\n\n0, 4 ,6\n");
  const auto tuples = read_tuple_list(in);
  REQUIRE(tuples.size() == 2);
  CHECK(tuples[1].offsets() == std::vector<std::int64_t>{0, 4, 6});
  std::stringstream bad("0,x\n");
  CHECK_THROWS_AS(read_tuple_list(bad), std::invalid_argument);

  std::stringstream csv;
  write_gallagher_csv(csv, {gallagher_average(10, 2, AverageMode::exhaustive)});
  CHECK(csv.str().find('\n') != std::string::npos);
}
