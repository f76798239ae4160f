#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "sievelab/core_params.hpp"
#include "sievelab/parallel.hpp"
#include "sievelab/random_models.hpp"

using namespace sievelab;

namespace {
bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::vector<std::uint64_t> primes_below(std::uint64_t z) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p <= z; ++p)
    if (is_prime(p)) out.push_back(p);
  return out;
}

// Survivors of [1, Y] by direct residue tests.
std::uint64_t direct_survivors(std::uint64_t Y, const std::vector<std::uint64_t>& primes,
                               const std::vector<std::uint64_t>& residues) {
  std::uint64_t count = 0;
  for (std::uint64_t n = 1; n <= Y; ++n) {
    bool alive = true;
    for (std::size_t i = 0; i < primes.size(); ++i)
      if (n % primes[i] == residues[i]) alive = false;
    if (alive) ++count;
  }
  return count;
}

// Calls f(residues) for every residue tuple over the given primes.
template <class F>
void for_each_assignment(const std::vector<std::uint64_t>& primes, bool forbid_zero, F f) {
  std::vector<std::uint64_t> r(primes.size(), forbid_zero ? 1 : 0);
  for (;;) {
    f(r);
    std::size_t i = 0;
    for (; i < primes.size(); ++i) {
      if (++r[i] < primes[i]) break;
      r[i] = forbid_zero ? 1 : 0;
    }
    if (i == primes.size()) return;
  }
}
}  // namespace

TEST_CASE("residue draws stay in range and are reproducible") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (std::uint64_t p : {2ULL, 3ULL, 7ULL, 101ULL, 1000003ULL}) {
      const auto r = residue_for(seed, p, false);
      CHECK(r < p);
      CHECK(r == residue_for(seed, p, false));
      if (p > 2) {
        const auto s = residue_for(seed, p, true);
        CHECK(s >= 1);
        CHECK(s < p);
        const auto t = residue_by_rejection(seed, p);
        CHECK(t >= 1);
        CHECK(t < p);
      }
    }
  }
  CHECK_THROWS_AS(residue_for(1, 1, false), std::invalid_argument);
  CHECK_THROWS_AS(residue_by_rejection(1, 0), std::invalid_argument);
}

TEST_CASE("residue laws are uniform") {
  // Chi-square with 6 and 5 degrees of freedom; 30 is far in the tail of both.
  constexpr std::uint64_t n = 70000;
  std::vector<double> free(7, 0), direct(7, 0), rejected(7, 0);
  for (std::uint64_t s = 0; s < n; ++s) {
    free[residue_for(s, 7, false)] += 1;
    direct[residue_for(s, 7, true)] += 1;
    rejected[residue_by_rejection(s, 7)] += 1;
  }
  auto chi = [](const std::vector<double>& c, std::size_t from, double expect) {
    double x = 0;
    for (std::size_t i = from; i < c.size(); ++i) x += (c[i] - expect) * (c[i] - expect) / expect;
    return x;
  };
  CHECK(chi(free, 0, n / 7.0) < 30);
  CHECK(direct[0] == 0);
  CHECK(rejected[0] == 0);
  CHECK(chi(direct, 1, n / 6.0) < 30);
  CHECK(chi(rejected, 1, n / 6.0) < 30);
}

TEST_CASE("residue assignments") {
  const ResidueAssignment a(30, 5, false);
  CHECK(a.primes().size() == 10);
  CHECK(a.master_seed() == 5);
  for (std::size_t i = 0; i < a.primes().size(); ++i) CHECK(a.residue(a.primes()[i]) == residue_for(5, a.primes()[i], false));
  CHECK_THROWS_AS(a.residue(4), std::out_of_range);
  CHECK_THROWS_AS(a.residue(31), std::out_of_range);
  CHECK_THROWS_AS(ResidueAssignment(1.5, 0, false), std::invalid_argument);
  CHECK_THROWS_AS(ResidueAssignment(5, std::vector<std::uint64_t>{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(ResidueAssignment(5, std::vector<std::uint64_t>{1, 3, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ResidueAssignment(5, std::vector<std::uint64_t>{1, 0, 1}, true), std::invalid_argument);
  CHECK(sample_residues(30, 5, true).residue(29) == residue_for(5, 29, true));
}

TEST_CASE("sifted windows match direct residue tests") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (double z : {2.0, 7.0, 30.0, 200.0}) {
      for (double y : {0.0, 1.0, 12.5, 60.0, 150.0}) {
        const bool fz = seed % 2 == 1;
        const ResidueAssignment a(z, seed, fz);
        const auto fast = sift_window(y, z, a);
        const auto slow = sift_window_naive(y, z, a);
        CHECK(fast.survivors == slow.survivors);
        const std::vector<std::uint64_t> primes(a.primes().begin(), a.primes().end());
        const std::vector<std::uint64_t> res(a.residues().begin(), a.residues().end());
        CHECK(fast.count() == direct_survivors(static_cast<std::uint64_t>(y), primes, res));
      }
    }
  }
  // An assignment for a smaller cutoff cannot sieve a larger one.
  CHECK_THROWS_AS(sift_window(10, 30, ResidueAssignment(7, 1, false)), std::invalid_argument);
}

TEST_CASE("expectation identity over all residue assignments") {
  // Unrestricted residues: every n survives in prod (p-1) of the prod p tuples.
  for (std::uint64_t z : {2ULL, 3ULL, 5ULL, 7ULL}) {
    const auto primes = primes_below(z);
    for (double y : {1.0, 10.0, 29.0, 47.5}) {
      const auto Y = static_cast<std::uint64_t>(y);
      std::uint64_t total = 0, tuples = 0;
      for_each_assignment(primes, false, [&](const std::vector<std::uint64_t>& r) {
        total += sift_window(y, static_cast<double>(z), ResidueAssignment(static_cast<double>(z), r)).count();
        ++tuples;
      });
      std::uint64_t reduced = 1;
      for (auto p : primes) reduced *= p - 1;
      CHECK(total == Y * reduced);
      CHECK(static_cast<double>(total) / static_cast<double>(tuples) ==
            doctest::Approx(y >= 1 ? Y * mertens_theta(static_cast<double>(z)) : 0.0).epsilon(1e-14));
    }
  }
  // Nonzero residues: n survives p with probability 1 if p | n, else (p-2)/(p-1).
  for (std::uint64_t z : {3ULL, 5ULL, 7ULL}) {
    const auto primes = primes_below(z);
    const std::uint64_t Y = 40;
    double mean = 0, tuples = 0;
    for_each_assignment(primes, true, [&](const std::vector<std::uint64_t>& r) {
      if (primes[0] == 2 && r[0] == 0) return;
      mean += static_cast<double>(direct_survivors(Y, primes, r));
      tuples += 1;
    });
    mean /= tuples;
    double want = 0;
    for (std::uint64_t n = 1; n <= Y; ++n) {
      double pr = 1;
      for (auto p : primes)
        if (n % p != 0) pr *= (p - 2.0) / (p - 1.0);
      want += pr;
    }
    CHECK(mean == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("Monte Carlo trials replay as single assignments") {
  const double y = 25, z = 500;
  const std::uint64_t seed = 99, trials = 300;
  for (bool fz : {false, true}) {
    const auto hist = monte_carlo_distribution(y, z, trials, fz, seed);
    std::vector<std::uint64_t> replay(26, 0);
    for (std::uint64_t t = 0; t < trials; ++t)
      ++replay[sift_window(y, z, ResidueAssignment(z, trial_seed(seed, t), fz)).count()];
    CHECK(hist == replay);
  }
  const auto e = monte_carlo_window(y, z, 3, trials, false, seed);
  CHECK(e.hits == monte_carlo_distribution(y, z, trials, false, seed)[3]);
  CHECK(e.trials == trials);
  CHECK(monte_carlo_window(y, z, 26, trials, false, seed).estimate == 0.0);
  CHECK_THROWS_AS(monte_carlo_distribution(y, z, 0, false, seed), std::invalid_argument);
}

TEST_CASE("Monte Carlo law of the sifted window") {
  // Exact P(S = k) for y = 20, z = 1e5.
  const std::vector<double> exact{0.3333870092347675, 0.41563380835531094, 0.19931042580894795,
                                  0.0461411013047207, 0.00526159989981818, 0.000262338844944949,
                                  3.7165514897839296e-06};
  constexpr std::uint64_t trials = 40000;
  const auto hist = monte_carlo_distribution(20, 1e5, trials, false, 2024);
  CHECK(std::accumulate(hist.begin(), hist.end(), std::uint64_t{0}) == trials);
  for (std::size_t k = 0; k < exact.size(); ++k) {
    const double f = static_cast<double>(hist[k]) / trials;
    const double sigma = std::sqrt(exact[k] * (1 - exact[k]) / trials);
    CHECK(std::abs(f - exact[k]) <= 5 * sigma + 1.0 / trials);
  }
}

TEST_CASE("Monte Carlo is independent of the thread count") {
  const auto saved = thread_count();
  std::vector<std::uint64_t> first;
  for (unsigned t : {1u, 4u, 8u}) {
    set_thread_count(t);
    const auto h = monte_carlo_distribution(30, 1e4, 5000, true, 17);
    if (first.empty()) first = h; else CHECK(h == first);
  }
  set_thread_count(saved);
}

TEST_CASE("Cramér sample") {
  const IntegerSet a = cramer_sample(1'000'000, 3);
  const IntegerSet b = cramer_sample(1'000'000, 3);
  CHECK(a.elements() == b.elements());
  CHECK(a.coverage() == 1'000'000);
  CHECK(a.kind() == SetKind::model_sample);
  CHECK(a.elements().front() >= 3);
  CHECK(cramer_sample(1'000'000, 4).elements() != a.elements());
  double mean = 0, var = 0;
  for (std::uint64_t n = 3; n <= 1'000'000; ++n) {
    const double q = 1 / std::log(static_cast<double>(n));
    mean += q;
    var += q * (1 - q);
  }
  CHECK(std::abs(static_cast<double>(a.size()) - mean) < 5 * std::sqrt(var));
  // Prefix property: a shorter sample is the restriction of a longer one.
  const IntegerSet c = cramer_sample(300'000, 3);
  CHECK(c.elements() == a.range(0, 300'000));
  CHECK_THROWS_AS(cramer_sample(2, 1), std::invalid_argument);
}

TEST_CASE("BFT activation points") {
  CHECK(bft_activation(2) == 8);
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL}) {
    const std::uint64_t n = bft_activation(p);
    CHECK(sieve_cutoff_z(static_cast<double>(n)) >= p);
    if (n > 8) CHECK(sieve_cutoff_z(static_cast<double>(n - 1)) < p);
  }
  CHECK(bft_activation(3) <= bft_activation(5));
  CHECK_THROWS_AS(bft_activation(9), std::invalid_argument);
}

TEST_CASE("BFT sample membership") {
  constexpr std::uint64_t x = 200'000;
  const IntegerSet R = bft_sample(x, 11);
  CHECK(R.elements() == bft_sample(x, 11).elements());
  CHECK(R.coverage() == x);
  CHECK(R.elements().front() >= 8);
  const auto primes = primes_below(2000);
  std::size_t checked = 0;
  for (std::uint64_t n = 8; n <= x; n += 37) {
    const std::uint64_t z = sieve_cutoff_z(static_cast<double>(n));
    bool alive = true;
    for (auto p : primes)
      if (p <= z && n % p == residue_for(11, p, false)) alive = false;
    CHECK(R.contains(n) == alive);
    ++checked;
  }
  CHECK(checked > 5000);
  CHECK_THROWS_AS(bft_sample(7, 1), std::invalid_argument);
}

TEST_CASE("martingale traces and their increment bounds") {
  const double y = 100, w1 = 10, w2 = 2000;
  for (auto norm : {Normalization::theta, Normalization::theta_hat}) {
    const auto prof = analytic_trace_profile(y, w1, w2, norm);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto tr = martingale_trace(y, w1, w2, seed, norm);
      REQUIRE(tr.values.size() == prof.c.size() + 1);
      CHECK(tr.primes.front() == w1);
      CHECK(tr.values.front() == static_cast<double>(tr.survivors.front()));
      for (std::size_t j = 0; j + 1 < tr.values.size(); ++j) {
        CHECK(tr.survivors[j + 1] <= tr.survivors[j]);
        CHECK(std::abs(tr.values[j + 1] - tr.values[j]) <= prof.c[j] * (1 + 1e-12));
      }
      const double norm_last = norm == Normalization::theta ? theta_range(w1, w2) : theta_range(w1, w2, true);
      CHECK(tr.values.back() == doctest::Approx(tr.survivors.back() / norm_last).epsilon(1e-12));
    }
    for (std::size_t j = 0; j < prof.d.size(); ++j) {
      CHECK(prof.d[j] >= 0);
      if (norm == Normalization::theta) CHECK(prof.d[j] == 0.0);
    }
  }
  CHECK_THROWS_AS(martingale_trace(100, 10, 10, 1, Normalization::theta), std::invalid_argument);
  CHECK_THROWS_AS(analytic_trace_profile(100, 1, 10, Normalization::theta), std::invalid_argument);
}

TEST_CASE("theta trace is a martingale in the mean") {
  // E X_final = E X_0 = S_{w1} mean; compare means over many seeds.
  const double y = 60, w1 = 5, w2 = 500;
  double m0 = 0, m1 = 0, v1 = 0;
  constexpr int n = 4000;
  for (int s = 0; s < n; ++s) {
    const auto tr = martingale_trace(y, w1, w2, static_cast<std::uint64_t>(s), Normalization::theta);
    m0 += tr.values.front();
    m1 += tr.values.back();
    v1 += tr.values.back() * tr.values.back();
  }
  m0 /= n;
  m1 /= n;
  const double sd = std::sqrt(v1 / n - m1 * m1);
  CHECK(std::abs(m1 - m0) < 5 * sd / std::sqrt(n));
  CHECK(m0 == doctest::Approx(60 * mertens_theta(5)).epsilon(0.05));
}

TEST_CASE("Monte Carlo CSV") {
  std::stringstream out;
  write_monte_carlo_csv(out, 20, 1e5, 0, monte_carlo_window(20, 1e5, 0, 100, false, 1), 1);
  const std::string s = out.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 2);
}
