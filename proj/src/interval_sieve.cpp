#include "sievelab/interval_sieve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "sievelab/core_params.hpp"
#include "sievelab/parallel.hpp"
#include "sievelab/rng.hpp"

namespace sievelab {

namespace {
std::vector<std::uint64_t> primes_upto(double z) {
  if (z < 2) return {};
  return small_primes(static_cast<std::uint64_t>(std::floor(z)));
}
}  // namespace

std::uint64_t interval_count_S(std::uint64_t x, std::uint64_t y, double z) {
  if (y == 0) throw std::invalid_argument("interval_count_S needs y >= 1");
  if (x > std::numeric_limits<std::uint64_t>::max() - y) throw std::overflow_error("window end overflows");
  const double cap = std::min(z, static_cast<double>(x + y));
  std::vector<unsigned char> rough(y + 1, 1);
  for (std::uint64_t p : primes_upto(cap))
    for (std::uint64_t n = (x / p + 1) * p; n <= x + y; n += p) rough[n - x] = 0;
  std::uint64_t count = 0;
  for (std::uint64_t i = 1; i <= y; ++i) count += rough[i];
  return count;
}

std::uint64_t tuple_survivors(std::uint64_t y, const std::vector<std::uint64_t>& primes,
                              const std::vector<std::uint64_t>& residues) {
  if (primes.size() != residues.size()) throw std::invalid_argument("one residue per prime required");
  std::vector<unsigned char> alive(y + 1, 1);
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const std::uint64_t p = primes[i], r = residues[i] % p;
    for (std::uint64_t n = r == 0 ? p : r; n <= y; n += p) alive[n] = 0;
  }
  std::uint64_t count = 0;
  for (std::uint64_t n = 1; n <= y; ++n) count += alive[n];
  return count;
}

std::uint64_t replay(const SieveExtremum& e) {
  if (e.method == ExtremumMethod::exact_scan) return interval_count_S(e.offset, e.y, e.z);
  return tuple_survivors(e.y, e.primes, e.residues);
}

std::uint64_t sieve_period(double z) {
  std::uint64_t period = 1;
  for (std::uint64_t p : primes_upto(z)) {
    if (period > kPeriodCap / p) return 0;
    period *= p;
  }
  return period;
}

SieveExtremum s_minus_exact(std::uint64_t y, double z) {
  if (y == 0) throw std::invalid_argument("s_minus_exact needs y >= 1");
  const std::uint64_t period = sieve_period(z);
  if (period == 0) throw std::out_of_range("primorial of z exceeds the scan cap");
  const std::vector<std::uint64_t> primes = primes_upto(z);

  // Bitmap of residues mod the period coprime to it.
  std::vector<std::uint64_t> bits((period + 63) / 64, 0);
  for (std::uint64_t n = 0; n < period; ++n) bits[n >> 6] |= 1ULL << (n & 63);
  for (std::uint64_t p : primes)
    for (std::uint64_t n = 0; n < period; n += p) bits[n >> 6] &= ~(1ULL << (n & 63));
  auto rough = [&](std::uint64_t n) { return (bits[n >> 6] >> (n & 63)) & 1ULL; };
  auto popcount_range = [&](std::uint64_t a, std::uint64_t b) {  // [a, b)
    std::uint64_t c = 0;
    while (a < b && (a & 63)) c += rough(a++);
    while (a + 64 <= b) c += std::popcount(bits[(a += 64) / 64 - 1]);
    while (a < b) c += rough(a++);
    return c;
  };
  const std::uint64_t phi = popcount_range(0, period);
  const std::uint64_t full = (y / period) * phi;
  const std::uint64_t rest = y % period;
  // Count over the wrapped range (x, x + rest] mod period.
  auto window = [&](std::uint64_t x) {
    const std::uint64_t a = x + 1, b = x + rest + 1;
    if (b <= period) return popcount_range(a, b);
    return popcount_range(std::min(a, period), period) + popcount_range(a > period ? a - period : 0, b - period);
  };

  const std::uint64_t chunks = std::min<std::uint64_t>(period, 256);
  const std::uint64_t len = (period + chunks - 1) / chunks;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> best(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t lo = c * len, hi = std::min(period, lo + len);
    if (lo >= hi) {
      best[c] = {std::numeric_limits<std::uint64_t>::max(), 0};
      return;
    }
    std::uint64_t count = window(lo), min_count = count, arg = lo;
    for (std::uint64_t x = lo + 1; x < hi; ++x) {
      count -= rough(x % period);
      count += rough((x + rest) % period);
      if (count < min_count) min_count = count, arg = x;
    }
    best[c] = {min_count, arg};
  });
  auto winner = *std::min_element(best.begin(), best.end());

  SieveExtremum e{y, z, full + winner.first, ExtremumMethod::exact_scan, true, winner.second, primes, {}};
  for (std::uint64_t p : primes) e.residues.push_back((p - winner.second % p) % p);
  return e;
}

namespace {

// Coverage counts for a residue tuple over [1, y] with O(y/p) single-prime moves.
class TupleState {
 public:
  TupleState(std::uint64_t y, std::vector<std::uint64_t> primes)
      : y_(y), primes_(std::move(primes)), residues_(primes_.size(), 0), cover_(y + 1, 0), survivors_(y) {}

  std::uint64_t survivors() const { return survivors_; }
  const std::vector<std::uint64_t>& primes() const { return primes_; }
  const std::vector<std::uint64_t>& residues() const { return residues_; }
  bool placed(std::size_t i) const { return placed_.size() > i && placed_[i]; }

  // Change in survivors if prime i moved from its class to r (or was placed at r).
  std::int64_t delta(std::size_t i, std::uint64_t r) const {
    std::int64_t d = 0;
    if (placed(i)) {
      if (residues_[i] == r) return 0;
      each(i, residues_[i], [&](std::uint64_t n) { d += cover_[n] == 1; });
    }
    each(i, r, [&](std::uint64_t n) { d -= cover_[n] == 0; });
    return d;
  }

  void assign(std::size_t i, std::uint64_t r) {
    if (placed_.size() <= i) placed_.resize(primes_.size(), 0);
    if (placed_[i]) each(i, residues_[i], [&](std::uint64_t n) { survivors_ += --cover_[n] == 0; });
    residues_[i] = r;
    placed_[i] = 1;
    each(i, r, [&](std::uint64_t n) { survivors_ -= cover_[n]++ == 0; });
  }

  // Residues worth trying for prime i: all classes when p <= y, else 0..y.
  std::uint64_t candidates(std::size_t i) const { return std::min(primes_[i], y_ + 1); }

 private:
  template <class Fn>
  void each(std::size_t i, std::uint64_t r, Fn fn) const {
    const std::uint64_t p = primes_[i];
    for (std::uint64_t n = r == 0 ? p : r; n <= y_; n += p) fn(n);
  }

  std::uint64_t y_;
  std::vector<std::uint64_t> primes_;
  std::vector<std::uint64_t> residues_;
  std::vector<unsigned char> placed_;
  std::vector<std::uint32_t> cover_;
  std::uint64_t survivors_;
};

}  // namespace

SieveExtremum s_minus_search(std::uint64_t y, double z, std::uint64_t budget, std::uint64_t seed) {
  if (y == 0) throw std::invalid_argument("s_minus_search needs y >= 1");
  if (!(z >= 2)) throw std::invalid_argument("s_minus_search needs z >= 2");
  TupleState state(y, primes_upto(z));
  const std::size_t m = state.primes().size();

  for (std::size_t i = 0; i < m; ++i) {
    std::uint64_t best_r = 0;
    std::int64_t best_d = 1;
    for (std::uint64_t r = 0; r < state.candidates(i); ++r) {
      const std::int64_t d = state.delta(i, r);
      if (d < best_d) best_d = d, best_r = r;
    }
    state.assign(i, best_r);
  }

  std::uint64_t best = state.survivors();
  std::vector<std::uint64_t> best_residues = state.residues();
  rng::Stream rs(rng::derive(seed, 0x5eed));
  std::uint64_t evaluations = 0;
  while (evaluations < budget && best > 0) {
    // Steepest descent over single-prime moves.
    bool improved = true;
    while (improved && evaluations < budget) {
      improved = false;
      std::int64_t best_d = 0;
      std::size_t bi = 0;
      std::uint64_t br = 0;
      for (std::size_t i = 0; i < m && evaluations < budget; ++i)
        for (std::uint64_t r = 0; r < state.candidates(i); ++r, ++evaluations) {
          const std::int64_t d = state.delta(i, r);
          if (d < best_d) best_d = d, bi = i, br = r;
        }
      if (best_d < 0) {
        state.assign(bi, br);
        improved = true;
      }
    }
    if (state.survivors() < best) {
      best = state.survivors();
      best_residues = state.residues();
    }
    // Kick: restart from the best tuple with a few primes reassigned at random.
    for (std::size_t i = 0; i < m; ++i) state.assign(i, best_residues[i]);
    const std::uint64_t kicks = 1 + rs.uniform_below(std::min<std::uint64_t>(m, 3));
    for (std::uint64_t k = 0; k < kicks; ++k) {
      const auto i = static_cast<std::size_t>(rs.uniform_below(m));
      state.assign(i, rs.uniform_below(state.candidates(i)));
    }
    evaluations += kicks;
  }

  return {y, z, best, ExtremumMethod::tuple_search, false, 0, state.primes(), best_residues};
}

double f_hat_estimate(double v, double z, ExtremumMethod method, std::uint64_t budget, std::uint64_t seed) {
  if (!(v > 1)) throw std::domain_error("f_hat_estimate needs v > 1");
  if (!(z >= 2)) throw std::domain_error("f_hat_estimate needs z >= 2");
  const double zv = std::pow(z, v);
  if (!(zv < 1e15)) throw std::domain_error("z^v too large for an interval scan");
  const auto y = static_cast<std::uint64_t>(std::floor(zv));
  const SieveExtremum e = method == ExtremumMethod::exact_scan ? s_minus_exact(y, z) : s_minus_search(y, z, budget, seed);
  return static_cast<double>(e.value) / (kExpMinusGamma * zv / std::log(z));
}

std::string extremum_json(const SieveExtremum& e) {
  nlohmann::json j;
  j["y"] = e.y;
  j["z"] = e.z;
  j["value"] = e.value;
  j["method"] = e.method == ExtremumMethod::exact_scan ? "exact-scan" : "tuple-search";
  j["certified"] = e.certified;
  if (e.method == ExtremumMethod::exact_scan) {
    j["witness"] = {{"offset", e.offset}};
  } else {
    nlohmann::json tuple = nlohmann::json::array();
    for (std::size_t i = 0; i < e.primes.size(); ++i) tuple.push_back({e.primes[i], e.residues[i]});
    j["witness"] = {{"residues", tuple}};
  }
  return j.dump();
}

}  // namespace sievelab
