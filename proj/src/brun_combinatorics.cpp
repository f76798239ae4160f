#include "sievelab/brun_combinatorics.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "sievelab/parallel.hpp"

namespace sievelab {

BigInt binomial(std::int64_t n, std::int64_t j) {
  if (n < 0 || j < 0 || j > n) return 0;
  j = std::min(j, n - j);
  BigInt r = 1;
  for (std::int64_t i = 1; i <= j; ++i) r = r * (n - j + i) / i;
  return r;
}

BigInt delta_K(std::uint64_t u, std::uint64_t k, std::uint64_t K) {
  BigInt s = 0;
  const std::uint64_t top = std::min(K, u);
  for (std::uint64_t l = k; l <= top; ++l) {
    const BigInt term = binomial(static_cast<std::int64_t>(l), static_cast<std::int64_t>(k)) *
                        binomial(static_cast<std::int64_t>(u), static_cast<std::int64_t>(l));
    if ((l - k) % 2) s -= term;
    else s += term;
  }
  return s;
}

int delta(std::uint64_t u, std::uint64_t k) { return u == k ? 1 : 0; }

BonferroniReport bonferroni_check(std::uint64_t u_max, std::uint64_t k_max, std::uint64_t K_max) {
  if (u_max > 200 || k_max > 200 || K_max > 200) throw std::invalid_argument("bonferroni_check bounds must be <= 200");
  BonferroniReport r{u_max, k_max, K_max, 0, {}};
  for (std::uint64_t u = 0; u <= u_max; ++u)
    for (std::uint64_t k = 0; k <= std::min(k_max, K_max); ++k)
      for (std::uint64_t K = k; K <= K_max; ++K) {
        ++r.checked;
        const BigInt t = delta_K(u, k, K);
        const int d = delta(u, k);
        const bool upper = (K - k) % 2 == 0;
        if (upper ? !(d <= t) : !(d >= t)) r.violations.push_back({upper ? "upper" : "lower", u, k, K, t});
        BigInt rem = binomial(static_cast<std::int64_t>(u), static_cast<std::int64_t>(k)) *
                     binomial(static_cast<std::int64_t>(u) - static_cast<std::int64_t>(k) - 1,
                              static_cast<std::int64_t>(K - k));
        if ((K - k) % 2 == 0) rem = -rem;
        if (t + rem != d) r.violations.push_back({"remainder", u, k, K, t});
      }
  return r;
}

std::string bonferroni_json(const BonferroniReport& r) {
  nlohmann::json j;
  j["u_max"] = r.u_max;
  j["k_max"] = r.k_max;
  j["K_max"] = r.K_max;
  j["checked"] = r.checked;
  j["ok"] = r.ok();
  auto& v = j["violations"] = nlohmann::json::array();
  for (const auto& w : r.violations)
    v.push_back({{"kind", w.kind}, {"u", w.u}, {"k", w.k}, {"K", w.K}, {"delta_K", w.truncated.str()}});
  return j.dump();
}

namespace {

void check_inputs(const IntegerSet& A, IntegerRange N, std::uint64_t max_shift) {
  if (N.lo > N.hi) throw std::invalid_argument("empty range must have lo <= hi");
  if (N.hi + max_shift > A.coverage()) throw std::out_of_range("set membership unknown beyond its coverage");
}

std::vector<std::uint64_t> histogram(const IntegerSet& A, IntegerRange N, const std::vector<std::uint64_t>& omega,
                                     bool members_only) {
  constexpr std::uint64_t kBlock = 1 << 16;
  const std::uint64_t len = N.hi - N.lo;
  const std::uint64_t blocks = (len + kBlock - 1) / kBlock;
  std::vector<std::vector<std::uint64_t>> parts(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    std::vector<std::uint64_t> h(omega.size() + 1, 0);
    const std::uint64_t first = N.lo + 1 + b * kBlock;
    const std::uint64_t last = std::min(N.hi, first + kBlock - 1);
    for (std::uint64_t n = first; n <= last; ++n) {
      if (members_only && !A.contains(n)) continue;
      std::size_t v = 0;
      for (std::uint64_t s : omega) v += A.contains(n + s);
      ++h[v];
    }
    parts[b] = std::move(h);
  });
  std::vector<std::uint64_t> h(omega.size() + 1, 0);
  for (const auto& p : parts)
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += p[i];
  return h;
}

std::vector<std::uint64_t> validated(std::vector<std::uint64_t> omega) {
  std::sort(omega.begin(), omega.end());
  if (std::adjacent_find(omega.begin(), omega.end()) != omega.end())
    throw std::invalid_argument("shift set has repeated elements");
  return omega;
}

void check_budget(std::uint64_t size, std::uint64_t k, std::uint64_t K) {
  BigInt terms = 0;
  for (std::uint64_t l = k; l <= std::min(K, size); ++l)
    terms += binomial(static_cast<std::int64_t>(size), static_cast<std::int64_t>(l));
  if (terms > kSubsetBudget) throw std::length_error("subset enumeration exceeds the budget");
}

BigInt weigh(const std::vector<std::uint64_t>& hist, std::uint64_t k, std::uint64_t K) {
  BigInt total = 0;
  for (std::size_t v = 0; v < hist.size(); ++v)
    if (hist[v]) total += delta_K(v, k, K) * hist[v];
  return total;
}

std::vector<std::uint64_t> one_to(std::uint64_t y) {
  std::vector<std::uint64_t> omega(y);
  for (std::uint64_t h = 1; h <= y; ++h) omega[h - 1] = h;
  return omega;
}

}  // namespace

std::vector<std::uint64_t> shift_histogram(const IntegerSet& A, IntegerRange N, const std::vector<std::uint64_t>& omega) {
  const auto om = validated(omega);
  check_inputs(A, N, om.empty() ? 0 : om.back());
  return histogram(A, N, om, false);
}

std::uint64_t direct_count_T(const IntegerSet& A, IntegerRange N, const std::vector<std::uint64_t>& omega,
                             std::uint64_t k) {
  const auto om = validated(omega);
  check_inputs(A, N, om.empty() ? 0 : om.back());
  std::uint64_t t = 0;
  for (std::uint64_t n = N.lo + 1; n <= N.hi; ++n) {
    std::uint64_t v = 0;
    for (std::uint64_t s : om) v += A.contains(n + s);
    t += v == k;
  }
  return t;
}

BigInt truncated_count_U(const IntegerSet& A, IntegerRange N, const std::vector<std::uint64_t>& omega,
                         std::uint64_t k, std::uint64_t K) {
  if (K < k) throw std::invalid_argument("truncation level K must be >= k");
  check_budget(omega.size(), k, K);
  return weigh(shift_histogram(A, N, omega), k, K);
}

std::uint64_t fixed_point_count_T(const IntegerSet& A, IntegerRange N, std::uint64_t y) {
  check_inputs(A, N, y);
  std::uint64_t t = 0;
  for (std::uint64_t n = N.lo + 1; n <= N.hi; ++n)
    if (A.contains(n) && A.count_in(n, n + y) == 0) ++t;
  return t;
}

BigInt truncated_count_Uprime(const IntegerSet& A, IntegerRange N, std::uint64_t y, std::uint64_t K) {
  check_budget(y, 0, K);
  check_inputs(A, N, y);
  return weigh(histogram(A, N, one_to(y), true), 0, K);
}

}  // namespace sievelab
