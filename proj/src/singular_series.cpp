#include "sievelab/singular_series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <span>
#include <utility>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sievelab/core_params.hpp"
#include "sievelab/parallel.hpp"
#include "sievelab/rng.hpp"

namespace sievelab {

namespace {
// Prime zeta values P(2), P(3) (sum_p 1/p^s).
constexpr long double kPrimeZeta2 = 0.452247420041065498506543364832247934L;
constexpr long double kPrimeZeta3 = 0.174762639299443536423113314665706701L;

// For p > T >= 2k every factor is (1 - k/p)(1 - 1/p)^{-k}, whose logarithm is
// sum_{j>=2} (k - k^j)/j p^{-j}. The j = 2, 3 terms are summed through the prime
// zeta tails; the rest is at most k^4 / (12 T^3 (1 - k/T)) in absolute value.
struct Tail {
  long double log_value;
  double relative_error;
};

Tail series_tail(std::uint64_t k, std::uint64_t T, long double inv_sq, long double inv_cube) {
  if (k <= 1) return {0.0L, 0.0};
  const auto kd = static_cast<long double>(k), td = static_cast<long double>(T);
  const long double p2 = std::max(0.0L, kPrimeZeta2 - inv_sq);
  const long double p3 = std::max(0.0L, kPrimeZeta3 - inv_cube);
  const long double log_tail = (kd - kd * kd) / 2 * p2 + (kd - kd * kd * kd) / 3 * p3;
  const long double rest = kd * kd * kd * kd / (12 * td * td * td * (1 - kd / td)) + 1e-15L;
  return {log_tail, static_cast<double>(std::expm1(rest))};
}

// Sums of p^-2 and p^-3 over the first n primes.
std::pair<long double, long double> inverse_power_sums(std::span<const std::uint64_t> primes, std::size_t n) {
  long double s2 = 0, s3 = 0;
  for (std::size_t i = n; i-- > 0;) {
    const auto pd = static_cast<long double>(primes[i]);
    s2 += 1.0L / (pd * pd);
    s3 += 1.0L / (pd * pd * pd);
  }
  return {s2, s3};
}

std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > static_cast<unsigned __int128>(UINT64_MAX)) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(r);
}

// Distinct residues of the offsets modulo p, using a caller-owned scratch buffer.
std::size_t count_residues(const std::vector<std::int64_t>& h, std::uint64_t p, std::vector<std::uint32_t>& stamp,
                           std::uint32_t& epoch) {
  if (stamp.size() < p) stamp.assign(p, 0);
  ++epoch;
  std::size_t distinct = 0;
  for (std::int64_t v : h) {
    const auto r = static_cast<std::size_t>(v % static_cast<std::int64_t>(p));
    if (stamp[r] != epoch) {
      stamp[r] = epoch;
      ++distinct;
    }
  }
  return distinct;
}
}  // namespace

OffsetTuple::OffsetTuple(std::vector<std::int64_t> offsets) : offsets_(std::move(offsets)) {
  if (offsets_.empty()) throw std::invalid_argument("offset tuple must be non-empty");
  std::sort(offsets_.begin(), offsets_.end());
  if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end())
    throw std::invalid_argument("offset tuple must have distinct offsets");
  if (offsets_.front() < 0) throw std::invalid_argument("offsets must be non-negative");
}

OffsetTuple OffsetTuple::shifted(std::int64_t c) const {
  std::vector<std::int64_t> s(offsets_);
  for (auto& v : s) v += c;
  return OffsetTuple(std::move(s));
}

std::size_t residues_mod(const OffsetTuple& H, std::uint64_t p) {
  if (p < 2) throw std::invalid_argument("residues_mod needs a prime modulus");
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;
  if (p > static_cast<std::uint64_t>(H.diameter())) return H.size();
  return count_residues(H.offsets(), p, stamp, epoch);
}

std::uint64_t exact_regime_threshold(const OffsetTuple& H) {
  return std::max<std::uint64_t>(static_cast<std::uint64_t>(H.diameter()), H.size()) + 1;
}

std::uint64_t default_truncation(const OffsetTuple& H) {
  return std::max<std::uint64_t>({10'000, 10 * static_cast<std::uint64_t>(H.diameter()), exact_regime_threshold(H)});
}

SingularSeriesValue singular_series(const OffsetTuple& H, std::uint64_t trunc) {
  if (trunc < exact_regime_threshold(H))
    throw std::invalid_argument("singular_series: truncation " + std::to_string(trunc) + " below exact regime " +
                                std::to_string(exact_regime_threshold(H)));
  const std::uint64_t k = H.size();
  // The tail estimate |log factor| <= k^2/p^2 needs p >= 2k.
  const std::uint64_t upto = std::max<std::uint64_t>(trunc, 2 * k);
  const auto table = prime_table(upto);
  const auto primes = table->primes();
  const std::size_t n = table->count_upto(static_cast<double>(upto));

  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;
  for (std::size_t i = 0; i < n && primes[i] <= k; ++i)
    if (count_residues(H.offsets(), primes[i], stamp, epoch) == primes[i])
      return {0.0, primes[n - 1], 0.0, true};

  const auto diam = static_cast<std::uint64_t>(H.diameter());
  const auto kd = static_cast<long double>(k);
  long double log_value = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t p = primes[i];
    const auto pd = static_cast<long double>(p);
    const std::size_t nu = p > diam ? k : count_residues(H.offsets(), p, stamp, epoch);
    log_value += std::log1p(-static_cast<long double>(nu) / pd) - kd * std::log1p(-1.0L / pd);
  }
  const auto [inv_sq, inv_cube] = inverse_power_sums(primes, n);
  const Tail tail = series_tail(k, primes[n - 1], inv_sq, inv_cube);
  return {static_cast<double>(std::exp(log_value + tail.log_value)), primes[n - 1], tail.relative_error, false};
}

GallagherAverage gallagher_average(std::uint64_t y, std::uint64_t k, AverageMode mode, std::uint64_t samples,
                                   std::uint64_t seed) {
  if (k == 0 || k > y + 1) throw std::invalid_argument("gallagher_average needs 1 <= k <= y + 1");
  const std::uint64_t total = binomial_u64(y + 1, k);
  if (mode == AverageMode::exhaustive && total > kGallagherEnumerationCap)
    throw std::invalid_argument("gallagher_average: C(y+1, k) = " + std::to_string(total) +
                                " exceeds the enumeration cap");
  if (mode == AverageMode::sampled && samples < 2) throw std::invalid_argument("sampled mode needs >= 2 samples");

  // Primes above max(y, k) see k distinct residues for every subset; their
  // factors form one shared product up to the truncation point.
  const std::uint64_t small_limit = std::max(y, k);
  const std::uint64_t trunc = std::max<std::uint64_t>({10'000, 10 * y, 2 * k, small_limit + 1});
  const auto table = prime_table(trunc);
  const auto primes = table->primes();
  const std::size_t n_small = table->count_upto(static_cast<double>(small_limit));
  const std::size_t n_all = table->count_upto(static_cast<double>(trunc));
  const auto kd = static_cast<long double>(k);
  long double shared_log = 0;
  for (std::size_t i = n_small; i < n_all; ++i) {
    const auto pd = static_cast<long double>(primes[i]);
    shared_log += std::log1p(-kd / pd) - kd * std::log1p(-1.0L / pd);
  }
  {
    const auto [inv_sq, inv_cube] = inverse_power_sums(primes, n_all);
    shared_log += series_tail(k, primes[n_all - 1], inv_sq, inv_cube).log_value;
  }
  std::vector<long double> small_log_base(n_small);
  for (std::size_t i = 0; i < n_small; ++i)
    small_log_base[i] = -kd * std::log1p(-1.0L / static_cast<long double>(primes[i]));

  auto series_of = [&](const std::vector<std::int64_t>& h, std::vector<std::uint32_t>& stamp,
                       std::uint32_t& epoch) -> long double {
    long double lv = shared_log;
    for (std::size_t i = 0; i < n_small; ++i) {
      const std::uint64_t p = primes[i];
      const std::size_t nu = count_residues(h, p, stamp, epoch);
      if (nu == p) return 0.0L;
      lv += std::log1p(-static_cast<long double>(nu) / static_cast<long double>(p)) + small_log_base[i];
    }
    return std::exp(lv);
  };

  GallagherAverage out{y, k, 0.0, 0.0, 0};
  if (mode == AverageMode::exhaustive) {
    // Block b holds the subsets whose smallest element is b.
    std::vector<long double> block_sum(y + 1, 0.0L);
    parallel_for(y + 1, [&](std::size_t first) {
      if (y - first + 1 < k) return;
      std::vector<std::uint32_t> stamp;
      std::uint32_t epoch = 0;
      std::vector<std::int64_t> h(k);
      std::vector<std::uint64_t> idx(k);
      for (std::uint64_t j = 0; j < k; ++j) idx[j] = first + j;
      long double acc = 0;
      for (;;) {
        for (std::uint64_t j = 0; j < k; ++j) h[j] = static_cast<std::int64_t>(idx[j]);
        acc += series_of(h, stamp, epoch);
        // Next combination with idx[0] fixed.
        std::int64_t j = static_cast<std::int64_t>(k) - 1;
        while (j >= 1 && idx[j] == y - (k - 1 - static_cast<std::uint64_t>(j))) --j;
        if (j < 1) break;
        ++idx[j];
        for (std::uint64_t m = static_cast<std::uint64_t>(j) + 1; m < k; ++m) idx[m] = idx[m - 1] + 1;
      }
      block_sum[first] = acc;
    });
    long double sum = 0;
    for (long double s : block_sum) sum += s;
    out.ratio = static_cast<double>(sum / static_cast<long double>(total));
    out.subsets = total;
    return out;
  }

  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t n_blocks = (samples + kBlock - 1) / kBlock;
  std::vector<long double> sums(n_blocks, 0.0L), sq(n_blocks, 0.0L);
  parallel_for(n_blocks, [&](std::size_t b) {
    std::vector<std::uint32_t> stamp;
    std::uint32_t epoch = 0;
    std::vector<std::int64_t> h;
    const std::uint64_t first = b * kBlock;
    const std::uint64_t last = std::min(samples, first + kBlock);
    for (std::uint64_t s = first; s < last; ++s) {
      // Floyd's algorithm: uniform k-subset of {0..y}.
      rng::Stream stream(rng::derive(seed, s));
      h.clear();
      for (std::uint64_t j = y + 1 - k; j <= y; ++j) {
        const auto t = static_cast<std::int64_t>(stream.uniform_below(j + 1));
        if (std::find(h.begin(), h.end(), t) == h.end()) h.push_back(t);
        else h.push_back(static_cast<std::int64_t>(j));
      }
      std::sort(h.begin(), h.end());
      const long double v = series_of(h, stamp, epoch);
      sums[b] += v;
      sq[b] += v * v;
    }
  });
  long double s1 = 0, s2 = 0;
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    s1 += sums[b];
    s2 += sq[b];
  }
  const auto ns = static_cast<long double>(samples);
  const long double mean = s1 / ns;
  const long double var = std::max(0.0L, (s2 - ns * mean * mean) / (ns - 1));
  out.ratio = static_cast<double>(mean);
  out.stderr_ = static_cast<double>(std::sqrt(var / ns));
  out.subsets = samples;
  return out;
}

double pair_singular_series(std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("pair_singular_series needs k >= 1");
  if (k % 2 == 1) return 0.0;
  double v = kTwinPrimeConstant;
  std::uint64_t m = k;
  while (m % 2 == 0) m /= 2;
  for (std::uint64_t f = 3; f * f <= m; f += 2) {
    if (m % f != 0) continue;
    v *= static_cast<double>(f - 1) / static_cast<double>(f - 2);
    while (m % f == 0) m /= f;
  }
  if (m > 1) v *= static_cast<double>(m - 1) / static_cast<double>(m - 2);
  return v;
}

double pair_series_sum(std::uint64_t w) {
  long double s = 0;
  for (std::uint64_t k = 2; k <= w; k += 2) s += pair_singular_series(k);
  return static_cast<double>(s);
}

std::vector<OffsetTuple> read_tuple_list(std::istream& in) {
  std::vector<OffsetTuple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t\r")] == '#')
      continue;
    std::vector<std::int64_t> offsets;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        offsets.push_back(std::stoll(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::invalid_argument("tuple line " + std::to_string(line_no) + ": bad offset '" + cell + "'");
      }
    }
    out.emplace_back(std::move(offsets));
  }
  return out;
}

void write_gallagher_csv(std::ostream& out, const std::vector<GallagherAverage>& rows) {
  out << "y,k,ratio,stderr\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%llu,%.12g,%.12g\n", static_cast<unsigned long long>(r.y),
                  static_cast<unsigned long long>(r.k), r.ratio, r.stderr_);
    out << buf;
  }
}

}  // namespace sievelab
