#include "sievelab/prime_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sievelab/core_params.hpp"
#include "sievelab/parallel.hpp"

namespace sievelab {

namespace {
std::atomic<std::uint64_t> g_max_limit{10'000'000'000ULL};
std::atomic<std::uint64_t> g_segment{1ULL << 20};

constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

std::uint64_t floor_nonneg(double v, const char* what) {
  if (!(v >= 0)) throw std::invalid_argument(std::string(what) + " must be non-negative");
  return static_cast<std::uint64_t>(std::floor(v));
}

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}
}  // namespace

IntegerSet::IntegerSet(SetKind kind, std::vector<std::uint64_t> sorted, std::uint64_t coverage)
    : kind_(kind), elems_(std::move(sorted)), coverage_(coverage) {
  for (std::size_t i = 1; i < elems_.size(); ++i)
    if (elems_[i - 1] >= elems_[i]) throw std::invalid_argument("IntegerSet elements must be strictly increasing");
  if (!elems_.empty() && (elems_.front() == 0 || elems_.back() > coverage_))
    throw std::invalid_argument("IntegerSet elements must lie in [1, coverage]");
}

IntegerSet IntegerSet::from_unsorted(std::vector<std::uint64_t> values, SetKind kind) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::uint64_t cov = values.empty() ? kUnbounded : values.back();
  return IntegerSet(kind, std::move(values), cov);
}

IntegerSet IntegerSet::from_unsorted(std::vector<std::uint64_t> values, std::uint64_t coverage, SetKind kind) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return IntegerSet(kind, std::move(values), coverage);
}

bool IntegerSet::contains(std::uint64_t n) const { return std::binary_search(elems_.begin(), elems_.end(), n); }

std::size_t IntegerSet::count_in(std::uint64_t a, std::uint64_t b) const {
  if (b <= a) return 0;
  const auto lo = std::upper_bound(elems_.begin(), elems_.end(), a);
  const auto hi = std::upper_bound(lo, elems_.end(), b);
  return static_cast<std::size_t>(hi - lo);
}

std::vector<std::uint64_t> IntegerSet::range(std::uint64_t a, std::uint64_t b) const {
  if (b <= a) return {};
  const auto lo = std::upper_bound(elems_.begin(), elems_.end(), a);
  const auto hi = std::upper_bound(lo, elems_.end(), b);
  return {lo, hi};
}

void set_max_sieve_limit(std::uint64_t limit) { g_max_limit.store(limit); }
std::uint64_t max_sieve_limit() { return g_max_limit.load(); }

void set_segment_size(std::uint64_t size) {
  if (size < 64) throw std::invalid_argument("segment size must be at least 64");
  g_segment.store(size);
}
std::uint64_t segment_size() { return g_segment.load(); }

IntegerSet primes_in(std::uint64_t a, std::uint64_t b) {
  if (a > b) throw std::invalid_argument("primes_in requires a <= b");
  if (b > max_sieve_limit())
    throw std::out_of_range("primes_in: " + std::to_string(b) + " exceeds sieve limit " +
                            std::to_string(max_sieve_limit()));

  const std::uint64_t lo_all = a + 1;  // inclusive
  if (b < 2 || lo_all > b) return IntegerSet(SetKind::primes, {}, b);

  const std::vector<std::uint64_t> base = small_primes(isqrt(b));
  const std::uint64_t seg = segment_size();
  const std::uint64_t n_segments = (b - lo_all) / seg + 1;
  std::vector<std::vector<std::uint64_t>> found(n_segments);

  parallel_for(n_segments, [&](std::size_t s) {
    const std::uint64_t lo = lo_all + s * seg;
    const std::uint64_t hi = std::min(b, lo + seg - 1);
    std::vector<unsigned char> is_prime(hi - lo + 1, 1);
    for (std::uint64_t p : base) {
      if (p * p > hi) break;
      std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
      for (std::uint64_t m = start; m <= hi; m += p) is_prime[m - lo] = 0;
    }
    auto& out = found[s];
    for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n)
      if (is_prime[n - lo]) out.push_back(n);
  });

  std::size_t total = 0;
  for (const auto& f : found) total += f.size();
  std::vector<std::uint64_t> all;
  all.reserve(total);
  for (const auto& f : found) all.insert(all.end(), f.begin(), f.end());
  return IntegerSet(SetKind::primes, std::move(all), b);
}

namespace {
void require_coverage(const IntegerSet& A, std::uint64_t needed) {
  if (A.coverage() < needed)
    throw std::out_of_range("set membership known only up to " + std::to_string(A.coverage()) + ", need " +
                            std::to_string(needed));
}
}  // namespace

std::uint64_t gap_count_M(const IntegerSet& A, double x, double y) {
  const std::uint64_t X = floor_nonneg(x, "x");
  const std::uint64_t Y = floor_nonneg(y, "y");
  const auto& e = A.elements();
  const auto end = std::upper_bound(e.begin(), e.end(), X);
  if (end == e.begin()) return 0;
  require_coverage(A, *(end - 1) + Y);
  std::uint64_t count = 0;
  for (auto it = e.begin(); it != end; ++it) {
    const auto next = it + 1;
    if (next == e.end() || *next > *it + Y) ++count;
  }
  return count;
}

std::vector<std::uint64_t> interval_histogram(const IntegerSet& A, double x, double y) {
  const std::uint64_t X = floor_nonneg(x, "x");
  const std::uint64_t Y = floor_nonneg(y, "y");
  std::vector<std::uint64_t> hist(Y + 1, 0);
  if (X == 0) return hist;
  require_coverage(A, X + Y);

  const auto& e = A.elements();
  constexpr std::uint64_t kBlock = 1ULL << 20;
  const std::uint64_t n_blocks = (X - 1) / kBlock + 1;
  std::vector<std::vector<std::uint64_t>> partial(n_blocks);
  parallel_for(n_blocks, [&](std::size_t b) {
    std::vector<std::uint64_t> h(Y + 1, 0);
    const std::uint64_t first = 1 + b * kBlock;
    const std::uint64_t last = std::min(X, first + kBlock - 1);
    // lo: first element > n; hi: first element > n + Y.
    auto lo = std::upper_bound(e.begin(), e.end(), first);
    auto hi = std::upper_bound(lo, e.end(), first + Y);
    for (std::uint64_t n = first;; ++n) {
      ++h[static_cast<std::size_t>(hi - lo)];
      if (n == last) break;
      if (lo != e.end() && *lo == n + 1) ++lo;
      if (hi != e.end() && *hi == n + 1 + Y) ++hi;
    }
    partial[b] = std::move(h);
  });
  for (const auto& h : partial)
    for (std::size_t k = 0; k <= Y; ++k) hist[k] += h[k];
  return hist;
}

std::uint64_t interval_count_N(const IntegerSet& A, double x, double y, std::uint64_t k) {
  const auto hist = interval_histogram(A, x, y);
  return k < hist.size() ? hist[k] : 0;
}

double tail_ratio(const IntegerSet& A, double x, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  if (!(x > 1)) throw std::invalid_argument("tail_ratio needs x > 1");
  const double lx = std::log(x);
  const auto M = static_cast<double>(gap_count_M(A, x, lambda * lx));
  return M * lx / (x * std::exp(-lambda));
}

GapHistogram gap_histogram(const IntegerSet& A, double x, const std::vector<double>& edges) {
  if (edges.size() < 2) throw std::invalid_argument("gap histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i - 1] < edges[i])) throw std::invalid_argument("gap histogram edges must increase");
  if (!(x > 1)) throw std::invalid_argument("gap histogram needs x > 1");

  const std::uint64_t X = floor_nonneg(x, "x");
  const double lx = std::log(x);
  GapHistogram g{x, edges, std::vector<std::uint64_t>(edges.size() - 1, 0), 0};
  const auto& e = A.elements();
  const auto end = std::upper_bound(e.begin(), e.end(), X);
  g.elements = static_cast<std::uint64_t>(end - e.begin());
  for (auto it = e.begin(); it != end; ++it) {
    if (it + 1 == e.end()) break;  // gap unknown past the last member
    const double r = static_cast<double>(*(it + 1) - *it) / lx;
    const auto pos = std::upper_bound(edges.begin(), edges.end(), r);
    if (pos == edges.begin() || pos == edges.end()) continue;
    ++g.counts[static_cast<std::size_t>(pos - edges.begin() - 1)];
  }
  return g;
}

void write_integer_list(std::ostream& out, const IntegerSet& A) {
  for (std::uint64_t v : A.elements()) out << v << '\n';
}

IntegerSet read_integer_list(std::istream& in, SetKind kind) {
  std::vector<std::uint64_t> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    if (token.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": not a decimal integer: " + token);
    values.push_back(std::stoull(token));
  }
  return IntegerSet::from_unsorted(std::move(values), kind);
}

}  // namespace sievelab
