#include "sievelab/core_params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>

namespace sievelab {

Scale Scale::from_x(double x) {
  if (!(x > 0)) throw std::invalid_argument("scale x must be positive");
  return Scale(std::log(x));
}

Scale Scale::from_log(double log_x) {
  if (std::isnan(log_x)) throw std::invalid_argument("log x is NaN");
  return Scale(log_x);
}

double Scale::x() const { return std::exp(log_x_); }

double Scale::iterated_log(int k) const {
  if (k < 1) throw std::invalid_argument("iterated log depth must be >= 1");
  double v = std::max(0.0, log_x_);
  for (int j = 2; j <= k; ++j) v = v > 0 ? std::max(0.0, std::log(v)) : 0.0;
  return v;
}

ExperimentParams make_params(Scale scale, double lambda, std::uint64_t k, int log_depth) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  ExperimentParams p{scale, lambda, lambda * scale.log_x(), k, {}};
  for (int j = 1; j <= log_depth; ++j) p.iterated_logs.push_back(scale.iterated_log(j));
  return p;
}

LambdaThresholds thresholds(Scale scale, double lambda, std::uint64_t k, bool with_double_prime) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  const double l2 = scale.iterated_log(2);
  const double l3 = scale.iterated_log(3);
  const double l4 = scale.iterated_log(4);
  if (!(l3 > 0)) throw std::domain_error("thresholds need log_3 x > 0");

  LambdaThresholds t{};
  t.lambda_prime = std::exp(std::sqrt(l2 * l3) / std::sqrt(7.0));
  if (with_double_prime) {
    if (!(l4 > 0)) throw std::domain_error("lambda'' needs log_4 x > 0");
    t.lambda_double_prime = std::exp(4.0 * l2 * l4 / l3);
  } else {
    t.lambda_double_prime = std::numeric_limits<double>::quiet_NaN();
  }

  const double floor_term = std::pow(l2, 10.0);
  const double kd = static_cast<double>(k);
  // k log(k / lambda) is taken as its limit 0 at k = 0.
  const double klog = k == 0 ? 0.0 : kd * std::log(kd / lambda);
  t.lambda_0 = std::max(lambda, floor_term);
  t.lambda_k = std::max({lambda, kd, klog, floor_term});
  t.K_k = k * k + static_cast<std::uint64_t>(std::floor(800.0 * t.lambda_k));
  t.log_x_k = scale.log_x() * (1.0 - 1.0 / std::pow(t.lambda_k, 21.0 / 20.0));
  t.x_k = std::exp(t.log_x_k);
  return t;
}

std::vector<std::uint64_t> small_primes(std::uint64_t limit) {
  std::vector<std::uint64_t> out;
  if (limit < 2) return out;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t i = 2; i * i <= limit; ++i)
    if (!composite[i])
      for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  for (std::uint64_t i = 2; i <= limit; ++i)
    if (!composite[i]) out.push_back(i);
  return out;
}

PrimeTable::PrimeTable(std::uint64_t limit) : limit_(limit), primes_(small_primes(limit)) {
  log_theta_.resize(primes_.size() + 1);
  log_theta_hat_.resize(primes_.size() + 1);
  log_theta_[0] = 0;
  log_theta_hat_[0] = 0;
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    const auto p = static_cast<long double>(primes_[i]);
    log_theta_[i + 1] = log_theta_[i] + std::log1p(-1.0L / p);
    log_theta_hat_[i + 1] = log_theta_hat_[i] + (primes_[i] == 2 ? 0.0L : std::log1p(-1.0L / (p - 1.0L)));
  }
}

std::size_t PrimeTable::count_upto(double z) const {
  if (z < 2) return 0;
  if (z > static_cast<double>(limit_))
    throw std::out_of_range("prime table limit " + std::to_string(limit_) + " below " + std::to_string(z));
  const auto zi = static_cast<std::uint64_t>(std::floor(z));
  return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), zi) - primes_.begin());
}

namespace {
constexpr std::uint64_t kTableCeiling = 2'000'000'000ULL;

std::mutex g_table_mutex;
std::shared_ptr<const PrimeTable> g_table;
}  // namespace

std::shared_ptr<const PrimeTable> prime_table(std::uint64_t limit) {
  if (limit > kTableCeiling) throw std::out_of_range("prime table request above 2e9");
  std::lock_guard lock(g_table_mutex);
  if (!g_table || g_table->limit() < limit) {
    std::uint64_t grown = std::max<std::uint64_t>(limit, 1u << 16);
    if (g_table) grown = std::max(grown, std::min(kTableCeiling, 2 * g_table->limit()));
    g_table = std::make_shared<const PrimeTable>(grown);
  }
  return g_table;
}

namespace {
std::shared_ptr<const PrimeTable> table_for(double z) {
  return prime_table(static_cast<std::uint64_t>(std::ceil(std::max(z, 2.0))));
}
}  // namespace

double mertens_theta(double z) {
  if (z < 2) return 1.0;
  const auto table = table_for(z);
  return static_cast<double>(std::exp(table->log_theta_prefix(table->count_upto(z))));
}

double theta_range(double a, double b, bool hat) {
  if (a < 0 || a > b) throw std::invalid_argument("theta_range requires 0 <= a <= b");
  const auto table = table_for(b);
  const std::size_t ia = table->count_upto(a);
  const std::size_t ib = table->count_upto(b);
  const long double s = hat ? table->log_theta_hat_prefix(ib) - table->log_theta_hat_prefix(ia)
                            : table->log_theta_prefix(ib) - table->log_theta_prefix(ia);
  return static_cast<double>(std::exp(s));
}

ThetaProducts theta_products(double a, double z) {
  return {z, mertens_theta(z), theta_range(a, z, false), theta_range(a, z, true)};
}

std::uint64_t sieve_cutoff_z(double t) {
  if (!(t > 0)) throw std::invalid_argument("sieve_cutoff_z requires t >= e^2");
  const double log_t = std::log(t);
  // Ties go to the prime: the partial product may equal log t exactly.
  constexpr double kTieTolerance = 1e-12;
  if (log_t < 2.0 * (1.0 - kTieTolerance)) throw std::invalid_argument("sieve_cutoff_z requires t >= e^2");
  const long double target = std::log(static_cast<long double>(log_t)) + kTieTolerance;

  std::uint64_t limit = 1u << 16;
  for (;;) {
    const auto table = prime_table(limit);
    const std::size_t n = table->primes().size();
    // -log_theta_prefix is increasing in the prime index.
    if (-table->log_theta_prefix(n) > target) {
      std::size_t lo = 1, hi = n;  // invariant: prefix(lo) <= target < prefix(hi)
      while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (-table->log_theta_prefix(mid) <= target) lo = mid; else hi = mid;
      }
      return table->primes()[lo - 1];
    }
    if (table->limit() >= kTableCeiling) throw std::out_of_range("sieve_cutoff_z: t too large");
    limit = table->limit() * 2;
  }
}

}  // namespace sievelab
