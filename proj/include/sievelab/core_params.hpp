#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace sievelab {

inline constexpr double kEulerGamma = 0.5772156649015329;
inline constexpr double kExpGamma = 1.7810724179901979;     // e^gamma
inline constexpr double kExpMinusGamma = 0.5614594835668851;  // e^-gamma

// The global scale x. Stored through log x because the thresholds are used at
// scales such as x = exp(exp(10)) that overflow a double.
class Scale {
 public:
  static Scale from_x(double x);
  static Scale from_log(double log_x);

  double log_x() const { return log_x_; }
  double x() const;  // may be +inf

  // k-fold iterated logarithm truncated at zero; iterated_log(1) = max(0, log x).
  double iterated_log(int k) const;

 private:
  explicit Scale(double log_x) : log_x_(log_x) {}
  double log_x_;
};

struct ExperimentParams {
  Scale scale;
  double lambda;
  double y;  // lambda * log x
  std::uint64_t k;
  std::vector<double> iterated_logs;  // log_1 x, log_2 x, ...
};

ExperimentParams make_params(Scale scale, double lambda, std::uint64_t k, int log_depth = 4);

struct LambdaThresholds {
  double lambda_prime;
  double lambda_double_prime;  // NaN when not requested
  double lambda_k;
  double lambda_0;
  std::uint64_t K_k;
  double log_x_k;  // x_k is carried as its logarithm
  double x_k;      // exp(log_x_k), +inf when out of range
};

LambdaThresholds thresholds(Scale scale, double lambda, std::uint64_t k, bool with_double_prime = true);

// Immutable list of primes up to a limit together with prefix sums of
// log(1 - 1/p) and log(1 - 1/(p-1)) (the latter skipping p = 2).
class PrimeTable {
 public:
  explicit PrimeTable(std::uint64_t limit);

  std::uint64_t limit() const { return limit_; }
  std::span<const std::uint64_t> primes() const { return primes_; }

  // Number of primes <= z; z must not exceed limit().
  std::size_t count_upto(double z) const;

  // Sum over the first n primes of log(1 - 1/p).
  long double log_theta_prefix(std::size_t n) const { return log_theta_[n]; }
  // Sum over the first n primes, p > 2 only, of log(1 - 1/(p-1)).
  long double log_theta_hat_prefix(std::size_t n) const { return log_theta_hat_[n]; }

 private:
  std::uint64_t limit_;
  std::vector<std::uint64_t> primes_;
  std::vector<long double> log_theta_;
  std::vector<long double> log_theta_hat_;
};

// Shared table covering at least `limit`. Tables are never mutated; growing the
// cache swaps in a larger one while readers keep their snapshot.
std::shared_ptr<const PrimeTable> prime_table(std::uint64_t limit);

// Simple Eratosthenes sieve; primes in [2, limit].
std::vector<std::uint64_t> small_primes(std::uint64_t limit);

// Theta_z = prod_{p <= z} (1 - 1/p); 1 when z < 2.
double mertens_theta(double z);

// Theta_{a,b} = prod_{a < p <= b} (1 - 1/p); with hat, prod (1 - 1/(p-1)) over p > 2.
double theta_range(double a, double b, bool hat = false);

struct ThetaProducts {
  double z;
  double theta;        // Theta_z
  double theta_range;  // Theta_{a,z}
  double theta_hat;    // hat Theta_{a,z}
};

ThetaProducts theta_products(double a, double z);

// Largest prime z with prod_{p <= z} (1 - 1/p)^{-1} <= log t. Requires t >= e^2.
std::uint64_t sieve_cutoff_z(double t);

}  // namespace sievelab
