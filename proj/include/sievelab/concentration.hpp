#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sievelab/random_models.hpp"

namespace sievelab {

// |X_{i+1} - X_i| <= c_i and X_i <= E(X_{i+1} | F_i) <= X_i + d_i.
struct IncrementProfile {
  std::vector<double> c;
  std::vector<double> d;

  IncrementProfile() = default;
  IncrementProfile(std::vector<double> c, std::vector<double> d);
  static IncrementProfile uniform(std::size_t n, double c, double d = 0.0);

  double sum_c2() const;
  double sum_d() const;
  bool driftless() const;
};

enum class Sided { one, two };

// exp(-eps^2 / (2 sum c_i^2)), doubled when two-sided. Not clamped to 1.
double azuma_bound(double eps, const IncrementProfile& profile, Sided sided = Sided::one);

// 2 exp(-t^2 / (8 sum c_i^2)), valid for t > 2 sum d_i. Not clamped to 1.
double generalized_azuma_bound(double t, const IncrementProfile& profile);

enum class GeneratorKind { fair_walk, drifted_walk, sieve_trace };
enum class ProfileMode { analytic, empirical };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::fair_walk;
  std::size_t steps = 100;  // walks
  double drift = 0.1;       // drifted walk: P(+1) = (1 + drift) / 2
  double y = 100;           // sieve trace window
  double w1 = 10;
  double w2 = 0;            // 0 means y^{4/3}
  Normalization normalization = Normalization::theta;
  // For sieve traces: analytic increment bounds, or the largest increment seen at
  // each step over the same trials.
  ProfileMode profile = ProfileMode::analytic;
};

std::string generator_name(const GeneratorSpec& g);

struct TailCheckRow {
  double threshold;
  double bound;
  double frequency;  // P(|X_n - X_0| >= threshold) over the trials
  double sigma;      // binomial standard error at the bound
  std::uint64_t exceedances;
  bool violation;    // frequency > bound + 5 sigma
};

struct TailCheckReport {
  GeneratorSpec generator;
  std::uint64_t trials;
  std::uint64_t seed;
  IncrementProfile profile;
  std::string bound_kind;  // "azuma-two-sided" or "generalized-azuma"
  std::vector<TailCheckRow> rows;
  bool any_violation() const;
};

// Simulates the generator once and compares the two-sided deviation frequency with
// the matching bound at every threshold.
TailCheckReport empirical_tail_check(const GeneratorSpec& g, const std::vector<double>& thresholds,
                                     std::uint64_t trials, std::uint64_t seed);

// Deviation |X_n - X_0| of every trial, in trial order.
std::vector<double> simulate_deviations(const GeneratorSpec& g, std::uint64_t trials, std::uint64_t seed,
                                        IncrementProfile* observed = nullptr);

IncrementProfile declared_profile(const GeneratorSpec& g);

std::string tail_check_json(const TailCheckReport& r);

}  // namespace sievelab
