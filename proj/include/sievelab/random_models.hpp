#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sievelab/prime_engine.hpp"

namespace sievelab {

// Residue alpha_p for prime p under master seed; counter-based, so any prime can
// be drawn on its own. With forbid_zero the residue is uniform on [1, p-1].
std::uint64_t residue_for(std::uint64_t seed, std::uint64_t p, bool forbid_zero);

// The same law drawn by rejecting alpha_p = 0 from unrestricted draws on the
// sub-streams (seed, p, attempt). Exists to cross-check residue_for.
std::uint64_t residue_by_rejection(std::uint64_t seed, std::uint64_t p);

class ResidueAssignment {
 public:
  ResidueAssignment(double z, std::uint64_t seed, bool forbid_zero);
  // Explicit residues for the primes <= z in increasing order.
  ResidueAssignment(double z, std::vector<std::uint64_t> residues, bool forbid_zero = false);

  double cutoff() const { return z_; }
  std::uint64_t master_seed() const { return seed_; }
  bool forbid_zero() const { return forbid_zero_; }
  std::span<const std::uint64_t> primes() const { return primes_; }
  std::span<const std::uint64_t> residues() const { return residues_; }
  std::uint64_t residue(std::uint64_t p) const;

 private:
  double z_;
  std::uint64_t seed_ = 0;
  bool forbid_zero_;
  std::vector<std::uint64_t> primes_;
  std::vector<std::uint64_t> residues_;
};

ResidueAssignment sample_residues(double z, std::uint64_t seed, bool forbid_zero);

struct SievedWindow {
  double y;
  double z;
  std::vector<std::uint64_t> survivors;  // subset of [1, floor(y)]
  std::size_t count() const { return survivors.size(); }
};

// Survivors of [1, floor(y)] avoiding alpha_p mod p for every p <= z.
SievedWindow sift_window(double y, double z, const ResidueAssignment& a);
// Per-prime scan without the p > y shortcut; reference route.
SievedWindow sift_window_naive(double y, double z, const ResidueAssignment& a);

// Cramér's model on [3, x_max]: n kept with probability 1/log n.
IntegerSet cramer_sample(std::uint64_t x_max, std::uint64_t seed);

// The random set R on [8, x_max]: n kept iff n avoids alpha_p mod p for all p <= z(n),
// one unrestricted assignment shared by every n.
IntegerSet bft_sample(std::uint64_t x_max, std::uint64_t seed);

// Smallest integer n with z(n) >= p, i.e. the first n sieved by p in bft_sample.
std::uint64_t bft_activation(std::uint64_t p);

struct WindowEstimate {
  double estimate;
  double stderr_;
  std::uint64_t hits;
  std::uint64_t trials;
};

// Frequency of S_z = k over independent trials; trial t uses master seed derive(seed, t).
WindowEstimate monte_carlo_window(double y, double z, std::uint64_t k, std::uint64_t trials, bool forbid_zero,
                                  std::uint64_t seed);

// Empirical law of S_z: counts[k] for k = 0..floor(y).
std::vector<std::uint64_t> monte_carlo_distribution(double y, double z, std::uint64_t trials, bool forbid_zero,
                                                    std::uint64_t seed);

// Seed used for trial t of a Monte Carlo run.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t t);

enum class Normalization { theta, theta_hat };

struct MartingaleTrace {
  std::vector<double> primes;  // p_0 = w1, then the primes of (w1, w2]
  std::vector<double> values;  // X_j
  std::vector<std::uint64_t> survivors;  // S_{p_j}
  Normalization normalization;
};

// X_j = (product over (w1, p_j])^{-1} S_{p_j}. Theta runs use unrestricted
// residues (a martingale); theta_hat runs forbid alpha_p = 0 (a submartingale).
MartingaleTrace martingale_trace(double y, double w1, double w2, std::uint64_t seed, Normalization normalization);

struct MartingaleProfile {
  std::vector<double> c;  // |X_{j+1} - X_j| <= c_j
  std::vector<double> d;  // 0 <= E(X_{j+1} | F_j) - X_j <= d_j
};

// Deterministic increment and drift bounds for martingale_trace(y, w1, w2, ., normalization).
MartingaleProfile analytic_trace_profile(double y, double w1, double w2, Normalization normalization);

void write_monte_carlo_csv(std::ostream& out, double y, double z, std::uint64_t k, const WindowEstimate& e,
                           std::uint64_t seed, bool header = true);

}  // namespace sievelab
