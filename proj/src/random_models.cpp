#include "sievelab/random_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "sievelab/core_params.hpp"
#include "sievelab/parallel.hpp"
#include "sievelab/rng.hpp"

namespace sievelab {

namespace {
std::uint64_t floor_window(double y) {
  if (!(y >= 0)) throw std::invalid_argument("window length must be non-negative");
  return static_cast<std::uint64_t>(std::floor(y));
}

std::vector<std::uint64_t> primes_upto(double z) {
  if (z < 2) return {};
  const auto table = prime_table(static_cast<std::uint64_t>(std::ceil(z)));
  const auto all = table->primes();
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(table->count_upto(z))};
}

// derive(seed, p) split into its per-seed and per-prime halves so the prime half
// can be tabulated once per Monte Carlo run.
std::uint64_t prime_half(std::uint64_t p) { return rng::mix64(p * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL); }
std::uint64_t seed_half(std::uint64_t seed) { return rng::mix64(seed + rng::kGolden); }

std::uint64_t draw_residue(std::uint64_t key, std::uint64_t p, bool forbid_zero) {
  rng::Stream s(key);
  return forbid_zero ? 1 + s.uniform_below(p - 1) : s.uniform_below(p);
}
}  // namespace

std::uint64_t residue_for(std::uint64_t seed, std::uint64_t p, bool forbid_zero) {
  if (p < 2) throw std::invalid_argument("residue_for needs a prime");
  return draw_residue(rng::derive(seed, p), p, forbid_zero);
}

std::uint64_t residue_by_rejection(std::uint64_t seed, std::uint64_t p) {
  if (p < 2) throw std::invalid_argument("residue_by_rejection needs a prime");
  const std::uint64_t base = rng::derive(seed, p);
  for (std::uint64_t attempt = 1;; ++attempt) {
    rng::Stream s(rng::derive(base, attempt));
    const std::uint64_t r = s.uniform_below(p);
    if (r != 0) return r;
  }
}

ResidueAssignment::ResidueAssignment(double z, std::uint64_t seed, bool forbid_zero)
    : z_(z), seed_(seed), forbid_zero_(forbid_zero), primes_(primes_upto(z)) {
  if (z < 2) throw std::invalid_argument("residue assignment needs z >= 2");
  residues_.reserve(primes_.size());
  for (std::uint64_t p : primes_) residues_.push_back(residue_for(seed, p, forbid_zero));
}

ResidueAssignment::ResidueAssignment(double z, std::vector<std::uint64_t> residues, bool forbid_zero)
    : z_(z), forbid_zero_(forbid_zero), primes_(primes_upto(z)), residues_(std::move(residues)) {
  if (residues_.size() != primes_.size())
    throw std::invalid_argument("explicit assignment needs one residue per prime <= z");
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    if (residues_[i] >= primes_[i]) throw std::invalid_argument("residue out of range");
    if (forbid_zero_ && residues_[i] == 0) throw std::invalid_argument("zero residue in a forbid-zero assignment");
  }
}

std::uint64_t ResidueAssignment::residue(std::uint64_t p) const {
  const auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
  if (it == primes_.end() || *it != p) throw std::out_of_range("prime not covered by this assignment");
  return residues_[static_cast<std::size_t>(it - primes_.begin())];
}

ResidueAssignment sample_residues(double z, std::uint64_t seed, bool forbid_zero) {
  return ResidueAssignment(z, seed, forbid_zero);
}

namespace {
void check_cover(double z, const ResidueAssignment& a) {
  if (z > a.cutoff() && std::floor(z) >= 2 && primes_upto(z).size() > a.primes().size())
    throw std::invalid_argument("assignment does not cover all primes <= z");
}

SievedWindow collect(double y, double z, const std::vector<unsigned char>& alive) {
  SievedWindow w{y, z, {}};
  for (std::size_t n = 1; n < alive.size(); ++n)
    if (alive[n]) w.survivors.push_back(n);
  return w;
}
}  // namespace

SievedWindow sift_window(double y, double z, const ResidueAssignment& a) {
  const std::uint64_t Y = floor_window(y);
  std::vector<unsigned char> alive(Y + 1, 1);
  if (z >= 2) {
    check_cover(z, a);
    const auto primes = a.primes();
    const auto residues = a.residues();
    for (std::size_t i = 0; i < primes.size() && static_cast<double>(primes[i]) <= z; ++i) {
      const std::uint64_t p = primes[i], r = residues[i];
      if (p <= Y) {
        for (std::uint64_t n = r == 0 ? p : r; n <= Y; n += p) alive[n] = 0;
      } else if (r >= 1 && r <= Y) {
        alive[r] = 0;  // the class meets [1, Y] only at r
      }
    }
  }
  return collect(y, z, alive);
}

SievedWindow sift_window_naive(double y, double z, const ResidueAssignment& a) {
  const std::uint64_t Y = floor_window(y);
  std::vector<unsigned char> alive(Y + 1, 1);
  if (z >= 2) {
    check_cover(z, a);
    const auto primes = a.primes();
    const auto residues = a.residues();
    for (std::size_t i = 0; i < primes.size() && static_cast<double>(primes[i]) <= z; ++i)
      for (std::uint64_t n = 1; n <= Y; ++n)
        if (n % primes[i] == residues[i]) alive[n] = 0;
  }
  return collect(y, z, alive);
}

IntegerSet cramer_sample(std::uint64_t x_max, std::uint64_t seed) {
  if (x_max < 3) throw std::invalid_argument("cramer_sample needs x_max >= 3");
  constexpr std::uint64_t kBlock = 1ULL << 18;
  const std::uint64_t n_blocks = (x_max - 3) / kBlock + 1;
  std::vector<std::vector<std::uint64_t>> parts(n_blocks);
  parallel_for(n_blocks, [&](std::size_t b) {
    const std::uint64_t lo = 3 + b * kBlock;
    const std::uint64_t hi = std::min(x_max, lo + kBlock - 1);
    auto& out = parts[b];
    for (std::uint64_t n = lo; n <= hi; ++n) {
      rng::Stream s(rng::derive(seed, n));
      if (s.uniform01() < 1.0 / std::log(static_cast<double>(n))) out.push_back(n);
    }
  });
  std::vector<std::uint64_t> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return IntegerSet(SetKind::model_sample, std::move(all), x_max);
}

std::uint64_t bft_activation(std::uint64_t p) {
  const auto table = prime_table(p);
  const std::size_t i = table->count_upto(static_cast<double>(p));
  if (i == 0 || table->primes()[i - 1] != p) throw std::invalid_argument("bft_activation needs a prime");
  // z(n) >= p iff log n >= prod_{q <= p} (1 - 1/q)^{-1}.
  const double inv = static_cast<double>(std::exp(-table->log_theta_prefix(i)));
  auto n = static_cast<std::uint64_t>(std::max(8.0, std::floor(std::exp(inv)) - 2));
  while (n > 8 && sieve_cutoff_z(static_cast<double>(n - 1)) >= p) --n;
  while (sieve_cutoff_z(static_cast<double>(n)) < p) ++n;
  return n;
}

IntegerSet bft_sample(std::uint64_t x_max, std::uint64_t seed) {
  if (x_max < 8) throw std::invalid_argument("bft_sample needs x_max >= 8");
  const std::uint64_t z_max = sieve_cutoff_z(static_cast<double>(x_max));
  const std::vector<std::uint64_t> primes = primes_upto(static_cast<double>(z_max));
  std::vector<std::uint64_t> start(primes.size()), residue(primes.size());
  for (std::size_t i = 0; i < primes.size(); ++i) {
    start[i] = bft_activation(primes[i]);
    residue[i] = residue_for(seed, primes[i], false);
  }

  constexpr std::uint64_t kBlock = 1ULL << 18;
  const std::uint64_t n_blocks = (x_max - 8) / kBlock + 1;
  std::vector<std::vector<std::uint64_t>> parts(n_blocks);
  parallel_for(n_blocks, [&](std::size_t b) {
    const std::uint64_t lo = 8 + b * kBlock;
    const std::uint64_t hi = std::min(x_max, lo + kBlock - 1);
    std::vector<unsigned char> alive(hi - lo + 1, 1);
    for (std::size_t i = 0; i < primes.size(); ++i) {
      const std::uint64_t from = std::max(lo, start[i]);
      if (from > hi) continue;
      const std::uint64_t p = primes[i];
      // First n >= from with n = residue (mod p).
      std::uint64_t n = from + (residue[i] + p - from % p) % p;
      for (; n <= hi; n += p) alive[n - lo] = 0;
    }
    auto& out = parts[b];
    for (std::uint64_t n = lo; n <= hi; ++n)
      if (alive[n - lo]) out.push_back(n);
  });
  std::vector<std::uint64_t> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return IntegerSet(SetKind::model_sample, std::move(all), x_max);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t t) { return rng::derive(seed, t); }

std::vector<std::uint64_t> monte_carlo_distribution(double y, double z, std::uint64_t trials, bool forbid_zero,
                                                    std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("monte carlo needs at least one trial");
  const std::uint64_t Y = floor_window(y);
  const std::vector<std::uint64_t> primes = primes_upto(z);
  std::vector<std::uint64_t> halves(primes.size());
  for (std::size_t i = 0; i < primes.size(); ++i) halves[i] = prime_half(primes[i]);

  constexpr std::uint64_t kBlock = 512;
  const std::uint64_t n_blocks = (trials + kBlock - 1) / kBlock;
  std::vector<std::vector<std::uint64_t>> partial(n_blocks);
  parallel_for(n_blocks, [&](std::size_t b) {
    std::vector<std::uint64_t> hist(Y + 1, 0);
    std::vector<unsigned char> alive(Y + 1);
    const std::uint64_t first = b * kBlock;
    const std::uint64_t last = std::min(trials, first + kBlock);
    for (std::uint64_t t = first; t < last; ++t) {
      const std::uint64_t sh = seed_half(trial_seed(seed, t));
      std::fill(alive.begin(), alive.end(), 1);
      std::uint64_t count = Y;
      for (std::size_t i = 0; i < primes.size() && count > 0; ++i) {
        const std::uint64_t p = primes[i];
        const std::uint64_t r = draw_residue(rng::mix64(sh ^ halves[i]), p, forbid_zero);
        if (p <= Y) {
          for (std::uint64_t n = r == 0 ? p : r; n <= Y; n += p)
            if (alive[n]) {
              alive[n] = 0;
              --count;
            }
        } else if (r >= 1 && r <= Y && alive[r]) {
          alive[r] = 0;
          --count;
        }
      }
      ++hist[count];
    }
    partial[b] = std::move(hist);
  });
  std::vector<std::uint64_t> hist(Y + 1, 0);
  for (const auto& h : partial)
    for (std::size_t k = 0; k <= Y; ++k) hist[k] += h[k];
  return hist;
}

WindowEstimate monte_carlo_window(double y, double z, std::uint64_t k, std::uint64_t trials, bool forbid_zero,
                                  std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("monte carlo needs at least one trial");
  const std::uint64_t Y = floor_window(y);
  if (k > Y) return {0.0, 0.0, 0, trials};
  const auto hist = monte_carlo_distribution(y, z, trials, forbid_zero, seed);
  const double p = static_cast<double>(hist[k]) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(trials)), hist[k], trials};
}

MartingaleTrace martingale_trace(double y, double w1, double w2, std::uint64_t seed, Normalization normalization) {
  if (!(w1 >= 2 && w1 < w2)) throw std::invalid_argument("martingale_trace needs 2 <= w1 < w2");
  const bool forbid_zero = normalization == Normalization::theta_hat;
  const ResidueAssignment a(w2, seed, forbid_zero);
  const std::uint64_t Y = floor_window(y);
  std::vector<unsigned char> alive(Y + 1, 1);
  alive[0] = 0;
  std::uint64_t count = Y;

  auto apply = [&](std::uint64_t p, std::uint64_t r) {
    if (p <= Y) {
      for (std::uint64_t n = r == 0 ? p : r; n <= Y; n += p)
        if (alive[n]) {
          alive[n] = 0;
          --count;
        }
    } else if (r >= 1 && r <= Y && alive[r]) {
      alive[r] = 0;
      --count;
    }
  };

  const auto primes = a.primes();
  const auto residues = a.residues();
  std::size_t i = 0;
  for (; i < primes.size() && static_cast<double>(primes[i]) <= w1; ++i) apply(primes[i], residues[i]);

  MartingaleTrace trace{{w1}, {static_cast<double>(count)}, {count}, normalization};
  long double log_norm = 0;
  for (; i < primes.size(); ++i) {
    const auto p = static_cast<long double>(primes[i]);
    log_norm += normalization == Normalization::theta ? std::log1p(-1.0L / p) : std::log1p(-1.0L / (p - 1.0L));
    apply(primes[i], residues[i]);
    trace.primes.push_back(static_cast<double>(primes[i]));
    trace.survivors.push_back(count);
    trace.values.push_back(static_cast<double>(static_cast<long double>(count) * std::exp(-log_norm)));
  }
  return trace;
}

MartingaleProfile analytic_trace_profile(double y, double w1, double w2, Normalization normalization) {
  if (!(w1 >= 2 && w1 < w2)) throw std::invalid_argument("trace profile needs 2 <= w1 < w2");
  const auto Y = static_cast<double>(floor_window(y));
  const std::vector<std::uint64_t> primes = primes_upto(w2);
  MartingaleProfile prof;
  long double log_norm = 0;  // normalisation over (w1, p_j]
  for (std::uint64_t q : primes) {
    if (static_cast<double>(q) <= w1) continue;
    const auto p = static_cast<double>(q);
    const double r = normalization == Normalization::theta ? 1.0 - 1.0 / p : 1.0 - 1.0 / (p - 1.0);
    const double norm_j = static_cast<double>(std::exp(log_norm));
    const double class_max = std::ceil(Y / p);
    // X_{j+1} - X_j = (S (1/r - 1) - R / r) / N_j with 0 <= R <= class_max, S <= Y.
    prof.c.push_back(std::max(Y * (1.0 / r - 1.0), class_max / r) / norm_j);
    log_norm += std::log(static_cast<long double>(r));
    const double norm_next = static_cast<double>(std::exp(log_norm));
    prof.d.push_back(normalization == Normalization::theta ? 0.0 : std::floor(Y / p) / ((p - 1.0) * norm_next));
  }
  return prof;
}

void write_monte_carlo_csv(std::ostream& out, double y, double z, std::uint64_t k, const WindowEstimate& e,
                           std::uint64_t seed, bool header) {
  if (header) out << "y,z,k,trials,estimate,stderr,seed\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.12g,%.12g,%llu,%llu,%.12g,%.12g,%llu\n", y, z, static_cast<unsigned long long>(k),
                static_cast<unsigned long long>(e.trials), e.estimate, e.stderr_,
                static_cast<unsigned long long>(seed));
  out << buf;
}

}  // namespace sievelab
