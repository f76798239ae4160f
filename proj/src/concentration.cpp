#include "sievelab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sievelab/parallel.hpp"
#include "sievelab/rng.hpp"

namespace sievelab {

IncrementProfile::IncrementProfile(std::vector<double> c_, std::vector<double> d_) : c(std::move(c_)), d(std::move(d_)) {
  if (c.size() != d.size()) throw std::invalid_argument("increment and drift profiles differ in length");
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!(c[i] >= 0) || !(d[i] >= 0)) throw std::invalid_argument("profile entries must be non-negative");
}

IncrementProfile IncrementProfile::uniform(std::size_t n, double c, double d) {
  return {std::vector<double>(n, c), std::vector<double>(n, d)};
}

double IncrementProfile::sum_c2() const {
  double s = 0;
  for (double x : c) s += x * x;
  return s;
}

double IncrementProfile::sum_d() const {
  double s = 0;
  for (double x : d) s += x;
  return s;
}

bool IncrementProfile::driftless() const {
  return std::all_of(d.begin(), d.end(), [](double x) { return x == 0; });
}

double azuma_bound(double eps, const IncrementProfile& profile, Sided sided) {
  if (!(eps >= 0)) throw std::domain_error("azuma_bound needs eps >= 0");
  if (!profile.driftless()) throw std::invalid_argument("azuma_bound needs a driftless profile");
  const double v = profile.sum_c2();
  const double one = eps == 0 ? 1.0 : (v == 0 ? 0.0 : std::exp(-eps * eps / (2 * v)));
  return sided == Sided::two ? 2 * one : one;
}

double generalized_azuma_bound(double t, const IncrementProfile& profile) {
  if (!(t > 2 * profile.sum_d())) throw std::domain_error("generalized_azuma_bound needs t > 2 sum d");
  const double v = profile.sum_c2();
  return v == 0 ? 0.0 : 2 * std::exp(-t * t / (8 * v));
}

std::string generator_name(const GeneratorSpec& g) {
  switch (g.kind) {
    case GeneratorKind::fair_walk: return "fair-walk";
    case GeneratorKind::drifted_walk: return "drifted-walk";
    case GeneratorKind::sieve_trace: return "sieve-trace";
  }
  return "unknown";
}

namespace {
double trace_end(const GeneratorSpec& g) { return g.w2 > 0 ? g.w2 : std::pow(g.y, 4.0 / 3.0); }
}  // namespace

IncrementProfile declared_profile(const GeneratorSpec& g) {
  switch (g.kind) {
    case GeneratorKind::fair_walk: return IncrementProfile::uniform(g.steps, 1.0);
    case GeneratorKind::drifted_walk:
      if (!(g.drift >= 0 && g.drift <= 1)) throw std::invalid_argument("drift must lie in [0, 1]");
      return IncrementProfile::uniform(g.steps, 1.0, g.drift);
    case GeneratorKind::sieve_trace: {
      auto p = analytic_trace_profile(g.y, g.w1, trace_end(g), g.normalization);
      return {std::move(p.c), std::move(p.d)};
    }
  }
  throw std::invalid_argument("unknown generator");
}

std::vector<double> simulate_deviations(const GeneratorSpec& g, std::uint64_t trials, std::uint64_t seed,
                                        IncrementProfile* observed) {
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  const IncrementProfile declared = declared_profile(g);
  const std::size_t n = declared.c.size();
  std::vector<double> dev(trials);
  constexpr std::uint64_t kBlock = 1024;
  const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> block_max(blocks);

  parallel_for(blocks, [&](std::size_t b) {
    std::vector<double> mx(n, 0.0);
    const std::uint64_t first = b * kBlock, last = std::min(trials, first + kBlock);
    for (std::uint64_t t = first; t < last; ++t) {
      const std::uint64_t ts = trial_seed(seed, t);
      if (g.kind == GeneratorKind::sieve_trace) {
        const auto tr = martingale_trace(g.y, g.w1, trace_end(g), ts, g.normalization);
        for (std::size_t j = 0; j + 1 < tr.values.size(); ++j)
          mx[j] = std::max(mx[j], std::abs(tr.values[j + 1] - tr.values[j]));
        dev[t] = std::abs(tr.values.back() - tr.values.front());
      } else {
        rng::Stream s(ts);
        const double up = g.kind == GeneratorKind::fair_walk ? 0.5 : (1 + g.drift) / 2;
        double x = 0;
        for (std::size_t j = 0; j < n; ++j) x += s.uniform01() < up ? 1 : -1;
        dev[t] = std::abs(x);
        std::fill(mx.begin(), mx.end(), 1.0);
      }
    }
    block_max[b] = std::move(mx);
  });

  if (observed) {
    std::vector<double> c(n, 0.0);
    for (const auto& m : block_max)
      for (std::size_t j = 0; j < n; ++j) c[j] = std::max(c[j], m[j]);
    *observed = IncrementProfile(std::move(c), declared.d);
  }
  return dev;
}

bool TailCheckReport::any_violation() const {
  return std::any_of(rows.begin(), rows.end(), [](const TailCheckRow& r) { return r.violation; });
}

TailCheckReport empirical_tail_check(const GeneratorSpec& g, const std::vector<double>& thresholds,
                                     std::uint64_t trials, std::uint64_t seed) {
  IncrementProfile observed;
  const std::vector<double> dev = simulate_deviations(g, trials, seed, &observed);
  IncrementProfile profile =
      g.kind == GeneratorKind::sieve_trace && g.profile == ProfileMode::empirical ? observed : declared_profile(g);
  TailCheckReport r{g, trials, seed, profile, profile.driftless() ? "azuma-two-sided" : "generalized-azuma", {}};
  for (double t : thresholds) {
    const double bound =
        profile.driftless() ? azuma_bound(t, profile, Sided::two) : generalized_azuma_bound(t, profile);
    const auto hits = static_cast<std::uint64_t>(std::count_if(dev.begin(), dev.end(), [&](double x) { return x >= t; }));
    const double freq = static_cast<double>(hits) / static_cast<double>(trials);
    const double b = std::clamp(bound, 0.0, 1.0);
    const double sigma = std::sqrt(b * (1 - b) / static_cast<double>(trials));
    r.rows.push_back({t, bound, freq, sigma, hits, bound < 1 && freq > bound + 5 * sigma});
  }
  return r;
}

std::string tail_check_json(const TailCheckReport& r) {
  nlohmann::json j;
  j["generator"] = generator_name(r.generator);
  j["profile"] = r.generator.kind == GeneratorKind::sieve_trace && r.generator.profile == ProfileMode::empirical
                     ? "empirical"
                     : "analytic";
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["bound_kind"] = r.bound_kind;
  j["sum_c2"] = r.profile.sum_c2();
  j["sum_d"] = r.profile.sum_d();
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& w : r.rows)
    rows.push_back({{"threshold", w.threshold},
                    {"bound", w.bound},
                    {"frequency", w.frequency},
                    {"sigma", w.sigma},
                    {"exceedances", w.exceedances},
                    {"verdict", w.violation ? "violation" : "ok"}});
  j["verdict"] = r.any_violation() ? "violation" : "ok";
  return j.dump();
}

}  // namespace sievelab
