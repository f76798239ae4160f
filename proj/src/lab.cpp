#include "sievelab/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sievelab/interval_sieve.hpp"
#include "sievelab/random_models.hpp"
#include "sievelab/sieve_functions.hpp"
#include "sievelab/singular_series.hpp"

namespace sievelab {

using nlohmann::json;

std::string model_name(Model m) {
  switch (m) {
    case Model::primes: return "primes";
    case Model::cramer: return "cramer";
    case Model::bft: return "bft";
  }
  return "unknown";
}

bool is_stochastic(Model m) { return m != Model::primes; }

IntegerSet model_set(Model m, std::uint64_t upto, std::uint64_t seed) {
  if (upto > max_sieve_limit()) throw std::out_of_range("requested range exceeds the sieving cap");
  switch (m) {
    case Model::primes: return primes_in(0, upto);
    case Model::cramer: return cramer_sample(upto, seed);
    case Model::bft: return bft_sample(upto, seed);
  }
  throw std::invalid_argument("unknown model");
}

double log_power_integral(double x, int m) {
  if (!(x >= 2)) throw std::domain_error("log_power_integral needs x >= 2");
  if (x == 2) return 0.0;
  // t = e^s turns the integrand into e^s / s^m, smooth on [log 2, log x].
  auto g = [m](double s) { return std::exp(s) / std::pow(s, m); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, std::log(2.0), std::log(x), 20, 1e-13);
}

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::set<std::string> common{"experiment", "description", "x", "models", "seeds"};
  static const std::map<std::string, std::set<std::string>> keys = [] {
    std::map<std::string, std::set<std::string>> k;
    auto with = [](std::set<std::string> extra) {
      extra.insert(common.begin(), common.end());
      return extra;
    };
    k["gap_tail"] = with({"lambdas"});
    k["poisson_fit"] = with({"lambda", "k_max"});
    k["model_compare"] = with({"tuples"});
    k["breakdown_scan"] = with({"lambdas", "c_grid"});
    return k;
  }();
  return keys;
}

double positive_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  const double v = j.get<double>();
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
  return v;
}

std::vector<double> positive_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(positive_number(e, what + " entry"));
  return out;
}

Model parse_model(const json& j) {
  if (!j.is_string()) throw ConfigError("model names must be strings");
  const auto s = j.get<std::string>();
  if (s == "primes") return Model::primes;
  if (s == "cramer") return Model::cramer;
  if (s == "bft") return Model::bft;
  throw ConfigError("unknown model '" + s + "'");
}

struct Common {
  double x;
  std::vector<Model> models;
  std::vector<std::uint64_t> seeds;
};

Common read_common(const json& c) {
  Common out{c.at("x").get<double>(), {}, {}};
  for (const auto& m : c.at("models")) out.models.push_back(parse_model(m));
  for (const auto& s : c.at("seeds")) out.seeds.push_back(s.get<std::uint64_t>());
  return out;
}

struct Replica {
  Model model;
  std::optional<std::uint64_t> seed;
  IntegerSet set;
};

template <class Fn>
void for_each_replica(const Common& c, std::uint64_t upto, Fn fn) {
  for (Model m : c.models) {
    if (!is_stochastic(m)) {
      fn(Replica{m, std::nullopt, model_set(m, upto, 0)});
      continue;
    }
    for (std::uint64_t s : c.seeds) fn(Replica{m, s, model_set(m, upto, s)});
  }
}

Cell seed_cell(const Replica& r) { return r.seed ? Cell{*r.seed} : Cell{std::string("-")}; }
std::string provenance(const Replica& r) { return r.seed ? "monte-carlo" : "exact"; }
Cell maybe(double v) { return std::isfinite(v) ? Cell{v} : Cell{}; }

struct MeanSd {
  double mean;
  double stderr_;
};

MeanSd mean_stderr(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, std::nan("")};
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

std::uint64_t floor_x(double x) { return static_cast<std::uint64_t>(std::floor(x)); }

std::uint64_t upto_for(double x, double max_window) {
  return floor_x(x) + static_cast<std::uint64_t>(std::ceil(max_window)) + 1;
}

ExperimentReport start(const std::string& name, const json& config) {
  return {name, config, std::string("sievelab ") + kVersion, 0.0, {}};
}

template <class Fn>
ExperimentReport timed(const std::string& name, const json& raw, Fn body) {
  const json config = normalize_config(name, raw);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport r = start(name, config);
  body(config, r);
  r.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

json normalize_config(const std::string& experiment, const json& raw) {
  const auto& keys = allowed_keys();
  const auto it = keys.find(experiment);
  if (it == keys.end()) throw ConfigError("unknown experiment '" + experiment + "'");
  if (!raw.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [k, v] : raw.items())
    if (!it->second.count(k)) throw ConfigError("unknown key '" + k + "' for " + experiment);

  json c = raw;
  if (c.contains("experiment") && c["experiment"] != experiment)
    throw ConfigError("config is for '" + c["experiment"].dump() + "', not " + experiment);
  c["experiment"] = experiment;
  if (c.contains("description") && !c["description"].is_string()) throw ConfigError("description must be a string");

  if (!c.contains("x")) throw ConfigError("x is required");
  const double x = positive_number(c["x"], "x");
  if (x < 10) throw ConfigError("x must be at least 10");

  if (!c.contains("models")) c["models"] = experiment == "model_compare" ? json{"primes", "cramer", "bft"} : json{"primes"};
  if (!c["models"].is_array()) throw ConfigError("models must be an array");
  bool stochastic = false;
  for (const auto& m : c["models"]) stochastic |= is_stochastic(parse_model(m));

  if (!c.contains("seeds")) c["seeds"] = json::array();
  if (!c["seeds"].is_array()) throw ConfigError("seeds must be an array");
  for (const auto& s : c["seeds"])
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      throw ConfigError("seeds must be non-negative integers");
  if (stochastic && c["seeds"].empty()) throw ConfigError("stochastic models need explicit seeds");

  if (experiment == "gap_tail" || experiment == "breakdown_scan") {
    if (!c.contains("lambdas")) throw ConfigError("lambdas is required");
    positive_list(c["lambdas"], "lambdas");
  }
  if (experiment == "poisson_fit") {
    if (!c.contains("lambda")) throw ConfigError("lambda is required");
    positive_number(c["lambda"], "lambda");
    if (!c.contains("k_max")) c["k_max"] = 5;
    if (!c["k_max"].is_number_integer() || c["k_max"].get<std::int64_t>() < 0 || c["k_max"].get<std::int64_t>() > 1000)
      throw ConfigError("k_max must be an integer in [0, 1000]");
  }
  if (experiment == "model_compare") {
    if (!c.contains("tuples")) throw ConfigError("tuples is required");
    if (!c["tuples"].is_array()) throw ConfigError("tuples must be an array of offset lists");
    for (const auto& t : c["tuples"]) {
      if (!t.is_array() || t.empty()) throw ConfigError("each tuple must be a non-empty array");
      for (const auto& h : t)
        if (!h.is_number_integer() || h.get<std::int64_t>() < 0 || h.get<std::int64_t>() > 1000000)
          throw ConfigError("tuple offsets must be integers in [0, 1e6]");
      try {
        OffsetTuple(t.get<std::vector<std::int64_t>>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("bad tuple: ") + e.what());
      }
    }
  }
  if (experiment == "breakdown_scan") {
    if (!c.contains("c_grid")) c["c_grid"] = json{0.25, 0.5};
    for (double v : positive_list(c["c_grid"], "c_grid"))
      if (!(v > 1.0 / 19 && v < 1)) throw ConfigError("c_grid entries must lie in (1/19, 1)");
  }
  return c;
}

ExperimentReport run_gap_tail(const json& raw) {
  return timed("gap_tail", raw, [](const json& c, ExperimentReport& r) {
    const Common com = read_common(c);
    const std::vector<double> lambdas = c["lambdas"].get<std::vector<double>>();
    const double log_x = std::log(com.x);
    Table t{"tail", "M exact for primes, Monte Carlo per seed for models; mean rows carry stderr over seeds",
            {"model", "seed", "lambda", "y", "M", "ratio", "stderr", "provenance"}, {}};
    if (!lambdas.empty()) {
      const double y_max = *std::max_element(lambdas.begin(), lambdas.end()) * log_x;
      std::map<std::pair<int, std::size_t>, std::vector<double>> ratios, counts;
      for_each_replica(com, upto_for(com.x, y_max), [&](const Replica& rep) {
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
          const double y = lambdas[i] * log_x;
          const std::uint64_t m = gap_count_M(rep.set, com.x, y);
          const double ratio = tail_ratio(rep.set, com.x, lambdas[i]);
          t.rows.push_back({model_name(rep.model), seed_cell(rep), lambdas[i], y, m, ratio, Cell{}, provenance(rep)});
          ratios[{static_cast<int>(rep.model), i}].push_back(ratio);
          counts[{static_cast<int>(rep.model), i}].push_back(static_cast<double>(m));
        }
      });
      for (Model m : com.models) {
        if (!is_stochastic(m)) continue;
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
          const auto key = std::make_pair(static_cast<int>(m), i);
          const MeanSd rs = mean_stderr(ratios[key]);
          t.rows.push_back({model_name(m), std::string("mean"), lambdas[i], lambdas[i] * log_x,
                            mean_stderr(counts[key]).mean, rs.mean, maybe(rs.stderr_), std::string("monte-carlo mean")});
        }
      }
    }
    r.tables.push_back(std::move(t));
  });
}

ExperimentReport run_poisson_fit(const json& raw) {
  return timed("poisson_fit", raw, [](const json& c, ExperimentReport& r) {
    const Common com = read_common(c);
    const double lambda = c["lambda"].get<double>();
    const auto k_max = c["k_max"].get<std::uint64_t>();
    const double y = lambda * std::log(com.x);
    const auto xn = static_cast<double>(floor_x(com.x));
    Table t{"fit", "N exact for primes, Monte Carlo per seed for models; poisson column is the e^-lambda lambda^k/k! law",
            {"model", "seed", "k", "N", "N_over_x", "poisson", "ratio", "provenance"}, {}};
    Table s{"summary", "chi_square sums (N - x p_k)^2 / (x p_k) over k <= k_max; total_fraction sums N/x over all k",
            {"model", "seed", "bins", "chi_square", "total_fraction", "provenance"}, {}};
    for_each_replica(com, upto_for(com.x, y), [&](const Replica& rep) {
      const auto hist = interval_histogram(rep.set, com.x, y);
      double chi = 0, total = 0;
      for (std::uint64_t h : hist) total += static_cast<double>(h);
      for (std::uint64_t k = 0; k <= k_max; ++k) {
        const std::uint64_t n = k < hist.size() ? hist[k] : 0;
        const double p = std::exp(-lambda + static_cast<double>(k) * std::log(lambda) - std::lgamma(static_cast<double>(k) + 1));
        const double frac = static_cast<double>(n) / xn;
        chi += (static_cast<double>(n) - xn * p) * (static_cast<double>(n) - xn * p) / (xn * p);
        t.rows.push_back({model_name(rep.model), seed_cell(rep), k, n, frac, p, frac / p, provenance(rep)});
      }
      s.rows.push_back({model_name(rep.model), seed_cell(rep), k_max + 1, chi, total / xn, provenance(rep)});
    });
    r.tables.push_back(std::move(t));
    r.tables.push_back(std::move(s));
  });
}

namespace {
std::uint64_t tuple_count(const IntegerSet& A, const OffsetTuple& H, std::uint64_t x) {
  const auto& h = H.offsets();
  const auto lo = static_cast<std::uint64_t>(h.front());
  std::uint64_t count = 0;
  for (std::uint64_t a : A.elements()) {
    if (a <= lo) continue;
    const std::uint64_t n = a - lo;
    if (n > x) break;
    bool all = true;
    for (std::size_t i = 1; i < h.size() && all; ++i) all = A.contains(n + static_cast<std::uint64_t>(h[i]));
    count += all;
  }
  return count;
}

std::string tuple_label(const OffsetTuple& H) {
  std::string s;
  for (auto h : H.offsets()) s += (s.empty() ? "" : " ") + std::to_string(h);
  return s;
}
}  // namespace

ExperimentReport run_model_compare(const json& raw) {
  return timed("model_compare", raw, [](const json& c, ExperimentReport& r) {
    const Common com = read_common(c);
    std::vector<OffsetTuple> tuples;
    for (const auto& t : c["tuples"]) tuples.emplace_back(t.get<std::vector<std::int64_t>>());
    Table t{"counts",
            "count exact for primes, Monte Carlo per seed for models; hl_nominal = S(H) * integral dt/log^|H| t and "
            "cramer_nominal = integral dt/log^|H| t are nominal predictions",
            {"tuple", "model", "seed", "count", "singular_series", "hl_nominal", "cramer_nominal", "ratio_hl",
             "ratio_cramer", "stderr", "provenance"},
            {}};
    if (!tuples.empty()) {
      std::int64_t reach = 0;
      for (const auto& H : tuples) reach = std::max(reach, H.offsets().back());
      const std::uint64_t x = floor_x(com.x);
      std::vector<double> series, integral;
      for (const auto& H : tuples) {
        series.push_back(singular_series(H).value);
        integral.push_back(log_power_integral(com.x, static_cast<int>(H.size())));
      }
      std::map<std::pair<int, std::size_t>, std::vector<double>> counts;
      for_each_replica(com, x + static_cast<std::uint64_t>(reach) + 1, [&](const Replica& rep) {
        for (std::size_t i = 0; i < tuples.size(); ++i) {
          const std::uint64_t n = tuple_count(rep.set, tuples[i], x);
          const double hl = series[i] * integral[i];
          t.rows.push_back({tuple_label(tuples[i]), model_name(rep.model), seed_cell(rep), n, series[i], hl, integral[i],
                            hl > 0 ? Cell{static_cast<double>(n) / hl} : Cell{}, static_cast<double>(n) / integral[i],
                            Cell{}, provenance(rep)});
          counts[{static_cast<int>(rep.model), i}].push_back(static_cast<double>(n));
        }
      });
      for (Model m : com.models) {
        if (!is_stochastic(m)) continue;
        for (std::size_t i = 0; i < tuples.size(); ++i) {
          const MeanSd ms = mean_stderr(counts[{static_cast<int>(m), i}]);
          const double hl = series[i] * integral[i];
          t.rows.push_back({tuple_label(tuples[i]), model_name(m), std::string("mean"), ms.mean, series[i], hl,
                            integral[i], hl > 0 ? Cell{ms.mean / hl} : Cell{}, ms.mean / integral[i], maybe(ms.stderr_),
                            std::string("monte-carlo mean")});
        }
      }
    }
    r.tables.push_back(std::move(t));
  });
}

ExperimentReport run_breakdown_scan(const json& raw) {
  return timed("breakdown_scan", raw, [](const json& c, ExperimentReport& r) {
    const Common com = read_common(c);
    const std::vector<double> lambdas = c["lambdas"].get<std::vector<double>>();
    const std::vector<double> cs = c["c_grid"].get<std::vector<double>>();
    const double log_x = std::log(com.x), log2_x = std::log(log_x);
    const double xn = static_cast<double>(floor_x(com.x));
    Table scan{"lambda_scan",
               "N0 exact for primes, Monte Carlo per seed for models; maier_factor_nominal = exp(lambda exp(-u log u)) "
               "with u = log log x / log lambda and prediction_nominal = e^-lambda times it are nominal",
               {"model", "seed", "lambda", "y", "N0", "density", "poisson", "ratio", "u", "maier_factor_nominal",
                "prediction_nominal", "provenance"},
               {}};
    Table grid{"exponents",
               "lambda = log^c x, v = 1 + 1/c; f from the linear sieve, fplus_proxy = e^gamma min omega (a proxy); "
               "upper_nominal = exp(-f lambda) and lower_nominal = exp(-fplus lambda) are nominal",
               {"model", "seed", "c", "lambda", "v", "f", "fplus_proxy", "upper_nominal", "lower_nominal",
                "M_density", "N0_density", "provenance"},
               {}};
    std::vector<double> grid_lambdas;
    for (double cc : cs) grid_lambdas.push_back(std::pow(log_x, cc));
    double lam_max = 0;
    for (double l : lambdas) lam_max = std::max(lam_max, l);
    for (double l : grid_lambdas) lam_max = std::max(lam_max, l);
    if (lam_max > 0) {
      for_each_replica(com, upto_for(com.x, lam_max * log_x), [&](const Replica& rep) {
        for (double lambda : lambdas) {
          const double y = lambda * log_x;
          const std::uint64_t n0 = interval_count_N(rep.set, com.x, y, 0);
          const double density = static_cast<double>(n0) / xn;
          const double u = lambda > 1 ? log2_x / std::log(lambda) : std::nan("");
          const double factor = u >= 1 ? std::exp(lambda * std::exp(-u * std::log(u))) : std::nan("");
          scan.rows.push_back({model_name(rep.model), seed_cell(rep), lambda, y, n0, density, std::exp(-lambda),
                               density / std::exp(-lambda), maybe(u), maybe(factor), maybe(std::exp(-lambda) * factor),
                               provenance(rep)});
        }
        for (std::size_t i = 0; i < cs.size(); ++i) {
          const double lambda = grid_lambdas[i], v = 1 + 1 / cs[i], y = lambda * log_x;
          const double f = linear_sieve_fF(v).f, fp = fplus_upper(v);
          const double m_density = static_cast<double>(gap_count_M(rep.set, com.x, y)) * log_x / xn;
          const double n_density = static_cast<double>(interval_count_N(rep.set, com.x, y, 0)) / xn;
          grid.rows.push_back({model_name(rep.model), seed_cell(rep), cs[i], lambda, v, f, fp, std::exp(-f * lambda),
                               std::exp(-fp * lambda), m_density, n_density, provenance(rep)});
        }
      });
    }
    r.tables.push_back(std::move(scan));
    r.tables.push_back(std::move(grid));
  });
}

ExperimentReport run_experiment(const std::string& experiment, const json& config) {
  if (experiment == "gap_tail") return run_gap_tail(config);
  if (experiment == "poisson_fit") return run_poisson_fit(config);
  if (experiment == "model_compare") return run_model_compare(config);
  if (experiment == "breakdown_scan") return run_breakdown_scan(config);
  throw ConfigError("unknown experiment '" + experiment + "'");
}

namespace {
std::string csv_cell(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const {
      if (!std::isfinite(v)) return "";
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", v);
      return buf;
    }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
  };
  return std::visit(V{}, c);
}

json json_cell(const Cell& c) {
  struct V {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(std::int64_t v) const { return v; }
    json operator()(std::uint64_t v) const { return v; }
    json operator()(double v) const { return std::isfinite(v) ? json(v) : json(nullptr); }
    json operator()(const std::string& s) const { return s; }
  };
  return std::visit(V{}, c);
}
}  // namespace

void write_table_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

json report_json(const ExperimentReport& r) {
  json j;
  j["experiment"] = r.experiment;
  j["version"] = r.version;
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  j["config"] = r.config;
  auto& tables = j["tables"] = json::array();
  for (const auto& t : r.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json jr = json::array();
      for (const auto& cell : row) jr.push_back(json_cell(cell));
      rows.push_back(std::move(jr));
    }
    tables.push_back({{"name", t.name}, {"provenance", t.provenance}, {"columns", t.columns}, {"rows", rows}});
  }
  return j;
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto json_path = dir / (r.experiment + ".json");
  std::ofstream(json_path) << report_json(r).dump(2) << '\n';
  written.push_back(json_path);
  for (const auto& t : r.tables) {
    const auto p = dir / (r.experiment + "_" + t.name + ".csv");
    std::ofstream out(p);
    write_table_csv(out, t);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    written.push_back(p);
  }
  return written;
}

}  // namespace sievelab
