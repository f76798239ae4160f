#include "sievelab/sieve_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "sievelab/core_params.hpp"

namespace sievelab {

double DelayTable::at(double v) const {
  if (!(v >= v_min - 1e-12 && v <= v_max + 1e-12)) throw std::out_of_range("delay table lookup outside its grid");
  const double s = std::clamp((v - v_min) / h, 0.0, static_cast<double>(values.size() - 1));
  const auto i = std::min(static_cast<std::size_t>(s), values.size() - 2);
  const double t = s - static_cast<double>(i);
  return values[i] + t * (values[i + 1] - values[i]);
}

namespace {

void check_grid(double h, double v_max) {
  if (!(h > 0 && h <= 0.1)) throw std::invalid_argument("grid step must lie in (0, 0.1]");
  if (!(v_max >= 3 && v_max <= kSpectralRange)) throw std::invalid_argument("grid end must lie in [3, 30]");
}

// Linear interpolation on a full grid starting at v = 0.
double grid_read(const std::vector<double>& g, double h, double v) {
  const double s = v / h;
  const auto i = std::min(static_cast<std::size_t>(s), g.size() - 2);
  const double t = s - static_cast<double>(i);
  return g[i] + t * (g[i + 1] - g[i]);
}

}  // namespace

DelayTables integrate_delay_tables(double h, double v_max) {
  check_grid(h, v_max);
  const auto m = static_cast<std::size_t>(std::llround(v_max / h));
  std::vector<double> om(m + 1, 0.0), f(m + 1, 0.0), F(m + 1, 0.0);
  auto v_at = [&](std::size_t i) { return static_cast<double>(i) * h; };
  const double two_eg = 2 * kExpGamma;

  auto omega_delayed = [&](double s) { return s <= 2 ? 1 / s : grid_read(om, h, s); };
  auto f_delayed = [&](double s) { return s <= 2 ? 0.0 : grid_read(f, h, s); };
  auto F_delayed = [&](double s) { return s <= 2 ? two_eg / s : grid_read(F, h, s); };

  double u_om = 1, g = 0, hh = two_eg;  // v omega, v f, v F at the last node <= 2
  for (std::size_t i = 1; i <= m; ++i) {
    const double v = v_at(i);
    if (v <= 2) {
      om[i] = v >= 1 ? 1 / v : 0.0;
      F[i] = two_eg / v;
      continue;
    }
    const double w = v_at(i - 1);
    const double a = std::max(w, 2.0);
    const double step = v - a;
    // First step after 2 may start at 2 itself when 1/h is not an integer.
    u_om += step / 2 * (omega_delayed(a - 1) + omega_delayed(v - 1));
    g += step / 2 * (F_delayed(a - 1) + F_delayed(v - 1));
    hh += step / 2 * (f_delayed(a - 1) + f_delayed(v - 1));
    om[i] = u_om / v;
    f[i] = g / v;
    F[i] = hh / v;
  }

  const auto first_omega = static_cast<std::size_t>(std::llround(std::ceil(1 / h - 1e-9)));
  DelayTables t{{DelayFunction::omega, v_at(first_omega), v_at(m), h, {om.begin() + first_omega, om.end()}},
                {DelayFunction::f, h, v_at(m), h, {f.begin() + 1, f.end()}},
                {DelayFunction::F, h, v_at(m), h, {F.begin() + 1, F.end()}}};
  return t;
}


void write_delay_csv(std::ostream& out, const DelayTables& t, std::size_t stride) {
  if (stride == 0) stride = 1;
  out << "v,omega,f,F\n";
  char buf[160];
  for (std::size_t i = 0; i < t.omega.values.size(); i += stride) {
    const double v = t.omega.node(i);
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", v, t.omega.values[i], t.f.at(v), t.F.at(v));
    out << buf;
  }
}

namespace {

using Real = boost::multiprecision::cpp_bin_float_50;
constexpr int kDegree = 64;
constexpr int kPieces = static_cast<int>(kSpectralRange);
using Nodes = std::array<Real, kDegree + 1>;

// Piecewise Chebyshev representation on the unit intervals [n, n+1]. Every piece
// uses the same Chebyshev-Lobatto points, so the delayed integrand at the nodes
// of piece n is exactly the node data of piece n-1 and each piece is obtained by
// spectral integration of its predecessor.
class SpectralSolution {
 public:
  SpectralSolution() {
    const Real pi = boost::math::constants::pi<Real>();
    for (int i = 0; i <= kDegree; ++i) {
      x_[i] = -cos(pi * i / kDegree);
      weight_[i] = (i % 2 == 0 ? 1 : -1) * ((i == 0 || i == kDegree) ? Real(0.5) : Real(1));
    }
    build_integration_matrix();

    exp_gamma_ = exp(boost::math::constants::euler<Real>());
    exp_minus_gamma_ = 1 / exp_gamma_;
    const Real two_eg = 2 * exp_gamma_;

    omega_.resize(kPieces);
    f_.resize(kPieces);
    F_.resize(kPieces);
    for (int i = 0; i <= kDegree; ++i) {
      const Real v = 1 + (1 + x_[i]) / 2;
      omega_[1][i] = 1 / v;
      f_[1][i] = 0;
      F_[1][i] = two_eg / v;
    }
    for (int n = 2; n < kPieces; ++n) {
      const Nodes io = integrate(omega_[n - 1]);
      const Nodes i_big = integrate(F_[n - 1]);
      const Nodes i_small = integrate(f_[n - 1]);
      const Real om0 = n * omega_[n - 1][kDegree];
      const Real g0 = n * f_[n - 1][kDegree];
      const Real h0 = n * F_[n - 1][kDegree];
      for (int i = 0; i <= kDegree; ++i) {
        const Real v = n + (1 + x_[i]) / 2;
        omega_[n][i] = (om0 + io[i]) / v;
        f_[n][i] = (g0 + i_big[i]) / v;
        F_[n][i] = (h0 + i_small[i]) / v;
      }
    }
    store_gaps();
  }

  // omega - e^{-gamma}, 1 - f and F - 1. Interpolating the gaps rather than the
  // functions keeps them meaningful where the functions round to their limits.
  double omega_gap(double v) const {
    return v <= 2 ? 1 / v - kExpMinusGamma : eval(omega_gap_, v);
  }
  double lower_gap(double v) const { return v <= 2 ? 1.0 : eval(lower_gap_, v); }
  double upper_gap(double v) const { return v <= 2 ? 2 * kExpGamma / v - 1 : eval(upper_gap_, v); }

 private:
  using Gaps = std::array<double, kDegree + 1>;

  void store_gaps() {
    omega_gap_.resize(kPieces);
    lower_gap_.resize(kPieces);
    upper_gap_.resize(kPieces);
    for (int n = 1; n < kPieces; ++n)
      for (int i = 0; i <= kDegree; ++i) {
        omega_gap_[n][i] = static_cast<double>(omega_[n][i] - exp_minus_gamma_);
        lower_gap_[n][i] = static_cast<double>(1 - f_[n][i]);
        upper_gap_[n][i] = static_cast<double>(F_[n][i] - 1);
      }
    for (int i = 0; i <= kDegree; ++i) {
      xd_[i] = static_cast<double>(x_[i]);
      wd_[i] = static_cast<double>(weight_[i]);
    }
  }

  void build_integration_matrix() {
    // T_k at the nodes for k = 0..N+1.
    std::vector<Nodes> T(kDegree + 2);
    for (int i = 0; i <= kDegree; ++i) {
      T[0][i] = 1;
      T[1][i] = x_[i];
    }
    for (int k = 2; k <= kDegree + 1; ++k)
      for (int i = 0; i <= kDegree; ++i) T[k][i] = 2 * x_[i] * T[k - 1][i] - T[k - 2][i];

    for (int m = 0; m <= kDegree; ++m) {
      std::vector<Real> c(kDegree + 3, Real(0));
      const Real h = (m == 0 || m == kDegree) ? Real(0.5) : Real(1);
      for (int k = 0; k <= kDegree; ++k) {
        const Real w = (k == 0 || k == kDegree) ? Real(1) : Real(2);
        c[k] = w * h * T[k][m] / kDegree;
      }
      std::vector<Real> b(kDegree + 2, Real(0));
      b[1] = c[0] - c[2] / 2;
      for (int k = 2; k <= kDegree + 1; ++k) b[k] = (c[k - 1] - c[k + 1]) / (2 * k);
      Real at_left = 0;  // value at x = -1 where T_k = (-1)^k
      for (int k = 1; k <= kDegree + 1; ++k) at_left += (k % 2 ? -b[k] : b[k]);
      b[0] = -at_left;
      for (int i = 0; i <= kDegree; ++i) {
        Real s = 0;
        for (int k = 0; k <= kDegree + 1; ++k) s += b[k] * T[k][i];
        q_[i][m] = s;
      }
    }
  }

  // Integral over [n, v_i] of the piece given by `prev` read at t - 1.
  Nodes integrate(const Nodes& prev) const {
    Nodes out;
    for (int i = 0; i <= kDegree; ++i) {
      Real s = 0;
      for (int m = 0; m <= kDegree; ++m) s += q_[i][m] * prev[m];
      out[i] = s / 2;
    }
    return out;
  }

  double eval(const std::vector<Gaps>& pieces, double v) const {
    const int n = std::min(static_cast<int>(std::floor(v)), kPieces - 1);
    const double x = 2 * (v - n) - 1;
    const Gaps& g = pieces[n];
    double num = 0, den = 0;
    for (int i = 0; i <= kDegree; ++i) {
      const double d = x - xd_[i];
      if (d == 0) return g[i];
      const double w = wd_[i] / d;
      num += w * g[i];
      den += w;
    }
    return num / den;
  }

  Nodes x_, weight_;
  std::array<Nodes, kDegree + 1> q_;
  Real exp_gamma_, exp_minus_gamma_;
  std::vector<Nodes> omega_, f_, F_;
  Gaps xd_, wd_;
  std::vector<Gaps> omega_gap_, lower_gap_, upper_gap_;
};

const SpectralSolution& spectral() {
  static const SpectralSolution s;
  return s;
}


}  // namespace

double buchstab_omega(double v) {
  if (!(v >= 1)) throw std::domain_error("buchstab_omega needs v >= 1");
  if (v > kSpectralRange) return kExpMinusGamma;
  return kExpMinusGamma + spectral().omega_gap(v);
}

double buchstab_deviation(double v) {
  if (!(v >= 1)) throw std::domain_error("buchstab_deviation needs v >= 1");
  if (v > kSpectralRange) throw std::out_of_range("buchstab_deviation is tabulated up to v = 30");
  return spectral().omega_gap(v);
}

LinearSieveValue linear_sieve_fF(double v) {
  if (!(v > 0)) throw std::domain_error("linear_sieve_fF needs v > 0");
  if (v > kSpectralRange) return {1.0, 1.0, 0.0, 0.0};
  const auto& s = spectral();
  const double lower = s.lower_gap(v), upper = s.upper_gap(v);
  return {1 - lower, 1 + upper, lower, upper};
}

FplusBound fplus_bound(double v, double v_max) {
  if (!(v > 1)) throw std::domain_error("fplus_bound needs v > 1");
  if (!(v < v_max && v_max <= kSpectralRange)) throw std::domain_error("fplus_bound needs v < v_max <= 30");
  const auto& s = spectral();
  constexpr double kStep = 1.0 / 256;

  std::vector<double> u{v};
  for (double t = std::floor(v / kStep + 1) * kStep; t < v_max; t += kStep) u.push_back(t);
  u.push_back(v_max);
  std::vector<double> dev(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) dev[i] = s.omega_gap(u[i]);

  const auto coarse = std::min_element(dev.begin(), dev.end());
  double best = *coarse, arg = u[static_cast<std::size_t>(coarse - dev.begin())];

  // Golden-section refinement around each interior local minimum of the grid.
  const double phi = (std::sqrt(5.0) - 1) / 2;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    if (!(dev[i] <= dev[i - 1] && dev[i] <= dev[i + 1])) continue;
    double a = u[i - 1], b = u[i + 1];
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = s.omega_gap(c), fd = s.omega_gap(d);
    while (b - a > 1e-11) {
      if (fc <= fd) {
        b = d, d = c, fd = fc;
        c = b - phi * (b - a), fc = s.omega_gap(c);
      } else {
        a = c, c = d, fc = fd;
        d = a + phi * (b - a), fd = s.omega_gap(d);
      }
    }
    const double m = (a + b) / 2, fm = s.omega_gap(m);
    if (fm < best) best = fm, arg = m;
  }
  const double value = 1 + kExpGamma * best;
  return {value, arg, *coarse - best};
}

DelayTables sample_delay_tables(double h, double v_max) {
  check_grid(h, v_max);
  const auto m = static_cast<std::size_t>(std::llround(v_max / h));
  const auto first_omega = static_cast<std::size_t>(std::llround(std::ceil(1 / h - 1e-9)));
  DelayTables t{{DelayFunction::omega, static_cast<double>(first_omega) * h, static_cast<double>(m) * h, h, {}},
                {DelayFunction::f, h, static_cast<double>(m) * h, h, {}},
                {DelayFunction::F, h, static_cast<double>(m) * h, h, {}}};
  for (std::size_t i = first_omega; i <= m; ++i) t.omega.values.push_back(buchstab_omega(static_cast<double>(i) * h));
  for (std::size_t i = 1; i <= m; ++i) {
    const auto r = linear_sieve_fF(static_cast<double>(i) * h);
    t.f.values.push_back(r.f);
    t.F.values.push_back(r.F);
  }
  return t;
}

const DelayTables& default_delay_tables() {
  static const DelayTables tables = sample_delay_tables();
  return tables;
}

double fplus_upper(double v) { return fplus_bound(v).value; }

double maier_bound(double y, double z) {
  if (!(z >= 2 && y >= 2)) throw std::domain_error("maier_bound needs y, z >= 2");
  if (y > std::exp(std::sqrt(z))) throw std::domain_error("maier_bound needs y <= exp(sqrt z)");
  const double u = std::log(y) / std::log(z);
  if (u < 1) throw std::domain_error("maier_bound needs y >= z");
  return y * mertens_theta(z) * -std::expm1(-u * std::log(u));
}

}  // namespace sievelab
