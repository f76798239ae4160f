#pragma once

#include <iosfwd>
#include <vector>

namespace sievelab {

enum class DelayFunction { omega, f, F };

// Values of one delay-equation solution on the uniform grid v_min, v_min + h, ..., v_max.
struct DelayTable {
  DelayFunction id;
  double v_min;
  double v_max;
  double h;
  std::vector<double> values;

  double node(std::size_t i) const { return v_min + static_cast<double>(i) * h; }
  // Linear interpolation; v must lie in [v_min, v_max].
  double at(double v) const;
};

struct DelayTables {
  DelayTable omega;  // on [1, v_max]
  DelayTable f;      // on [h, v_max]
  DelayTable F;      // on [h, v_max]
};

// Trapezoid integration of v omega(v), v f(v), v F(v) with step h (1/h should be
// an integer so delayed reads land on nodes; otherwise they are interpolated).
// Accurate to about 1e-7 at h = 1e-3, which is coarser than 1 - f and F - 1 once
// v passes 9 or so.
DelayTables integrate_delay_tables(double h = 1e-3, double v_max = 20.0);

// The spectral solutions below sampled on the same grid; f <= 1 <= F holds at every node.
DelayTables sample_delay_tables(double h = 1e-3, double v_max = 20.0);

// Sampled tables at the default step, built once.
const DelayTables& default_delay_tables();

// Rows v, omega, f, F at every `stride`-th node with v >= 1.
void write_delay_csv(std::ostream& out, const DelayTables& t, std::size_t stride = 1);

// Largest v for which the spectral solutions are stored; beyond it the accessors
// return the limits, which agree with the solutions far below double resolution.
inline constexpr double kSpectralRange = 30.0;

double buchstab_omega(double v);

// omega(v) - e^{-gamma}, resolved well below double rounding of omega itself.
double buchstab_deviation(double v);

struct LinearSieveValue {
  double f;
  double F;
  double lower_gap;  // 1 - f(v)
  double upper_gap;  // F(v) - 1
};

LinearSieveValue linear_sieve_fF(double v);

struct FplusBound {
  double value;           // e^gamma * min of omega over [v, v_max]
  double argmin;
  double refinement_gap;  // coarse-grid minimum minus refined minimum, >= 0
};

FplusBound fplus_bound(double v, double v_max = 20.0);
double fplus_upper(double v);

// y Theta_z (1 - exp(-u log u)), u = log y / log z: the extremal bound with its
// o(1) dropped. A trend curve only.
double maier_bound(double y, double z);

}  // namespace sievelab
