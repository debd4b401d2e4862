#pragma once

#include <array>
#include <cmath>

#include "lorenzlab/core.hpp"

namespace lorenzlab {

enum class Chart { Original, Transformed, Polar };

const char* chart_name(Chart c);

struct State {
  Chart chart = Chart::Transformed;
  std::array<double, 3> coords{0, 0, 0};  // (X,Y,Z), (x,y,z) or (r,theta,z)

  static State original(double X, double Y, double Z) { return {Chart::Original, {X, Y, Z}}; }
  static State transformed(double x, double y, double z) { return {Chart::Transformed, {x, y, z}}; }
  static State polar(double r, double theta, double z) { return {Chart::Polar, {r, theta, z}}; }
};

// Value and derivatives of a test function at one point. Transformed charts
// use f_x, f_y; polar charts use f_r, f_theta. The generators are second order
// in z only, so f_zz is the sole second derivative needed.
struct Partials {
  double f = 0;
  double f_x = 0, f_y = 0;
  double f_r = 0, f_theta = 0;
  double f_z = 0, f_zz = 0;
};

inline constexpr double kPi = 3.14159265358979323846;

// Representative of theta modulo pi in [-pi/2, pi/2).
double reduce_theta(double theta);

State to_transformed(const State& s, const DerivedConsts& c);
State from_transformed(const State& s, const DerivedConsts& c);

struct PolarPoint {
  double r = 0;
  double theta = 0;  // reduced
  // (x,y) = sign * from_polar(r, theta). Reducing theta modulo pi loses the
  // overall sign; the linearised dynamics do not care, round trips do.
  int sign = 1;
};

PolarPoint to_polar(double x, double y);
std::array<double, 2> from_polar(double r, double theta);

// Polar state (r, theta, z) of a transformed state off the axis.
State transformed_to_polar(const State& s);
// Uses the positive representative (sign = +1).
State polar_to_transformed(const State& s);

enum class Generator { L, L1, L0 };

// L0 acts on (theta, z): pass a Polar state (r is ignored).
// L1 accepts Transformed or Polar; L accepts Transformed or Polar.
double apply_generator(Generator which, const State& point, const Partials& d,
                       const DerivedConsts& c, double alpha);

// Drift of the angle and of log-radius for the linearised system at frozen z.
inline double theta_drift(double theta, double z) {
  double s = std::sin(theta);
  return 1.0 - z * s * s;
}
inline double radial_drift(double theta, double z) { return -1.0 + 0.5 * z * std::sin(2.0 * theta); }

}  // namespace lorenzlab

