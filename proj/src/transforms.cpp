#include "lorenzlab/transforms.hpp"

#include <cmath>
#include <string>

namespace lorenzlab {

const char* chart_name(Chart c) {
  switch (c) {
    case Chart::Original: return "original";
    case Chart::Transformed: return "transformed";
    case Chart::Polar: return "polar";
  }
  return "?";
}

double reduce_theta(double theta) {
  double t = std::fmod(theta + 0.5 * kPi, kPi);
  if (t < 0) t += kPi;
  double out = t - 0.5 * kPi;
  if (out >= 0.5 * kPi) out -= kPi;
  return out;
}

static void expect_chart(const State& s, Chart want, const char* op) {
  if (s.chart != want)
    throw DomainError(std::string(op) + ": expected " + chart_name(want) + " chart, got " +
                      chart_name(s.chart));
}

// eta = (1+sigma)/(2 sigma)
static double sigma_of(const DerivedConsts& c) { return 1.0 / (2.0 * c.eta - 1.0); }

State to_transformed(const State& s, const DerivedConsts& c) {
  expect_chart(s, Chart::Original, "to_transformed");
  const auto& [X, Y, Z] = s.coords;
  double sigma = sigma_of(c);
  return State::transformed(c.nu / c.chi * X, c.nu * sigma * (Y - X),
                            c.z_star - c.chi * c.chi * sigma * Z);
}

State from_transformed(const State& s, const DerivedConsts& c) {
  expect_chart(s, Chart::Transformed, "from_transformed");
  const auto& [x, y, z] = s.coords;
  double sigma = sigma_of(c);
  double X = c.chi / c.nu * x;
  double Y = X + y / (c.nu * sigma);
  double Z = (c.z_star - z) / (c.chi * c.chi * sigma);
  return State::original(X, Y, Z);
}

PolarPoint to_polar(double x, double y) {
  if (x == 0.0 && y == 0.0) throw DomainError("to_polar: the axis x=y=0 has no polar chart");
  double u = x + y;
  PolarPoint p;
  p.r = std::log(std::hypot(x, u));
  double th = std::atan2(x, u);
  if (th >= 0.5 * kPi) {
    th -= kPi;
    p.sign = -1;
  } else if (th < -0.5 * kPi) {
    th += kPi;
    p.sign = -1;
  }
  p.theta = th;
  return p;
}

std::array<double, 2> from_polar(double r, double theta) {
  double e = std::exp(r);
  double s = std::sin(theta), co = std::cos(theta);
  return {e * s, e * (co - s)};
}

State transformed_to_polar(const State& s) {
  expect_chart(s, Chart::Transformed, "transformed_to_polar");
  auto p = to_polar(s.coords[0], s.coords[1]);
  return State::polar(p.r, p.theta, s.coords[2]);
}

State polar_to_transformed(const State& s) {
  expect_chart(s, Chart::Polar, "polar_to_transformed");
  auto xy = from_polar(s.coords[0], s.coords[1]);
  return State::transformed(xy[0], xy[1], s.coords[2]);
}

double apply_generator(Generator which, const State& pt, const Partials& d,
                       const DerivedConsts& c, double alpha) {
  double z = pt.coords[2];
  double ou = -c.gamma * (z - c.z_star) * d.f_z + 0.5 * alpha * alpha * d.f_zz;

  if (which == Generator::L0) {
    expect_chart(pt, Chart::Polar, "apply_generator(L0)");
    return theta_drift(pt.coords[1], z) * d.f_theta + ou;
  }
  if (pt.chart == Chart::Original) throw DomainError("apply_generator: original chart not supported");

  double x, y, l1;
  if (pt.chart == Chart::Transformed) {
    x = pt.coords[0];
    y = pt.coords[1];
    l1 = y * d.f_x + (x * (z - 2.0) - 2.0 * y) * d.f_y + ou;
  } else {
    double r = pt.coords[0], th = pt.coords[1];
    auto xy = from_polar(r, th);
    x = xy[0];
    y = xy[1];
    l1 = radial_drift(th, z) * d.f_r + theta_drift(th, z) * d.f_theta + ou;
  }
  if (which == Generator::L1) return l1;
  return l1 - x * (x + c.eta * y) * d.f_z;
}

}  // namespace lorenzlab
