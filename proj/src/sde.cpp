#include "lorenzlab/sde.hpp"

#include <cstdio>

namespace lorenzlab {

const char* system_name(System s) {
  switch (s) {
    case System::OriginalFull: return "original";
    case System::TransformedFull: return "transformed";
    case System::ThetaZ: return "theta-z";
    case System::PolarLinear: return "polar";
  }
  return "?";
}

System parse_system(const std::string& name) {
  if (name == "original") return System::OriginalFull;
  if (name == "transformed") return System::TransformedFull;
  if (name == "theta-z" || name == "thetaz") return System::ThetaZ;
  if (name == "polar") return System::PolarLinear;
  throw InvalidParameter("system: unknown system '" + name + "'");
}

Chart system_chart(System s) {
  switch (s) {
    case System::OriginalFull: return Chart::Original;
    case System::TransformedFull: return Chart::Transformed;
    default: return Chart::Polar;
  }
}

void SimConfig::validate() const {
  if (!(dt0 > 0) || dt0 > 0.1) throw InvalidParameter("dt0: must lie in (0, 0.1]");
  if (!(t_burn >= 0) || !std::isfinite(t_burn)) throw InvalidParameter("t_burn: must be finite and >= 0");
  if (!(t_final >= t_burn) || !std::isfinite(t_final))
    throw InvalidParameter("t_final: must be finite and >= t_burn");
  if (thin < 1) throw InvalidParameter("thin: must be >= 1");
  if (!(sample_every >= 0) || !std::isfinite(sample_every)) throw InvalidParameter("sample_every: must be finite and >= 0");
}

double default_burn_in(const DerivedConsts& c) { return std::max(50.0, 20.0 / c.gamma); }

PolarStep step_polar_linear(double theta, double z, double dt, double xi1, double xi2, const DerivedConsts& c,
                            double alpha) {
  double h = 0.5 * dt;
  OuKernel ou(c.gamma, alpha, h);
  double zm = ou(z, c.z_star, xi1);

  // exp(A dt) = e^{-dt} (C I + S (A + I)),  A = [[0,1],[zm-2,-2]]
  double s = (zm - 1.0) * dt * dt;
  double C, S;
  if (std::fabs(s) < 1e-4) {
    C = 1.0 + s * (0.5 + s / 24.0);
    S = dt * (1.0 + s * (1.0 / 6.0 + s / 120.0));
  } else if (s > 0) {
    double w = std::sqrt(s);
    C = std::cosh(w);
    S = dt * std::sinh(w) / w;
  } else {
    double w = std::sqrt(-s);
    C = std::cos(w);
    S = dt * std::sin(w) / w;
  }
  double a = std::sin(theta), b = std::cos(theta) - a;
  double x1 = C * a + S * (a + b);
  double y1 = C * b + S * ((zm - 2.0) * a - b);
  auto p = to_polar(x1, y1);

  PolarStep out;
  out.dr = p.r - dt;
  out.theta = p.theta;
  out.theta_mid = theta + h * theta_drift(theta, zm);
  out.z_mid = zm;
  out.z = ou(zm, c.z_star, xi2);
  return out;
}

PolarStep step_polar_linear_em(double theta, double z, double dt, double xi, const DerivedConsts& c,
                               double alpha) {
  PolarStep out;
  out.dr = dt * radial_drift(theta, z);
  out.theta = reduce_theta(theta + dt * theta_drift(theta, z));
  out.theta_mid = theta;
  out.z_mid = z;
  out.z = z - c.gamma * (z - c.z_star) * dt + alpha * std::sqrt(dt) * xi;
  return out;
}

std::array<double, 3> transformed_drift(const std::array<double, 3>& u, const DerivedConsts& c) {
  const auto& [x, y, z] = u;
  return {y, x * (z - 2.0) - 2.0 * y, -c.gamma * (z - c.z_star) - x * (x + c.eta * y)};
}

namespace {

// Drift left over once the linear OU part of the z (or Z) equation is removed.
std::array<double, 3> remainder_drift(Chart chart, const std::array<double, 3>& u, const Model& m) {
  const auto& [a, b, z] = u;
  if (chart == Chart::Transformed) return {b, a * (z - 2.0) - 2.0 * b, -a * (a + m.consts.eta * b)};
  const auto& p = m.params;
  return {p.sigma * (b - a), a * (p.rho - z) - b, a * b};
}

void guard(const State& s) {
  for (double v : s.coords)
    if (!(std::fabs(v) <= kBlowUp))
      throw NumericalError("step_full: state left the 1e12 box (blow-up guard; this is a bug)");
}

void expect_full_chart(const State& s) {
  if (s.chart == Chart::Polar) throw DomainError("step_full: needs the original or transformed chart");
}

}  // namespace

State step_full(const State& s, double dt, double xi1, double xi2, const Model& m) {
  expect_full_chart(s);
  const bool tr = s.chart == Chart::Transformed;
  const double mean = tr ? m.consts.z_star : 0.0;
  const double rate = tr ? m.consts.gamma : m.params.beta;
  const double amp = tr ? m.consts.alpha : m.params.alpha_hat;
  const double h = 0.5 * dt;

  OuKernel ou(rate, amp, h);
  State out = s;
  auto& u = out.coords;
  u[2] = ou(u[2], mean, xi1);
  auto k1 = remainder_drift(s.chart, u, m);
  std::array<double, 3> um{u[0] + h * k1[0], u[1] + h * k1[1], u[2] + h * k1[2]};
  auto k2 = remainder_drift(s.chart, um, m);
  for (int i = 0; i < 3; ++i) u[i] += dt * k2[i];
  u[2] = ou(u[2], mean, xi2);
  guard(out);
  return out;
}

State step_full_em(const State& s, double dt, double xi, const Model& m) {
  expect_full_chart(s);
  const bool tr = s.chart == Chart::Transformed;
  State out = s;
  auto& u = out.coords;
  auto k = remainder_drift(s.chart, s.coords, m);
  double lin = tr ? -m.consts.gamma * (u[2] - m.consts.z_star) : -m.params.beta * u[2];
  double amp = tr ? m.consts.alpha : m.params.alpha_hat;
  u[0] += dt * k[0];
  u[1] += dt * k[1];
  u[2] += dt * (k[2] + lin) + amp * std::sqrt(dt) * xi;
  guard(out);
  return out;
}

State prepare_initial(System sys, const State& init, const DerivedConsts& c) {
  Chart want = system_chart(sys);
  if (init.chart == want) {
    State s = init;
    if (want == Chart::Polar) s.coords[1] = reduce_theta(s.coords[1]);
    if (sys == System::ThetaZ) s.coords[0] = 0.0;
    return s;
  }
  State tr = init;
  if (init.chart == Chart::Original) tr = to_transformed(init, c);
  if (init.chart == Chart::Polar) tr = polar_to_transformed(init);
  if (want == Chart::Transformed) return tr;
  if (want == Chart::Original) return from_transformed(tr, c);
  return prepare_initial(sys, transformed_to_polar(tr), c);
}

SimResult simulate(const SimConfig& cfg, const State& init, const Model& m) {
  SimResult res;
  NoiseStream noise(cfg.seed, cfg.stream_id);
  const bool polar = cfg.system == System::PolarLinear;
  State start = prepare_initial(cfg.system, init, m.consts);
  double r_total = start.coords[0];  // PolarLinear keeps r bounded internally
  long count = 0;
  double next_sample = cfg.t_burn + cfg.sample_every;
  auto record = [&](double t, const State& s) {
    Sample smp{t, s.coords};
    if (polar) smp.c[0] = r_total;
    res.samples.push_back(smp);
  };
  if (cfg.t_burn == 0 && cfg.t_final > 0) record(0.0, start);
  res.summary = integrate(cfg, init, m, noise, [&](const StepEvent& e) {
    r_total += e.dr;
    if (!e.post_burn) {
      if (e.t == cfg.t_burn && cfg.t_final > cfg.t_burn) record(e.t, e.state);
      return;
    }
    if (cfg.sample_every > 0) {
      if (e.t >= next_sample) {
        record(e.t, e.state);
        next_sample = cfg.t_burn + cfg.sample_every * std::floor((e.t - cfg.t_burn) / cfg.sample_every + 1);
      }
    } else if (++count % cfg.thin == 0) {
      record(e.t, e.state);
    }
  });
  return res;
}

void write_samples_csv(std::ostream& os, const std::vector<Sample>& samples) {
  os << "t,c1,c2,c3\n";
  char buf[128];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.t, s.c[0], s.c[1], s.c[2]);
    os << buf;
  }
}

}  // namespace lorenzlab
