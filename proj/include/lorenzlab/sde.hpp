#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lorenzlab/core.hpp"
#include "lorenzlab/rng.hpp"
#include "lorenzlab/transforms.hpp"

namespace lorenzlab {

enum class System { OriginalFull, TransformedFull, ThetaZ, PolarLinear };
enum class Scheme { Splitting, EulerMaruyama };

const char* system_name(System s);
System parse_system(const std::string& name);
Chart system_chart(System s);

struct SimConfig {
  System system = System::ThetaZ;
  double dt0 = 1e-2;
  double t_burn = 50.0;
  double t_final = 1050.0;  // absolute end time; samples cover [t_burn, t_final]
  std::uint64_t seed = 1;
  std::uint64_t stream_id = 0;
  int thin = 1;            // keep every thin-th step; step-indexed, so biased under adaptive steps
  double sample_every = 0;  // > 0: time-uniform samples instead, first step end past each t_burn + k h
  bool adaptive = true;
  Scheme scheme = Scheme::Splitting;

  void validate() const;
  double window() const { return t_final - t_burn; }
};

double default_burn_in(const DerivedConsts& c);

// expm1(-x) for x >= 0; series below 1e-2 (truncation < 1e-15 relative).
inline double expm1_neg(double x) {
  if (x >= 1e-2) return std::expm1(-x);
  return -x * (1 - x / 2 * (1 - x / 3 * (1 - x / 4 * (1 - x / 5 * (1 - x / 6)))));
}

// Transition coefficients of the OU kernel over one fixed step.
struct OuKernel {
  double decay, sd;
  OuKernel(double rate, double amp, double dt) {
    double em1 = expm1_neg(rate * dt);
    decay = 1.0 + em1;
    sd = amp * std::sqrt(-em1 * (2.0 + em1) / (2.0 * rate));
  }
  double operator()(double z, double mean, double xi) const { return mean + (z - mean) * decay + sd * xi; }
};

inline double ou_step(double z, double mean, double rate, double amp, double dt, double xi) {
  return OuKernel(rate, amp, dt)(z, mean, xi);
}

inline double step_ou_exact(double z, double dt, double xi, const DerivedConsts& c, double alpha) {
  return ou_step(z, c.z_star, c.gamma, alpha, dt, xi);
}

// For angles that moved by less than pi since the last reduction.
inline double reduce_theta_near(double th) {
  while (th >= 0.5 * kPi) th -= kPi;
  while (th < -0.5 * kPi) th += kPi;
  return th;
}

struct ThetaZStep {
  double theta, z;
  double theta_mid, z_mid;  // where the step's F increment is evaluated
  double f_mid;             // -1 + (z_mid/2) sin(2 theta_mid)
};

// Half OU, midpoint theta at frozen z, half OU. Two normals, one per half.
// Empty when |z| dt > 0.5 at the frozen z: the caller must shrink dt.
inline std::optional<ThetaZStep> step_theta_z(double theta, double z, double dt, double xi1, double xi2,
                                              const DerivedConsts& c, double alpha) {
  double h = 0.5 * dt;
  OuKernel ou(c.gamma, alpha, h);
  double zm = ou(z, c.z_star, xi1);
  if (std::fabs(zm) * dt > 0.5) return std::nullopt;
  // sin^2 t = (1 - cos 2t)/2
  double thm = theta + h * (1.0 - 0.5 * zm * (1.0 - std::cos(2.0 * theta)));
  double s2 = std::sin(2.0 * thm), c2 = std::cos(2.0 * thm);
  double th1 = theta + dt * (1.0 - 0.5 * zm * (1.0 - c2));
  double z1 = ou(zm, c.z_star, xi2);
  return ThetaZStep{reduce_theta_near(th1), z1, thm, zm, -1.0 + 0.5 * zm * s2};
}

inline ThetaZStep step_theta_z_em(double theta, double z, double dt, double xi, const DerivedConsts& c,
                                  double alpha) {
  double th1 = theta + dt * theta_drift(theta, z);
  double z1 = z - c.gamma * (z - c.z_star) * dt + alpha * std::sqrt(dt) * xi;
  return ThetaZStep{reduce_theta_near(th1), z1, theta, z, radial_drift(theta, z)};
}

struct PolarStep {
  double dr;
  double theta, z;
  double theta_mid, z_mid;
};

// Exact flow of the linear (x,y) system over dt with z frozen at the half-step
// OU value, wrapped in the same OU halves as step_theta_z.
PolarStep step_polar_linear(double theta, double z, double dt, double xi1, double xi2, const DerivedConsts& c,
                            double alpha);
PolarStep step_polar_linear_em(double theta, double z, double dt, double xi, const DerivedConsts& c,
                               double alpha);

// Transformed or original chart. Throws NumericalError past 1e12.
State step_full(const State& s, double dt, double xi1, double xi2, const Model& m);
State step_full_em(const State& s, double dt, double xi, const Model& m);

// Drift of the transformed system without the noise.
std::array<double, 3> transformed_drift(const std::array<double, 3>& u, const DerivedConsts& c);

inline constexpr double kBlowUp = 1e12;

struct StepEvent {
  double t;   // time at the end of the step
  double dt;
  bool post_burn;  // the whole step lies in [t_burn, t_final]
  const State& state;
  double theta_mid, z_mid;  // ThetaZ / PolarLinear only
  double f_mid;             // ThetaZ only: F(theta_mid, z_mid)
  double dr;                // PolarLinear only
};

struct RunSummary {
  State final_state;
  std::array<double, 3> min{}, max{};
  std::uint64_t steps = 0;
  std::uint64_t rejected = 0;
  double t_end = 0;
  double r_offset = 0;  // PolarLinear: true r = final_state r + r_offset
};

// Converts `init` to the chart the system runs in.
State prepare_initial(System sys, const State& init, const DerivedConsts& c);

inline double step_scale(System sys, const State& s) {
  const auto& u = s.coords;
  if (sys == System::ThetaZ || sys == System::PolarLinear) return 1.0 + std::fabs(u[2]);
  return 1.0 + std::fabs(u[0]) + std::fabs(u[1]) + std::fabs(u[2]);
}

template <class Observer>
RunSummary integrate(const SimConfig& cfg, const State& init, const Model& m, NoiseStream& noise, Observer&& obs) {
  cfg.validate();
  const auto& c = m.consts;
  const double alpha = c.alpha;
  const bool em = cfg.scheme == Scheme::EulerMaruyama;
  RunSummary sum;
  State s = prepare_initial(cfg.system, init, c);
  sum.min = sum.max = s.coords;
  double t = 0;
  double shrink = 1.0;
  while (t < cfg.t_final) {
    double h = shrink * (cfg.adaptive ? cfg.dt0 / step_scale(cfg.system, s) : cfg.dt0);
    double t_next = t + h;
    if (t < cfg.t_burn && t_next >= cfg.t_burn) t_next = cfg.t_burn;
    if (t_next >= cfg.t_final) t_next = cfg.t_final;
    h = t_next - t;
    double thm = 0, zm = 0, fm = 0, dr = 0;
    switch (cfg.system) {
      case System::ThetaZ: {
        double th = s.coords[1], z = s.coords[2];
        if (em) {
          auto st = step_theta_z_em(th, z, h, noise.normal(), c, alpha);
          s.coords = {0.0, st.theta, st.z};
          thm = st.theta_mid;
          zm = st.z_mid;
          fm = st.f_mid;
          break;
        }
        double xi1 = noise.normal();
        double xi2 = noise.normal();
        auto st = step_theta_z(th, z, h, xi1, xi2, c, alpha);
        if (!st) {
          ++sum.rejected;
          shrink *= 0.5;
          continue;
        }
        s.coords = {0.0, st->theta, st->z};
        thm = st->theta_mid;
        zm = st->z_mid;
        fm = st->f_mid;
        break;
      }
      case System::PolarLinear: {
        double th = s.coords[1], z = s.coords[2];
        double xi1 = noise.normal();
        double xi2 = em ? 0.0 : noise.normal();
        PolarStep st = em ? step_polar_linear_em(th, z, h, xi1, c, alpha)
                          : step_polar_linear(th, z, h, xi1, xi2, c, alpha);
        double r = s.coords[0] + st.dr;
        if (std::fabs(r) > 700.0) {
          sum.r_offset += r;
          r = 0.0;
        }
        s.coords = {r, st.theta, st.z};
        thm = st.theta_mid;
        zm = st.z_mid;
        dr = st.dr;
        break;
      }
      default: {
        double xi1 = noise.normal();
        if (em) {
          s = step_full_em(s, h, xi1, m);
          break;
        }
        double xi2 = noise.normal();
        s = step_full(s, h, xi1, xi2, m);
        break;
      }
    }
    shrink = 1.0;
    bool post = t >= cfg.t_burn;
    t = t_next;
    ++sum.steps;
    for (int k = 0; k < 3; ++k) {
      sum.min[k] = std::min(sum.min[k], s.coords[k]);
      sum.max[k] = std::max(sum.max[k], s.coords[k]);
    }
    obs(StepEvent{t, h, post, s, thm, zm, fm, dr});
  }
  sum.final_state = s;
  sum.t_end = t;
  return sum;
}

struct Sample {
  double t;
  std::array<double, 3> c;
};

struct SimResult {
  std::vector<Sample> samples;
  RunSummary summary;
};

// Thinned post-burn-in samples; the first sample is the state at t_burn.
SimResult simulate(const SimConfig& cfg, const State& init, const Model& m);

void write_samples_csv(std::ostream& os, const std::vector<Sample>& samples);

}  // namespace lorenzlab
