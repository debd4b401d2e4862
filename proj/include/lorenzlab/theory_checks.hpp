#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lorenzlab/errors.hpp"

namespace lorenzlab {

struct PreconditionViolated : InvalidParameter {
  using InvalidParameter::InvalidParameter;
};

struct NoCrossing : DomainError {
  using DomainError::DomainError;
};

// ---------------------------------------------------------------- exp growth

struct ExpGrowthOptions {
  double a = 1, b = 1, eps = 0.05, K = 1;
  double x0 = 0;
  int N_max = 6;
  int trials = 100000;
  std::uint64_t seed = 1;
  double dt = 1e-3;  // in units of 1/a
  double unit_time = 0;  // 0: (1/a) log((K v 1)/eps); required when eps = 0
  int threads = 0;
  int min_count = 10;  // survivors needed for a point to enter the fit
};

struct ExpGrowthReport {
  ExpGrowthOptions opt;
  double unit_time = 0;            // (1/a) log((K v 1)/eps)
  std::vector<double> tail;        // P(tau_K > N unit_time), N = 0..N_max
  std::vector<long long> survivors;
  // P(|x(N unit_time)| < K b / sqrt(a)) without stopping; bounds tail from above
  std::vector<double> inside;
  // closed form of `inside` when eps = 0 (NaN otherwise)
  std::vector<double> inside_gaussian;
  double ratio = 0;  // exp(slope) of log tail vs N over points with >= min_count survivors
  int fit_points = 0;
  bool pass = false;  // ratio <= 0.75
};

// dx = a x dt + E dt + b C dW with the worst allowed perturbations:
// C = 1 - eps and E = -eps b sqrt(a) sgn(x), always pulling toward 0.
// Steps are exact for frozen E. Seeded per trial; independent of threads.
ExpGrowthReport check_exp_growth(const ExpGrowthOptions& opt);

// ----------------------------------------------------------- stable tracking

using ScalarFn = std::function<double(double)>;

struct TrackingOptions {
  double a0 = 1, K = 1, x0 = 0, T = 20;
  ScalarFn f;       // time change; empty means f = 1
  double f0 = 1;    // lower bound on f
  int mesh_per_unit = 64;  // samples per 1/(a0 f0)
  double rtol = 1e-12;
};

struct TrackingReport {
  double a0 = 0, K = 0, K_measured = 0, T = 0;
  // max_t (|x - x*| - |x(0) - x*(0)| e^{-a0 f0 t}) a0^2 / K
  double C_measured = 0;
  double t_at_max = 0;
  double max_excess = 0;  // same, before scaling by a0^2 / K
  double final_gap = 0;   // |x(T) - x*(T)|
  std::size_t n_mesh = 0;
};

// x' = f (1 - a x). Throws PreconditionViolated if a < a0, f < f0, or the
// oscillation of a over windows of length 1/a0 exceeds K on the mesh.
TrackingReport check_stable_tracking(const ScalarFn& a, const TrackingOptions& opt);

struct UnstableReport {
  double a0 = 0, K = 0, T = 0, offset = 0;
  // min_t |y - y*| / (|y(0) - y*(0)| e^{a0 f0 t / 2} / 2); >= 1 is the claim
  double min_ratio = 0;
  double growth_rate = 0;  // log-slope of |y - y*| over [T/2, T]
  std::size_t n_mesh = 0;
};

// y' = f (1 + a y) from y(0) = -1/a(0) + offset. Requires a in [a0, 2 a0].
UnstableReport check_unstable_tracking(const ScalarFn& a, double offset, const TrackingOptions& opt);

// a(t) = a0 (2 + sin(a0 t)) with K = 2 a0 sin(1/2), T = T_units / a0, x0 = 0;
// with time_changed, f(t) = 1.5 + cos(0.3 a0 t), f0 = 0.5. The unstable runs
// use a(t) = a0 (1.5 + 0.5 sin(a0 t)) from offset 2 (e^2 - 1) K / a0^2.
struct TrackingGridReport {
  std::vector<TrackingReport> stable;
  std::vector<UnstableReport> unstable;
  double C_median = 0;
  double C_max_rel_dev = 0;  // max |C / C_median - 1|
  bool stable_pass = false;  // C_max_rel_dev <= 0.5
  bool unstable_pass = false;  // every min_ratio >= 1 and growth_rate >= a0 / 2
};
TrackingGridReport check_tracking_grid(const std::vector<double>& a0s, double T_units = 40,
                                       bool time_changed = false);

// ---------------------------------------------------------- crossing diff

using PlaneFn = std::function<double(double theta, double t)>;

struct CrossingReport {
  double tau1 = 0, tau2 = 0;
  double int1 = 0, int2 = 0;
  double lhs = 0, rhs = 0;
  double F1_min = 0, F2_min = 0, G2_max = 0, dF = 0, dG = 0;
  bool pass = false;
};

// theta_i' = F_i(theta_i, t), theta_i(0) = a, up to the first time theta_i = b,
// integrated in theta as the independent variable. Mins, maxes and the
// distances d(.,.) are sampled on an n x n x n mesh of the strip, which can
// only shrink the right-hand side. Throws NoCrossing if some F_i <= 0 on the
// way or b <= a.
CrossingReport check_crossing_diff(const PlaneFn& F1, const PlaneFn& F2, const PlaneFn& G1, const PlaneFn& G2,
                                   double a, double b, int n = 65);

// Random smooth instances: F_i = f_i + amplitude * trig(theta, t) with
// f_i in [1, 1.9] and amplitude below f_i / 2, G_i mixed trig/polynomial,
// a in [-1, 1], b - a in [0.1, 2.1]. Deterministic in seed.
struct CrossingSweep {
  int instances = 0, failures = 0;
  double worst_ratio = 0;  // max lhs / rhs
  bool pass = false;
};
CrossingSweep check_crossing_random(int instances, std::uint64_t seed, int n = 33);

}  // namespace lorenzlab
