#include "lorenzlab/theory_checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "lorenzlab/parallel.hpp"
#include "lorenzlab/rng.hpp"

namespace lorenzlab {

namespace odeint = boost::numeric::odeint;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

ExpGrowthReport check_exp_growth(const ExpGrowthOptions& o) {
  if (!(o.a > 0) || !(o.b > 0) || !(o.K > 0) || !(o.eps >= 0) || !(o.eps < 1))
    throw InvalidParameter("check_exp_growth: need a, b, K > 0 and 0 <= eps < 1");
  if (o.N_max < 1 || o.trials < 1 || !(o.dt > 0)) throw InvalidParameter("check_exp_growth: N_max, trials, dt");
  if (o.eps == 0 && !(o.unit_time > 0))
    throw InvalidParameter("check_exp_growth: eps = 0 needs an explicit unit_time");

  ExpGrowthReport rep;
  rep.opt = o;
  // work in x^ = sqrt(a)/b x(t/a): a = b = 1, threshold K
  const double L = o.unit_time > 0 ? o.unit_time * o.a : std::log(std::max(o.K, 1.0) / o.eps);
  rep.unit_time = L / o.a;
  const double x0 = std::sqrt(o.a) / o.b * o.x0;
  const double K = o.K, C = 1 - o.eps;
  const int m = std::max(1, int(std::ceil(L / o.dt)));
  const double h = L / m, eh = std::exp(h), sh = std::sqrt(std::expm1(2 * h) / 2);
  const double eL = std::exp(L), sL = std::sqrt(std::expm1(2 * L) / 2);

  const int N = o.N_max;
  constexpr int kChunk = 1024;
  const int chunks = (o.trials + kChunk - 1) / kChunk;
  std::vector<std::vector<long long>> alive(chunks, std::vector<long long>(N + 1)), in(alive);
  parallel_for(chunks, o.threads, [&](int c) {
    for (int i = c * kChunk; i < std::min(o.trials, (c + 1) * kChunk); ++i) {
      NoiseStream ns(o.seed, std::uint64_t(i));
      double x = x0;
      bool live = std::fabs(x) < K;
      alive[c][0] += live;
      in[c][0] += std::fabs(x) < K;
      for (int n = 1; n <= N; ++n) {
        if (live) {
          for (int k = 0; k < m; ++k) {
            const double E = -o.eps * ((x > 0) - (x < 0));
            x = eh * x + E * (eh - 1) + C * sh * ns.normal();
            if (std::fabs(x) >= K) {
              // finish the segment in one exact jump with E frozen
              const double r = h * (m - 1 - k);
              x = std::exp(r) * x + E * std::expm1(r) + C * std::sqrt(std::expm1(2 * r) / 2) * ns.normal();
              live = false;
              break;
            }
          }
        } else {
          const double E = -o.eps * ((x > 0) - (x < 0));
          x = eL * x + E * (eL - 1) + C * sL * ns.normal();
        }
        alive[c][n] += live;
        in[c][n] += std::fabs(x) < K;
      }
    }
  });

  rep.tail.assign(N + 1, 0);
  rep.survivors.assign(N + 1, 0);
  rep.inside.assign(N + 1, 0);
  rep.inside_gaussian.assign(N + 1, std::numeric_limits<double>::quiet_NaN());
  for (int c = 0; c < chunks; ++c)
    for (int n = 0; n <= N; ++n) rep.survivors[n] += alive[c][n], rep.inside[n] += double(in[c][n]);
  for (int n = 0; n <= N; ++n) {
    rep.tail[n] = double(rep.survivors[n]) / o.trials;
    rep.inside[n] /= o.trials;
    if (o.eps == 0) {
      const double t = n * L, mu = x0 * std::exp(t), s = std::sqrt(std::expm1(2 * t) / 2);
      rep.inside_gaussian[n] =
          s > 0 ? normal_cdf((K - mu) / s) - normal_cdf((-K - mu) / s) : double(std::fabs(mu) < K);
    }
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int n = 0; n <= N; ++n) {
    if (rep.survivors[n] < o.min_count) continue;
    double y = std::log(rep.tail[n]);
    sx += n, sy += y, sxx += double(n) * n, sxy += n * y;
    ++rep.fit_points;
  }
  const double np = rep.fit_points;
  if (np >= 2)
    rep.ratio = std::exp((np * sxy - sx * sy) / (np * sxx - sx * sx));
  else
    rep.ratio = rep.tail[0] > 0 ? rep.tail[1] / rep.tail[0] : 0.0;
  rep.pass = rep.ratio <= 0.75;
  return rep;
}

namespace {

using State1 = std::array<double, 1>;

std::vector<double> mesh(double T, double step) {
  const std::size_t n = std::size_t(std::ceil(T / step)) + 1;
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = std::min(T, double(i) * step);
  return ts;
}

double f_at(const TrackingOptions& o, double t) { return o.f ? o.f(t) : 1.0; }

void validate_tracking(const ScalarFn& a, const TrackingOptions& o) {
  if (!a) throw InvalidParameter("tracking: missing a(t)");
  if (!(o.a0 > 0) || !(o.K > 0) || !(o.T > 0) || !(o.f0 > 0) || o.mesh_per_unit < 4)
    throw InvalidParameter("tracking: need a0, K, T, f0 > 0 and mesh_per_unit >= 4");
}

// samples a and f, checks the lower bounds, returns the measured oscillation
// of a over windows of length 1/a0
double sample_preconditions(const ScalarFn& a, const TrackingOptions& o, const std::vector<double>& ts,
                            std::vector<double>& av) {
  av.resize(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    av[i] = a(ts[i]);
    if (!(av[i] >= o.a0 * (1 - 1e-12)))
      throw PreconditionViolated("tracking: a(" + std::to_string(ts[i]) + ") = " + std::to_string(av[i]) +
                                 " < a0");
    if (!(f_at(o, ts[i]) >= o.f0 * (1 - 1e-12)))
      throw PreconditionViolated("tracking: f(" + std::to_string(ts[i]) + ") < f0");
  }
  const double step = ts.size() > 1 ? ts[1] - ts[0] : 1.0;
  const std::size_t w = std::max<std::size_t>(1, std::size_t(std::floor(1.0 / o.a0 / step + 1e-9)));
  double osc = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double lo = av[i], hi = av[i];
    for (std::size_t j = i + 1; j < std::min(ts.size(), i + w + 1); ++j) lo = std::min(lo, av[j]), hi = std::max(hi, av[j]);
    osc = std::max(osc, hi - lo);
  }
  return osc;
}

template <class Sys, class Obs>
void integrate_mesh(Sys sys, double y0, const std::vector<double>& ts, double rtol, Obs obs) {
  State1 y{y0};
  auto stepper = odeint::make_dense_output(1e-15, rtol, odeint::runge_kutta_dopri5<State1>());
  odeint::integrate_times(stepper, sys, y, ts.begin(), ts.end(), 1e-3 * (ts[1] - ts[0]),
                          [&](const State1& s, double t) { obs(s[0], t); });
}

}  // namespace

TrackingReport check_stable_tracking(const ScalarFn& a, const TrackingOptions& o) {
  validate_tracking(a, o);
  const auto ts = mesh(o.T, 1.0 / (o.a0 * o.f0 * o.mesh_per_unit));
  std::vector<double> av;
  TrackingReport r;
  r.a0 = o.a0, r.K = o.K, r.T = o.T, r.n_mesh = ts.size();
  r.K_measured = sample_preconditions(a, o, ts, av);
  if (r.K_measured > o.K * (1 + 1e-9))
    throw PreconditionViolated("tracking: |a(t) - a(s)| reaches " + std::to_string(r.K_measured) +
                               " > K over windows of length 1/a0");

  const double gap0 = std::fabs(o.x0 - 1 / av[0]);
  std::size_t i = 0;
  integrate_mesh([&](const State1& x, State1& dx, double t) { dx[0] = f_at(o, t) * (1 - a(t) * x[0]); }, o.x0, ts,
                 o.rtol, [&](double x, double t) {
                   const double gap = std::fabs(x - 1 / av[i]);
                   const double excess = gap - gap0 * std::exp(-o.a0 * o.f0 * t);
                   if (excess > r.max_excess) r.max_excess = excess, r.t_at_max = t;
                   r.final_gap = gap;
                   ++i;
                 });
  r.C_measured = r.max_excess * o.a0 * o.a0 / o.K;
  return r;
}

UnstableReport check_unstable_tracking(const ScalarFn& a, double offset, const TrackingOptions& o) {
  validate_tracking(a, o);
  if (offset == 0) throw InvalidParameter("unstable tracking: offset must be nonzero");
  const auto ts = mesh(o.T, 1.0 / (o.a0 * o.f0 * o.mesh_per_unit));
  std::vector<double> av;
  sample_preconditions(a, o, ts, av);
  for (std::size_t k = 0; k < ts.size(); ++k)
    if (av[k] > 2 * o.a0 * (1 + 1e-12))
      throw PreconditionViolated("unstable tracking: a(" + std::to_string(ts[k]) + ") > 2 a0");

  UnstableReport r;
  r.a0 = o.a0, r.K = o.K, r.T = o.T, r.offset = offset, r.n_mesh = ts.size();
  r.min_ratio = std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  std::size_t i = 0;
  integrate_mesh([&](const State1& y, State1& dy, double t) { dy[0] = f_at(o, t) * (1 + a(t) * y[0]); },
                 -1 / av[0] + offset, ts, o.rtol, [&](double y, double t) {
                   const double gap = std::fabs(y + 1 / av[i]);
                   if (!std::isfinite(gap)) throw NumericalError("unstable tracking: overflow, shorten T");
                   r.min_ratio = std::min(r.min_ratio, gap / (std::fabs(offset) * std::exp(o.a0 * o.f0 * t / 2) / 2));
                   if (t >= o.T / 2) {
                     const double ly = std::log(gap);
                     sx += t, sy += ly, sxx += t * t, sxy += t * ly, ++n;
                   }
                   ++i;
                 });
  r.growth_rate = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

CrossingReport check_crossing_diff(const PlaneFn& F1, const PlaneFn& F2, const PlaneFn& G1, const PlaneFn& G2,
                                   double a, double b, int n) {
  if (!(b > a)) throw NoCrossing("check_crossing_diff: need b > a for a positive flow to cross");
  if (n < 2) throw InvalidParameter("check_crossing_diff: mesh size n >= 2");

  // theta as the clock: dt/dtheta = 1/F, dI/dtheta = G/F
  using State2 = std::array<double, 2>;
  auto cross = [&](const PlaneFn& F, const PlaneFn& G) {
    State2 s{0, 0};
    long evals = 0;
    auto sys = [&](const State2& y, State2& dy, double th) {
      const double f = F(th, y[0]);
      // F decaying to 0 stalls the step size before it ever turns negative
      if (!(f > 0) || ++evals > 2000000)
        throw NoCrossing("check_crossing_diff: F(" + std::to_string(th) + ", " + std::to_string(y[0]) +
                         ") = " + std::to_string(f) + " is not uniformly positive");
      dy[0] = 1 / f;
      dy[1] = G(th, y[0]) / f;
    };
    odeint::integrate_adaptive(odeint::make_controlled(1e-14, 1e-12, odeint::runge_kutta_dopri5<State2>()), sys, s,
                               a, b, 1e-3 * (b - a));
    return s;
  };
  const auto s1 = cross(F1, G1), s2 = cross(F2, G2);

  CrossingReport r;
  r.tau1 = s1[0], r.int1 = s1[1];
  r.tau2 = s2[0], r.int2 = s2[1];
  r.lhs = std::fabs(r.int1 - r.int2);

  auto node = [&](double lo, double hi, int k) { return lo + (hi - lo) * k / (n - 1); };
  std::vector<double> f1(n * n), g1(n * n), f2(n * n), g2(n * n);
  for (int p = 0; p < n; ++p) {
    const double th = node(a, b, p);
    for (int k = 0; k < n; ++k) {
      const double t1 = node(0, r.tau1, k), t2 = node(0, r.tau2, k);
      f1[p * n + k] = F1(th, t1), g1[p * n + k] = G1(th, t1);
      f2[p * n + k] = F2(th, t2), g2[p * n + k] = G2(th, t2);
    }
  }
  r.F1_min = *std::min_element(f1.begin(), f1.end());
  r.F2_min = *std::min_element(f2.begin(), f2.end());
  for (double v : g2) r.G2_max = std::max(r.G2_max, std::fabs(v));
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r.dF = std::max(r.dF, std::fabs(f1[p * n + i] - f2[p * n + j]));
        r.dG = std::max(r.dG, std::fabs(g1[p * n + i] - g2[p * n + j]));
      }
  r.rhs = (b - a) * (r.dG * r.F2_min + r.G2_max * r.dF) / (r.F1_min * r.F2_min);
  // integrator slack only
  r.pass = r.lhs <= r.rhs + 1e-9 * std::max(1.0, r.rhs);
  return r;
}

TrackingGridReport check_tracking_grid(const std::vector<double>& a0s, double T_units, bool time_changed) {
  if (a0s.empty()) throw InvalidParameter("tracking grid: no a0 values");
  TrackingGridReport rep;
  rep.unstable_pass = true;
  std::vector<double> Cs;
  for (double a0 : a0s) {
    TrackingOptions o;
    o.a0 = a0;
    o.K = 2 * a0 * std::sin(0.5);
    o.T = T_units / a0;
    if (time_changed) {
      o.f = [a0](double t) { return 1.5 + std::cos(0.3 * a0 * t); };
      o.f0 = 0.5;
    }
    rep.stable.push_back(check_stable_tracking([a0](double t) { return a0 * (2 + std::sin(a0 * t)); }, o));
    Cs.push_back(rep.stable.back().C_measured);

    TrackingOptions u;
    u.a0 = a0;
    u.K = a0 * std::sin(0.5);
    u.T = 10 / a0;
    const double offset = 2 * (std::exp(2.0) - 1) * u.K / (a0 * a0);
    auto ur = check_unstable_tracking([a0](double t) { return a0 * (1.5 + 0.5 * std::sin(a0 * t)); }, offset, u);
    rep.unstable_pass = rep.unstable_pass && ur.min_ratio >= 1 && ur.growth_rate >= a0 / 2;
    rep.unstable.push_back(ur);
  }
  auto sorted = Cs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  rep.C_median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (double c : Cs) rep.C_max_rel_dev = std::max(rep.C_max_rel_dev, std::fabs(c / rep.C_median - 1));
  rep.stable_pass = rep.C_median > 0 && rep.C_max_rel_dev <= 0.5;
  return rep;
}

CrossingSweep check_crossing_random(int instances, std::uint64_t seed, int n) {
  if (instances < 1) throw InvalidParameter("crossing sweep: instances >= 1");
  CrossingSweep sw;
  sw.instances = instances;
  for (int k = 0; k < instances; ++k) {
    NoiseStream ns(seed, std::uint64_t(k));
    double c[17];
    for (double& v : c) v = 2 * ns.uniform() - 1;
    const double f1 = 1 + 0.9 * std::fabs(c[0]), f2 = 1 + 0.9 * std::fabs(c[1]);
    auto F1 = [=](double th, double t) { return f1 + 0.45 * c[2] * std::sin(3 * c[3] * th + 2 * c[4] * t); };
    auto F2 = [=](double th, double t) { return f2 + 0.45 * c[5] * std::cos(3 * c[6] * th - 2 * c[7] * t); };
    auto G1 = [=](double th, double t) { return c[8] + c[9] * std::sin(th) + c[10] * std::cos(3 * t); };
    auto G2 = [=](double th, double t) { return c[11] + c[12] * th * th + c[13] * std::sin(t + c[14]); };
    const double a = c[15], b = a + 0.1 + 2 * std::fabs(c[16]);
    auto r = check_crossing_diff(F1, F2, G1, G2, a, b, n);
    sw.failures += !r.pass;
    if (r.rhs > 0) sw.worst_ratio = std::max(sw.worst_ratio, r.lhs / r.rhs);
  }
  sw.pass = sw.failures == 0;
  return sw;
}

}  // namespace lorenzlab
