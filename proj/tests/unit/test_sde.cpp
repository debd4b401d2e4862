#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "lorenzlab/sde.hpp"

using namespace lorenzlab;

namespace {

const Params P{10, 8.0 / 3.0, 0.5, 0};

Model model_hat(double ah) { return Model::from_hat(P, ah); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("exact OU step") {
  auto m = model_hat(20);
  const auto& c = m.consts;
  CHECK(step_ou_exact(c.z_star, 0.3, 0.0, c, c.alpha) == c.z_star);
  CHECK(step_ou_exact(5.0, 0.7, 0.0, c, 0.0) == doctest::Approx(c.z_star + (5 - c.z_star) * std::exp(-c.gamma * 0.7)));

  NoiseStream ns(1, 0);
  double s1 = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = step_ou_exact(-40.0, 200.0, ns.normal(), c, c.alpha);
    s1 += z;
    s2 += (z - c.z_star) * (z - c.z_star);
  }
  double var = c.alpha * c.alpha / (2 * c.gamma);
  CHECK(std::fabs(s1 / n - c.z_star) < 5 * std::sqrt(var / n));
  CHECK(s2 / n == doctest::Approx(var).epsilon(0.02));
}

TEST_CASE("theta drift landmarks") {
  CHECK(theta_drift(0.0, 123.0) == 1.0);
  CHECK(theta_drift(kPi / 2, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("theta settles on the stable fixed point when alpha = 0") {
  auto m = model_hat(0);
  const auto& c = m.consts;
  double th = -1.0, z = c.z_star;
  for (int i = 0; i < 20000; ++i) {
    auto st = step_theta_z(th, z, 1e-3, 0.3, -0.8, c, 0.0);
    REQUIRE(st);
    th = st->theta;
    z = st->z;
  }
  CHECK(z == c.z_star);
  CHECK(std::sin(th) == doctest::Approx(1 / std::sqrt(c.z_star)).epsilon(1e-9));
}

TEST_CASE("step rejection when |z| dt is too large") {
  auto m = model_hat(0);
  CHECK_FALSE(step_theta_z(0.1, 60.0, 0.01, 0, 0, m.consts, 0.0));
  CHECK(step_theta_z(0.1, 40.0, 0.01, 0, 0, m.consts, 0.0));
}

TEST_CASE("full step keeps the axis invariant") {
  for (double ah : {0.0, 10.0, 40.0}) {
    auto m = model_hat(ah);
    NoiseStream ns(3, 0);
    State s = State::transformed(0, 0, 4.0);
    State o = State::original(0, 0, -2.0);
    for (int i = 0; i < 1000; ++i) {
      s = step_full(s, 0.01, ns.normal(), ns.normal(), m);
      o = step_full(o, 0.01, ns.normal(), ns.normal(), m);
      s = step_full_em(s, 0.01, ns.normal(), m);
    }
    CHECK(s.coords[0] == 0.0);
    CHECK(s.coords[1] == 0.0);
    CHECK(o.coords[0] == 0.0);
    CHECK(o.coords[1] == 0.0);
  }
}

TEST_CASE("transformed drift at (1,0,2)") {
  auto c = derive_constants(P);
  auto d = transformed_drift({1, 0, 2}, c);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  CHECK(d[2] == doctest::Approx(-c.gamma * (2 - c.z_star) - 1.0).epsilon(1e-15));
  CHECK(d[2] == doctest::Approx(-1.080135).epsilon(1e-5));  // quoted value is rounded
}

TEST_CASE("deterministic trajectories fall onto the origin for rho < 1") {
  auto m = model_hat(0);
  SimConfig cfg;
  cfg.system = System::TransformedFull;
  cfg.t_burn = 0;
  cfg.t_final = 200;
  for (auto init : {State::transformed(1, 0, 0), State::transformed(-3, 2, 8), State::transformed(0.5, 0.5, -5)}) {
    auto r = simulate(cfg, init, m);
    const auto& u = r.summary.final_state.coords;
    CHECK(std::fabs(u[0]) < 1e-6);
    CHECK(std::fabs(u[1]) < 1e-6);
    CHECK(u[2] == doctest::Approx(m.consts.z_star).epsilon(1e-6));
  }
  cfg.system = System::OriginalFull;
  cfg.t_final = 100;
  auto r = simulate(cfg, State::original(5, -3, 20), m);
  for (double v : r.summary.final_state.coords) CHECK(std::fabs(v) < 1e-3);
}

TEST_CASE("simulate: empty window, thinning, determinism, CSV") {
  auto m = model_hat(30);
  SimConfig cfg;
  cfg.t_burn = 5;
  cfg.t_final = 5;
  auto e = simulate(cfg, State::polar(0, 0.2, 1.0), m);
  CHECK(e.samples.empty());
  CHECK(e.summary.steps > 0);

  cfg.t_final = 15;
  cfg.thin = 7;
  cfg.seed = 99;
  auto a = simulate(cfg, State::polar(0, 0.2, 1.0), m);
  auto b = simulate(cfg, State::polar(0, 0.2, 1.0), m);
  REQUIRE(a.samples.size() > 10);
  CHECK(a.samples.front().t == 5.0);
  CHECK(a.samples.back().t <= 15.0);
  std::ostringstream sa, sb;
  write_samples_csv(sa, a.samples);
  write_samples_csv(sb, b.samples);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("t,c1,c2,c3\n", 0) == 0);

  cfg.seed = 100;
  auto c = simulate(cfg, State::polar(0, 0.2, 1.0), m);
  CHECK(c.samples.back().c != a.samples.back().c);
}

TEST_CASE("simulate: time-uniform sampling under adaptive steps") {
  auto m = model_hat(30);
  SimConfig cfg;
  cfg.t_burn = 20;
  cfg.t_final = 20 + 4000;
  cfg.sample_every = 0.1;
  auto r = simulate(cfg, State::polar(0, 0, m.consts.z_star), m);
  REQUIRE(r.samples.size() > 39000);
  for (std::size_t i = 1; i < r.samples.size(); ++i) {
    const double gap = r.samples[i].t - r.samples[i - 1].t;
    REQUIRE(gap > 0);
    REQUIRE(gap < 0.1 + 2 * cfg.dt0);
  }
  // z is OU, stationary N(z*, alpha^2 / (2 gamma)); step-indexed thinning inflates the spread
  double s1 = 0, s2 = 0;
  for (const auto& s : r.samples) s1 += s.c[2], s2 += s.c[2] * s.c[2];
  const double n = double(r.samples.size()), mean = s1 / n, sd = std::sqrt(s2 / n - mean * mean);
  const double sd0 = m.alpha() / std::sqrt(2 * m.consts.gamma);
  CHECK(std::fabs(mean - m.consts.z_star) < 0.1 * sd0);
  CHECK(sd == doctest::Approx(sd0).epsilon(0.05));
}

TEST_CASE("simulate from the axis stays on the axis") {
  auto m = model_hat(40);
  SimConfig cfg;
  cfg.system = System::TransformedFull;
  cfg.t_burn = 0;
  cfg.t_final = 50;
  auto r = simulate(cfg, State::transformed(0, 0, 1), m);
  for (const auto& s : r.samples) {
    CHECK(s.c[0] == 0.0);
    CHECK(s.c[1] == 0.0);
  }
}

TEST_CASE("long theta-z run has the exact Gaussian z-marginal (KS < 0.01 at 1e6 samples)") {
  auto m = model_hat(30);
  SimConfig cfg;
  cfg.t_burn = 50;
  cfg.t_final = cfg.t_burn + 1e5;
  cfg.seed = 2024;
  std::vector<double> z;
  z.reserve(1000000);
  NoiseStream ns(cfg.seed, 0);
  double next = cfg.t_burn;
  integrate(cfg, State::polar(0, 0, m.consts.z_star), m, ns, [&](const StepEvent& e) {
    if (e.t >= next && z.size() < 1000000) {
      z.push_back(e.state.coords[2]);
      next += 0.1;
    }
  });
  REQUIRE(z.size() == 1000000);
  std::sort(z.begin(), z.end());
  double sd = m.alpha() / std::sqrt(2 * m.consts.gamma);
  double ks = 0;
  for (size_t i = 0; i < z.size(); ++i) {
    double F = normal_cdf((z[i] - m.consts.z_star) / sd);
    ks = std::max({ks, std::fabs(F - double(i) / z.size()), std::fabs(F - double(i + 1) / z.size())});
  }
  MESSAGE("KS distance " << ks);
  CHECK(ks < 0.01);
}

TEST_CASE("polar and (x,y) integrators agree on theta for frozen z") {
  auto m = model_hat(0);
  const auto& c = m.consts;
  double th_a = -0.9, th_b = -0.9, z = c.z_star;
  double worst = 0;
  const double dt = 1e-4;
  for (int i = 0; i < 100000; ++i) {
    auto a = step_theta_z(th_a, z, dt, 0, 0, c, 0.0);
    auto b = step_polar_linear(th_b, z, dt, 0, 0, c, 0.0);
    th_a = a->theta;
    th_b = b.theta;
    worst = std::max(worst, std::fabs(reduce_theta(th_a - th_b)));
  }
  MESSAGE("max |theta difference| " << worst);
  CHECK(worst < 1e-6);
}

namespace {

// Coupled Euler-Maruyama paths at dt, dt/2, dt/4: time average of sin^2(theta)
// over [0, T]. Returns the mean over paths of each level.
std::array<double, 3> coupled_em_averages(const DerivedConsts& c, double alpha, double dt, double T, int paths) {
  std::array<double, 3> out{0, 0, 0};
  const int n_coarse = int(std::lround(T / dt));
  for (int p = 0; p < paths; ++p) {
    NoiseStream ns(77, p);
    std::array<double, 3> th{0.3, 0.3, 0.3}, z{1.0, 1.0, 1.0}, acc{0, 0, 0};
    for (int k = 0; k < n_coarse; ++k) {
      double w[4];
      for (double& v : w) v = ns.normal();
      // finest level: four steps of dt/4
      for (int j = 0; j < 4; ++j) {
        double h = dt / 4;
        acc[2] += h * std::pow(std::sin(th[2]), 2);
        auto s = step_theta_z_em(th[2], z[2], h, w[j], c, alpha);
        th[2] = s.theta, z[2] = s.z;
      }
      for (int j = 0; j < 2; ++j) {
        double h = dt / 2;
        acc[1] += h * std::pow(std::sin(th[1]), 2);
        auto s = step_theta_z_em(th[1], z[1], h, (w[2 * j] + w[2 * j + 1]) / std::sqrt(2.0), c, alpha);
        th[1] = s.theta, z[1] = s.z;
      }
      acc[0] += dt * std::pow(std::sin(th[0]), 2);
      auto s = step_theta_z_em(th[0], z[0], dt, (w[0] + w[1] + w[2] + w[3]) / 2.0, c, alpha);
      th[0] = s.theta, z[0] = s.z;
    }
    for (int l = 0; l < 3; ++l) out[l] += acc[l] / T / paths;
  }
  return out;
}

}  // namespace

TEST_CASE("Euler-Maruyama weak order: halving dt halves the bias") {
  auto m = model_hat(10);
  auto a = coupled_em_averages(m.consts, m.alpha(), 0.04, 5.0, 20000);
  double d1 = a[0] - a[1], d2 = a[1] - a[2];
  double slope = std::log2(std::fabs(d1 / d2));
  MESSAGE("EM differences " << d1 << " " << d2 << " slope " << slope);
  CHECK(slope > 0.5);
  CHECK(slope < 2.0);
}

TEST_CASE("EM cross-check of the splitting scheme on a time average") {
  auto m = model_hat(10);
  SimConfig cfg;
  cfg.t_burn = 50;
  cfg.t_final = 2050;
  double acc[2] = {0, 0};
  for (int k = 0; k < 2; ++k) {
    cfg.scheme = k ? Scheme::EulerMaruyama : Scheme::Splitting;
    cfg.dt0 = k ? 2.5e-3 : 1e-2;
    double sum = 0, len = 0;
    NoiseStream ns(5, 0);
    integrate(cfg, State::polar(0, 0, 1), m, ns, [&](const StepEvent& e) {
      if (!e.post_burn) return;
      sum += e.dt * std::pow(std::sin(e.theta_mid), 2);
      len += e.dt;
    });
    acc[k] = sum / len;
  }
  MESSAGE("splitting " << acc[0] << " EM " << acc[1]);
  CHECK(acc[0] == doctest::Approx(acc[1]).epsilon(0.05));
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.dt0 = 0.2;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg.dt0 = 0.01;
  cfg.t_final = cfg.t_burn - 1;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg.t_final = cfg.t_burn + 1;
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg.thin = 1;
  cfg.sample_every = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  CHECK(default_burn_in(derive_constants(P)) == doctest::Approx(std::max(50.0, 20 / (16.0 / 33.0))));
}
