#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lorenzlab/excursions.hpp"

using namespace lorenzlab;

namespace {

const Params P{10, 8.0 / 3.0, 0.5, 0};

SimConfig window(double T, double dt0 = 1e-2, std::uint64_t seed = 1) {
  SimConfig c;
  c.t_burn = 10;
  c.t_final = 10 + T;
  c.dt0 = dt0;
  c.seed = seed;
  return c;
}

double one(double, double) { return 1.0; }
double zero(double, double) { return 0.0; }

}  // namespace

TEST_CASE("zones") {
  CHECK(zone(0.3).lo == -1);
  CHECK(zone(0.3).hi == 1);
  CHECK(zone(0.5).hi == 1);
  CHECK(zone(2).lo == 1);
  CHECK(zone(2).hi == 4);
  CHECK(zone(-4).lo == -8);
  CHECK(zone(-4).hi == -2);
}

TEST_CASE("alpha = 0: z never leaves its zone") {
  auto run = run_excursions(Model::from_hat(P, 0.0), window(200), true);
  REQUIRE(run.excursions.size() == 1);
  CHECK_FALSE(run.excursions[0].complete);
  CHECK(run.excursions[0].tau == doctest::Approx(200));
  CHECK(run.complete == 0);
  // long excursion is thinned but keeps exact endpoints
  const auto& s = run.excursions[0].samples;
  CHECK(s.size() <= std::size_t(kMaxInterior) + 2);
  CHECK(s.size() > std::size_t(kMaxInterior) / 2);
  CHECK(s.front().t == 10.0);
  CHECK(s.back().t == 210.0);
  CHECK_THROWS_AS(estimate_lambda_excursion(run.excursions), InvalidParameter);
}

TEST_CASE("decomposition invariants on a theta-z run") {
  auto m = Model::from_hat(P, 30.0);
  auto run = run_excursions(m, window(2000), true);
  const auto& ex = run.excursions;
  REQUIRE(run.complete > 100);
  double total = 0;
  bool jump = true, chain = true, inside = true;
  for (std::size_t k = 0; k < ex.size(); ++k) {
    total += ex[k].tau;
    if (ex[k].complete) jump = jump && std::fabs(ex[k].z_end_level - ex[k].z_start_level) >= 0.25;
    if (k + 1 < ex.size()) {
      const auto &a = ex[k].samples.back(), &b = ex[k + 1].samples.front();
      chain = chain && a.t == b.t && a.z == b.z && a.theta == b.theta;
      chain = chain && ex[k].z_end_level == ex[k + 1].z_start_level;
    }
    Zone zn = zone(ex[k].z_start_level);
    for (std::size_t i = 1; i + 1 < ex[k].samples.size(); ++i) inside = inside && zn.contains(ex[k].samples[i].z);
  }
  CHECK(jump);
  CHECK(chain);
  CHECK(inside);
  CHECK(total == doctest::Approx(2000).epsilon(1e-12));
}

TEST_CASE("lifted functionals") {
  // synthetic path, z sweeping up through several zones
  std::vector<ExcursionSample> traj;
  const double dt = 1e-3;
  for (int k = 0; k <= 20000; ++k) {
    double t = k * dt;
    traj.push_back({t, reduce_theta(0.7 * t), 0.3 + 0.5 * t + 0.2 * std::sin(3 * t)});
  }
  auto ex = decompose(traj, lambda_integrand);
  REQUIRE(ex.size() > 3);
  for (const auto& e : ex) {
    CHECK(lift_functional(one, e) == doctest::Approx(e.tau).epsilon(1e-12));
    CHECK(lift_functional(zero, e) == 0.0);
  }
  // against an independent midpoint sum on the fine path
  const auto& e = ex[1];
  double mid = 0;
  for (int k = 0; k < 20000; ++k) {
    double t = (k + 0.5) * dt;
    if (t < e.t_start || t > e.t_start + e.tau) continue;
    mid += dt * lambda_integrand(0.7 * t, 0.3 + 0.5 * t + 0.2 * std::sin(3 * t));
  }
  CHECK(lift_functional(lambda_integrand, e) == doctest::Approx(mid).epsilon(1e-3));
  CHECK(e.Fhat == doctest::Approx(lift_functional(lambda_integrand, e)).epsilon(1e-5));
  CHECK_THROWS_AS(decompose({}, lambda_integrand), InvalidParameter);
}

TEST_CASE("ratio estimator identity and constants") {
  auto m = Model::from_hat(P, 20.0);
  auto run = run_excursions(m, window(3000));
  auto e = estimate_lambda_excursion(run.excursions);
  CHECK(e.method == Method::Excursion);
  CHECK(e.value == doctest::Approx(run.direct_average()).epsilon(1e-12));

  for (double c : {1.0, 0.5}) {
    ExcursionDecomposer d(false);
    NoiseStream ns(9, 0);
    double z = 0, t = 0;
    d.start(t, 0, z);
    for (int k = 0; k < 200000; ++k) {
      double h = 0.01;
      z += -z * h + 3 * std::sqrt(h) * ns.normal();
      double t1 = t + h;
      d.step(t1, 0, z, c * (t1 - t));
      t = t1;
    }
    auto ce = estimate_lambda_excursion(d.finish());
    CHECK(ce.value == c);
    CHECK(ce.half_width == 0.0);
  }
}

TEST_CASE("alpha_hat = 30: positive and consistent with the direct time average") {
  auto m = Model::from_hat(P, 30.0);
  auto run = run_excursions(m, window(2e5, 1e-2, 21));
  auto e = estimate_lambda_excursion(run.excursions);
  auto mc = estimate_lambda_mc(m, window(2e5, 1e-2, 22), {1, 1});
  MESSAGE("excursion " << e.value << " +- " << e.half_width << " (" << e.n_samples << " excursions), mc " << mc.value
                       << " +- " << mc.half_width);
  CHECK(e.value > 0);
  CHECK(std::fabs(e.value - mc.value) <= e.half_width + mc.half_width);
}

TEST_CASE("stopping-time moments scale like 1 ^ (z0/alpha)^2") {
  const double alpha = 20;
  auto m = Model::from_transformed(P, alpha);
  auto run = run_excursions(m, window(500, 1e-4, 3));
  auto rep = stop_time_stats(run.excursions, alpha);
  REQUIRE(rep.buckets.size() >= 4);
  for (const auto& b : rep.buckets)
    MESSAGE("|z0| ~ " << b.mean_abs_z0 << ": n " << b.n << ", E tau " << b.mean_tau << ", ratio " << b.ratio_mean
                      << ", ratio4 " << b.ratio_m4);
  MESSAGE("slope " << rep.slope << " over " << rep.slope_buckets << " buckets");
  CHECK(rep.slope_buckets >= 2);
  CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.15));
  CHECK(rep.ratio_spread < 5);
  CHECK(rep.ratio4_spread < 5);
  bool far = false;
  for (const auto& b : rep.buckets)
    if (b.mean_abs_z0 >= alpha) {
      far = true;
      CHECK(b.ratio_mean == doctest::Approx(b.mean_tau));
    }
  CHECK(far);
}

TEST_CASE("excursion csv") {
  std::vector<Excursion> ex(2);
  ex[0].z_start_level = 1;
  ex[0].z_end_level = 2;
  ex[0].tau = 0.5;
  std::ostringstream os;
  write_excursions_csv(os, ex);
  CHECK(os.str().rfind("idx,z_start,z_end,tau,Fhat\n0,1,2,0.5,0\n", 0) == 0);
}
