#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lorenzlab/fokker_planck.hpp"

using namespace lorenzlab;

namespace {

const Params P{10, 8.0 / 3.0, 0.5, 0};

DiscreteMeasure point_mass(const Grid2D& g, int i, int j) {
  DiscreteMeasure mu;
  mu.grid = g;
  mu.density = Eigen::VectorXd::Zero(g.size());
  mu.density[g.index(i, j)] = 1.0 / g.cell_area();
  return mu;
}

}  // namespace

TEST_CASE("grid validation") {
  auto c = derive_constants(P);
  CHECK_THROWS_AS((Grid2D{8, 64, -1, 5}.validate(c.z_star)), InvalidParameter);
  CHECK_THROWS_AS((Grid2D{64, 64, 2, 5}.validate(c.z_star)), InvalidParameter);
  auto g = Grid2D::around(c, 3.0, 32, 64);
  CHECK(g.z_hi - c.z_star == doctest::Approx(8 * 3.0 / std::sqrt(2 * c.gamma)));
  CHECK(g.theta(0) == doctest::Approx(-kPi / 2 + kPi / 64));
  CHECK_THROWS_AS(build_operator(g, c, 0.0), InvalidParameter);
}

TEST_CASE("operator is a conservative generator matrix") {
  auto m = Model::from_hat(P, 20.0);
  for (double width : {8.0, 16.0}) {
    auto g = Grid2D::around(m.consts, m.alpha(), 48, 96, width);
    auto op = build_operator(g, m.consts, m.alpha());
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.size());
    CHECK((op.matrix * ones).cwiseAbs().maxCoeff() < 1e-9 * op.matrix.coeffs().cwiseAbs().maxCoeff());
    bool nonneg = true;
    int max_row = 0;
    for (int r = 0; r < op.matrix.outerSize(); ++r) {
      int cnt = 0;
      for (SparseRowMatrix::InnerIterator it(op.matrix, r); it; ++it, ++cnt)
        if (it.col() != r && it.value() < 0) nonneg = false;
      max_row = std::max(max_row, cnt);
    }
    CHECK(nonneg);
    CHECK(max_row <= 5);
  }
}

TEST_CASE("stencil applied to f = z reproduces the OU drift up to O(h_z)") {
  auto m = Model::from_hat(P, 20.0);
  auto g = Grid2D::around(m.consts, m.alpha(), 32, 128);
  auto op = build_operator(g, m.consts, m.alpha());
  Eigen::VectorXd f(g.size());
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_theta; ++i) f[g.index(i, j)] = g.z(j);
  Eigen::VectorXd lf = op.matrix * f;
  for (int j = 1; j + 1 < g.n_z; j += 7) {
    double expect = -m.consts.gamma * (g.z(j) - m.consts.z_star);
    // upwinding of a linear function is exact; the only error would come from the diffusion
    CHECK(lf[g.index(5, j)] == doctest::Approx(expect).epsilon(1e-9).scale(g.h_z()));
  }
}

TEST_CASE("lambda of point masses") {
  Grid2D g{18, 16, 1.5, 2.5};
  // theta(13) = -pi/2 + 13.5 pi/18 = pi/4, z(8) = 2.03125
  CHECK(g.theta(13) == doctest::Approx(kPi / 4));
  auto mu = point_mass(g, 13, 8);
  CHECK(lambda_from_measure(mu) == doctest::Approx(-1 + g.z(8) / 2));
  Grid2D g2{18, 16, 1.5 - 0.03125, 2.5 - 0.03125};
  CHECK(g2.z(8) == doctest::Approx(2.0));
  CHECK(lambda_from_measure(point_mass(g2, 13, 8)) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("stationary measure: positivity, normalisation, gaussian z-marginal, duality") {
  auto m = Model::from_hat(P, 20.0);
  auto g = Grid2D::around(m.consts, m.alpha(), 128, 256);
  auto op = build_operator(g, m.consts, m.alpha());
  auto mu = stationary_measure(op);
  CHECK(mu.density.minCoeff() >= 0);
  CHECK(mu.density.sum() * g.cell_area() == doctest::Approx(1.0).epsilon(1e-12));
  double l1 = marginal_l1_to_gaussian(mu, m.consts, m.alpha());
  MESSAGE("z-marginal L1 distance " << l1 << ", clamped_min " << mu.clamped_min);
  CHECK(l1 < 0.02);
  // <mu, op f> = 0 for arbitrary f
  NoiseStream ns(3, 0);
  Eigen::VectorXd f(g.size());
  for (int k = 0; k < g.size(); ++k) f[k] = ns.normal();
  Eigen::VectorXd lf = op.matrix * f;
  CHECK(std::fabs(expectation(mu, lf)) < 1e-9 * expectation(mu, lf.cwiseAbs()));
}

TEST_CASE("pde lambda agrees with the Monte Carlo value at alpha_hat = 10") {
  auto m = Model::from_hat(P, 10.0);
  auto e = estimate_lambda_pde(m, 128, 256);
  MESSAGE("pde lambda(10) " << e.value << " in " << e.wall_time_s << " s");
  // MC: -0.1955 +- 0.008
  CHECK(std::fabs(e.value + 0.1955) < 0.008 + 0.02);
  CHECK(e.method == Method::PDE);
}

TEST_CASE("grid refinement shrinks successive differences") {
  auto m = Model::from_hat(P, 10.0);
  double l1 = solve_pde(m, 32, 64).lambda;
  double l2 = solve_pde(m, 64, 128).lambda;
  double l3 = solve_pde(m, 128, 256).lambda;
  MESSAGE(l1 << " " << l2 << " " << l3);
  CHECK(std::fabs(l2 - l1) >= 1.5 * std::fabs(l3 - l2));
}

TEST_CASE("poisson solve: centering, residual, growth") {
  auto m = Model::from_hat(P, 40.0);
  auto s = solve_pde(m, 64, 128);
  PoissonDiagnostics d;
  auto g = solve_poisson(s.op, s.mu, s.lambda, &d);
  CHECK(g.values.allFinite());
  CHECK(std::fabs(expectation(s.mu, g.values)) < 1e-12 * std::max(1.0, g.values.cwiseAbs().maxCoeff()));
  CHECK(d.residual_rel <= 1e-8);
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(g.values.size(), s.lambda) - lambda_integrand_nodes(s.op.grid);
  CHECK((s.op.matrix * g.values - rhs).norm() <= 1e-8 * rhs.norm());

  // weighted sup is stable under refinement
  const double eps = 1e-3;
  auto weighted_sup = [&](const GridFunction& gf) {
    double w = 0;
    for (int j = 0; j < gf.grid.n_z; ++j)
      for (int i = 0; i < gf.grid.n_theta; ++i) {
        double z = gf.grid.z(j);
        w = std::max(w, std::fabs(gf.values[gf.grid.index(i, j)]) * std::exp(-eps * z * z / 2));
      }
    return w;
  };
  auto s2 = solve_pde(m, 128, 256);
  auto g2 = solve_poisson(s2.op, s2.mu, s2.lambda);
  double w1 = weighted_sup(g), w2 = weighted_sup(g2);
  MESSAGE("weighted sup " << w1 << " -> " << w2);
  CHECK(std::isfinite(w2));
  CHECK(w2 == doctest::Approx(w1).epsilon(0.5));
}

TEST_CASE("grid csv export") {
  Grid2D g{16, 16, 0, 4};
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(g.size(), 0, 1);
  std::ostringstream os;
  write_grid_csv(os, g, v);
  std::string s = os.str();
  CHECK(s.rfind("theta,z,value\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == g.size() + 1);
}

TEST_CASE("pde lambda at alpha_hat = 27.7 is zero within 0.02") {
  auto e = estimate_lambda_pde(Model::from_hat(P, 27.7));
  MESSAGE("pde lambda(27.7) on 256x512: " << e.value);
  CHECK(std::fabs(e.value) <= 0.02);
}
