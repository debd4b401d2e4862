#include "lorenzlab/fokker_planck.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

namespace lorenzlab {

void Grid2D::validate(double z_star) const {
  if (n_theta < 16 || n_z < 16) throw InvalidParameter("grid: n_theta and n_z must be >= 16");
  if (!(z_lo < z_star && z_star < z_hi)) throw InvalidParameter("grid: need z_lo < z* < z_hi");
}

Grid2D Grid2D::around(const DerivedConsts& c, double alpha, int n_theta, int n_z, double width_sd) {
  double w = width_sd * alpha / std::sqrt(2 * c.gamma);
  Grid2D g{n_theta, n_z, c.z_star - w, c.z_star + w};
  g.validate(c.z_star);
  return g;
}

SparseOperator build_operator(const Grid2D& g, const DerivedConsts& c, double alpha) {
  if (!(alpha > 0)) throw InvalidParameter("build_operator: alpha must be positive (degenerate diffusion)");
  g.validate(c.z_star);
  const int nt = g.n_theta, nz = g.n_z;
  const double ht = g.h_theta(), hz = g.h_z();
  const double D = alpha * alpha / (2 * hz * hz);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size_t(g.size()) * 4);
  for (int j = 0; j < nz; ++j) {
    const double z = g.z(j);
    const double cz = -c.gamma * (z - c.z_star);
    const double up = j + 1 < nz ? D + std::max(cz, 0.0) / hz : 0.0;
    const double dn = j > 0 ? D + std::max(-cz, 0.0) / hz : 0.0;
    for (int i = 0; i < nt; ++i) {
      const int k = g.index(i, j);
      const double b = theta_drift(g.theta(i), z);
      double diag = 0;
      if (b > 0) {
        trip.emplace_back(k, g.index((i + 1) % nt, j), b / ht);
        diag += b / ht;
      } else if (b < 0) {
        trip.emplace_back(k, g.index((i + nt - 1) % nt, j), -b / ht);
        diag -= b / ht;
      }
      if (up > 0) trip.emplace_back(k, g.index(i, j + 1), up), diag += up;
      if (dn > 0) trip.emplace_back(k, g.index(i, j - 1), dn), diag += dn;
      trip.emplace_back(k, k, -diag);
    }
  }
  SparseOperator op;
  op.grid = g;
  op.matrix.resize(g.size(), g.size());
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

Eigen::VectorXd lu_solve(const ColMatrix& A, const Eigen::VectorXd& b, const char* what) {
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": sparse LU failed (" + lu.lastErrorMessage() + ")");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw NumericalError(std::string(what) + ": sparse solve failed");
  return x;
}

// Node nearest to (theta, z).
int nearest_node(const Grid2D& g, double theta, double z) {
  int i = std::clamp(int(std::floor((theta + 0.5 * kPi) / g.h_theta())), 0, g.n_theta - 1);
  int j = std::clamp(int(std::floor((z - g.z_lo) / g.h_z())), 0, g.n_z - 1);
  return g.index(i, j);
}

}  // namespace

DiscreteMeasure stationary_measure(const SparseOperator& op) {
  const Grid2D& g = op.grid;
  const int n = g.size();
  // transpose(op) with one equation swapped for the normalisation
  const int p = nearest_node(g, 0.0, 0.5 * (g.z_lo + g.z_hi));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(op.matrix.nonZeros() + n);
  for (int r = 0; r < op.matrix.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(op.matrix, r); it; ++it)
      if (it.col() != p) trip.emplace_back(it.col(), r, it.value());
  for (int k = 0; k < n; ++k) trip.emplace_back(p, k, g.cell_area());
  ColMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[p] = 1.0;

  DiscreteMeasure mu;
  mu.grid = g;
  mu.density = lu_solve(A, rhs, "stationary_measure");
  const double mx = mu.density.maxCoeff();
  if (!(mx > 0)) throw NumericalError("stationary_measure: singular discretisation (no positive weight)");
  const double mn = mu.density.minCoeff();
  mu.clamped_min = std::min(0.0, mn / mx);
  if (mu.clamped_min < -1e-8)
    throw NumericalError("stationary_measure: negative weights far above round-off (" +
                         std::to_string(mu.clamped_min) + " of max)");
  mu.density = mu.density.cwiseMax(0.0);
  mu.density /= mu.density.sum() * g.cell_area();
  return mu;
}

Eigen::VectorXd lambda_integrand_nodes(const Grid2D& g) {
  Eigen::VectorXd F(g.size());
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_theta; ++i) F[g.index(i, j)] = lambda_integrand(g.theta(i), g.z(j));
  return F;
}

double expectation(const DiscreteMeasure& mu, const Eigen::VectorXd& f) {
  return mu.density.dot(f) * mu.grid.cell_area();
}

double lambda_from_measure(const DiscreteMeasure& mu) { return expectation(mu, lambda_integrand_nodes(mu.grid)); }

std::vector<double> z_marginal_mass(const DiscreteMeasure& mu) {
  const Grid2D& g = mu.grid;
  std::vector<double> m(g.n_z, 0.0);
  for (int j = 0; j < g.n_z; ++j) {
    double s = 0;
    for (int i = 0; i < g.n_theta; ++i) s += mu.density[g.index(i, j)];
    m[j] = s * g.cell_area();
  }
  return m;
}

double marginal_l1_to_gaussian(const DiscreteMeasure& mu, const DerivedConsts& c, double alpha) {
  const Grid2D& g = mu.grid;
  const double sd = alpha / std::sqrt(2 * c.gamma);
  auto cdf = [&](double z) { return 0.5 * std::erfc(-(z - c.z_star) / (sd * std::sqrt(2.0))); };
  auto m = z_marginal_mass(mu);
  double l1 = 0;
  for (int j = 0; j < g.n_z; ++j) {
    double lo = g.z_lo + j * g.h_z(), hi = lo + g.h_z();
    l1 += std::fabs(m[j] - (cdf(hi) - cdf(lo)));
  }
  return l1;
}

GridFunction solve_poisson(const SparseOperator& op, const DiscreteMeasure& mu, double lambda,
                           PoissonDiagnostics* diag) {
  const Grid2D& g = op.grid;
  const int n = g.size();
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, lambda) - lambda_integrand_nodes(g);
  rhs.array() -= expectation(mu, rhs);  // onto the mu-orthogonal complement

  int p;
  mu.density.maxCoeff(&p);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(op.matrix.nonZeros());
  for (int r = 0; r < op.matrix.outerSize(); ++r) {
    if (r == p) continue;
    for (SparseRowMatrix::InnerIterator it(op.matrix, r); it; ++it) trip.emplace_back(r, it.col(), it.value());
  }
  trip.emplace_back(p, p, 1.0);
  ColMatrix B(n, n);
  B.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd b = rhs;
  b[p] = 0.0;

  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(B);
  lu.factorize(B);
  if (lu.info() != Eigen::Success) throw NumericalError("solve_poisson: sparse LU failed (" + lu.lastErrorMessage() + ")");
  Eigen::VectorXd gv = lu.solve(b);

  const double rhs_norm = rhs.norm();
  auto residual = [&] { return (op.matrix * gv - rhs).norm() / rhs_norm; };
  double res = residual();
  int refinements = 0;
  for (; res > 1e-10 && refinements < 3; ++refinements) {
    Eigen::VectorXd r = b - B * gv;
    gv += lu.solve(r);
    res = residual();
  }
  if (!(res <= 1e-8))
    throw NumericalError("solve_poisson: residual " + std::to_string(res) + " after " +
                         std::to_string(refinements) + " refinement steps (pinned node " + std::to_string(p) + ")");
  gv.array() -= expectation(mu, gv);
  if (diag) *diag = {residual(), p, refinements};
  return {g, gv};
}

PdeSolution solve_pde(const Model& m, int n_theta, int n_z) {
  PdeSolution s;
  s.op = build_operator(Grid2D::around(m.consts, m.alpha(), n_theta, n_z), m.consts, m.alpha());
  s.mu = stationary_measure(s.op);
  s.lambda = lambda_from_measure(s.mu);
  return s;
}

EstimateWithCI estimate_lambda_pde(const Model& m, int n_theta, int n_z) {
  auto t0 = std::chrono::steady_clock::now();
  auto s = solve_pde(m, n_theta, n_z);
  EstimateWithCI e;
  e.value = s.lambda;
  e.method = Method::PDE;
  e.n_samples = s.op.grid.size();
  e.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return e;
}

void write_grid_csv(std::ostream& os, const Grid2D& g, const Eigen::VectorXd& v) {
  os << "theta,z,value\n";
  char buf[96];
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_theta; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.theta(i), g.z(j), v[g.index(i, j)]);
      os << buf;
    }
}

}  // namespace lorenzlab
