#pragma once

#include <Eigen/Sparse>
#include <ostream>
#include <vector>

#include "lorenzlab/core.hpp"
#include "lorenzlab/estimators.hpp"
#include "lorenzlab/transforms.hpp"

namespace lorenzlab {

// Cell-centred tensor grid on theta in [-pi/2, pi/2) (periodic) times [z_lo, z_hi].
// Node (i, j) has index j * n_theta + i.
struct Grid2D {
  int n_theta = 256, n_z = 512;
  double z_lo = -1, z_hi = 1;

  double h_theta() const { return kPi / n_theta; }
  double h_z() const { return (z_hi - z_lo) / n_z; }
  double theta(int i) const { return -0.5 * kPi + (i + 0.5) * h_theta(); }
  double z(int j) const { return z_lo + (j + 0.5) * h_z(); }
  int index(int i, int j) const { return j * n_theta + i; }
  int size() const { return n_theta * n_z; }
  double cell_area() const { return h_theta() * h_z(); }

  // Throws InvalidParameter on a malformed grid.
  void validate(double z_star) const;

  // z-window z* +- width_sd standard deviations of the OU law.
  static Grid2D around(const DerivedConsts& c, double alpha, int n_theta, int n_z, double width_sd = 8.0);
};

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SparseOperator {
  Grid2D grid;
  SparseRowMatrix matrix;  // discrete L0 acting on nodal values
};

struct DiscreteMeasure {
  Grid2D grid;
  Eigen::VectorXd density;  // per cell; sum(density) * cell_area = 1
  double clamped_min = 0;   // most negative raw weight relative to the max, before clamping
};

struct GridFunction {
  Grid2D grid;
  Eigen::VectorXd values;
};

// Upwind drifts, centred diffusion, periodic theta, reflecting z ends.
SparseOperator build_operator(const Grid2D& grid, const DerivedConsts& c, double alpha);

DiscreteMeasure stationary_measure(const SparseOperator& op);

double lambda_from_measure(const DiscreteMeasure& mu);

// Integral of a nodal function against mu.
double expectation(const DiscreteMeasure& mu, const Eigen::VectorXd& f);

// Probability of each z-row.
std::vector<double> z_marginal_mass(const DiscreteMeasure& mu);
// L1 distance of the z-marginal to N(z*, alpha^2 / (2 gamma)) on the grid rows.
double marginal_l1_to_gaussian(const DiscreteMeasure& mu, const DerivedConsts& c, double alpha);

struct PoissonDiagnostics {
  double residual_rel = 0;  // ||op g - rhs|| / ||rhs||
  int pinned_index = 0;
  int refinements = 0;
};

// Solves op g = lambda - F with mu(g) = 0. Throws NumericalError when the
// residual stays above 1e-8 relative.
GridFunction solve_poisson(const SparseOperator& op, const DiscreteMeasure& mu, double lambda,
                           PoissonDiagnostics* diag = nullptr);

// Nodal values of F(theta, z) = -1 + (z/2) sin(2 theta).
Eigen::VectorXd lambda_integrand_nodes(const Grid2D& grid);

struct PdeSolution {
  SparseOperator op;
  DiscreteMeasure mu;
  double lambda = 0;
};
PdeSolution solve_pde(const Model& m, int n_theta = 256, int n_z = 512);
EstimateWithCI estimate_lambda_pde(const Model& m, int n_theta = 256, int n_z = 512);

// theta,z,value rows in index order.
void write_grid_csv(std::ostream& os, const Grid2D& grid, const Eigen::VectorXd& values);

}  // namespace lorenzlab
