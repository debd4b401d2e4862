#pragma once

#include <string>
#include <vector>

#include "lorenzlab/core.hpp"
#include "lorenzlab/fokker_planck.hpp"
#include "lorenzlab/transforms.hpp"

namespace lorenzlab {

struct LyapConstants {
  double eps_alpha = 0;
  double Gamma = 0;  // alpha^2 + 2 gamma z*^2
  double kappa = 0;
  double delta = 0;  // |kappa|^{3/2}
  double c_alpha = 0;
  double d = 0;      // filled in by verify_drift_V0
  double K = 0;      // filled in by verify_drift_full
  double c_bar = 0;  // beta / (2 alpha_hat^2)
  double lambda = 0;
  int binding_ceiling = 0;  // which of the four kappa ceilings is smallest (0..3)
};

// eps_alpha = min(gamma/(2 Gamma), beta nu^2 sigma^3 chi^4 / (16 alpha^2))
double eps_alpha(const Params& p, const DerivedConsts& c, double alpha);

// sup over the grid of (|g| + |d_z g|) exp(-eps z^2 / 2)
double measure_c_alpha(const GridFunction& g, double eps);

// Throws InvalidParameter if lambda == 0 or alpha == 0.
LyapConstants select_constants(double lambda, double alpha, const Params& p, const DerivedConsts& c,
                               const GridFunction& g);

// Piecewise-cubic (Catmull-Rom) interpolant of g, periodic in theta.
// Reproduces nodal values exactly; valid for z between the first and last
// z-nodes.
class GInterpolant {
 public:
  explicit GInterpolant(GridFunction g);

  struct Value {
    double g = 0, g_theta = 0, g_z = 0, g_zz = 0;
  };
  // Throws DomainError outside the node range in z.
  Value operator()(double theta, double z) const;

  const Grid2D& grid() const { return g_.grid; }
  double z_min() const { return g_.grid.z(0); }
  double z_max() const { return g_.grid.z(g_.grid.n_z - 1); }

 private:
  double at(int i, int j) const;
  GridFunction g_;
};

struct V0Value {
  double value = 0;
  Partials d;  // f_r, f_theta, f_z, f_zz
};

// V0 = exp(-kappa r) (1 - kappa g + delta exp(eps z^2)) at a polar state.
V0Value eval_V0(const State& polar, const GInterpolant& g, const LyapConstants& k);

// Test points: every r, crossed with the (theta, z) grid nodes nearest to a
// uniform n_theta x n_z lattice over the z-window shrunk by `shrink`.
struct Lattice {
  std::vector<double> r;
  std::vector<int> theta_idx, z_idx;
  Grid2D grid;

  std::size_t size() const { return r.size() * theta_idx.size() * z_idx.size(); }
  double z_lo() const { return grid.z(z_idx.front()); }
  double z_hi() const { return grid.z(z_idx.back()); }
  std::string describe() const;
};

Lattice default_lattice(const Grid2D& grid, int n_theta = 129, int n_z = 257, double shrink = 0.1,
                        std::vector<double> r = {-1.0, 0.0, 1.0});
// Keeps only lattice rows with |z - z*| <= half_width.
Lattice restrict_z(Lattice l, double z_star, double half_width);

struct DriftReport {
  std::string lattice;
  std::size_t n_points = 0;
  // V0: max of L1 V0 / ((1+z^2) V0). Full: max of L V / V over the outer half
  // of the lattice by V; c is half its magnitude, K the smallest offset that
  // then works everywhere.
  double worst_margin = 0;
  State worst_point;
  bool pass = false;

  double d = 0;  // V0: largest d with L1 V0 <= -d (1+z^2) V0 on the lattice
  double c = 0, K = 0;  // full: L V <= K - c V

  double r_spread = 0;  // max relative spread of L1 V0 / V0 across r at fixed (theta, z)
  double dz_bound = 0;  // max |d_z V0| / ((1+|z|) V0)
  double proof_shape_ratio = 0;  // max of L1 V0 / ((1/6) min(kappa lambda, gamma/4) (1 + delta eps z^2) V0)

  // full only: cross term |x(x+eta y) d_z V0| / ((d/2)(1+z^2) V) on the small-radius sublattice
  std::size_t cross_points = 0;
  double cross_worst = 0;
  double cross_r = 0;
};

struct DriftOptions {
  // Use the one-sided/centred differences of the discrete operator for the
  // g-derivatives at grid nodes (L0 g = lambda - F holds to solver accuracy).
  // Otherwise differentiate the interpolant.
  bool stencil_partials = true;
  int threads = 0;
};

DriftReport verify_drift_V0(const LyapConstants& k, const GridFunction& g, const Lattice& lattice,
                            const DerivedConsts& c, double alpha, const DriftOptions& opt = {});

// V1(x,y,z) = exp(c_bar |U|^2), |U|^2 = X^2 + Y^2 + (Z - sigma - rho)^2 in
// original coordinates; value and transformed-chart partials.
struct V1Value {
  double value = 0;
  Partials d;  // f_x, f_y, f_z, f_zz
};
V1Value eval_V1(const State& transformed, const Params& p, const DerivedConsts& c, double c_bar);

// Needs k.d from verify_drift_V0 for the cross-term diagnostic.
DriftReport verify_drift_full(const LyapConstants& k, const GridFunction& g, const Lattice& lattice,
                              const Params& p, const DerivedConsts& c, double alpha,
                              const DriftOptions& opt = {});

}  // namespace lorenzlab
