#include "lorenzlab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "lorenzlab/parallel.hpp"

namespace lorenzlab {

double eps_alpha(const Params& p, const DerivedConsts& c, double alpha) {
  if (!(alpha > 0)) throw InvalidParameter("eps_alpha: alpha must be positive");
  double Gamma = alpha * alpha + 2 * c.gamma * c.z_star * c.z_star;
  double s3 = p.sigma * p.sigma * p.sigma;
  double chi4 = std::pow(c.chi, 4);
  return std::min(c.gamma / (2 * Gamma), p.beta * c.nu * c.nu * s3 * chi4 / (16 * alpha * alpha));
}

namespace {

double dz_node(const GridFunction& g, int i, int j) {
  const Grid2D& gr = g.grid;
  const auto& v = g.values;
  if (j == 0) return (v[gr.index(i, 1)] - v[gr.index(i, 0)]) / gr.h_z();
  if (j == gr.n_z - 1) return (v[gr.index(i, j)] - v[gr.index(i, j - 1)]) / gr.h_z();
  return (v[gr.index(i, j + 1)] - v[gr.index(i, j - 1)]) / (2 * gr.h_z());
}

}  // namespace

double measure_c_alpha(const GridFunction& g, double eps) {
  const Grid2D& gr = g.grid;
  double best = 0;
  for (int j = 0; j < gr.n_z; ++j) {
    double z = gr.z(j), w = std::exp(-0.5 * eps * z * z);
    for (int i = 0; i < gr.n_theta; ++i)
      best = std::max(best, (std::fabs(g.values[gr.index(i, j)]) + std::fabs(dz_node(g, i, j))) * w);
  }
  return best;
}

LyapConstants select_constants(double lambda, double alpha, const Params& p, const DerivedConsts& c,
                               const GridFunction& g) {
  if (lambda == 0) throw InvalidParameter("select_constants: lambda = 0 has no sign to copy");
  if (!(alpha > 0)) throw InvalidParameter("select_constants: alpha must be positive");
  LyapConstants k;
  k.lambda = lambda;
  k.eps_alpha = eps_alpha(p, c, alpha);
  k.Gamma = alpha * alpha + 2 * c.gamma * c.z_star * c.z_star;
  k.c_alpha = measure_c_alpha(g, k.eps_alpha);
  const double gg = std::min(c.gamma, k.Gamma);
  const double ceil[4] = {
      lambda * lambda / (64 * k.Gamma * k.Gamma),
      k.eps_alpha * gg / 16,
      std::pow(k.eps_alpha * gg / (16 * k.c_alpha), 2),
      1 / std::pow(k.c_alpha, 4),
  };
  k.binding_ceiling = int(std::min_element(ceil, ceil + 4) - ceil);
  double mag = 0.5 * ceil[k.binding_ceiling];
  k.kappa = lambda > 0 ? mag : -mag;
  k.delta = std::pow(mag, 1.5);
  double ah = hat_from_alpha(p, alpha);
  k.c_bar = p.beta / (2 * ah * ah);
  return k;
}

GInterpolant::GInterpolant(GridFunction g) : g_(std::move(g)) {
  if (g_.values.size() != g_.grid.size()) throw InvalidParameter("GInterpolant: size mismatch");
}

// Ghost rows beyond the z ends by linear extrapolation.
double GInterpolant::at(int i, int j) const {
  const Grid2D& gr = g_.grid;
  i = ((i % gr.n_theta) + gr.n_theta) % gr.n_theta;
  if (j < 0) return 2 * g_.values[gr.index(i, 0)] - g_.values[gr.index(i, 1)];
  if (j >= gr.n_z) return 2 * g_.values[gr.index(i, gr.n_z - 1)] - g_.values[gr.index(i, gr.n_z - 2)];
  return g_.values[gr.index(i, j)];
}

namespace {

struct Cubic {
  double w[4], dw[4], ddw[4];
};

Cubic catmull_rom(double t) {
  double t2 = t * t, t3 = t2 * t;
  return {{0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)},
          {0.5 * (-3 * t2 + 4 * t - 1), 0.5 * (9 * t2 - 10 * t), 0.5 * (-9 * t2 + 8 * t + 1), 0.5 * (3 * t2 - 2 * t)},
          {-3 * t + 2, 9 * t - 5, -9 * t + 4, 3 * t - 1}};
}

// Node coordinates land exactly on a node.
double snap(double u) {
  double n = std::round(u);
  return std::fabs(u - n) < 1e-9 ? n : u;
}

}  // namespace

GInterpolant::Value GInterpolant::operator()(double theta, double z) const {
  const Grid2D& gr = g_.grid;
  if (!(z >= z_min() && z <= z_max()))
    throw DomainError("GInterpolant: z = " + std::to_string(z) + " outside the grid");
  auto eval = [&](double th, bool derivs) {
    double u = snap((reduce_theta(th) - gr.theta(0)) / gr.h_theta());
    int i0 = int(std::floor(u));
    double v = snap((z - gr.z(0)) / gr.h_z());
    int j0 = std::min(int(std::floor(v)), gr.n_z - 2);
    Cubic a = catmull_rom(u - i0), b = catmull_rom(v - j0);
    Value out;
    for (int q = 0; q < 4; ++q) {
      double row = 0, row_z = 0, row_zz = 0;
      for (int s = 0; s < 4; ++s) {
        double gv = at(i0 - 1 + q, j0 - 1 + s);
        row += b.w[s] * gv;
        if (derivs) {
          row_z += b.dw[s] * gv;
          row_zz += b.ddw[s] * gv;
        }
      }
      out.g += a.w[q] * row;
      out.g_z += a.w[q] * row_z;
      out.g_zz += a.w[q] * row_zz;
    }
    out.g_z /= gr.h_z();
    out.g_zz /= gr.h_z() * gr.h_z();
    return out;
  };
  Value v = eval(theta, true);
  const double h = 1e-3 * gr.h_theta();
  v.g_theta = (eval(theta + h, false).g - eval(theta - h, false).g) / (2 * h);
  return v;
}

namespace {

struct GDerivs {
  double g = 0, g_theta = 0, g_z = 0, g_zz = 0;
};

// Derivatives matching the discrete operator row at node (i, j).
GDerivs stencil_derivs(const GridFunction& gf, int i, int j, const DerivedConsts& c) {
  const Grid2D& gr = gf.grid;
  const auto& v = gf.values;
  const int nt = gr.n_theta;
  const double z = gr.z(j), th = gr.theta(i);
  const double g0 = v[gr.index(i, j)];
  GDerivs d;
  d.g = g0;
  double b = theta_drift(th, z);
  if (b > 0) d.g_theta = (v[gr.index((i + 1) % nt, j)] - g0) / gr.h_theta();
  else if (b < 0) d.g_theta = (g0 - v[gr.index((i + nt - 1) % nt, j)]) / gr.h_theta();
  double up = v[gr.index(i, j + 1)], dn = v[gr.index(i, j - 1)];
  double cz = -c.gamma * (z - c.z_star);
  d.g_z = cz > 0 ? (up - g0) / gr.h_z() : (g0 - dn) / gr.h_z();
  d.g_zz = (up - 2 * g0 + dn) / (gr.h_z() * gr.h_z());
  return d;
}

V0Value v0_from(double r, double z, const GDerivs& g, const LyapConstants& k) {
  const double eps = k.eps_alpha;
  const double E = std::exp(eps * z * z);
  const double w = std::exp(-k.kappa * r);
  V0Value o;
  o.value = w * (1 - k.kappa * g.g + k.delta * E);
  o.d.f = o.value;
  o.d.f_r = -k.kappa * o.value;
  o.d.f_theta = -w * k.kappa * g.g_theta;
  o.d.f_z = w * (-k.kappa * g.g_z + k.delta * 2 * eps * z * E);
  o.d.f_zz = w * (-k.kappa * g.g_zz + k.delta * (2 * eps + 4 * eps * eps * z * z) * E);
  return o;
}

GDerivs node_derivs(const GridFunction& g, const GInterpolant& gi, int i, int j, const DerivedConsts& c,
                    const DriftOptions& opt) {
  if (opt.stencil_partials) return stencil_derivs(g, i, j, c);
  auto v = gi(g.grid.theta(i), g.grid.z(j));
  return {v.g, v.g_theta, v.g_z, v.g_zz};
}

void check_lattice(const Lattice& l, const GridFunction& g) {
  if (l.r.empty() || l.theta_idx.empty() || l.z_idx.empty()) throw InvalidParameter("lattice is empty");
  if (l.grid.n_theta != g.grid.n_theta || l.grid.n_z != g.grid.n_z || l.grid.z_lo != g.grid.z_lo ||
      l.grid.z_hi != g.grid.z_hi)
    throw InvalidParameter("lattice was built for a different grid");
  for (int j : l.z_idx)
    if (j < 1 || j > g.grid.n_z - 2) throw InvalidParameter("lattice touches the z boundary rows");
}

}  // namespace

V0Value eval_V0(const State& s, const GInterpolant& g, const LyapConstants& k) {
  if (s.chart != Chart::Polar) throw DomainError("eval_V0: expected polar chart");
  auto v = g(s.coords[1], s.coords[2]);
  return v0_from(s.coords[0], s.coords[2], {v.g, v.g_theta, v.g_z, v.g_zz}, k);
}

std::string Lattice::describe() const {
  char buf[256];
  std::string rs;
  for (double x : r) rs += (rs.empty() ? "" : ",") + std::to_string(x).substr(0, 6);
  std::snprintf(buf, sizeof buf, "r in {%s} x %zu theta nodes x %zu z nodes, z in [%.6g, %.6g], grid %dx%d",
                rs.c_str(), theta_idx.size(), z_idx.size(), z_lo(), z_hi(), grid.n_theta, grid.n_z);
  return buf;
}

Lattice default_lattice(const Grid2D& grid, int n_theta, int n_z, double shrink, std::vector<double> r) {
  if (n_theta < 1 || n_z < 2 || !(shrink >= 0 && shrink < 1)) throw InvalidParameter("default_lattice: bad sizes");
  Lattice l;
  l.grid = grid;
  l.r = std::move(r);
  for (int k = 0; k < n_theta; ++k) {
    double th = -0.5 * kPi + (k + 0.5) * kPi / n_theta;
    int i = std::clamp(int(std::lround((th - grid.theta(0)) / grid.h_theta())), 0, grid.n_theta - 1);
    if (l.theta_idx.empty() || l.theta_idx.back() != i) l.theta_idx.push_back(i);
  }
  double w = grid.z_hi - grid.z_lo;
  double lo = grid.z_lo + 0.5 * shrink * w, hi = grid.z_hi - 0.5 * shrink * w;
  for (int k = 0; k < n_z; ++k) {
    double z = lo + (hi - lo) * k / (n_z - 1);
    int j = std::clamp(int(std::lround((z - grid.z(0)) / grid.h_z())), 1, grid.n_z - 2);
    if (l.z_idx.empty() || l.z_idx.back() != j) l.z_idx.push_back(j);
  }
  return l;
}

Lattice restrict_z(Lattice l, double z_star, double half_width) {
  std::vector<int> keep;
  for (int j : l.z_idx)
    if (std::fabs(l.grid.z(j) - z_star) <= half_width) keep.push_back(j);
  if (keep.empty()) throw InvalidParameter("restrict_z: no lattice rows left");
  l.z_idx = std::move(keep);
  return l;
}

DriftReport verify_drift_V0(const LyapConstants& k, const GridFunction& g, const Lattice& l, const DerivedConsts& c,
                            double alpha, const DriftOptions& opt) {
  check_lattice(l, g);
  GInterpolant gi(g);
  struct Row {
    double worst = -std::numeric_limits<double>::infinity();
    State at;
    double spread = 0, dz = 0, proof = -std::numeric_limits<double>::infinity();
  };
  const int nz = int(l.z_idx.size());
  std::vector<Row> rows(nz);
  const double proof_rate = std::min(k.kappa * k.lambda, c.gamma / 4) / 6;

  parallel_for(nz, opt.threads, [&](int jj) {
    Row& row = rows[jj];
    const int j = l.z_idx[jj];
    const double z = g.grid.z(j);
    for (int i : l.theta_idx) {
      const double th = g.grid.theta(i);
      GDerivs gd = node_derivs(g, gi, i, j, c, opt);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (double r : l.r) {
        V0Value v = v0_from(r, z, gd, k);
        State s = State::polar(r, th, z);
        double l1 = apply_generator(Generator::L1, s, v.d, c, alpha);
        double ratio = l1 / ((1 + z * z) * v.value);
        if (ratio > row.worst) row.worst = ratio, row.at = s;
        lo = std::min(lo, l1 / v.value);
        hi = std::max(hi, l1 / v.value);
        row.dz = std::max(row.dz, std::fabs(v.d.f_z) / ((1 + std::fabs(z)) * v.value));
        row.proof = std::max(row.proof, l1 / (proof_rate * (1 + k.delta * k.eps_alpha * z * z) * v.value));
      }
      row.spread = std::max(row.spread, (hi - lo) / std::max(std::fabs(hi), std::fabs(lo)));
    }
  });

  DriftReport rep;
  rep.lattice = l.describe();
  rep.n_points = l.size();
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  rep.proof_shape_ratio = -std::numeric_limits<double>::infinity();
  for (const Row& row : rows) {
    if (row.worst > rep.worst_margin) rep.worst_margin = row.worst, rep.worst_point = row.at;
    rep.r_spread = std::max(rep.r_spread, row.spread);
    rep.dz_bound = std::max(rep.dz_bound, row.dz);
    rep.proof_shape_ratio = std::max(rep.proof_shape_ratio, row.proof);
  }
  rep.pass = rep.worst_margin < 0;
  rep.d = rep.pass ? -rep.worst_margin : 0.0;
  return rep;
}

V1Value eval_V1(const State& s, const Params& p, const DerivedConsts& c, double c_bar) {
  if (s.chart != Chart::Transformed) throw DomainError("eval_V1: expected transformed chart");
  const auto& [x, y, z] = s.coords;
  const double a = c.chi / c.nu, b = 1 / (c.nu * p.sigma), e = 1 / (c.chi * c.chi * p.sigma);
  const double X = a * x, Y = X + b * y, W = e * (c.z_star - z) - p.sigma - p.rho;
  const double q = X * X + Y * Y + W * W;
  const double q_x = 2 * a * (X + Y), q_y = 2 * b * Y, q_z = -2 * e * W, q_zz = 2 * e * e;
  V1Value o;
  o.value = std::exp(c_bar * q);
  o.d.f = o.value;
  o.d.f_x = c_bar * q_x * o.value;
  o.d.f_y = c_bar * q_y * o.value;
  o.d.f_z = c_bar * q_z * o.value;
  o.d.f_zz = (c_bar * q_zz + c_bar * c_bar * q_z * q_z) * o.value;
  return o;
}

DriftReport verify_drift_full(const LyapConstants& k, const GridFunction& g, const Lattice& l, const Params& p,
                              const DerivedConsts& c, double alpha, const DriftOptions& opt) {
  check_lattice(l, g);
  GInterpolant gi(g);
  const int nz = int(l.z_idx.size()), nt = int(l.theta_idx.size()), nr = int(l.r.size());
  const int per_row = nt * nr;
  std::vector<double> LV(l.size()), V(l.size()), dzr(nz, 0.0);

  parallel_for(nz, opt.threads, [&](int jj) {
    const int j = l.z_idx[jj];
    const double z = g.grid.z(j);
    for (int ii = 0; ii < nt; ++ii) {
      const int i = l.theta_idx[ii];
      const double th = g.grid.theta(i);
      GDerivs gd = node_derivs(g, gi, i, j, c, opt);
      for (int rr = 0; rr < nr; ++rr) {
        const double r = l.r[rr];
        V0Value v0 = v0_from(r, z, gd, k);
        auto xy = from_polar(r, th);
        V1Value v1 = eval_V1(State::transformed(xy[0], xy[1], z), p, c, k.c_bar);
        double lv0 = apply_generator(Generator::L, State::polar(r, th, z), v0.d, c, alpha);
        double lv1 = apply_generator(Generator::L, State::transformed(xy[0], xy[1], z), v1.d, c, alpha);
        std::size_t at = std::size_t(jj) * per_row + ii * nr + rr;
        LV[at] = lv0 + lv1;
        V[at] = v0.value + v1.value;
        dzr[jj] = std::max(dzr[jj], std::fabs(v0.d.f_z) / ((1 + std::fabs(z)) * v0.value));
      }
    }
  });

  auto point = [&](std::size_t at) {
    int jj = int(at / per_row), ii = int((at % per_row) / nr), rr = int(at % nr);
    return State::polar(l.r[rr], g.grid.theta(l.theta_idx[ii]), g.grid.z(l.z_idx[jj]));
  };

  DriftReport rep;
  rep.lattice = l.describe();
  rep.n_points = l.size();
  for (double v : dzr) rep.dz_bound = std::max(rep.dz_bound, v);

  // c from the outer half (by V), K absorbs the rest
  std::vector<double> sorted(V);
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t at = 0; at < V.size(); ++at)
    if (V[at] >= median && LV[at] / V[at] > rep.worst_margin) {
      rep.worst_margin = LV[at] / V[at];
      rep.worst_point = point(at);
    }
  rep.c = -0.5 * rep.worst_margin;
  rep.K = 0;
  for (std::size_t at = 0; at < V.size(); ++at) rep.K = std::max(rep.K, LV[at] + rep.c * V[at]);
  rep.pass = rep.worst_margin < 0 && std::isfinite(rep.K);

  // cross term near the axis, where 3x^2 + eta^2 y^2 <= d/(2 c_dz)
  if (k.d > 0 && rep.dz_bound > 0) {
    double m = 0;
    for (int i : l.theta_idx) {
      auto xy = from_polar(0.0, g.grid.theta(i));
      m = std::max(m, 3 * xy[0] * xy[0] + c.eta * c.eta * xy[1] * xy[1]);
    }
    rep.cross_r = 0.5 * std::log(k.d / (2 * rep.dz_bound * m));
    std::vector<double> worst(nz, 0.0);
    parallel_for(nz, opt.threads, [&](int jj) {
      const int j = l.z_idx[jj];
      const double z = g.grid.z(j);
      for (int i : l.theta_idx) {
        const double th = g.grid.theta(i);
        V0Value v0 = v0_from(rep.cross_r, z, node_derivs(g, gi, i, j, c, opt), k);
        auto xy = from_polar(rep.cross_r, th);
        double v = v0.value + eval_V1(State::transformed(xy[0], xy[1], z), p, c, k.c_bar).value;
        double cross = std::fabs(xy[0] * (xy[0] + c.eta * xy[1]) * v0.d.f_z);
        worst[jj] = std::max(worst[jj], cross / (0.5 * k.d * (1 + z * z) * v));
      }
    });
    rep.cross_points = std::size_t(nz) * nt;
    for (double w : worst) rep.cross_worst = std::max(rep.cross_worst, w);
    rep.pass = rep.pass && rep.cross_worst <= 1;
  }
  return rep;
}

}  // namespace lorenzlab
