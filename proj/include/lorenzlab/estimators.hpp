#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lorenzlab/core.hpp"
#include "lorenzlab/sde.hpp"

namespace lorenzlab {

enum class Method { MC, Growth, PDE, Heuristic, AsymptoticSmall, AsymptoticLarge, Excursion };

const char* method_name(Method m);
Method parse_method(const std::string& name);

struct EstimateWithCI {
  double value = 0;
  double half_width = 0;  // 95%
  Method method = Method::MC;
  long long n_samples = 0;
  std::uint64_t seed = 0;
  double wall_time_s = 0;

  double lo() const { return value - half_width; }
  double hi() const { return value + half_width; }
  bool excludes_zero() const { return lo() > 0 || hi() < 0; }
};

// F(theta, z) = -1 + (z/2) sin(2 theta)
inline double lambda_integrand(double theta, double z) { return radial_drift(theta, z); }

// Time-binned integral of an observable along one trajectory; feeds the
// batch-means variance.
class BatchMeans {
 public:
  BatchMeans(double t0, double window, int n_bins = 1 << 16);
  void add(double t_start, double dt, double integral) {
    int b = int((t_start - t0_) / width_);
    b = b < 0 ? 0 : (b >= int(sum_.size()) ? int(sum_.size()) - 1 : b);
    sum_[b] += integral;
    len_[b] += dt;
    ++steps_;
  }
  long long steps() const { return steps_; }
  double duration() const;
  double mean() const;
  // Variance of mean() from floor(sqrt(steps)) batches of contiguous bins.
  double variance_of_mean() const;
  int batches() const;

 private:
  double t0_, width_;
  std::vector<double> sum_, len_;
  long long steps_ = 0;
};

// Combines per-replica means with their batch-means variances.
EstimateWithCI combine_replicas(const std::vector<BatchMeans>& reps, Method m);

struct McOptions {
  int replicas = 1;
  int threads = 0;  // 0: all cores
};

// Ergodic average of F along theta-z trajectories (cfg.system is ignored).
EstimateWithCI estimate_lambda_mc(const Model& m, SimConfig cfg, const McOptions& opt);
// (r(T) - r(t_burn)) / (T - t_burn) along polar-linear trajectories.
EstimateWithCI estimate_lambda_growth(const Model& m, SimConfig cfg, const McOptions& opt);

// E[lambda_+(z)] for z ~ N(z*, alpha^2 / (2 gamma)), lambda_+(z) = -1 + sqrt(z-1) 1{z>1}.
double heuristic_lambda(double alpha, const DerivedConsts& c, double quad_tol = 1e-8);

enum class Regime { Small, Large };
double asymptotic_lambda(double alpha, const DerivedConsts& c, Regime regime);

namespace detail {
template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6 * (fa + 4 * flm + fm);
  double right = (b - m) / 6 * (fm + 4 * frm + fb);
  double diff = left + right - whole;
  if (depth <= 0 || std::fabs(diff) <= 15 * tol) return left + right + diff / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson on [a,b] to absolute tolerance tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 50) {
  if (b <= a) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace lorenzlab
