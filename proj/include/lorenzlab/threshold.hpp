#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lorenzlab/core.hpp"
#include "lorenzlab/estimators.hpp"

namespace lorenzlab {

struct BracketInvalid : DomainError {
  using DomainError::DomainError;
};

// lambda estimate at alpha_hat with effort level k (k = 0 is the initial
// budget; each level doubles the sampling effort).
using LambdaOracle = std::function<EstimateWithCI(double alpha_hat, int level)>;

struct ThresholdOptions {
  double tol = 0.02;       // on alpha_hat
  int budget = 64;         // total oracle calls, escalations included
  int max_level = 2;       // per-point cap on doublings
  int scan_points = 3;     // interior points of the initial coarse scan

  // Monte Carlo oracles
  double t_final = 1e5;    // post-burn length at level 0
  double t_burn = 50;
  double dt0 = 1e-2;
  int replicas = 16;
  int threads = 0;
  std::uint64_t seed = 1;
  bool crn = true;         // same seed and streams at every alpha
  // PDE oracle
  int n_theta = 256, n_z = 512;
};

struct ThresholdEval {
  double alpha_hat = 0, alpha = 0;
  int level = 0;
  EstimateWithCI estimate;
};

struct ThresholdResult {
  double alpha_star = 0, alpha_star_hat = 0;
  double lo_hat = 0, hi_hat = 0;  // final bracket
  Method method = Method::MC;
  std::vector<ThresholdEval> evaluations;
  // adjacent coarse-scan points with strictly opposite CI signs
  std::vector<std::pair<double, double>> sign_changes;
  bool converged = false;
  std::string status;  // "converged", "budget-exhausted", "unresolved-midpoint"
};

// Oracle for one of the lambda methods (mc, growth, pde, heuristic,
// excursion). Throws InvalidParameter for methods that cannot locate a root.
LambdaOracle make_oracle(Method method, const Params& p, const ThresholdOptions& opt);

// Noise-aware bisection on [lo_hat, hi_hat]. Throws BracketInvalid unless the
// end points have strictly negative / strictly positive CIs.
ThresholdResult find_threshold(const LambdaOracle& oracle, Method method, const Params& p, double lo_hat,
                               double hi_hat, const ThresholdOptions& opt);
ThresholdResult find_threshold(Method method, const Params& p, double lo_hat, double hi_hat,
                               const ThresholdOptions& opt);

}  // namespace lorenzlab
