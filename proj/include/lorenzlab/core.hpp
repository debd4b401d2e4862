#pragma once

#include <string>
#include <vector>

#include "lorenzlab/errors.hpp"

namespace lorenzlab {

inline constexpr const char* kVersion = "0.1.0";

struct Params {
  double sigma = 10.0;
  double beta = 8.0 / 3.0;
  double rho = 0.5;
  double alpha_hat = 0.0;
};

struct DerivedConsts {
  double chi = 0, eta = 0, gamma = 0, nu = 0;
  double alpha = 0;  // transformed noise amplitude
  double z_star = 0;
};

struct ParamIssue {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<ParamIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

ValidationReport validate_params(const Params& p);

// Throws InvalidParameter unless validate_params(p) is ok.
DerivedConsts derive_constants(const Params& p);

// alpha = nu * sqrt(sigma) * alpha_hat
double alpha_from_hat(const Params& p, double alpha_hat);
double hat_from_alpha(const Params& p, double alpha);

// Everything a stepper or solver needs, in transformed variables.
struct Model {
  Params params;
  DerivedConsts consts;

  double alpha() const { return consts.alpha; }
  double alpha_hat() const { return params.alpha_hat; }

  static Model from_hat(Params p);
  static Model from_hat(Params p, double alpha_hat);
  static Model from_transformed(Params p, double alpha);
};

}  // namespace lorenzlab
