#include "lorenzlab/core.hpp"

#include <cmath>
#include <sstream>

namespace lorenzlab {

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].field << ": " << issues[i].message;
  }
  return os.str();
}

ValidationReport validate_params(const Params& p) {
  ValidationReport r;
  auto bad = [&](const char* f, const char* m) { r.issues.push_back({f, m}); };
  if (!std::isfinite(p.sigma)) bad("sigma", "sigma must be finite");
  else if (p.sigma <= 0) bad("sigma", "sigma must be positive");
  if (!std::isfinite(p.beta)) bad("beta", "beta must be finite");
  else if (p.beta <= 0) bad("beta", "beta must be positive");
  if (!std::isfinite(p.rho)) bad("rho", "rho must be finite");
  if (!std::isfinite(p.alpha_hat)) bad("alpha_hat", "alpha_hat must be finite");
  else if (p.alpha_hat < 0) bad("alpha_hat", "alpha_hat must be non-negative");
  return r;
}

DerivedConsts derive_constants(const Params& p) {
  auto rep = validate_params(p);
  if (!rep.ok()) throw InvalidParameter(rep.to_string());
  DerivedConsts c;
  c.chi = 2.0 / (1.0 + p.sigma);
  c.eta = (1.0 + p.sigma) / (2.0 * p.sigma);
  c.gamma = c.chi * p.beta;
  c.nu = std::sqrt(std::pow(c.chi, 5) * p.sigma);
  c.alpha = c.nu * std::sqrt(p.sigma) * p.alpha_hat;
  c.z_star = 2.0 + c.chi * c.chi * p.sigma * (p.rho - 1.0);
  return c;
}

double alpha_from_hat(const Params& p, double alpha_hat) {
  Params q = p;
  q.alpha_hat = 1.0;
  return derive_constants(q).alpha * alpha_hat;
}

double hat_from_alpha(const Params& p, double alpha) {
  Params q = p;
  q.alpha_hat = 1.0;
  return alpha / derive_constants(q).alpha;
}

Model Model::from_hat(Params p) {
  Model m;
  m.consts = derive_constants(p);
  m.params = p;
  return m;
}

Model Model::from_hat(Params p, double alpha_hat) {
  p.alpha_hat = alpha_hat;
  return from_hat(p);
}

Model Model::from_transformed(Params p, double alpha) {
  if (!(alpha >= 0)) throw InvalidParameter("alpha: must be non-negative");
  p.alpha_hat = hat_from_alpha(p, alpha);
  Model m = from_hat(p);
  m.consts.alpha = alpha;  // keep the caller's value bit-exact
  return m;
}

}  // namespace lorenzlab
