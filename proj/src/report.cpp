#include "lorenzlab/report.hpp"

#include <fstream>

namespace lorenzlab {

Json to_json(const Params& p) {
  return {{"sigma", p.sigma}, {"beta", p.beta}, {"rho", p.rho}, {"alpha_hat", p.alpha_hat}};
}

Json to_json(const DerivedConsts& c) {
  return {{"chi", c.chi}, {"eta", c.eta}, {"gamma", c.gamma}, {"nu", c.nu}, {"alpha", c.alpha}, {"z_star", c.z_star}};
}

Json provenance(const Params& p, std::uint64_t seed, const std::string& command) {
  Json j;
  j["tool"] = "lorenzlab";
  j["version"] = kVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["params"] = to_json(p);
  j["derived"] = to_json(derive_constants(p));
  return j;
}

Json to_json(const State& s) { return {{"chart", chart_name(s.chart)}, {"coords", s.coords}}; }

Json to_json(const SimConfig& c) {
  return {{"system", system_name(c.system)},
          {"scheme", c.scheme == Scheme::Splitting ? "splitting" : "euler-maruyama"},
          {"dt0", c.dt0},
          {"adaptive", c.adaptive},
          {"t_burn", c.t_burn},
          {"t_final", c.t_final},
          {"seed", c.seed},
          {"stream_id", c.stream_id},
          {"thin", c.thin},
          {"sample_every", c.sample_every}};
}

Json to_json(const RunSummary& s) {
  return {{"final_state", to_json(s.final_state)},
          {"min", s.min},
          {"max", s.max},
          {"steps", s.steps},
          {"rejected", s.rejected},
          {"t_end", s.t_end},
          {"r_offset", s.r_offset}};
}

Json to_json(const EstimateWithCI& e) {
  return {{"method", method_name(e.method)},
          {"value", e.value},
          {"half_width", e.half_width},
          {"ci", {e.lo(), e.hi()}},
          {"n_samples", e.n_samples},
          {"seed", e.seed},
          {"wall_time_s", e.wall_time_s}};
}

Json to_json(const ThresholdResult& r) {
  Json evals = Json::array();
  for (const auto& ev : r.evaluations)
    evals.push_back({{"alpha_hat", ev.alpha_hat}, {"alpha", ev.alpha}, {"level", ev.level},
                     {"estimate", to_json(ev.estimate)}});
  Json changes = Json::array();
  for (auto [a, b] : r.sign_changes) changes.push_back({a, b});
  return {{"method", method_name(r.method)},
          {"alpha_star", r.alpha_star},
          {"alpha_star_hat", r.alpha_star_hat},
          {"bracket_hat", {r.lo_hat, r.hi_hat}},
          {"converged", r.converged},
          {"status", r.status},
          {"sign_changes_hat", changes},
          {"evaluations", evals}};
}

Json to_json(const Grid2D& g) {
  return {{"n_theta", g.n_theta}, {"n_z", g.n_z}, {"z_lo", g.z_lo}, {"z_hi", g.z_hi}};
}

Json to_json(const PoissonDiagnostics& d) {
  return {{"residual_rel", d.residual_rel}, {"pinned_index", d.pinned_index}, {"refinements", d.refinements}};
}

Json to_json(const LyapConstants& k) {
  return {{"lambda", k.lambda}, {"eps_alpha", k.eps_alpha}, {"Gamma", k.Gamma},
          {"kappa", k.kappa},   {"delta", k.delta},         {"c_alpha", k.c_alpha},
          {"c_bar", k.c_bar},   {"d", k.d},                 {"K", k.K},
          {"binding_ceiling", k.binding_ceiling}};
}

Json to_json(const DriftReport& r) {
  return {{"lattice", r.lattice},
          {"n_points", r.n_points},
          {"pass", r.pass},
          {"worst_margin", r.worst_margin},
          {"worst_point", to_json(r.worst_point)},
          {"d", r.d},
          {"c", r.c},
          {"K", r.K},
          {"r_spread", r.r_spread},
          {"dz_bound", r.dz_bound},
          {"proof_shape_ratio", r.proof_shape_ratio},
          {"cross_points", r.cross_points},
          {"cross_worst", r.cross_worst},
          {"cross_r", r.cross_r}};
}

Json to_json(const StopTimeReport& r) {
  Json b = Json::array();
  for (const auto& q : r.buckets)
    b.push_back({{"z_lo", q.z_lo},
                 {"z_hi", q.z_hi},
                 {"n", q.n},
                 {"mean_abs_z0", q.mean_abs_z0},
                 {"mean_tau", q.mean_tau},
                 {"moment4", q.moment4},
                 {"ratio_mean", q.ratio_mean},
                 {"ratio_m4", q.ratio_m4}});
  return {{"alpha", r.alpha},         {"ratio_spread", r.ratio_spread}, {"ratio4_spread", r.ratio4_spread},
          {"slope", r.slope},         {"slope_buckets", r.slope_buckets}, {"buckets", b}};
}

Json to_json(const ExpGrowthReport& r) {
  const auto& o = r.opt;
  return {{"a", o.a},
          {"b", o.b},
          {"eps", o.eps},
          {"K", o.K},
          {"x0", o.x0},
          {"N_max", o.N_max},
          {"trials", o.trials},
          {"seed", o.seed},
          {"dt", o.dt},
          {"unit_time", r.unit_time},
          {"tail", r.tail},
          {"survivors", r.survivors},
          {"inside", r.inside},
          {"inside_gaussian", r.inside_gaussian},
          {"ratio", r.ratio},
          {"fit_points", r.fit_points},
          {"pass", r.pass}};
}

Json to_json(const TrackingReport& r) {
  return {{"a0", r.a0},
          {"K", r.K},
          {"K_measured", r.K_measured},
          {"T", r.T},
          {"C_measured", r.C_measured},
          {"t_at_max", r.t_at_max},
          {"max_excess", r.max_excess},
          {"final_gap", r.final_gap},
          {"n_mesh", r.n_mesh}};
}

Json to_json(const UnstableReport& r) {
  return {{"a0", r.a0},          {"K", r.K},
          {"T", r.T},            {"offset", r.offset},
          {"min_ratio", r.min_ratio}, {"growth_rate", r.growth_rate},
          {"n_mesh", r.n_mesh}};
}

Json to_json(const CrossingReport& r) {
  return {{"tau1", r.tau1},     {"tau2", r.tau2},     {"int1", r.int1},     {"int2", r.int2},
          {"lhs", r.lhs},       {"rhs", r.rhs},       {"F1_min", r.F1_min}, {"F2_min", r.F2_min},
          {"G2_max", r.G2_max}, {"dF", r.dF},         {"dG", r.dG},         {"pass", r.pass}};
}

Json to_json(const TrackingGridReport& r) {
  Json st = Json::array(), un = Json::array();
  for (const auto& x : r.stable) st.push_back(to_json(x));
  for (const auto& x : r.unstable) un.push_back(to_json(x));
  return {{"C_median", r.C_median}, {"C_max_rel_dev", r.C_max_rel_dev}, {"stable_pass", r.stable_pass},
          {"unstable_pass", r.unstable_pass}, {"stable", st}, {"unstable", un}};
}

Json to_json(const CrossingSweep& s) {
  return {{"instances", s.instances}, {"failures", s.failures}, {"worst_ratio", s.worst_ratio}, {"pass", s.pass}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json strip_wall_time(Json j) {
  if (j.is_object()) {
    j.erase("wall_time_s");
    for (auto& [k, v] : j.items()) v = strip_wall_time(std::move(v));
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_wall_time(std::move(v));
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidParameter("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw InvalidParameter("write to '" + path + "' failed");
}

}  // namespace lorenzlab
