#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorenzlab/core.hpp"
#include "lorenzlab/estimators.hpp"
#include "lorenzlab/excursions.hpp"
#include "lorenzlab/fokker_planck.hpp"
#include "lorenzlab/lyapunov.hpp"
#include "lorenzlab/report.hpp"
#include "lorenzlab/sde.hpp"
#include "lorenzlab/theory_checks.hpp"
#include "lorenzlab/threshold.hpp"

using namespace lorenzlab;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || tok.find_first_not_of(" \t", used) != std::string::npos)
      throw UsageError(std::string("--") + what + ": cannot parse '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string("--") + what + ": empty list");
  return out;
}

// Options shared by every subcommand.
struct Common {
  Params p;
  std::string units = "hat";
  double alpha = NAN;  // in `units`
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
  std::string config;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* alpha_hat_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;

  void add(CLI::App* s, double default_alpha_hat) {
    p.alpha_hat = default_alpha_hat;
    s->add_option("--sigma", p.sigma, "Prandtl number sigma")->capture_default_str();
    s->add_option("--beta", p.beta, "beta")->capture_default_str();
    s->add_option("--rho", p.rho, "rho")->capture_default_str();
    alpha_hat_opt = s->add_option("--alpha-hat", p.alpha_hat, "noise amplitude in original units")->capture_default_str();
    alpha_opt = s->add_option("--alpha", alpha, "noise amplitude in --alpha-units");
    s->add_option("--alpha-units", units, "units of --alpha, --bracket, --tol, --alphas")
        ->check(CLI::IsMember({"hat", "transformed"}))
        ->capture_default_str();
    seed_opt = s->add_option("--seed", seed, "seed (fallback: $LORENZLAB_SEED, then 1)");
    s->add_option("--threads", threads, "worker threads (0: all cores)")->capture_default_str();
    s->add_option("-o,--output", out, "JSON output path (default: stdout)");
    s->add_option("--config", config, "key=value file; flags override it");
  }

  void resolve() {
    if (seed_opt->count() == 0) {
      if (const char* env = std::getenv("LORENZLAB_SEED")) {
        try {
          seed = std::stoull(env);
        } catch (const std::exception&) {
          throw UsageError(std::string("LORENZLAB_SEED: not an integer: '") + env + "'");
        }
      }
    }
    if (alpha_opt->count() > 0) {
      if (alpha_hat_opt->count() > 0) throw UsageError("give --alpha-hat or --alpha, not both");
      p.alpha_hat = to_hat(alpha);
    }
  }

  double to_hat(double v) const { return units == "hat" ? v : hat_from_alpha(p, v); }
  // alpha / alpha_hat
  double unit_scale() const { return alpha_from_hat(p, 1.0); }

  Json head(const std::string& command) const { return provenance(p, seed, command); }

  void emit(const Json& j) const {
    if (out.empty())
      std::cout << dump(j);
    else
      write_text(out, dump(j));
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// key=value lines, '#' comments
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("--config: cannot read '" + path + "'");
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    for (char& ch : key)
      if (ch == '_') ch = '-';
    kv.emplace_back(key, value);
  }
  return kv;
}

std::string find_config_arg(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

SimConfig mc_config(const Common& g, double t_burn, double t_final, double dt0, bool adaptive) {
  SimConfig c;
  c.t_burn = t_burn;
  c.t_final = t_final;
  c.dt0 = dt0;
  c.seed = g.seed;
  c.adaptive = adaptive;
  return c;
}

Json lambda_record(const Common& g, const Model& m, const EstimateWithCI& e) {
  Json j;
  j["lambda"] = e.value;
  j["ci"] = e.half_width;
  j["method"] = method_name(e.method);
  j["alpha"] = m.alpha();
  j["alpha_hat"] = m.alpha_hat();
  j["params"] = to_json(m.params);
  j["seed"] = g.seed;
  j["n_samples"] = e.n_samples;
  j["wall_time_s"] = e.wall_time_s;
  return j;
}

struct LambdaFlags {
  std::string method = "mc";
  double t_final = 1e4, t_burn = NAN, dt0 = 1e-2;
  int replicas = 16;
  bool fixed_dt = false;
  int n_theta = 256, n_z = 512;

  void add(CLI::App* s) {
    s->add_option("--method", method, "mc, growth, pde, heuristic, asymptotic-small, asymptotic-large, excursion")
        ->check(CLI::IsMember({"mc", "growth", "pde", "heuristic", "asymptotic-small", "asymptotic-large",
                               "excursion"}))
        ->capture_default_str();
    s->add_option("--t-final", t_final, "end time (Monte Carlo)")->capture_default_str();
    s->add_option("--t-burn", t_burn, "burn-in (default max(50, 20/gamma))");
    s->add_option("--dt0", dt0, "base step")->capture_default_str();
    s->add_option("--replicas", replicas, "independent replicas")->capture_default_str();
    s->add_flag("--fixed-dt", fixed_dt, "disable the adaptive step rule");
    s->add_option("--n-theta", n_theta, "PDE grid")->capture_default_str();
    s->add_option("--n-z", n_z, "PDE grid")->capture_default_str();
  }
};

EstimateWithCI estimate(const Common& g, const LambdaFlags& f, const Model& m) {
  const auto t0 = std::chrono::steady_clock::now();
  const Method method = parse_method(f.method);
  const double burn = std::isnan(f.t_burn) ? default_burn_in(m.consts) : f.t_burn;
  const SimConfig cfg = mc_config(g, burn, f.t_final, f.dt0, !f.fixed_dt);
  EstimateWithCI e;
  switch (method) {
    case Method::MC: return estimate_lambda_mc(m, cfg, McOptions{f.replicas, g.threads});
    case Method::Growth: return estimate_lambda_growth(m, cfg, McOptions{f.replicas, g.threads});
    case Method::PDE: return estimate_lambda_pde(m, f.n_theta, f.n_z);
    case Method::Excursion: {
      e = estimate_lambda_excursion(run_excursions(m, cfg).excursions);
      e.seed = g.seed;
      break;
    }
    case Method::Heuristic: e.value = heuristic_lambda(m.alpha(), m.consts); break;
    case Method::AsymptoticSmall: e.value = asymptotic_lambda(m.alpha(), m.consts, Regime::Small); break;
    case Method::AsymptoticLarge: e.value = asymptotic_lambda(m.alpha(), m.consts, Regime::Large); break;
  }
  e.method = method;
  e.wall_time_s = seconds_since(t0);
  return e;
}

std::string sidecar_path(const std::string& csv) { return csv + ".json"; }

void write_grid(const Common& g, const std::string& path, const Grid2D& grid, const Eigen::VectorXd& v,
                const std::string& what) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidParameter("cannot open '" + path + "' for writing");
  write_grid_csv(os, grid, v);
  Json side = g.head("poisson");
  side["field"] = what;
  side["csv"] = path;
  side["grid"] = to_json(grid);
  side["order"] = "row-major, theta fastest: index = j * n_theta + i";
  side["theta_node"] = "-pi/2 + (i + 1/2) pi / n_theta";
  side["z_node"] = "z_lo + (j + 1/2) (z_hi - z_lo) / n_z";
  write_text(sidecar_path(path), dump(side));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lorenzlab: stability of the invariant axis of the noisy Lorenz system", "lorenzlab"};
  app.require_subcommand(1);
  app.option_defaults()->take_first();
  app.set_version_flag("--version", std::string(kVersion));

  // simulate
  Common g_sim;
  std::string system = "theta-z", init_s = "1,1,1", init_chart, scheme = "splitting", csv_sim;
  double sim_T = 100, sim_burn = 0, sim_dt0 = 1e-2;
  int thin = 1;
  double sample_every = 0;
  bool sim_fixed = false;
  auto* sim = app.add_subcommand("simulate", "integrate one trajectory; summary JSON, samples CSV");
  g_sim.add(sim, 0.0);
  sim->add_option("--system", system, "original, transformed, theta-z, polar")
      ->check(CLI::IsMember({"original", "transformed", "theta-z", "polar"}))
      ->capture_default_str();
  sim->add_option("--init", init_s, "initial point a,b,c in --init-chart")->capture_default_str();
  sim->add_option("--init-chart", init_chart, "original, transformed, polar (default: the system's chart)")
      ->check(CLI::IsMember({"original", "transformed", "polar"}));
  sim->add_option("--t-final", sim_T, "end time")->capture_default_str();
  sim->add_option("--t-burn", sim_burn, "samples start here")->capture_default_str();
  sim->add_option("--dt0", sim_dt0, "base step")->capture_default_str();
  sim->add_option("--thin", thin, "keep every k-th step")->capture_default_str();
  sim->add_option("--sample-every", sample_every, "time-uniform samples every h time units (overrides --thin)");
  sim->add_flag("--fixed-dt", sim_fixed, "disable the adaptive step rule");
  sim->add_option("--scheme", scheme, "splitting or em")
      ->check(CLI::IsMember({"splitting", "em"}))
      ->capture_default_str();
  sim->add_option("--csv", csv_sim, "samples CSV (t,c1,c2,c3)");

  // lambda
  Common g_lam;
  LambdaFlags lf;
  auto* lam = app.add_subcommand("lambda", "estimate lambda_alpha");
  g_lam.add(lam, 30.0);
  lf.add(lam);

  // threshold
  Common g_thr;
  LambdaFlags tf;
  ThresholdOptions topt;
  std::string bracket_s = "20,35";
  bool no_crn = false;
  auto* thr = app.add_subcommand("threshold", "locate the sign change of lambda_alpha");
  g_thr.add(thr, 0.0);
  tf.method = "heuristic";
  thr->add_option("--method", tf.method, "mc, growth, pde, heuristic, excursion")
      ->check(CLI::IsMember({"mc", "growth", "pde", "heuristic", "excursion"}))
      ->capture_default_str();
  thr->add_option("--bracket", bracket_s, "lo,hi in --alpha-units")->capture_default_str();
  thr->add_option("--tol", topt.tol, "bracket width to stop at, in --alpha-units")->capture_default_str();
  thr->add_option("--budget", topt.budget, "total estimator calls")->capture_default_str();
  thr->add_option("--max-level", topt.max_level, "doublings of T per point")->capture_default_str();
  thr->add_option("--scan-points", topt.scan_points, "interior points of the coarse scan")->capture_default_str();
  thr->add_option("--t-final", topt.t_final, "post-burn length per point at level 0")->capture_default_str();
  thr->add_option("--t-burn", topt.t_burn, "burn-in")->capture_default_str();
  thr->add_option("--dt0", topt.dt0, "base step")->capture_default_str();
  thr->add_option("--replicas", topt.replicas, "replicas per point")->capture_default_str();
  thr->add_flag("--no-crn", no_crn, "fresh seed per alpha instead of common random numbers");
  thr->add_option("--n-theta", topt.n_theta, "PDE grid")->capture_default_str();
  thr->add_option("--n-z", topt.n_z, "PDE grid")->capture_default_str();

  // poisson
  Common g_poi;
  int poi_nt = 256, poi_nz = 512;
  double width_sd = 8.0;
  std::string g_csv, mu_csv;
  auto* poi = app.add_subcommand("poisson", "stationary measure, lambda and the Poisson solution g");
  g_poi.add(poi, 40.0);
  poi->add_option("--n-theta", poi_nt, "grid")->capture_default_str();
  poi->add_option("--n-z", poi_nz, "grid")->capture_default_str();
  poi->add_option("--width-sd", width_sd, "z-window half width in OU standard deviations")->capture_default_str();
  poi->add_option("--g-csv", g_csv, "write g as theta,z,value (+ .json sidecar)");
  poi->add_option("--mu-csv", mu_csv, "write the stationary density (+ .json sidecar)");

  // verify-lyapunov
  Common g_lya;
  int ly_nt = 256, ly_nz = 512, lat_t = 129, lat_z = 257;
  double shrink = 0.1;
  std::string r_list = "-1,0,1";
  bool interp = false;
  auto* lya = app.add_subcommand("verify-lyapunov", "fit and check the drift of V0 and V0 + V1");
  g_lya.add(lya, 40.0);
  lya->add_option("--n-theta", ly_nt, "PDE grid")->capture_default_str();
  lya->add_option("--n-z", ly_nz, "PDE grid")->capture_default_str();
  lya->add_option("--lattice-theta", lat_t, "test lattice")->capture_default_str();
  lya->add_option("--lattice-z", lat_z, "test lattice")->capture_default_str();
  lya->add_option("--shrink", shrink, "fraction of the z-window trimmed from each end")->capture_default_str();
  lya->add_option("--r", r_list, "radii r = log|(x,y)|")->capture_default_str();
  lya->add_flag("--interp-partials", interp, "differentiate the interpolant instead of the stencil");

  // excursions
  Common g_exc;
  double ex_T = 2e4, ex_burn = 50, ex_dt0 = 1e-2;
  std::string ex_csv, ex_jsonl;
  std::size_t min_count = 30;
  auto* exc = app.add_subcommand("excursions", "zone-exit decomposition, lifted functionals, stop-time moments");
  g_exc.add(exc, 30.0);
  exc->add_option("--t-final", ex_T, "end time")->capture_default_str();
  exc->add_option("--t-burn", ex_burn, "burn-in")->capture_default_str();
  exc->add_option("--dt0", ex_dt0, "base step")->capture_default_str();
  exc->add_option("--min-count", min_count, "excursions per stop-time bucket")->capture_default_str();
  exc->add_option("--csv", ex_csv, "idx,z_start,z_end,tau,Fhat");
  exc->add_option("--jsonl", ex_jsonl, "one JSON object per excursion with its samples");

  // check
  Common g_chk;
  std::string which = "all", a0_list = "1,4,16";
  ExpGrowthOptions eg;
  int instances = 1000;
  double st_T = 500, st_dt0 = 1e-4, st_alpha = 20;
  auto* chk = app.add_subcommand("check", "numerical validators for the auxiliary bounds");
  g_chk.add(chk, 0.0);
  chk->add_option("--which", which, "exp-growth, tracking, crossing, stop-time, all")
      ->check(CLI::IsMember({"exp-growth", "tracking", "crossing", "stop-time", "all"}))
      ->capture_default_str();
  chk->add_option("--a", eg.a, "exp-growth: rate a")->capture_default_str();
  chk->add_option("--b", eg.b, "exp-growth: noise b")->capture_default_str();
  chk->add_option("--eps", eg.eps, "exp-growth: perturbation size")->capture_default_str();
  chk->add_option("--K", eg.K, "exp-growth: exit level K b / sqrt(a)")->capture_default_str();
  chk->add_option("--x0", eg.x0, "exp-growth: start")->capture_default_str();
  chk->add_option("--n-max", eg.N_max, "exp-growth: largest N")->capture_default_str();
  chk->add_option("--trials", eg.trials, "exp-growth: trials")->capture_default_str();
  chk->add_option("--dt", eg.dt, "exp-growth: step in units of 1/a")->capture_default_str();
  chk->add_option("--a0", a0_list, "tracking: a0 grid")->capture_default_str();
  chk->add_option("--instances", instances, "crossing: random instances")->capture_default_str();
  chk->add_option("--stop-alpha", st_alpha, "stop-time: transformed alpha")->capture_default_str();
  chk->add_option("--stop-t-final", st_T, "stop-time: run length")->capture_default_str();
  chk->add_option("--stop-dt0", st_dt0, "stop-time: base step")->capture_default_str();

  // sweep
  Common g_swp;
  LambdaFlags sf;
  std::string alphas_s = "10,20,27.7,35,50", sweep_csv;
  auto* swp = app.add_subcommand("sweep", "lambda over a list of alphas");
  g_swp.add(swp, 0.0);
  sf.add(swp);
  swp->add_option("--alphas", alphas_s, "list in --alpha-units")->capture_default_str();
  swp->add_option("--csv", sweep_csv, "alpha_hat,alpha,lambda,half_width");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // config entries go after the command line; take_first lets flags win
    const std::string cfg_path = find_config_arg(args);
    if (!cfg_path.empty()) {
      CLI::App* active = nullptr;
      for (const auto& a : args)
        for (auto* s : app.get_subcommands({}))
          if (a == s->get_name()) active = active ? active : s;
      for (const auto& [k, v] : read_config(cfg_path)) {
        if (k == "config") continue;
        if (!active || !active->get_option_no_throw("--" + k)) {
          std::cerr << "config: ignoring '" << k << "'\n";
          continue;
        }
        args.push_back("--" + k + "=" + v);
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sim->parsed()) {
      g_sim.resolve();
      const auto t0 = std::chrono::steady_clock::now();
      auto m = Model::from_hat(g_sim.p);
      SimConfig cfg;
      cfg.system = parse_system(system);
      cfg.t_burn = sim_burn;
      cfg.t_final = sim_T;
      cfg.dt0 = sim_dt0;
      cfg.thin = thin;
      cfg.sample_every = sample_every;
      cfg.adaptive = !sim_fixed;
      cfg.scheme = scheme == "em" ? Scheme::EulerMaruyama : Scheme::Splitting;
      cfg.seed = g_sim.seed;
      const auto v = parse_list(init_s, "init");
      if (v.size() != 3) throw UsageError("--init: need three coordinates");
      const Chart ch = init_chart.empty()              ? system_chart(cfg.system)
                       : init_chart == "original"      ? Chart::Original
                       : init_chart == "transformed" ? Chart::Transformed
                                                       : Chart::Polar;
      State init{ch, {v[0], v[1], v[2]}};
      auto res = simulate(cfg, init, m);
      if (!csv_sim.empty()) {
        std::ofstream os(csv_sim, std::ios::binary);
        if (!os) throw InvalidParameter("cannot open '" + csv_sim + "' for writing");
        write_samples_csv(os, res.samples);
      }
      Json j = g_sim.head("simulate");
      j["config"] = to_json(cfg);
      j["init"] = to_json(init);
      j["n_samples"] = res.samples.size();
      j["summary"] = to_json(res.summary);
      const State& fs = res.summary.final_state;
      if (fs.chart != Chart::Polar) {
        const State orig = fs.chart == Chart::Original ? fs : from_transformed(fs, m.consts);
        j["final_state_original"] = orig.coords;
        j["distance_to_origin"] = std::hypot(orig.coords[0], orig.coords[1], orig.coords[2]);
      }
      if (!csv_sim.empty()) j["csv"] = csv_sim;
      j["wall_time_s"] = seconds_since(t0);
      g_sim.emit(j);
    } else if (lam->parsed()) {
      g_lam.resolve();
      auto m = Model::from_hat(g_lam.p);
      auto e = estimate(g_lam, lf, m);
      Json j = lambda_record(g_lam, m, e);
      j["estimate"] = to_json(e);
      j["provenance"] = g_lam.head("lambda");
      g_lam.emit(j);
    } else if (thr->parsed()) {
      g_thr.resolve();
      const auto b = parse_list(bracket_s, "bracket");
      if (b.size() != 2) throw UsageError("--bracket: need lo,hi");
      topt.seed = g_thr.seed;
      topt.threads = g_thr.threads;
      topt.crn = !no_crn;
      if (g_thr.units == "transformed") topt.tol /= g_thr.unit_scale();
      const auto t0 = std::chrono::steady_clock::now();
      auto r = find_threshold(parse_method(tf.method), g_thr.p, g_thr.to_hat(b[0]), g_thr.to_hat(b[1]), topt);
      Json j = g_thr.head("threshold");
      j["result"] = to_json(r);
      j["alpha_star_hat"] = r.alpha_star_hat;
      j["alpha_star"] = r.alpha_star;
      j["converged"] = r.converged;
      j["wall_time_s"] = seconds_since(t0);
      g_thr.emit(j);
    } else if (poi->parsed()) {
      g_poi.resolve();
      const auto t0 = std::chrono::steady_clock::now();
      auto m = Model::from_hat(g_poi.p);
      if (!(m.alpha() > 0)) throw InvalidParameter("poisson: needs alpha > 0");
      const Grid2D grid = Grid2D::around(m.consts, m.alpha(), poi_nt, poi_nz, width_sd);
      grid.validate(m.consts.z_star);
      auto op = build_operator(grid, m.consts, m.alpha());
      auto mu = stationary_measure(op);
      const double lambda = lambda_from_measure(mu);
      PoissonDiagnostics diag;
      auto g = solve_poisson(op, mu, lambda, &diag);
      if (!g_csv.empty()) write_grid(g_poi, g_csv, grid, g.values, "g");
      if (!mu_csv.empty()) write_grid(g_poi, mu_csv, grid, mu.density, "mu");
      Json j = g_poi.head("poisson");
      j["grid"] = to_json(grid);
      j["lambda"] = lambda;
      j["z_marginal_l1"] = marginal_l1_to_gaussian(mu, m.consts, m.alpha());
      j["clamped_min"] = mu.clamped_min;
      j["poisson"] = to_json(diag);
      j["g_range"] = {g.values.minCoeff(), g.values.maxCoeff()};
      j["wall_time_s"] = seconds_since(t0);
      g_poi.emit(j);
    } else if (lya->parsed()) {
      g_lya.resolve();
      const auto t0 = std::chrono::steady_clock::now();
      auto m = Model::from_hat(g_lya.p);
      auto s = solve_pde(m, ly_nt, ly_nz);
      PoissonDiagnostics diag;
      auto g = solve_poisson(s.op, s.mu, s.lambda, &diag);
      auto k = select_constants(s.lambda, m.alpha(), m.params, m.consts, g);
      auto lat = default_lattice(s.op.grid, lat_t, lat_z, shrink, parse_list(r_list, "r"));
      DriftOptions dopt{!interp, g_lya.threads};
      auto v0 = verify_drift_V0(k, g, lat, m.consts, m.alpha(), dopt);
      k.d = v0.d;
      auto full = verify_drift_full(k, g, lat, m.params, m.consts, m.alpha(), dopt);
      k.K = full.K;
      Json j = g_lya.head("verify-lyapunov");
      j["lambda_pde"] = s.lambda;
      j["poisson"] = to_json(diag);
      j["constants"] = to_json(k);
      j["V0"] = to_json(v0);
      j["full"] = to_json(full);
      j["d"] = v0.d;
      j["c"] = full.c;
      j["pass"] = v0.pass && full.pass && v0.d > 0 && full.c > 0;
      j["wall_time_s"] = seconds_since(t0);
      g_lya.emit(j);
    } else if (exc->parsed()) {
      g_exc.resolve();
      const auto t0 = std::chrono::steady_clock::now();
      auto m = Model::from_hat(g_exc.p);
      SimConfig cfg;
      cfg.t_burn = ex_burn;
      cfg.t_final = ex_T;
      cfg.dt0 = ex_dt0;
      cfg.seed = g_exc.seed;
      auto run = run_excursions(m, cfg, !ex_jsonl.empty());
      Json j = g_exc.head("excursions");
      j["config"] = to_json(cfg);
      j["excursions"] = run.excursions.size();
      j["complete"] = run.complete;
      if (run.complete >= 100) {
        auto e = estimate_lambda_excursion(run.excursions);
        j["lambda_excursion"] = to_json(e);
        j["lambda_direct"] = run.direct_average();
        j["identity_gap"] = e.value - run.direct_average();
      }
      if (m.alpha() > 0) j["stop_time"] = to_json(stop_time_stats(run.excursions, m.alpha(), min_count));
      if (!ex_csv.empty()) {
        std::ofstream os(ex_csv, std::ios::binary);
        if (!os) throw InvalidParameter("cannot open '" + ex_csv + "' for writing");
        write_excursions_csv(os, run.excursions);
      }
      if (!ex_jsonl.empty()) {
        std::ofstream os(ex_jsonl, std::ios::binary);
        if (!os) throw InvalidParameter("cannot open '" + ex_jsonl + "' for writing");
        for (const auto& e : run.excursions) {
          Json s = Json::array();
          for (const auto& q : e.samples) s.push_back({q.t, q.theta, q.z});
          Json row{{"t_start", e.t_start}, {"tau", e.tau},       {"z_start", e.z_start_level},
                   {"z_end", e.z_end_level}, {"Fhat", e.Fhat}, {"complete", e.complete},
                   {"samples", s}};
          os << row.dump() << "\n";
        }
      }
      j["wall_time_s"] = seconds_since(t0);
      g_exc.emit(j);
    } else if (chk->parsed()) {
      g_chk.resolve();
      const auto t0 = std::chrono::steady_clock::now();
      Json j = g_chk.head("check");
      bool pass = true;
      const bool all = which == "all";
      if (all || which == "exp-growth") {
        eg.seed = g_chk.seed;
        eg.threads = g_chk.threads;
        auto r = check_exp_growth(eg);
        j["exp_growth"] = to_json(r);
        pass = pass && r.pass;
      }
      if (all || which == "tracking") {
        const auto a0s = parse_list(a0_list, "a0");
        auto r = check_tracking_grid(a0s);
        auto rc = check_tracking_grid(a0s, 40, true);
        j["tracking"] = to_json(r);
        j["tracking_time_changed"] = to_json(rc);
        pass = pass && r.stable_pass && r.unstable_pass && rc.stable_pass;
      }
      if (all || which == "crossing") {
        auto r = check_crossing_random(instances, g_chk.seed);
        j["crossing"] = to_json(r);
        pass = pass && r.pass;
      }
      if (all || which == "stop-time") {
        auto m = Model::from_transformed(g_chk.p, st_alpha);
        SimConfig cfg;
        cfg.t_burn = 10;
        cfg.t_final = 10 + st_T;
        cfg.dt0 = st_dt0;
        cfg.seed = g_chk.seed;
        auto run = run_excursions(m, cfg);
        auto r = stop_time_stats(run.excursions, m.alpha());
        j["stop_time"] = to_json(r);
        // moment ratios bounded across buckets
        const bool ok = r.buckets.size() >= 2 && r.ratio_spread < 5 && r.ratio4_spread < 5;
        j["stop_time_pass"] = ok;
        pass = pass && ok;
      }
      j["pass"] = pass;
      j["wall_time_s"] = seconds_since(t0);
      g_chk.emit(j);
    } else if (swp->parsed()) {
      g_swp.resolve();
      const auto t0 = std::chrono::steady_clock::now();
      Json rows = Json::array();
      std::ostringstream csv;
      csv << "alpha_hat,alpha,lambda,half_width\n";
      for (double a : parse_list(alphas_s, "alphas")) {
        auto m = Model::from_hat(g_swp.p, g_swp.to_hat(a));
        auto e = estimate(g_swp, sf, m);
        Json r = lambda_record(g_swp, m, e);
        r.erase("params");
        rows.push_back(r);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", m.alpha_hat(), m.alpha(), e.value, e.half_width);
        csv << buf;
      }
      if (!sweep_csv.empty()) write_text(sweep_csv, csv.str());
      Json j = g_swp.head("sweep");
      j["method"] = sf.method;
      j["points"] = rows;
      j["wall_time_s"] = seconds_since(t0);
      g_swp.emit(j);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
