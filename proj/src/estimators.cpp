#include "lorenzlab/estimators.hpp"

#include <chrono>
#include <limits>

#include "lorenzlab/parallel.hpp"

namespace lorenzlab {

const char* method_name(Method m) {
  switch (m) {
    case Method::MC: return "mc";
    case Method::Growth: return "growth";
    case Method::PDE: return "pde";
    case Method::Heuristic: return "heuristic";
    case Method::AsymptoticSmall: return "asymptotic-small";
    case Method::AsymptoticLarge: return "asymptotic-large";
    case Method::Excursion: return "excursion";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::MC, Method::Growth, Method::PDE, Method::Heuristic, Method::AsymptoticSmall,
                   Method::AsymptoticLarge, Method::Excursion})
    if (s == method_name(m)) return m;
  throw InvalidParameter("method: unknown method '" + s + "'");
}

BatchMeans::BatchMeans(double t0, double window, int n_bins)
    : t0_(t0), width_(window > 0 ? window / n_bins : 1.0), sum_(n_bins, 0.0), len_(n_bins, 0.0) {}

double BatchMeans::duration() const {
  double d = 0;
  for (double v : len_) d += v;
  return d;
}

double BatchMeans::mean() const {
  double s = 0, d = 0;
  for (size_t i = 0; i < sum_.size(); ++i) s += sum_[i], d += len_[i];
  return d > 0 ? s / d : std::numeric_limits<double>::quiet_NaN();
}

int BatchMeans::batches() const {
  long long nb = (long long)std::floor(std::sqrt(double(steps_)));
  return int(std::min<long long>(nb, (long long)sum_.size()));
}

double BatchMeans::variance_of_mean() const {
  const int nb = batches();
  const int nbin = int(sum_.size());
  std::vector<double> means;
  for (int j = 0; j < nb; ++j) {
    int lo = int((long long)j * nbin / nb), hi = int((long long)(j + 1) * nbin / nb);
    double s = 0, d = 0;
    for (int i = lo; i < hi; ++i) s += sum_[i], d += len_[i];
    if (d > 0) means.push_back(s / d);
  }
  const size_t n = means.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  double mu = 0;
  for (double v : means) mu += v;
  mu /= n;
  double ss = 0;
  for (double v : means) ss += (v - mu) * (v - mu);
  return ss / (double(n) * double(n - 1));
}

EstimateWithCI combine_replicas(const std::vector<BatchMeans>& reps, Method m) {
  EstimateWithCI e;
  e.method = m;
  double sum = 0, var = 0;
  for (const auto& r : reps) {
    sum += r.mean();
    var += r.variance_of_mean();
    e.n_samples += r.steps();
  }
  const double R = double(reps.size());
  e.value = sum / R;
  e.half_width = 1.959963984540054 * std::sqrt(var) / R;
  return e;
}

namespace {

template <class Contribution>
EstimateWithCI run_replicas(const Model& m, SimConfig cfg, const McOptions& opt, Method method,
                            Contribution contrib) {
  if (opt.replicas < 1) throw InvalidParameter("replicas: must be >= 1");
  if (!(m.alpha() >= 0)) throw InvalidParameter("alpha: must be non-negative");
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  std::vector<BatchMeans> reps(opt.replicas, BatchMeans(cfg.t_burn, cfg.window()));
  parallel_for(opt.replicas, opt.threads, [&](int k) {
    SimConfig c = cfg;
    c.stream_id = cfg.stream_id + std::uint64_t(k);
    NoiseStream ns(c.seed, c.stream_id);
    BatchMeans& bm = reps[k];
    integrate(c, State::polar(0, 0, m.consts.z_star), m, ns, [&](const StepEvent& e) {
      if (e.post_burn) bm.add(e.t - e.dt, e.dt, contrib(e));
    });
  });
  auto e = combine_replicas(reps, method);
  e.seed = cfg.seed;
  e.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return e;
}

}  // namespace

EstimateWithCI estimate_lambda_mc(const Model& m, SimConfig cfg, const McOptions& opt) {
  cfg.system = System::ThetaZ;
  return run_replicas(m, cfg, opt, Method::MC,
                      [](const StepEvent& e) { return e.dt * e.f_mid; });
}

EstimateWithCI estimate_lambda_growth(const Model& m, SimConfig cfg, const McOptions& opt) {
  cfg.system = System::PolarLinear;
  return run_replicas(m, cfg, opt, Method::Growth, [](const StepEvent& e) { return e.dr; });
}

double heuristic_lambda(double alpha, const DerivedConsts& c, double quad_tol) {
  if (!(alpha >= 0)) throw InvalidParameter("alpha: must be non-negative");
  if (alpha == 0) return asymptotic_lambda(0, c, Regime::Small);
  const double s = alpha / std::sqrt(2 * c.gamma);
  const double kink = (1.0 - c.z_star) / s;
  const double inv_sqrt_2pi = 0.3989422804014327;
  auto f = [&](double u) {
    double z = c.z_star + s * u;
    return z > 1 ? std::sqrt(z - 1) * inv_sqrt_2pi * std::exp(-0.5 * u * u) : 0.0;
  };
  // the integrand vanishes left of the kink
  double lo = std::max(-10.0, kink);
  return -1.0 + adaptive_simpson(f, lo, 10.0, quad_tol);
}

double asymptotic_lambda(double alpha, const DerivedConsts& c, Regime regime) {
  if (regime == Regime::Small) return c.z_star > 1 ? std::sqrt(c.z_star - 1) - 1 : -1.0;
  const double k = std::tgamma(0.75) / (2 * std::pow(c.gamma, 0.25) * std::sqrt(3.14159265358979323846));
  return std::sqrt(alpha) * k;
}

}  // namespace lorenzlab
