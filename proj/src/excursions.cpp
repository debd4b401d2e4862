#include "lorenzlab/excursions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace lorenzlab {

Zone zone(double z) {
  if (std::fabs(z) <= 0.5) return {-1.0, 1.0};
  return z > 0 ? Zone{0.5 * z, 2.0 * z} : Zone{2.0 * z, 0.5 * z};
}

void ExcursionDecomposer::open(const ExcursionSample& s) {
  cur_ = Excursion{};
  cur_.t_start = s.t;
  cur_.z_start_level = s.z;
  zone_ = zone(s.z);
  interior_seen_ = 0;
  stride_ = 1;
  if (keep_) cur_.samples.push_back(s);
}

void ExcursionDecomposer::push_interior(const ExcursionSample& s) {
  if (!keep_) return;
  if (interior_seen_++ % stride_ != 0) return;
  cur_.samples.push_back(s);
  if (int(cur_.samples.size()) - 1 > kMaxInterior) {
    // keep the start sample and every other interior sample
    std::size_t w = 1;
    for (std::size_t r = 1; r < cur_.samples.size(); r += 2) cur_.samples[w++] = cur_.samples[r];
    cur_.samples.resize(w);
    stride_ *= 2;
  }
}

void ExcursionDecomposer::start(double t, double theta, double z) {
  started_ = true;
  done_.clear();
  last_ = {t, theta, z};
  first_t_ = last_close_t_ = t;
  running_int_ = union_int_ = 0;
  open(last_);
}

void ExcursionDecomposer::step(double t, double theta, double z, double integral) {
  if (!started_) throw InvalidParameter("ExcursionDecomposer: step() before start()");
  ExcursionSample a = last_;
  const ExcursionSample b{t, theta, z};
  // the step's integral is shared out at a constant rate
  const double rate = t > a.t ? integral / (t - a.t) : 0.0;
  while (!zone_.contains(z)) {
    const double edge = z > zone_.hi ? zone_.hi : zone_.lo;
    const double f = std::clamp((edge - a.z) / (z - a.z), 0.0, 1.0);
    ExcursionSample cross{a.t + f * (t - a.t), reduce_theta(a.theta + f * reduce_theta(theta - a.theta)), edge};
    const double piece = cross.t - a.t;
    cur_.Fhat += rate * piece;
    cur_.tau += piece;
    running_int_ += rate * piece;
    cur_.z_end_level = edge;
    cur_.complete = true;
    if (keep_) cur_.samples.push_back(cross);
    done_.push_back(std::move(cur_));
    union_int_ = running_int_;
    last_close_t_ = cross.t;
    open(cross);
    a = cross;
  }
  const double piece = t - a.t;
  cur_.Fhat += rate * piece;
  cur_.tau += piece;
  running_int_ += rate * piece;
  push_interior(b);
  last_ = b;
}

std::vector<Excursion> ExcursionDecomposer::finish() {
  if (!started_) throw InvalidParameter("decompose: empty trajectory");
  cur_.z_end_level = last_.z;
  cur_.complete = false;
  if (keep_ && (cur_.samples.empty() || cur_.samples.back().t != last_.t)) cur_.samples.push_back(last_);
  std::vector<Excursion> out = std::move(done_);
  out.push_back(std::move(cur_));
  started_ = false;
  done_.clear();
  return out;
}

std::vector<Excursion> decompose(const std::vector<ExcursionSample>& traj,
                                 const std::function<double(double, double)>& F) {
  if (traj.empty()) throw InvalidParameter("decompose: empty trajectory");
  ExcursionDecomposer d(true);
  d.start(traj[0].t, traj[0].theta, traj[0].z);
  double fprev = F(traj[0].theta, traj[0].z);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const auto& s = traj[k];
    double f = F(s.theta, s.z);
    d.step(s.t, s.theta, s.z, 0.5 * (fprev + f) * (s.t - traj[k - 1].t));
    fprev = f;
  }
  return d.finish();
}

double lift_functional(const std::function<double(double, double)>& F, const Excursion& e) {
  double acc = 0;
  for (std::size_t k = 1; k < e.samples.size(); ++k) {
    const auto &a = e.samples[k - 1], &b = e.samples[k];
    acc += 0.5 * (F(a.theta, a.z) + F(b.theta, b.z)) * (b.t - a.t);
  }
  return acc;
}

EstimateWithCI estimate_lambda_excursion(const std::vector<Excursion>& ex) {
  std::vector<const Excursion*> c;
  for (const auto& e : ex)
    if (e.complete) c.push_back(&e);
  const std::size_t n = c.size();
  if (n < 100)
    throw InvalidParameter("estimate_lambda_excursion: need >= 100 complete excursions, got " + std::to_string(n));
  double SF = 0, ST = 0;
  for (auto* e : c) SF += e->Fhat, ST += e->tau;
  EstimateWithCI out;
  out.method = Method::Excursion;
  out.n_samples = (long long)n;
  out.value = SF / ST;
  // leave-one-out ratios
  std::vector<double> loo(n);
  double mean = 0;
  for (std::size_t k = 0; k < n; ++k) {
    loo[k] = (SF - c[k]->Fhat) / (ST - c[k]->tau);
    mean += loo[k];
  }
  mean /= double(n);
  double ss = 0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  out.half_width = 1.959963984540054 * std::sqrt(ss * double(n - 1) / double(n));
  return out;
}

ExcursionRun run_excursions(const Model& m, SimConfig cfg, bool keep_samples) {
  cfg.system = System::ThetaZ;
  cfg.validate();
  NoiseStream ns(cfg.seed, cfg.stream_id);
  ExcursionDecomposer d(keep_samples);
  State init = State::polar(0, 0, m.consts.z_star);
  ExcursionSample prev{0.0, init.coords[1], init.coords[2]};
  bool started = false;
  ExcursionRun run;
  run.summary = integrate(cfg, init, m, ns, [&](const StepEvent& e) {
    const double th = e.state.coords[1], z = e.state.coords[2];
    if (e.post_burn) {
      if (!started) {
        d.start(prev.t, prev.theta, prev.z);
        started = true;
      }
      d.step(e.t, th, z, e.dt * e.f_mid);
    }
    prev = {e.t, th, z};
  });
  if (!started) d.start(prev.t, prev.theta, prev.z);
  run.union_integral = d.union_integral();
  run.union_duration = d.union_duration();
  run.excursions = d.finish();
  for (const auto& e : run.excursions) run.complete += e.complete;
  return run;
}

StopTimeReport stop_time_stats(const std::vector<Excursion>& ex, double alpha, std::size_t min_count) {
  if (!(alpha > 0)) throw InvalidParameter("stop_time_stats: alpha must be positive");
  struct Acc {
    std::size_t n = 0;
    double z0 = 0, tau = 0, tau4 = 0, ratio = 0, ratio4 = 0;
  };
  std::map<int, Acc> acc;
  for (const auto& e : ex) {
    double a = std::fabs(e.z_start_level);
    if (!e.complete || a < 1) continue;
    int k = int(std::floor(2 * std::log2(a)));
    double s = std::min(1.0, (a / alpha) * (a / alpha));
    Acc& b = acc[k];
    ++b.n;
    b.z0 += a;
    b.tau += e.tau;
    b.tau4 += std::pow(e.tau, 4);
    b.ratio += e.tau / s;
    b.ratio4 += std::pow(e.tau / s, 4);
  }
  StopTimeReport rep;
  rep.alpha = alpha;
  double rmin = INFINITY, rmax = 0, r4min = INFINITY, r4max = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [k, b] : acc) {
    if (b.n < min_count) continue;
    StopTimeBucket q;
    q.z_lo = std::exp2(k / 2.0);
    q.z_hi = std::exp2((k + 1) / 2.0);
    q.n = b.n;
    q.mean_abs_z0 = b.z0 / b.n;
    q.mean_tau = b.tau / b.n;
    q.moment4 = std::pow(b.tau4 / b.n, 0.25);
    q.ratio_mean = b.ratio / b.n;
    q.ratio_m4 = std::pow(b.ratio4 / b.n, 0.25);
    rep.buckets.push_back(q);
    rmin = std::min(rmin, q.ratio_mean);
    rmax = std::max(rmax, q.ratio_mean);
    r4min = std::min(r4min, q.ratio_m4);
    r4max = std::max(r4max, q.ratio_m4);
    if (q.mean_abs_z0 <= alpha / 4) {
      double x = std::log(q.mean_abs_z0), y = std::log(q.mean_tau);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++rep.slope_buckets;
    }
  }
  if (!rep.buckets.empty()) {
    rep.ratio_spread = rmax / rmin;
    rep.ratio4_spread = r4max / r4min;
  }
  const double nb = rep.slope_buckets;
  rep.slope = nb >= 2 ? (nb * sxy - sx * sy) / (nb * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

void write_excursions_csv(std::ostream& os, const std::vector<Excursion>& ex) {
  os << "idx,z_start,z_end,tau,Fhat\n";
  char buf[160];
  for (std::size_t k = 0; k < ex.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", k, ex[k].z_start_level, ex[k].z_end_level,
                  ex[k].tau, ex[k].Fhat);
    os << buf;
  }
}

}  // namespace lorenzlab
