#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "lorenzlab/core.hpp"
#include "lorenzlab/estimators.hpp"
#include "lorenzlab/sde.hpp"

namespace lorenzlab {

struct Zone {
  double lo = -1, hi = 1;
  bool contains(double z) const { return z >= lo && z <= hi; }
};

// [-1, 1] if |z| <= 1/2, else {cz : c in [1/2, 2]}.
Zone zone(double z);

struct ExcursionSample {
  double t = 0, theta = 0, z = 0;
};

struct Excursion {
  double t_start = 0;
  double tau = 0;  // sum of the step pieces inside the excursion
  double z_start_level = 0, z_end_level = 0;
  // Integral of the decomposer's observable over [t_start, t_start + tau],
  // from the integrator's per-step increments.
  double Fhat = 0;
  bool complete = false;
  // Endpoints exact; at most kMaxInterior interior samples (uniform stride).
  std::vector<ExcursionSample> samples;
};

inline constexpr int kMaxInterior = 4096;

// Streaming zone-exit decomposition of a (theta, z) path. Crossing times are
// linear interpolations within a step; the crossing sample closes one
// excursion and opens the next.
class ExcursionDecomposer {
 public:
  explicit ExcursionDecomposer(bool keep_samples = true) : keep_(keep_samples) {}

  void start(double t, double theta, double z);
  // One step ending at (t, theta, z); `integral` is the observable integrated
  // over the step and is split at crossings at a constant rate, so a constant
  // observable lifts to exactly c * tau when c is a power of two.
  void step(double t, double theta, double z, double integral);
  // Closes the open tail (incomplete) and returns everything. Throws
  // InvalidParameter if nothing was recorded.
  std::vector<Excursion> finish();

  // Integral and duration over the union of completed excursions, summed
  // step by step independently of the per-excursion totals.
  double union_integral() const { return union_int_; }
  double union_duration() const { return last_close_t_ - first_t_; }

 private:
  void open(const ExcursionSample& s);
  void push_interior(const ExcursionSample& s);

  bool keep_;
  bool started_ = false;
  Excursion cur_;
  Zone zone_;
  ExcursionSample last_;
  long long interior_seen_ = 0, stride_ = 1;
  std::vector<Excursion> done_;
  double running_int_ = 0, union_int_ = 0;
  double first_t_ = 0, last_close_t_ = 0;
};

// Batch form: samples must be time ordered; trapezoidal increments of F.
std::vector<Excursion> decompose(const std::vector<ExcursionSample>& traj,
                                 const std::function<double(double, double)>& F);

// Trapezoidal time integral of F over the stored samples of e.
double lift_functional(const std::function<double(double, double)>& F, const Excursion& e);

// sum Fhat / sum tau over complete excursions, jackknife CI over excursions.
// Throws InvalidParameter with fewer than 100 complete excursions.
EstimateWithCI estimate_lambda_excursion(const std::vector<Excursion>& ex);

struct ExcursionRun {
  std::vector<Excursion> excursions;
  std::size_t complete = 0;
  double union_integral = 0, union_duration = 0;
  // union_integral / union_duration: the plain time average on the same data
  double direct_average() const { return union_integral / union_duration; }
  RunSummary summary;
};

// Theta-z simulation over [t_burn, t_final], decomposed after burn-in; the
// observable is the lambda integrand with the integrator's midpoint rule.
ExcursionRun run_excursions(const Model& m, SimConfig cfg, bool keep_samples = false);

struct StopTimeBucket {
  double z_lo = 0, z_hi = 0;  // |z_start_level| range
  std::size_t n = 0;
  double mean_abs_z0 = 0;
  double mean_tau = 0;
  double moment4 = 0;      // (E tau^4)^{1/4}
  double ratio_mean = 0;   // E[tau / (1 ^ (z0/alpha)^2)]
  double ratio_m4 = 0;     // (E[(tau / (1 ^ (z0/alpha)^2))^4])^{1/4}
};

struct StopTimeReport {
  double alpha = 0;
  std::vector<StopTimeBucket> buckets;  // only buckets with >= min_count excursions
  double ratio_spread = 0;   // max / min of ratio_mean across buckets
  double ratio4_spread = 0;  // same for ratio_m4
  double slope = 0;          // log-log slope of mean_tau vs mean |z0| over buckets with |z0| <= alpha/4
  int slope_buckets = 0;
};

// Complete excursions with |z_start_level| >= 1, in sqrt(2)-geometric buckets.
StopTimeReport stop_time_stats(const std::vector<Excursion>& ex, double alpha, std::size_t min_count = 30);

// idx,z_start,z_end,tau,Fhat
void write_excursions_csv(std::ostream& os, const std::vector<Excursion>& ex);

}  // namespace lorenzlab
