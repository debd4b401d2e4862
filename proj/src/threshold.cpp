#include "lorenzlab/threshold.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include "lorenzlab/excursions.hpp"
#include "lorenzlab/fokker_planck.hpp"

namespace lorenzlab {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, double alpha_hat) {
  std::uint64_t bits;
  std::memcpy(&bits, &alpha_hat, sizeof bits);
  std::uint64_t h = seed ^ (bits + 0x9E3779B97F4A7C15ull + (seed << 6) + (seed >> 2));
  h ^= h >> 31;
  h *= 0xBF58476D1CE4E5B9ull;
  return h ^ (h >> 29);
}

SimConfig mc_config(const ThresholdOptions& opt, double alpha_hat, int level) {
  SimConfig c;
  c.t_burn = opt.t_burn;
  c.t_final = opt.t_burn + opt.t_final * std::ldexp(1.0, level);
  c.dt0 = opt.dt0;
  c.seed = opt.crn ? opt.seed : mix_seed(opt.seed, alpha_hat);
  return c;
}

}  // namespace

LambdaOracle make_oracle(Method method, const Params& p, const ThresholdOptions& opt) {
  derive_constants(p);  // throws on bad parameters
  switch (method) {
    case Method::MC:
    case Method::Growth:
      return [=](double ah, int level) {
        auto m = Model::from_hat(p, ah);
        McOptions mo{opt.replicas, opt.threads};
        auto cfg = mc_config(opt, ah, level);
        return method == Method::MC ? estimate_lambda_mc(m, cfg, mo) : estimate_lambda_growth(m, cfg, mo);
      };
    case Method::Excursion:
      return [=](double ah, int level) {
        auto t0 = std::chrono::steady_clock::now();
        auto run = run_excursions(Model::from_hat(p, ah), mc_config(opt, ah, level));
        auto e = estimate_lambda_excursion(run.excursions);
        e.seed = mc_config(opt, ah, level).seed;
        e.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return e;
      };
    case Method::PDE:
      return [=](double ah, int) { return estimate_lambda_pde(Model::from_hat(p, ah), opt.n_theta, opt.n_z); };
    case Method::Heuristic:
      return [=](double ah, int) {
        auto t0 = std::chrono::steady_clock::now();
        auto m = Model::from_hat(p, ah);
        EstimateWithCI e;
        e.value = heuristic_lambda(m.alpha(), m.consts, 1e-10);
        e.method = Method::Heuristic;
        e.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return e;
      };
    default:
      throw InvalidParameter(std::string("threshold: method '") + method_name(method) +
                             "' has no sign change to locate");
  }
}

namespace {

struct BudgetOut {};

enum class Sign { Neg, Pos, Unknown };

Sign sign_of(const EstimateWithCI& e) {
  if (e.hi() < 0) return Sign::Neg;
  if (e.lo() > 0) return Sign::Pos;
  return Sign::Unknown;
}

}  // namespace

ThresholdResult find_threshold(const LambdaOracle& oracle, Method method, const Params& p, double lo, double hi,
                               const ThresholdOptions& opt) {
  if (!(lo < hi) || !(lo >= 0)) throw InvalidParameter("threshold: need 0 <= lo < hi");
  if (!(opt.tol > 0)) throw InvalidParameter("threshold: tol must be positive");
  if (opt.budget < 2 || opt.max_level < 0 || opt.scan_points < 0)
    throw InvalidParameter("threshold: budget >= 2, max_level >= 0, scan_points >= 0 required");

  ThresholdResult res;
  res.method = method;
  int calls = 0;

  auto call = [&](double ah, int level) {
    if (calls >= opt.budget) throw BudgetOut{};
    ++calls;
    ThresholdEval ev{ah, alpha_from_hat(p, ah), level, oracle(ah, level)};
    res.evaluations.push_back(ev);
    return ev.estimate;
  };
  // escalate until the CI excludes zero or the per-point cap is hit
  auto resolve = [&](double ah) {
    EstimateWithCI e;
    for (int level = 0; level <= opt.max_level; ++level) {
      e = call(ah, level);
      if (e.excludes_zero()) break;
    }
    return e;
  };

  EstimateWithCI elo, ehi;
  try {
    elo = resolve(lo);
    ehi = resolve(hi);
  } catch (BudgetOut&) {
    throw BracketInvalid("threshold: budget exhausted before the bracket was validated");
  }
  if (sign_of(elo) != Sign::Neg || sign_of(ehi) != Sign::Pos)
    throw BracketInvalid("threshold: bracket-invalid, lambda(" + std::to_string(lo) + ") = " +
                         std::to_string(elo.value) + " +- " + std::to_string(elo.half_width) + ", lambda(" +
                         std::to_string(hi) + ") = " + std::to_string(ehi.value) + " +- " +
                         std::to_string(ehi.half_width));

  auto finish = [&](double a_hat, bool converged, const char* status) {
    res.alpha_star_hat = a_hat;
    res.alpha_star = alpha_from_hat(p, a_hat);
    res.lo_hat = lo;
    res.hi_hat = hi;
    res.converged = converged;
    res.status = status;
    return res;
  };
  auto interpolate = [&] { return lo + (hi - lo) * (-elo.value) / (ehi.value - elo.value); };

  try {
    // coarse scan: record every sign change, then bisect the first one
    if (opt.scan_points > 0) {
      std::vector<double> xs{lo};
      std::vector<EstimateWithCI> es{elo};
      for (int k = 1; k <= opt.scan_points; ++k) {
        double x = lo + (hi - lo) * k / (opt.scan_points + 1);
        xs.push_back(x);
        es.push_back(call(x, 0));
      }
      xs.push_back(hi);
      es.push_back(ehi);
      int last = -1;
      for (int k = 0; k < int(xs.size()); ++k) {
        Sign s = sign_of(es[k]);
        if (s == Sign::Unknown) continue;
        if (last >= 0 && sign_of(es[last]) != s) res.sign_changes.emplace_back(xs[last], xs[k]);
        last = k;
      }
      int first_pos = 0;
      while (sign_of(es[first_pos]) != Sign::Pos) ++first_pos;
      int neg = first_pos - 1;
      while (sign_of(es[neg]) != Sign::Neg) --neg;
      lo = xs[neg], elo = es[neg];
      hi = xs[first_pos], ehi = es[first_pos];
    }

    while (hi - lo > opt.tol) {
      double mid = 0.5 * (lo + hi);
      EstimateWithCI e = resolve(mid);
      switch (sign_of(e)) {
        case Sign::Neg: lo = mid, elo = e; break;
        case Sign::Pos: hi = mid, ehi = e; break;
        case Sign::Unknown:
          if (e.value == 0 && e.half_width == 0) return finish(mid, true, "converged");
          return finish(mid, 0.5 * (hi - lo) <= opt.tol, "unresolved-midpoint");
      }
    }
  } catch (BudgetOut&) {
    return finish(interpolate(), false, "budget-exhausted");
  }
  return finish(interpolate(), true, "converged");
}

ThresholdResult find_threshold(Method method, const Params& p, double lo, double hi, const ThresholdOptions& opt) {
  return find_threshold(make_oracle(method, p, opt), method, p, lo, hi, opt);
}

}  // namespace lorenzlab
