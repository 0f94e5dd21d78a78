#pragma once

// Information-theoretic checks and experiment drivers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pricelab/errors.hpp"
#include "pricelab/hard_instances.hpp"
#include "pricelab/learners.hpp"
#include "pricelab/market.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

/// Runs fn(0..n-1) on up to `jobs` threads. Each index is handled exactly
/// once; callers write results into slot i so aggregation order is fixed.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ----------------------------------------------------------------------------
// Bernoulli KL

/// d(x, y) in nats with 0 log 0 = 0; +inf when the support of y misses x.
inline double bernoulli_kl(double x, double y) {
  if (x == y) return 0.0;
  double d = 0.0;
  if (x > 0.0) {
    if (y <= 0.0) return std::numeric_limits<double>::infinity();
    d += x * std::log(x / y);
  }
  if (x < 1.0) {
    if (y >= 1.0) return std::numeric_limits<double>::infinity();
    d += (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
  }
  return std::max(0.0, d);
}

struct KlBatchBound {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// sum_{i: x_i < b} d(x_i, y_i) >= n d(mean(x), b) for 0 < b <= min(y).
inline KlBatchBound kl_batch_bound(const std::vector<double>& xs, double b,
                                   const std::vector<double>& ys) {
  if (xs.empty()) throw ParameterError("kl_batch_bound: xs is empty");
  if (xs.size() != ys.size()) throw ParameterError("kl_batch_bound: xs and ys differ in length");
  if (!(b > 0.0 && b <= 1.0)) throw ParameterError("kl_batch_bound: requires 0 < b <= 1");
  for (double x : xs)
    if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("kl_batch_bound: every x_i must lie in [0,1]");
  for (double y : ys) {
    if (!(y <= 1.0)) throw ParameterError("kl_batch_bound: every y_i must be <= 1");
    if (!(b <= y)) throw ParameterError("kl_batch_bound: requires b <= min(ys)");
  }
  const double n = static_cast<double>(xs.size());
  const double a = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (!(a < b)) throw ParameterError("kl_batch_bound: requires mean(xs) < b");
  KlBatchBound out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] < b) out.lhs += bernoulli_kl(xs[i], ys[i]);
  out.rhs = n * bernoulli_kl(a, b);
  if (out.lhs < out.rhs - 1e-12 * std::max(1.0, std::abs(out.rhs)))
    throw ConsistencyError("kl_batch_bound violated: lhs < rhs");
  return out;
}

// ----------------------------------------------------------------------------
// Distinguishers

/// 1-based index of the informative interval holding p, or 0 for the base.
inline int interval_distinguisher(double p, const HardFamily& fam) {
  const auto& ms = fam.members;
  // Intervals are sorted and disjoint by construction.
  auto it = std::upper_bound(ms.begin(), ms.end(), p,
                             [](double v, const Member& m) { return v < m.interval.lo; });
  if (it == ms.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - ms.begin()) - 1;
  return ms[idx].interval.contains(p) ? static_cast<int>(idx) + 1 : 0;
}

/// T' = (25000 c / eps)^(1 / (1 - alpha)).
inline double distinction_horizon(double c, double alpha, double eps) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (!(c > 0.0)) throw ParameterError("c must be positive");
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  return std::pow(25000.0 * c / eps, 1.0 / (1.0 - alpha));
}

inline constexpr double kMaxSimulatedHorizon = 1099511627776.0;  // 2^40

struct DistinguisherRun {
  int output = 0;
  std::uint64_t horizon = 0;
  double formula_horizon = 0.0;
  std::vector<std::uint64_t> informative_pulls;
};

// Runs the learner on member `member` (1-based) for T' rounds and samples an
// interval index from the informative pull counts; 0 when none were pulled.
inline DistinguisherRun regret_to_distinguisher(const LearnerFactory& factory,
                                                const HardFamily& fam, int member, double c,
                                                double alpha,
                                                std::optional<std::uint64_t> budget_override,
                                                std::uint64_t seed) {
  if (member < 1 || member > fam.K()) throw ParameterError("member index must lie in [1, K]");
  DistinguisherRun out;
  out.formula_horizon = distinction_horizon(c, alpha, fam.eps);
  if (budget_override) {
    if (*budget_override < 1) throw ConfigError("budget_override must be at least 1");
    out.horizon = *budget_override;
  } else {
    if (!(out.formula_horizon <= kMaxSimulatedHorizon))
      throw ConfigError("T' = " + std::to_string(out.formula_horizon) +
                        " is too large to simulate; pass budget_override");
    out.horizon = static_cast<std::uint64_t>(std::ceil(out.formula_horizon));
  }
  auto learner = factory(out.horizon);
  const auto& inst = fam.members[static_cast<std::size_t>(member - 1)].instance;
  const auto log = run_episode(inst, *learner, out.horizon, seed);
  out.informative_pulls = pull_counts_in(log, fam.intervals());
  const auto total = std::accumulate(out.informative_pulls.begin(), out.informative_pulls.end(),
                                     std::uint64_t{0});
  if (total == 0) return out;
  RandomStream pick(derive_seed(seed, 0x5a));
  out.output = sample_by_counts(out.informative_pulls, pick) + 1;
  return out;
}

// ----------------------------------------------------------------------------
// Identification experiment

/// sup_x d(F_0(x), F_i(x)) on a grid over the informative interval, with the
/// maximiser.
inline std::pair<double, double> max_kl_in_interval(const Instance& base, const Instance& member,
                                                    const PriceInterval& iv, int points = 10000) {
  double best = 0.0;
  double arg = iv.lo;
  for (int j = 0; j <= points; ++j) {
    double x = iv.lo + (iv.hi - iv.lo) * j / points;
    if (x >= iv.hi) x = std::nextafter(iv.hi, 0.0);
    const double d = bernoulli_kl(product_cdf(base, x), product_cdf(member, x));
    if (d > best) {
      best = d;
      arg = x;
    }
  }
  return {best, arg};
}

struct KlBudgetCheck {
  int member = 0;
  double rate = 0.0;              // per-query KL bound used
  double mean_pulls_base = 0.0;   // E_0[T_i]
  double se_pulls_base = 0.0;
  double p_base = 0.0;            // P_0[E_i]
  double p_member = 0.0;          // P_i[E_i]
  double kl_hat = 0.0;            // d(p_base, p_member)
  double kl_lower = 0.0;          // smallest d over the 3-sigma box
  double budget_upper = 0.0;      // rate * (E_0[T_i] + 3 se)
  bool violated = false;
};

struct IdentificationResult {
  std::string family_tag;
  double eps = 0.0;
  std::uint64_t budget = 0;
  int trials = 0;
  std::string strategy;
  std::vector<double> success_rate;               // per member, P_i[E_i]
  double base_rate = 0.0;                         // P_0[output 0]
  std::vector<double> base_output_rate;           // P_0[E_i], i = 1..K
  std::vector<double> mean_informative_pulls;     // E_0[T_i]
  std::vector<double> member_informative_pulls;   // E_i[T_i]
  std::vector<KlBudgetCheck> checks;
  int violations = 0;

  double mean_success() const {
    if (success_rate.empty()) return 0.0;
    return std::accumulate(success_rate.begin(), success_rate.end(), 0.0) /
           static_cast<double>(success_rate.size());
  }
};

namespace detail {

inline double binomial_sigma(double hits, double n) {
  const double p = (hits + 1.0) / (n + 2.0);
  return std::sqrt(p * (1.0 - p) / n);
}

// min d(x, y) over x in [x0, x1], y in [y0, y1].
inline double min_kl_over_box(double x0, double x1, double y0, double y1) {
  x0 = std::clamp(x0, 0.0, 1.0);
  x1 = std::clamp(x1, 0.0, 1.0);
  y0 = std::clamp(y0, 0.0, 1.0);
  y1 = std::clamp(y1, 0.0, 1.0);
  if (x1 >= y0 && y1 >= x0) return 0.0;
  // Disjoint boxes: d is monotone in the distance, so the nearest corners win.
  if (x1 < y0) return bernoulli_kl(x1, y0);
  return bernoulli_kl(x0, y1);
}

struct TrialOutcome {
  int output = 0;
  std::vector<std::uint64_t> pulls;
};

}  // namespace detail

inline IdentificationResult identification_experiment(const HardFamily& fam,
                                                      const LearnerFactory& strategy,
                                                      std::uint64_t budget, int trials,
                                                      std::uint64_t seed, int jobs = 1) {
  const int K = fam.K();
  if (budget < static_cast<std::uint64_t>(K)) throw ConfigError("budget must be at least K");
  if (trials < 1) throw ConfigError("trials must be positive");
  const auto intervals = fam.intervals();

  IdentificationResult res;
  res.family_tag = to_string(fam.tag);
  res.eps = fam.eps;
  res.budget = budget;
  res.trials = trials;
  res.strategy = strategy(budget)->label();

  // Instance 0 is the base, j >= 1 the members.
  const auto cells = static_cast<std::size_t>(K + 1) * static_cast<std::size_t>(trials);
  std::vector<detail::TrialOutcome> outcomes(cells);
  parallel_for(cells, jobs, [&](std::size_t cell) {
    const auto j = cell / static_cast<std::size_t>(trials);
    const auto t = cell % static_cast<std::size_t>(trials);
    const Instance& inst = j == 0 ? fam.base : fam.members[j - 1].instance;
    const std::uint64_t s = derive_seed(seed, j, t);
    auto learner = strategy(budget);
    const auto log = run_episode(inst, *learner, budget, s);
    RandomStream pick(derive_seed(s, 0x7069636b));
    const int arm = sample_by_counts(learner->pull_counts(), pick);
    outcomes[cell].output = interval_distinguisher(learner->arms()[static_cast<std::size_t>(arm)], fam);
    outcomes[cell].pulls = pull_counts_in(log, intervals);
  });

  const double n = trials;
  res.success_rate.assign(static_cast<std::size_t>(K), 0.0);
  res.base_output_rate.assign(static_cast<std::size_t>(K), 0.0);
  res.mean_informative_pulls.assign(static_cast<std::size_t>(K), 0.0);
  res.member_informative_pulls.assign(static_cast<std::size_t>(K), 0.0);
  std::vector<double> sq_pulls(static_cast<std::size_t>(K), 0.0);
  for (int t = 0; t < trials; ++t) {
    const auto& o = outcomes[static_cast<std::size_t>(t)];
    if (o.output == 0) res.base_rate += 1.0;
    else res.base_output_rate[static_cast<std::size_t>(o.output - 1)] += 1.0;
    for (int i = 0; i < K; ++i) {
      const auto v = static_cast<double>(o.pulls[static_cast<std::size_t>(i)]);
      res.mean_informative_pulls[static_cast<std::size_t>(i)] += v;
      sq_pulls[static_cast<std::size_t>(i)] += v * v;
    }
  }
  res.base_rate /= n;
  for (int j = 1; j <= K; ++j) {
    for (int t = 0; t < trials; ++t) {
      const auto& o = outcomes[static_cast<std::size_t>(j) * static_cast<std::size_t>(trials) +
                               static_cast<std::size_t>(t)];
      if (o.output == j) res.success_rate[static_cast<std::size_t>(j - 1)] += 1.0;
      res.member_informative_pulls[static_cast<std::size_t>(j - 1)] +=
          static_cast<double>(o.pulls[static_cast<std::size_t>(j - 1)]);
    }
  }

  for (int i = 0; i < K; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double hits0 = res.base_output_rate[u];
    const double hitsi = res.success_rate[u];
    res.base_output_rate[u] /= n;
    res.success_rate[u] /= n;
    res.member_informative_pulls[u] /= n;
    const double mean = res.mean_informative_pulls[u] / n;
    const double var = trials > 1 ? std::max(0.0, (sq_pulls[u] - n * mean * mean) / (n - 1.0)) : 0.0;
    res.mean_informative_pulls[u] = mean;

    KlBudgetCheck chk;
    chk.member = i + 1;
    const auto sup = max_kl_in_interval(fam.base, fam.members[u].instance, fam.members[u].interval);
    chk.rate = std::max(fam.eps * fam.eps, sup.first);
    chk.mean_pulls_base = mean;
    chk.se_pulls_base = std::sqrt(var / n);
    chk.p_base = res.base_output_rate[u];
    chk.p_member = res.success_rate[u];
    chk.kl_hat = bernoulli_kl(chk.p_base, chk.p_member);
    const double s0 = 3.0 * detail::binomial_sigma(hits0, n);
    const double si = 3.0 * detail::binomial_sigma(hitsi, n);
    chk.kl_lower = detail::min_kl_over_box(chk.p_base - s0, chk.p_base + s0, chk.p_member - si,
                                           chk.p_member + si);
    chk.budget_upper = chk.rate * (chk.mean_pulls_base + 3.0 * chk.se_pulls_base);
    chk.violated = chk.kl_lower > chk.budget_upper;
    if (chk.violated) ++res.violations;
    res.checks.push_back(chk);
  }
  return res;
}

inline json to_json(const IdentificationResult& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"member", c.member},
                      {"rate", c.rate},
                      {"mean_pulls_base", c.mean_pulls_base},
                      {"se_pulls_base", c.se_pulls_base},
                      {"p_base", c.p_base},
                      {"p_member", c.p_member},
                      {"kl_hat", c.kl_hat},
                      {"kl_lower", c.kl_lower},
                      {"budget_upper", c.budget_upper},
                      {"violated", c.violated}});
  }
  return {{"family_tag", r.family_tag},
          {"eps", r.eps},
          {"budget", r.budget},
          {"trials", r.trials},
          {"strategy", r.strategy},
          {"success_rate", r.success_rate},
          {"mean_success_rate", r.mean_success()},
          {"base_rate", r.base_rate},
          {"base_output_rate", r.base_output_rate},
          {"mean_informative_pulls", r.mean_informative_pulls},
          {"member_informative_pulls", r.member_informative_pulls},
          {"kl_checks", checks},
          {"violations", r.violations}};
}

// ----------------------------------------------------------------------------
// Regret scaling

struct RegretScalingFit {
  std::string learner;
  std::string instance;
  std::vector<std::uint64_t> horizons;
  std::vector<double> mean_regret;
  std::vector<double> stderr_regret;
  std::vector<bool> excluded;  // non-positive mean, left out of the fit
  int seeds = 0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit ordinary_least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("OLS needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ConfigError("OLS needs distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

inline RegretScalingFit regret_scaling_experiment(const Instance& inst,
                                                  const LearnerFactory& factory,
                                                  const std::vector<std::uint64_t>& horizons,
                                                  int seeds_per_horizon, std::uint64_t seed,
                                                  int jobs = 1) {
  if (horizons.size() < 3) throw ConfigError("regret scaling needs at least 3 horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 64) throw ConfigError("every horizon must be at least 64");
    if (i > 0 && horizons[i] <= horizons[i - 1])
      throw ConfigError("horizons must be strictly increasing");
  }
  if (seeds_per_horizon < 1) throw ConfigError("seeds must be positive");

  const auto opt = monopoly_price(inst);
  const std::size_t S = static_cast<std::size_t>(seeds_per_horizon);
  std::vector<double> regret(horizons.size() * S, 0.0);
  // Largest horizons first so a parallel pool finishes evenly.
  std::vector<std::size_t> order(regret.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return a / S > b / S; });
  parallel_for(order.size(), jobs, [&](std::size_t k) {
    const std::size_t cell = order[k];
    const std::size_t h = cell / S;
    const std::size_t s = cell % S;
    auto learner = factory(horizons[h]);
    const auto log = run_episode(inst, *learner, horizons[h], derive_seed(seed, horizons[h], s));
    regret[cell] = pseudo_regret(log, inst, opt).pseudo_regret;
  });

  RegretScalingFit fit;
  fit.learner = factory(horizons.front())->label();
  fit.instance = inst.label();
  fit.horizons = horizons;
  fit.seeds = seeds_per_horizon;
  std::vector<double> xs, ys;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double v = regret[h * S + s];
      sum += v;
      sq += v * v;
    }
    const double mean = sum / static_cast<double>(S);
    const double var = S > 1 ? std::max(0.0, (sq - static_cast<double>(S) * mean * mean) /
                                                 static_cast<double>(S - 1))
                             : 0.0;
    fit.mean_regret.push_back(mean);
    fit.stderr_regret.push_back(std::sqrt(var / static_cast<double>(S)));
    // Round-off in T r* - sum r(p_t) is far below this floor.
    const bool bad = !(mean > 1e-9 * static_cast<double>(horizons[h]));
    fit.excluded.push_back(bad);
    if (!bad) {
      xs.push_back(std::log(static_cast<double>(horizons[h])));
      ys.push_back(std::log(mean));
    }
  }
  if (xs.size() >= 2) {
    const auto line = ordinary_least_squares(xs, ys);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
  }
  fit.degenerate = xs.size() < horizons.size() || xs.size() < 2;
  return fit;
}

inline json to_json(const RegretScalingFit& f) {
  json j{{"learner", f.learner},
         {"instance", f.instance},
         {"horizons", f.horizons},
         {"mean_regret", f.mean_regret},
         {"stderr_regret", f.stderr_regret},
         {"excluded", f.excluded},
         {"seeds", f.seeds},
         {"degenerate", f.degenerate}};
  j["slope"] = std::isfinite(f.slope) ? json(f.slope) : json(nullptr);
  j["intercept"] = std::isfinite(f.intercept) ? json(f.intercept) : json(nullptr);
  return j;
}

}  // namespace pricelab
