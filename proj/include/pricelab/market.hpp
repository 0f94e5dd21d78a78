#pragma once

// Repeated uniform pricing: N buyers, one posted price per round, and a
// single sold bit back. A sale happens iff max_i B_i >= p, so
// Pr[no sale] = prod_i F_i(p) with left-continuous F.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pricelab/distribution.hpp"
#include "pricelab/distribution_json.hpp"
#include "pricelab/errors.hpp"
#include "pricelab/learner_base.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

class Instance {
 public:
  Instance(std::string label, std::vector<PiecewiseDistribution> buyers)
      : label_(std::move(label)), buyers_(std::move(buyers)) {
    if (buyers_.empty()) throw DistributionError(label_ + ": an instance needs at least one buyer");
  }

  const std::string& label() const { return label_; }
  const std::vector<PiecewiseDistribution>& buyers() const { return buyers_; }
  std::size_t size() const { return buyers_.size(); }

  // Sorted union of buyer breakpoints and atom locations.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& b : buyers_) {
      for (double k : b.breakpoints()) out.push_back(k);
      for (const auto& a : b.atoms()) out.push_back(a.location);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::string label_;
  std::vector<PiecewiseDistribution> buyers_;
};

inline double product_cdf(const Instance& inst, double x) {
  double prod = 1.0;
  for (const auto& b : inst.buyers()) prod *= b.cdf(x);
  return prod;
}

inline double revenue_at(const Instance& inst, double p) {
  return p * (1.0 - product_cdf(inst, p));
}

struct MonopolyGrid {
  int points = 100000;
  double knot_offset = 1e-9;
  // Revenues within this of the best are ties; the smallest price wins.
  double tie_tolerance = 1e-12;
};

struct MonopolyResult {
  double price = 0.0;
  double revenue = 0.0;
};

inline MonopolyResult monopoly_price(const Instance& inst, const MonopolyGrid& grid = {}) {
  if (grid.points < 2) throw ConfigError("monopoly grid needs at least 2 points");
  std::vector<double> cand;
  cand.reserve(static_cast<std::size_t>(grid.points) + 64);
  for (int j = 0; j <= grid.points; ++j) cand.push_back(static_cast<double>(j) / grid.points);
  for (double k : inst.breakpoints()) {
    for (double v : {k - grid.knot_offset, k, k + grid.knot_offset})
      if (v >= 0.0 && v <= 1.0) cand.push_back(v);
  }
  std::sort(cand.begin(), cand.end());
  MonopolyResult best{0.0, -1.0};
  for (double p : cand) {
    const double r = revenue_at(inst, p);
    if (r > best.revenue + grid.tie_tolerance) best = {p, r};
  }
  return best;
}

enum class SamplingPath { FirstOrderStatistic, PerBuyer };

struct Sale {
  bool sold = false;
  double revenue = 0.0;
};

inline Sale post_price(const Instance& inst, double p, RandomStream& rng,
                       SamplingPath path = SamplingPath::FirstOrderStatistic) {
  bool sold = false;
  if (path == SamplingPath::PerBuyer) {
    for (const auto& b : inst.buyers()) {
      if (b.sample(rng) >= p) sold = true;
    }
  } else {
    sold = rng.uniform() >= product_cdf(inst, p);
  }
  return {sold, sold ? p : 0.0};
}

struct Round {
  std::uint64_t t = 0;
  double price = 0.0;
  bool sold = false;
  double revenue = 0.0;
  bool clamped = false;
};

struct EpisodeLog {
  std::vector<Round> rounds;
  std::uint64_t seed = 0;
  std::string learner_label;
  std::string instance_label;
  std::uint64_t horizon = 0;

  double cumulative_revenue() const {
    double s = 0.0;
    for (const auto& r : rounds) s += r.revenue;
    return s;
  }

  std::size_t clamped_rounds() const {
    return static_cast<std::size_t>(
        std::count_if(rounds.begin(), rounds.end(), [](const Round& r) { return r.clamped; }));
  }
};

inline void write_csv(std::ostream& os, const EpisodeLog& log) {
  os << "t,price,sold,revenue\n";
  char buf[96];
  for (const auto& r : log.rounds) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%d,%.17g\n",
                  static_cast<unsigned long long>(r.t), r.price, r.sold ? 1 : 0, r.revenue);
    os << buf;
  }
}

struct EpisodeOptions {
  SamplingPath path = SamplingPath::FirstOrderStatistic;
};

// The environment and the learner draw from independent streams derived
// from `seed`, so changing one never perturbs the other.
inline EpisodeLog run_episode(const Instance& inst, Learner& learner, std::uint64_t T,
                              std::uint64_t seed, const EpisodeOptions& opts = {}) {
  if (T < 1) throw ConfigError("horizon must be at least 1");
  RandomStream env(derive_seed(seed, 0x656e76));
  RandomStream own(derive_seed(seed, 0x6c726e));
  EpisodeLog log;
  log.seed = seed;
  log.learner_label = learner.label();
  log.instance_label = inst.label();
  log.horizon = T;
  log.rounds.reserve(T);

  // Sell probabilities cached per arm; continuum learners report arm -1.
  std::vector<double> no_sale(learner.arms().size(), -1.0);
  for (std::uint64_t t = 1; t <= T; ++t) {
    double p = learner.choose(own);
    bool clamped = false;
    if (!(p >= 0.0 && p <= 1.0)) {
      p = std::isnan(p) ? 0.0 : std::clamp(p, 0.0, 1.0);
      clamped = true;
    }
    Sale sale;
    const int arm = learner.last_arm();
    if (opts.path == SamplingPath::FirstOrderStatistic && !clamped && arm >= 0 &&
        static_cast<std::size_t>(arm) < no_sale.size()) {
      auto& q = no_sale[static_cast<std::size_t>(arm)];
      if (q < 0.0) q = product_cdf(inst, p);
      sale.sold = env.uniform() >= q;
      sale.revenue = sale.sold ? p : 0.0;
    } else {
      sale = post_price(inst, p, env, opts.path);
    }
    learner.update(p, sale.sold);
    log.rounds.push_back({t, p, sale.sold, sale.revenue, clamped});
  }
  return log;
}

struct RegretReport {
  double pseudo_regret = 0.0;
  double realized_regret = 0.0;
  double optimal_price = 0.0;
  double optimal_revenue = 0.0;
};

inline RegretReport pseudo_regret(const EpisodeLog& log, const Instance& inst,
                                  const MonopolyResult& opt) {
  if (log.instance_label != inst.label())
    throw ConfigError("episode was run against '" + log.instance_label + "', not '" +
                      inst.label() + "'");
  std::unordered_map<double, double> cache;
  double expected = 0.0;
  for (const auto& r : log.rounds) {
    auto it = cache.find(r.price);
    if (it == cache.end()) it = cache.emplace(r.price, revenue_at(inst, r.price)).first;
    expected += it->second;
  }
  const double T = static_cast<double>(log.rounds.size());
  return {T * opt.revenue - expected, T * opt.revenue - log.cumulative_revenue(), opt.price,
          opt.revenue};
}

inline RegretReport pseudo_regret(const EpisodeLog& log, const Instance& inst) {
  return pseudo_regret(log, inst, monopoly_price(inst));
}

inline json summary_json(const EpisodeLog& log, const RegretReport& r) {
  return {{"learner", log.learner_label},   {"instance", log.instance_label},
          {"T", log.horizon},               {"seed", log.seed},
          {"pseudo_regret", r.pseudo_regret}, {"realized_regret", r.realized_regret}};
}

inline json instance_to_json(const Instance& inst) {
  json j;
  j["label"] = inst.label();
  j["buyers"] = json::array();
  for (const auto& b : inst.buyers()) j["buyers"].push_back(to_json(b));
  return j;
}

// Accepts {"label", "buyers": [spec...]} or a single distribution spec.
inline Instance instance_from_json(const json& j) {
  std::vector<PiecewiseDistribution> buyers;
  if (j.is_object() && j.contains("buyers")) {
    for (const auto& b : j.at("buyers")) buyers.push_back(distribution_from_json(b));
    return Instance(j.value("label", std::string("instance")), std::move(buyers));
  }
  auto d = distribution_from_json(j);
  std::string label = d.label();
  buyers.push_back(std::move(d));
  return Instance(std::move(label), std::move(buyers));
}

}  // namespace pricelab
