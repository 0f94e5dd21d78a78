#pragma once

// Pricing policies over binary feedback. Reward for a round is price * sold,
// which lies in [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pricelab/distribution_json.hpp"
#include "pricelab/errors.hpp"
#include "pricelab/learner_base.hpp"
#include "pricelab/market.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

namespace detail {

// Shared bookkeeping for learners over a finite arm set.
class GridLearner : public Learner {
 public:
  explicit GridLearner(ArmGrid grid)
      : grid_(std::move(grid)), counts_(static_cast<std::size_t>(grid_.size()), 0) {}

  const std::vector<double>& arms() const override { return grid_.prices(); }
  int last_arm() const override { return last_; }
  std::vector<std::uint64_t> pull_counts() const override { return counts_; }
  const ArmGrid& grid() const { return grid_; }

  void update(double price, bool sold) override {
    int arm = last_;
    if (arm < 0 || grid_[arm] != price) {
      const auto& p = grid_.prices();
      auto it = std::lower_bound(p.begin(), p.end(), price);
      if (it == p.end() || *it != price)
        throw ConsistencyError(label() + ": update for a price outside the arm set");
      arm = static_cast<int>(it - p.begin());
    }
    counts_[static_cast<std::size_t>(arm)] += 1;
    ++updates_;
    observe(arm, sold ? price : 0.0);
    last_ = -1;
  }

 protected:
  virtual void observe(int arm, double reward) = 0;

  double play(int arm) {
    last_ = arm;
    return grid_[arm];
  }

  ArmGrid grid_;
  std::vector<std::uint64_t> counts_;
  int last_ = -1;
};

}  // namespace detail

/// UCB1 with bonus sqrt(2 ln t / n_i); the first K rounds visit arms in order.
class UcbLearner : public detail::GridLearner {
 public:
  explicit UcbLearner(ArmGrid grid)
      : GridLearner(std::move(grid)),
        sums_(static_cast<std::size_t>(grid_.size()), 0.0),
        means_(sums_.size(), 0.0),
        inv_sqrt_n_(sums_.size(), 0.0) {}

  double choose(RandomStream&) override {
    const int K = grid_.size();
    if (updates_ < static_cast<std::uint64_t>(K)) return play(static_cast<int>(updates_));
    const double width = std::sqrt(2.0 * std::log(static_cast<double>(updates_)));
    int best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < means_.size(); ++i) {
      const double index = means_[i] + width * inv_sqrt_n_[i];
      if (index > best_index) {
        best_index = index;
        best = static_cast<int>(i);
      }
    }
    return play(best);
  }

  std::string label() const override { return "ucb[K=" + std::to_string(grid_.size()) + "]"; }

 protected:
  void observe(int arm, double reward) override {
    const auto a = static_cast<std::size_t>(arm);
    sums_[a] += reward;
    const auto n = static_cast<double>(counts_[a]);
    means_[a] = sums_[a] / n;
    inv_sqrt_n_[a] = 1.0 / std::sqrt(n);
  }

 private:
  std::vector<double> sums_;
  std::vector<double> means_;
  std::vector<double> inv_sqrt_n_;
};

/// EXP3 on losses 1 - reward with importance weighting and no forced mixing.
class Exp3Learner : public detail::GridLearner {
 public:
  static double default_eta(int K, std::uint64_t horizon) {
    if (K <= 1) return 1.0;
    return std::sqrt(std::log(static_cast<double>(K)) /
                     (static_cast<double>(horizon) * static_cast<double>(K)));
  }

  Exp3Learner(ArmGrid grid, double eta)
      : GridLearner(std::move(grid)),
        eta_(eta),
        loss_(static_cast<std::size_t>(grid_.size()), 0.0),
        weight_(loss_.size(), 1.0),
        total_(static_cast<double>(loss_.size())) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ParameterError("exp3 needs eta > 0");
  }

  double choose(RandomStream& rng) override {
    const double u = rng.uniform() * total_;
    double acc = 0.0;
    const int K = grid_.size();
    for (int i = 0; i < K; ++i) {
      acc += weight_[static_cast<std::size_t>(i)];
      if (u < acc) return play(i);
    }
    // Round-off left u above the cumulative sum; take the last arm with mass.
    for (int i = K - 1; i >= 0; --i)
      if (weight_[static_cast<std::size_t>(i)] > 0.0) return play(i);
    return play(K - 1);
  }

  std::vector<double> probabilities() const {
    double total = 0.0;
    for (double w : weight_) total += w;
    std::vector<double> p(weight_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = weight_[i] / total;
    return p;
  }
  double eta() const { return eta_; }

  std::string label() const override { return "exp3[K=" + std::to_string(grid_.size()) + "]"; }

 protected:
  // Only the played arm's weight moves, so the update is O(1) apart from an
  // occasional full rescale; weights are exp(-eta (L_i - ref)).
  void observe(int arm, double reward) override {
    const auto a = static_cast<std::size_t>(arm);
    loss_[a] += (1.0 - reward) * total_ / weight_[a];
    const double w = std::exp(-eta_ * (loss_[a] - ref_));
    total_ += w - weight_[a];
    weight_[a] = w;
    if (++since_refresh_ >= weight_.size() || !(total_ > 1e-200)) refresh();
  }

 private:
  void refresh() {
    ref_ = *std::min_element(loss_.begin(), loss_.end());
    total_ = 0.0;
    for (std::size_t i = 0; i < weight_.size(); ++i) {
      weight_[i] = std::exp(-eta_ * (loss_[i] - ref_));
      total_ += weight_[i];
    }
    since_refresh_ = 0;
  }

  double eta_;
  std::vector<double> loss_;
  std::vector<double> weight_;
  double total_;
  double ref_ = 0.0;
  std::size_t since_refresh_ = 0;
};

class ConstantLearner : public detail::GridLearner {
 public:
  explicit ConstantLearner(double price) : GridLearner(ArmGrid(std::vector<double>{price})) {}
  double choose(RandomStream&) override { return play(0); }
  std::string label() const override {
    char buf[48];
    std::snprintf(buf, sizeof buf, "constant[p=%.17g]", grid_[0]);
    return buf;
  }

 protected:
  void observe(int, double) override {}
};

/// Uniformly random arm every round; a non-adaptive baseline.
class UniformGridLearner : public detail::GridLearner {
 public:
  explicit UniformGridLearner(ArmGrid grid) : GridLearner(std::move(grid)) {}
  double choose(RandomStream& rng) override {
    return play(static_cast<int>(rng.below(static_cast<std::uint64_t>(grid_.size()))));
  }
  std::string label() const override {
    return "uniform[K=" + std::to_string(grid_.size()) + "]";
  }

 protected:
  void observe(int, double) override {}
};

enum class BanditCore { Ucb, Exp3 };

inline const char* to_string(BanditCore c) { return c == BanditCore::Ucb ? "ucb" : "exp3"; }

inline BanditCore parse_core(const std::string& s) {
  if (s == "ucb") return BanditCore::Ucb;
  if (s == "exp3") return BanditCore::Exp3;
  throw ConfigError("unknown bandit core '" + s + "' (expected ucb or exp3)");
}

// Smallest K with K^3 >= T.
inline int vanilla_arm_count(std::uint64_t T) {
  auto K = static_cast<std::uint64_t>(std::llround(std::cbrt(static_cast<double>(T))));
  while (K > 1 && (K - 1) * (K - 1) * (K - 1) >= T) --K;
  while (K * K * K < T) ++K;
  return static_cast<int>(std::max<std::uint64_t>(K, 1));
}

inline std::unique_ptr<Learner> make_ucb(int K) { return std::make_unique<UcbLearner>(ArmGrid(K)); }

inline std::unique_ptr<Learner> make_exp3(int K, double eta) {
  return std::make_unique<Exp3Learner>(ArmGrid(K), eta);
}

inline std::unique_ptr<Learner> make_core(BanditCore core, ArmGrid grid, std::uint64_t horizon) {
  if (core == BanditCore::Ucb) return std::make_unique<UcbLearner>(std::move(grid));
  const double eta = Exp3Learner::default_eta(grid.size(), horizon);
  return std::make_unique<Exp3Learner>(std::move(grid), eta);
}

/// The discretize-then-bandit learner with K = ceil(T^{1/3}).
class VanillaLearner : public Learner {
 public:
  VanillaLearner(std::uint64_t T, BanditCore core) : core_kind_(core) {
    if (T < 8) throw ParameterError("vanilla pricing needs T >= 8");
    core_ = make_core(core, ArmGrid(vanilla_arm_count(T)), T);
  }

  double choose(RandomStream& rng) override { return core_->choose(rng); }
  void update(double price, bool sold) override {
    core_->update(price, sold);
    ++updates_;
  }
  std::string label() const override {
    return std::string("vanilla[") + to_string(core_kind_) +
           ",K=" + std::to_string(core_->arms().size()) + "]";
  }
  const std::vector<double>& arms() const override { return core_->arms(); }
  int last_arm() const override { return core_->last_arm(); }
  std::vector<std::uint64_t> pull_counts() const override { return core_->pull_counts(); }

 private:
  BanditCore core_kind_;
  std::unique_ptr<Learner> core_;
};

inline std::unique_ptr<Learner> vanilla_pricing(std::uint64_t T,
                                                BanditCore core = BanditCore::Exp3) {
  return std::make_unique<VanillaLearner>(T, core);
}

/// Builds a fresh learner for a given horizon.
using LearnerFactory = std::function<std::unique_ptr<Learner>(std::uint64_t horizon)>;

// {"type": "ucb"|"exp3"|"vanilla"|"constant"|"uniform", ...}
//   ucb: K          exp3: K, eta (default from horizon)
//   vanilla: core   constant: price          uniform: K
inline LearnerFactory make_learner_factory(const json& cfg) {
  if (!cfg.is_object() || !cfg.contains("type") || !cfg.at("type").is_string())
    throw ConfigError("learner config needs a string 'type'");
  const auto type = cfg.at("type").get<std::string>();
  auto arm_count = [&cfg](const std::string& type) {
    if (!cfg.contains("K")) return 0;
    const double K = parse_scalar(cfg.at("K"));
    if (!(K >= 1.0) || K != std::floor(K) || K > 1e7)
      throw ConfigError(type + ": K must be a positive integer");
    return static_cast<int>(K);
  };
  if (type == "ucb" || type == "uniform") {
    const int K = arm_count(type);
    return [K, type](std::uint64_t T) -> std::unique_ptr<Learner> {
      const int k = K > 0 ? K : vanilla_arm_count(std::max<std::uint64_t>(T, 8));
      if (type == "ucb") return make_ucb(k);
      return std::make_unique<UniformGridLearner>(ArmGrid(k));
    };
  }
  if (type == "exp3") {
    const int K = arm_count(type);
    const double eta = cfg.contains("eta") ? parse_scalar(cfg.at("eta")) : 0.0;
    if (cfg.contains("eta") && !(eta > 0.0)) throw ConfigError("exp3: eta must be positive");
    return [K, eta](std::uint64_t T) -> std::unique_ptr<Learner> {
      const int k = K > 0 ? K : vanilla_arm_count(std::max<std::uint64_t>(T, 8));
      return make_exp3(k, eta > 0.0 ? eta : Exp3Learner::default_eta(k, T));
    };
  }
  if (type == "vanilla") {
    const auto core = parse_core(cfg.value("core", std::string("exp3")));
    return [core](std::uint64_t T) -> std::unique_ptr<Learner> {
      return vanilla_pricing(T, core);
    };
  }
  if (type == "constant") {
    if (!cfg.contains("price")) throw ConfigError("constant learner needs 'price'");
    const double p = parse_scalar(cfg.at("price"));
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("constant price must lie in [0,1]");
    return [p](std::uint64_t) -> std::unique_ptr<Learner> {
      return std::make_unique<ConstantLearner>(p);
    };
  }
  throw ConfigError("unknown learner type '" + type + "'");
}

/// Index i with probability counts[i] / sum(counts).
inline int sample_by_counts(const std::vector<std::uint64_t>& counts, RandomStream& rng) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw ConsistencyError("cannot sample from all-zero counts");
  std::uint64_t u = rng.below(total);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (u < counts[i]) return static_cast<int>(i);
    u -= counts[i];
  }
  throw ConsistencyError("count sampling fell off the end");
}

struct FindBestResult {
  int arm = 0;
  double price = 0.0;
  std::vector<std::uint64_t> counts;
};

// Runs `core` for T rounds, then samples arm i' with probability T_i' / T.
inline FindBestResult find_best(const ArmGrid& arms, std::uint64_t T, Learner& core,
                                const Instance& inst, std::uint64_t seed) {
  if (core.arms() != arms.prices())
    throw ConfigError("find_best: the core must operate on exactly the given arms");
  run_episode(inst, core, T, seed);
  FindBestResult out;
  out.counts = core.pull_counts();
  const std::uint64_t total =
      std::accumulate(out.counts.begin(), out.counts.end(), std::uint64_t{0});
  if (total != T)
    throw ConsistencyError("find_best: pull counts sum to " + std::to_string(total) +
                           ", expected " + std::to_string(T));
  RandomStream pick(derive_seed(seed, 0x7069636b));
  out.arm = sample_by_counts(out.counts, pick);
  out.price = arms[out.arm];
  return out;
}

struct PriceInterval {
  double lo = 0.0;
  double hi = 0.0;  // exclusive
  bool contains(double p) const { return p >= lo && p < hi; }
};

inline void require_disjoint(std::vector<PriceInterval> iv) {
  std::sort(iv.begin(), iv.end(),
            [](const PriceInterval& a, const PriceInterval& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < iv.size(); ++i) {
    if (!(iv[i].lo < iv[i].hi)) throw ConfigError("interval with lo >= hi");
    if (i > 0 && iv[i].lo < iv[i - 1].hi) throw ConfigError("intervals overlap");
  }
}

inline std::vector<std::uint64_t> pull_counts_in(const EpisodeLog& log,
                                                 const std::vector<PriceInterval>& intervals) {
  require_disjoint(intervals);
  std::vector<std::size_t> order(intervals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return intervals[a].lo < intervals[b].lo;
  });
  std::vector<double> los;
  for (auto i : order) los.push_back(intervals[i].lo);
  std::vector<std::uint64_t> out(intervals.size(), 0);
  for (const auto& r : log.rounds) {
    auto it = std::upper_bound(los.begin(), los.end(), r.price);
    if (it == los.begin()) continue;
    const auto idx = order[static_cast<std::size_t>(it - los.begin()) - 1];
    if (intervals[idx].contains(r.price)) ++out[idx];
  }
  return out;
}

}  // namespace pricelab
