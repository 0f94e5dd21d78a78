#include <atomic>
#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "pricelab/pricelab.hpp"

using namespace pricelab;
using Catch::Approx;

namespace {

LearnerFactory constant_at(double p) {
  return [p](std::uint64_t) -> std::unique_ptr<Learner> { return std::make_unique<ConstantLearner>(p); };
}

}  // namespace

TEST_CASE("bernoulli KL", "[analysis]") {
  for (double x : {0.0, 0.3, 1.0}) CHECK(bernoulli_kl(x, x) == 0.0);
  CHECK(bernoulli_kl(0.5, 0.95) == Approx(0.830366).margin(1e-6));
  CHECK(bernoulli_kl(0.0, 0.5) == Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bernoulli_kl(0.1, 0.9) == Approx(1.7578).margin(1e-4));
  CHECK(bernoulli_kl(0.1, 0.5) == Approx(0.3681).margin(1e-4));
  CHECK(std::isinf(bernoulli_kl(0.2, 0.0)));
  CHECK(std::isinf(bernoulli_kl(0.2, 1.0)));
  CHECK(bernoulli_kl(1.0, 0.5) == Approx(std::log(2.0)));

  RandomStream rng(17);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform(), y = 1e-9 + (1 - 2e-9) * rng.uniform();
    const double d = bernoulli_kl(x, y);
    REQUIRE(d >= 2 * (x - y) * (x - y) - 1e-15);
    if (x != y) REQUIRE(d > 0.0);
  }
}

TEST_CASE("KL batch bound", "[analysis]") {
  const auto eq = kl_batch_bound({0.2, 0.2, 0.2}, 0.5, {0.5, 0.5, 0.5});
  CHECK(eq.lhs == Approx(eq.rhs).epsilon(1e-14));
  CHECK(eq.rhs == Approx(3 * bernoulli_kl(0.2, 0.5)));

  const auto one = kl_batch_bound({0.1}, 0.5, {0.9});
  CHECK(one.lhs == Approx(bernoulli_kl(0.1, 0.9)));
  CHECK(one.rhs == Approx(bernoulli_kl(0.1, 0.5)));
  CHECK(one.lhs >= one.rhs);

  RandomStream rng(5);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = 1 + rng.below(8);
    std::vector<double> xs(n), ys(n, 0.5);
    for (auto& x : xs) x = 0.4 * rng.uniform();
    const auto r = kl_batch_bound(xs, 0.5, ys);
    REQUIRE(r.lhs >= r.rhs - 1e-12);
  }

  CHECK_THROWS_AS(kl_batch_bound({}, 0.5, {}), ParameterError);
  CHECK_THROWS_AS(kl_batch_bound({0.1}, 0.0, {0.5}), ParameterError);
  CHECK_THROWS_AS(kl_batch_bound({0.1}, 0.6, {0.5}), ParameterError);
  CHECK_THROWS_AS(kl_batch_bound({0.7}, 0.5, {0.5}), ParameterError);
  CHECK_THROWS_AS(kl_batch_bound({0.1, 0.2}, 0.5, {0.5}), ParameterError);
  try {
    kl_batch_bound({0.1}, 0.6, {0.5});
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("min(ys)") != std::string::npos);
  }
}

TEST_CASE("interval distinguisher", "[analysis]") {
  const auto fam = make_family(FamilyTag::ThreeMhr3, 0.05);
  CHECK(interval_distinguisher(0.2, fam) == 0);
  CHECK(interval_distinguisher(0.7, fam) == 0);
  for (int i = 0; i < fam.K(); ++i) {
    const auto& iv = fam.members[static_cast<std::size_t>(i)].interval;
    CHECK(interval_distinguisher(iv.lo, fam) == i + 1);
    CHECK(interval_distinguisher(0.5 * (iv.lo + iv.hi), fam) == i + 1);
    // A shared boundary belongs to the upper interval.
    if (i + 1 < fam.K()) CHECK(interval_distinguisher(iv.hi, fam) == i + 2);
  }
  const auto one = make_family(FamilyTag::TwoRegular25, 1e-4);
  CHECK(interval_distinguisher(0.2, one) == 0);
  CHECK(interval_distinguisher(0.47, one) == 1);
  CHECK(interval_distinguisher(0.49, one) == 0);

  // The monopoly price of every member identifies it.
  for (auto tag : {FamilyTag::ThreeRegular3, FamilyTag::TwoRegular3, FamilyTag::TwoMhr25}) {
    const double eps = tag == FamilyTag::TwoMhr25 ? 1e-4 : 0.05;
    const auto f = make_family(tag, eps);
    for (int i = 0; i < f.K(); ++i)
      CHECK(interval_distinguisher(monopoly_price(f.members[static_cast<std::size_t>(i)].instance).price, f) == i + 1);
    CHECK(interval_distinguisher(monopoly_price(f.base).price, f) == 0);
  }
}

TEST_CASE("KL per query in the two-regular family", "[analysis][property]") {
  const auto base = two_regular_base();
  for (double eps : {1e-4, 1e-5, 1e-6}) {
    for (double a : {0.9, 0.91}) {
      if (a / 2 + 4 * std::sqrt(eps) > 0.5) continue;
      const auto m = two_regular_25_member(a, eps);
      double best = 0.0, arg = 0.0;
      for (int j = 0; j <= 200000; ++j) {
        const double x = j / 200000.0;
        const double d = bernoulli_kl(product_cdf(base, x), product_cdf(m.instance, x));
        if (d > best) best = d, arg = x;
      }
      CHECK(best <= 2.0 / 3.0 * eps * eps);
      CHECK(m.interval.contains(arg));
      const auto inside = max_kl_in_interval(base, m.instance, m.interval);
      CHECK(inside.first == Approx(best).epsilon(1e-3));
    }
  }
}

TEST_CASE("distinction horizon", "[analysis]") {
  CHECK(distinction_horizon(1.0, 2.0 / 3.0, 0.01) == Approx(1.5625e19).epsilon(1e-12));
  CHECK_THROWS_AS(distinction_horizon(1.0, 1.0, 0.01), ParameterError);
  CHECK_THROWS_AS(distinction_horizon(0.0, 0.5, 0.01), ParameterError);

  const auto fam = make_family(FamilyTag::ThreeRegular3, 0.05);
  const auto ucb = make_learner_factory(json{{"type", "ucb"}});
  CHECK_THROWS_AS(regret_to_distinguisher(ucb, fam, 1, 1.0, 2.0 / 3.0, std::nullopt, 1), ConfigError);
  CHECK_THROWS_AS(regret_to_distinguisher(ucb, fam, 3, 1.0, 2.0 / 3.0, 100, 1), ParameterError);
}

TEST_CASE("regret to distinguisher", "[analysis]") {
  const auto fam = make_family(FamilyTag::ThreeRegular3, 0.05);

  SECTION("a learner confined to interval j outputs j") {
    for (int j = 1; j <= fam.K(); ++j) {
      const auto r = regret_to_distinguisher(constant_at(fam.members[static_cast<std::size_t>(j - 1)].bump_price),
                                             fam, 1, 1.0, 0.5, 500, 3);
      CHECK(r.output == j);
      CHECK(r.horizon == 500);
    }
    CHECK(regret_to_distinguisher(constant_at(0.2), fam, 1, 1.0, 0.5, 500, 3).output == 0);
  }

  SECTION("UCB beats guessing on the true member") {
    const auto ucb = make_learner_factory(json{{"type", "ucb"}});
    int hits = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) hits += regret_to_distinguisher(ucb, fam, 2, 1.0, 2.0 / 3.0, 200000, derive_seed(9, t)).output == 2;
    CHECK(static_cast<double>(hits) / trials > 1.0 / fam.K());
  }
}

TEST_CASE("identification experiment", "[analysis]") {
  SECTION("no informative queries, no identification") {
    const auto fam = make_family(FamilyTag::ThreeMhr3, 0.05);
    const auto res = identification_experiment(fam, constant_at(0.3), 100, 20, 1);
    CHECK(res.base_rate == 1.0);
    for (int i = 0; i < fam.K(); ++i) {
      CHECK(res.success_rate[static_cast<std::size_t>(i)] <= 1.0 / fam.K());
      CHECK(res.base_output_rate[static_cast<std::size_t>(i)] == res.success_rate[static_cast<std::size_t>(i)]);
    }
    CHECK(res.violations == 0);
    CHECK_THROWS_AS(identification_experiment(fam, constant_at(0.3), 3, 20, 1), ConfigError);
  }

  SECTION("uniform grid strategy respects the KL budget") {
    const auto fam = make_family(FamilyTag::TwoRegular25, 1e-4);
    const auto res = identification_experiment(fam, make_learner_factory(json{{"type", "uniform"}}), 100000, 200, 2);
    CHECK(res.violations == 0);
    double pulls = 0.0;
    for (double p : res.mean_informative_pulls) pulls += p;
    CHECK(pulls <= 100000.0);
    for (double s : res.success_rate) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }

  SECTION("more budget does not hurt, and threads do not change results") {
    const auto fam = make_family(FamilyTag::ThreeRegular3, 0.05);
    const auto ucb = make_learner_factory(json{{"type", "ucb"}});
    const auto small = identification_experiment(fam, ucb, 20000, 100, 4, 1);
    const auto large = identification_experiment(fam, ucb, 40000, 100, 4, 3);
    const double sigma = std::sqrt(0.25 / (100.0 * fam.K()));
    CHECK(large.mean_success() >= small.mean_success() - 3 * sigma * std::sqrt(2.0));
    CHECK(to_json(identification_experiment(fam, ucb, 20000, 100, 4, 3)).dump() == to_json(small).dump());
  }
}

TEST_CASE("regret scaling", "[analysis]") {
  const auto base = two_regular_base();
  const std::vector<std::uint64_t> hs{256, 1024, 4096, 16384};

  const auto flat = regret_scaling_experiment(base, constant_at(1.0 / 3.0), hs, 3, 1);
  CHECK(flat.degenerate);
  for (double m : flat.mean_regret) CHECK(std::abs(m) <= 1e-6);
  CHECK(to_json(flat)["slope"].is_null());

  const auto linear = regret_scaling_experiment(base, constant_at(0.2), hs, 3, 1);
  CHECK_FALSE(linear.degenerate);
  CHECK(linear.slope == Approx(1.0).margin(0.05));

  CHECK_THROWS_AS(regret_scaling_experiment(base, constant_at(0.2), {256, 1024}, 3, 1), ConfigError);
  CHECK_THROWS_AS(regret_scaling_experiment(base, constant_at(0.2), {32, 1024, 4096}, 3, 1), ConfigError);
  CHECK_THROWS_AS(regret_scaling_experiment(base, constant_at(0.2), {256, 256, 4096}, 3, 1), ConfigError);

  const auto line = ordinary_least_squares({0, 1, 2}, {1, 3, 5});
  CHECK(line.slope == Approx(2.0));
  CHECK(line.intercept == Approx(1.0));
}

TEST_CASE("parallel_for", "[analysis]") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) REQUIRE(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 5) throw ConfigError("boom");
                  }),
                  ConfigError);
}
