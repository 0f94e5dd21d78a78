#include <cmath>
#include <numeric>

#include <catch_amalgamated.hpp>

#include "pricelab/pricelab.hpp"

using namespace pricelab;
using Catch::Approx;

namespace {

// Value 0 w.p. 0.5, 0.5 w.p. 0.05, 1 w.p. 0.45: prices 0.5 and 1 earn 0.25 and 0.45.
Instance two_arm_market() {
  return Instance("two-arm", {discrete_distribution("two-arm", {{0.0, 0.5}, {0.5, 0.05}, {1.0, 0.45}})});
}

const ArmGrid kTwoArms(std::vector<double>{0.5, 1.0});

double suboptimal_fraction(const std::function<std::unique_ptr<Learner>()>& make, int seeds) {
  const auto inst = two_arm_market();
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    auto L = make();
    run_episode(inst, *L, 10000, derive_seed(77, s));
    total += static_cast<double>(L->pull_counts()[0]) / 10000.0;
  }
  return total / seeds;
}

}  // namespace

TEST_CASE("arm grid", "[learners]") {
  const ArmGrid g(4);
  CHECK(g.prices() == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(ArmGrid(0), ParameterError);
  CHECK_THROWS_AS(ArmGrid(std::vector<double>{0.5, 0.5}), ParameterError);
  CHECK_THROWS_AS(ArmGrid(std::vector<double>{0.5, 1.5}), ParameterError);
  CHECK_THROWS_AS(ArmGrid(std::vector<double>{}), ParameterError);
}

TEST_CASE("revenue gap benchmark", "[learners]") {
  REQUIRE(revenue_at(two_arm_market(), 1.0) - revenue_at(two_arm_market(), 0.5) == Approx(0.2));
  const double ucb = suboptimal_fraction([] { return std::make_unique<UcbLearner>(kTwoArms); }, 100);
  CHECK(ucb < 0.10);
  const double exp3 = suboptimal_fraction(
      [] { return std::make_unique<Exp3Learner>(kTwoArms, Exp3Learner::default_eta(2, 10000)); }, 100);
  CHECK(exp3 < 0.20);
}

TEST_CASE("UCB", "[learners]") {
  RandomStream rng(1);
  auto one = make_ucb(1);
  for (int t = 0; t < 20; ++t) {
    REQUIRE(one->choose(rng) == 1.0);
    one->update(1.0, t % 2 == 0);
  }
  auto L = make_ucb(5);
  for (int i = 0; i < 5; ++i) {
    CHECK(L->choose(rng) == Approx((i + 1) / 5.0));
    L->update((i + 1) / 5.0, false);
  }
  CHECK(L->label() == "ucb[K=5]");
  CHECK(L->pull_counts() == std::vector<std::uint64_t>(5, 1));
  CHECK_THROWS_AS(L->update(0.33, true), ConsistencyError);
}

TEST_CASE("EXP3", "[learners]") {
  RandomStream rng(2);
  auto one = make_exp3(1, 0.1);
  for (int t = 0; t < 20; ++t) {
    REQUIRE(one->choose(rng) == 1.0);
    one->update(1.0, true);
  }
  CHECK_THROWS_AS(Exp3Learner(ArmGrid(3), 0.0), ParameterError);
  CHECK(Exp3Learner::default_eta(10, 1000) == Approx(std::sqrt(std::log(10.0) / 10000.0)));

  Exp3Learner L(ArmGrid(8), 0.05);
  const auto inst = two_regular_base();
  RandomStream env(3);
  double worst = 0.0;
  for (int t = 0; t < 5000; ++t) {
    const double p = L.choose(rng);
    L.update(p, post_price(inst, p, env).sold);
    const auto pr = L.probabilities();
    worst = std::max(worst, std::abs(std::accumulate(pr.begin(), pr.end(), 0.0) - 1.0));
    for (double q : pr) REQUIRE(q >= 0.0);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("vanilla pricing", "[learners]") {
  CHECK(vanilla_arm_count(1000) == 10);
  CHECK(vanilla_arm_count(1001) == 11);
  CHECK(vanilla_arm_count(8) == 2);
  CHECK(vanilla_arm_count(9) == 3);
  CHECK(vanilla_arm_count(1ull << 20) == 102);
  const auto L = vanilla_pricing(1000);
  REQUIRE(L->arms().size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(L->arms()[i] == Approx((i + 1) / 10.0));
  CHECK(L->label() == "vanilla[exp3,K=10]");
  CHECK(vanilla_pricing(8, BanditCore::Ucb)->arms().size() == 2);
  CHECK_THROWS_AS(vanilla_pricing(7), ParameterError);

  SECTION("regret on the two-regular baseline is of order T^{2/3}") {
    const auto inst = two_regular_base();
    const auto opt = monopoly_price(inst);
    const std::uint64_t T = 1 << 16;
    double mean = 0.0;
    for (int s = 0; s < 20; ++s) {
      auto v = vanilla_pricing(T);
      const auto rep = pseudo_regret(run_episode(inst, *v, T, derive_seed(5, s)), inst, opt);
      CHECK(rep.pseudo_regret >= -1e-6 * T);
      mean += rep.pseudo_regret / 20.0;
    }
    const double scale = std::pow(static_cast<double>(T), 2.0 / 3.0);
    CHECK(mean >= 0.1 * scale);
    CHECK(mean <= 10.0 * scale);
  }
}

TEST_CASE("find best", "[learners]") {
  const auto inst = two_arm_market();
  SECTION("single arm") {
    const ArmGrid g(std::vector<double>{0.4});
    for (int s = 0; s < 10; ++s) {
      UcbLearner core(g);
      const auto r = find_best(g, 50, core, inst, s);
      CHECK(r.arm == 0);
      CHECK(r.price == 0.4);
    }
  }
  SECTION("better arm is returned at least 90% of the time") {
    int hits = 0;
    for (int s = 0; s < 500; ++s) {
      UcbLearner core(kTwoArms);
      hits += find_best(kTwoArms, 2000, core, inst, derive_seed(8, s)).arm == 1;
    }
    CHECK(hits >= 450);
  }
  SECTION("core must match the arms") {
    UcbLearner core(ArmGrid(3));
    CHECK_THROWS_AS(find_best(kTwoArms, 10, core, inst, 1), ConfigError);
  }
}

TEST_CASE("sampling by pull counts", "[learners]") {
  const std::vector<std::uint64_t> counts{5, 10, 20, 65};
  std::vector<int> seen(4, 0);
  RandomStream rng(123);
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++seen[static_cast<std::size_t>(sample_by_counts(counts, rng))];
  double chi2 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double e = n * static_cast<double>(counts[i]) / 100.0;
    chi2 += (seen[i] - e) * (seen[i] - e) / e;
  }
  CHECK(chi2 < 11.345);  // 1% critical value, 3 degrees of freedom
  CHECK_THROWS_AS(sample_by_counts({0, 0}, rng), ConsistencyError);
  for (int i = 0; i < 50; ++i) CHECK(sample_by_counts({0, 7, 0}, rng) == 1);
}

TEST_CASE("pull counts in intervals", "[learners]") {
  EpisodeLog log;
  CHECK(pull_counts_in(log, {{0.1, 0.2}, {0.3, 0.4}}) == std::vector<std::uint64_t>{0, 0});
  for (int t = 1; t <= 100; ++t) log.rounds.push_back({static_cast<std::uint64_t>(t), 0.15, false, 0.0, false});
  CHECK(pull_counts_in(log, {{0.1, 0.2}, {0.3, 0.4}}) == std::vector<std::uint64_t>{100, 0});
  // Half-open: the upper end is excluded.
  CHECK(pull_counts_in(log, {{0.05, 0.15}, {0.15, 0.2}}) == std::vector<std::uint64_t>{0, 100});
  CHECK_THROWS_AS(pull_counts_in(log, {{0.1, 0.3}, {0.2, 0.4}}), ConfigError);

  SECTION("uniform prices") {
    EpisodeLog u;
    RandomStream rng(4);
    const int T = 100000;
    for (int t = 1; t <= T; ++t) u.rounds.push_back({static_cast<std::uint64_t>(t), rng.uniform(), false, 0.0, false});
    std::vector<PriceInterval> iv;
    for (int i = 0; i < 10; ++i) iv.push_back({0.05 + 0.09 * i, 0.05 + 0.09 * i + 0.04});
    const auto c = pull_counts_in(u, iv);
    const double sigma = std::sqrt(T * 0.04 * 0.96);
    for (auto k : c) CHECK(std::abs(static_cast<double>(k) - 0.04 * T) <= 3 * sigma);
  }
}

TEST_CASE("learner factory", "[learners]") {
  CHECK(make_learner_factory(json{{"type", "ucb"}, {"K", 7}})(100)->label() == "ucb[K=7]");
  CHECK(make_learner_factory(json{{"type", "ucb"}})(1000)->arms().size() == 10);
  CHECK(make_learner_factory(json{{"type", "exp3"}, {"K", 4}, {"eta", 0.2}})(10)->label() == "exp3[K=4]");
  CHECK(make_learner_factory(json{{"type", "vanilla"}, {"core", "ucb"}})(1000)->label() == "vanilla[ucb,K=10]");
  CHECK(make_learner_factory(json{{"type", "vanilla"}})(27)->label() == "vanilla[exp3,K=3]");
  CHECK(make_learner_factory(json{{"type", "constant"}, {"price", "1/3"}})(5)->arms()[0] == 1.0 / 3.0);
  CHECK(make_learner_factory(json{{"type", "uniform"}, {"K", 3}})(5)->label() == "uniform[K=3]");
  CHECK_THROWS_AS(make_learner_factory(json{{"type", "thompson"}}), ConfigError);
  CHECK_THROWS_AS(make_learner_factory(json{{"K", 3}}), ConfigError);
  CHECK_THROWS_AS(make_learner_factory(json{{"type", "ucb"}, {"K", 2.5}}), ConfigError);
  CHECK_THROWS_AS(make_learner_factory(json{{"type", "exp3"}, {"eta", -1}}), ConfigError);
  CHECK_THROWS_AS(make_learner_factory(json{{"type", "constant"}, {"price", 2}}), ConfigError);
  CHECK_THROWS_AS(make_learner_factory(json{{"type", "vanilla"}, {"core", "ftrl"}}), ConfigError);
}
