#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <catch_amalgamated.hpp>

#include "corpus.hpp"
#include "pricelab/pricelab.hpp"

using namespace pricelab;
using Catch::Approx;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

bool near_knot(const PiecewiseDistribution& d, double x, double r) {
  for (double k : d.breakpoints())
    if (std::abs(x - k) < r) return true;
  return false;
}

}  // namespace

TEST_CASE("cdf follows the left-continuous convention", "[distributions]") {
  const auto f1 = two_regular_first_buyer();
  CHECK(f1.cdf(0.5) == Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(f1.cdf(0.0) == 0.0);
  CHECK(f1.cdf(1.0) == Approx(2.0 / 3.0));  // atom at 1 excluded
  CHECK(f1.cdf(1.0 + 1e-9) == 1.0);
  CHECK(f1.cdf_right(1.0) == 1.0);

  const auto deg = degenerate_at_zero();
  CHECK(deg.cdf(0.0) == 0.0);
  CHECK(deg.cdf(0.5) == 1.0);
  CHECK(deg.cdf(1e-300) == 1.0);

  const auto f2 = two_regular_second_buyer();
  CHECK(f2.cdf(1.0 / 3.0) == Approx(0.0).margin(1e-15));
  CHECK(f2.cdf(0.4) == Approx(0.2 * 1.4 / (3 * 0.16)));
}

TEST_CASE("density", "[distributions]") {
  CHECK(corpus::exp_cdf().density(0.0) == Approx(0.4).epsilon(1e-15));
  CHECK(degenerate_at_zero().density(0.0) == kInf);
  const auto third = one_minus_third_buyer();
  CHECK(third.density(0.5) == Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(third.density(1.0) == kInf);
  // Right-hand derivative at an interior breakpoint.
  const auto f1 = two_regular_first_buyer();
  CHECK(f1.density(0.5) == Approx(1.0 / (3 * 0.25)));
}

TEST_CASE("inverse cdf", "[distributions]") {
  const auto f1 = two_regular_first_buyer();
  CHECK(f1.inverse_cdf(1.0 / 3.0) == Approx(0.5).epsilon(1e-14));
  CHECK(f1.inverse_cdf(0.0) == Approx(0.0).margin(1e-12));
  CHECK(one_minus_third_buyer().inverse_cdf(0.0) == Approx(1.0 / 3.0).epsilon(1e-12));
  for (double u : {0.0, 0.3, 0.999, 1.0}) CHECK(degenerate_at_zero().inverse_cdf(u) == 0.0);
  // Atom at 1 carries u in (2/3, 1].
  CHECK(f1.inverse_cdf(0.9) == 1.0);
  CHECK(f1.inverse_cdf(0.5) == Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sampling", "[distributions]") {
  RandomStream rng(7);
  for (int i = 0; i < 100; ++i) REQUIRE(degenerate_at_zero().sample(rng) == 0.0);

  SECTION("KS statistic of 1e5 draws is below 0.01") {
    const auto f1 = two_regular_first_buyer();
    RandomStream r(2024);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = f1.sample(r);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size();) {
      std::size_t j = i;
      while (j < xs.size() && xs[j] == xs[i]) ++j;
      ks = std::max({ks, std::abs(static_cast<double>(i) / n - f1.cdf(xs[i])),
                     std::abs(static_cast<double>(j) / n - f1.cdf_right(xs[i]))});
      i = j;
    }
    CHECK(ks < 0.01);
  }

  SECTION("same seed, same sequence") {
    const auto f2 = two_regular_second_buyer();
    RandomStream a(99), b(99);
    for (int i = 0; i < 1000; ++i) REQUIRE(f2.sample(a) == f2.sample(b));
  }
}

TEST_CASE("virtual value and hazard rate", "[distributions]") {
  const auto f1 = two_regular_first_buyer();
  for (double x : {0.01, 0.2, 0.49}) CHECK(f1.virtual_value(x) == Approx(-1.0).epsilon(1e-12));
  const auto third = one_minus_third_buyer();
  for (double x : {0.34, 0.6, 0.99}) {
    CHECK(third.virtual_value(x) == Approx(0.0).margin(1e-12));
    CHECK(third.hazard_rate(x) == Approx(1.0 / x).epsilon(1e-12));
  }
  const auto e = corpus::exp_cdf();
  for (double x : {0.0, 0.3, 0.9}) {
    CHECK(e.virtual_value(x) == Approx(x - 2.5).epsilon(1e-12));
    CHECK(e.hazard_rate(x) == Approx(0.4).epsilon(1e-12));
  }
  CHECK(third.hazard_rate(1.0) == kInf);
  CHECK(third.virtual_value(1.0) == 1.0);
  CHECK_THROWS_AS(third.virtual_value(0.2), UndefinedVirtualValue);
  CHECK_THROWS_AS(two_regular_second_buyer().hazard_rate(0.7), ExhaustedSupport);
}

TEST_CASE("regularity validator", "[distributions]") {
  SECTION("exact saturation of 1 - 1/(x+1)") {
    const auto d = DistributionBuilder()
                       .piece(1.0, RationalForm{{0.0, 1.0}, {1.0, 1.0}})
                       .close_with_atom()
                       .build("x/(x+1)");
    const auto rep = check_regularity(d);
    CHECK(rep.passed);
    CHECK(std::abs(rep.min_margin) <= 1e-10);
    CHECK(rep.grid_points == 10000);
  }
  SECTION("F_{2,a} with a = 0.9, eps = 1e-4") {
    const auto m = two_regular_25_member(0.9, 1e-4);
    CHECK(check_regularity(m.instance.buyers()[1]).passed);
  }
  SECTION("two-piece density counterexample") {
    const auto rep = check_regularity(corpus::non_regular_two_piece());
    CHECK_FALSE(rep.passed);
    REQUIRE(rep.knot_violations.size() == 1);
    CHECK(rep.knot_violations[0].location == 0.5);
    CHECK(rep.knot_violations[0].left == Approx(0.5 - 0.1 / 1.8));
    CHECK(rep.knot_violations[0].right == Approx(0.0).margin(1e-12));
    CHECK(rep.argmin == 0.5);
  }
  SECTION("grid too coarse") {
    GridSpec g;
    g.points = 5;
    CHECK_THROWS_AS(check_regularity(corpus::exp_cdf(), g), ConfigError);
    const auto narrow = DistributionBuilder()
                            .piece(0.5, LinearForm{1.0, 0.0})
                            .piece(0.5001, LinearForm{1.0, 0.0})
                            .piece(1.0, LinearForm{1.0, 0.0})
                            .build("narrow");
    CHECK_THROWS_AS(check_regularity(narrow), ConfigError);
  }
  SECTION("finite-difference fallback agrees") {
    GridSpec g;
    g.finite_difference = true;
    CHECK(check_regularity(two_regular_25_member(0.9, 1e-4).instance.buyers()[1], g).passed);
    CHECK_FALSE(check_regularity(corpus::non_regular_two_piece(), g).passed);
  }
}

TEST_CASE("MHR validator", "[distributions]") {
  const auto e = check_mhr(corpus::exp_cdf());
  CHECK(e.passed);
  CHECK(std::abs(e.min_margin) <= 1e-10);

  GridSpec upper;
  upper.domain_lo = 0.7;
  const auto f20 = check_mhr(mhr_second_buyer(), upper);
  CHECK(f20.passed);
  CHECK(f20.min_margin >= 1.1);

  const auto tail = corpus::regular_tail_demo();
  CHECK(check_regularity(tail).passed);
  CHECK_FALSE(check_mhr(tail).passed);
}

TEST_CASE("saturated tails", "[distributions]") {
  const auto reg = saturated_regular_tail(0.4, 1.5, 0.6, 0.7);
  const auto mhr = saturated_mhr_tail(0.4, 1.5, 0.6, 0.7);
  for (const auto& seg : {reg, mhr}) {
    const Jet j = evaluate(seg.form, 0.6);
    CHECK(j.value == Approx(0.4).epsilon(1e-15));
    CHECK(j.d1 == Approx(1.5).epsilon(1e-15));
  }
  double worst_reg = 0.0, worst_mhr = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double x = 0.6 + 0.1 * i / 100.0;
    const Jet a = evaluate(reg.form, x);
    const Jet b = evaluate(mhr.form, x);
    worst_reg = std::max(worst_reg, std::abs(2 * a.d1 * a.d1 + a.survival * a.d2));
    worst_mhr = std::max(worst_mhr, std::abs(b.d1 * b.d1 + b.survival * b.d2));
  }
  CHECK(worst_reg <= 1e-12);
  CHECK(worst_mhr <= 1e-12);
  CHECK(evaluate(reg.form, 0.7).survival == Approx(0.36 / (0.1 * 1.5 + 0.6)).epsilon(1e-14));
  CHECK(evaluate(mhr.form, 0.7).survival == Approx(0.6 * std::exp(-1.5 * 0.1 / 0.6)).epsilon(1e-14));
  CHECK_THROWS_AS(saturated_regular_tail(1.0, 1.0, 0.5, 0.6), ParameterError);
  CHECK_THROWS_AS(saturated_mhr_tail(1.2, 1.0, 0.5, 0.6), ParameterError);
}

TEST_CASE("construction-time validation", "[distributions]") {
  CHECK_THROWS_AS(PiecewiseDistribution("gap", {{0.0, 0.4, LinearForm{1.0, 0.0}},
                                                {0.5, 1.0, LinearForm{1.0, 0.0}}}),
                  DistributionError);
  CHECK_THROWS_AS(PiecewiseDistribution("decreasing", {{0.0, 1.0, LinearForm{-1.0, 1.0}}}),
                  DistributionError);
  CHECK_THROWS_AS(PiecewiseDistribution("short", {{0.0, 1.0, LinearForm{0.5, 0.0}}}),
                  DistributionError);
  CHECK_THROWS_AS(PiecewiseDistribution("bad atom", {{0.0, 1.0, LinearForm{0.5, 0.0}}},
                                        {{0.3, 0.5}}),
                  DistributionError);
  // Jump without a matching atom.
  CHECK_THROWS_AS(PiecewiseDistribution("jump", {{0.0, 0.5, LinearForm{0.5, 0.0}},
                                                 {0.5, 1.0, LinearForm{0.5, 0.5}}}),
                  DistributionError);
  CHECK_NOTHROW(PiecewiseDistribution("ok", {{0.0, 1.0, LinearForm{0.5, 0.0}}}, {{1.0, 0.5}}));
}

TEST_CASE("JSON round trip", "[distributions]") {
  for (const auto& e : corpus::all()) {
    const auto back = distribution_from_json(json::parse(to_json(e.dist).dump()));
    REQUIRE(back.label() == e.dist.label());
    REQUIRE(back.segments() == e.dist.segments());
    REQUIRE(back.atoms() == e.dist.atoms());
  }
  const auto spec = json::parse(R"({
    "label": "third",
    "segments": [
      {"lo": 0, "hi": "1/3", "form": "constant", "params": {"value": 0}},
      {"lo": "1/3", "hi": 1, "form": "rational", "params": {"num": ["-1", 3], "den": [0, "3.0"]}}
    ],
    "atoms": [{"loc": 1, "mass": "1/3"}]
  })");
  const auto d = distribution_from_json(spec);
  CHECK(d.segments()[1].lo == 1.0 / 3.0);
  CHECK(d.cdf(0.5) == Approx(1.0 / 3.0));
  CHECK(parse_scalar(json("0.1")) == 0.1);
  CHECK(parse_scalar(json("2.5e-3")) == 2.5e-3);
  CHECK_THROWS_AS(parse_scalar(json("0.1x")), ConfigError);
  CHECK_THROWS_AS(distribution_from_json(json::parse(R"({"segments": [{"lo": 0, "hi": 1, "form": "spline"}]})")),
                  ConfigError);
}

TEST_CASE("corpus properties", "[distributions][property]") {
  const auto entries = corpus::all();
  REQUIRE(entries.size() > 50);
  for (const auto& e : entries) {
    const auto& d = e.dist;
    INFO(d.label());

    // Monotone on a 10^4 grid, F(0) = 0, total mass 1.
    double prev = 0.0;
    bool monotone = true;
    for (int j = 0; j <= 10000; ++j) {
      const double F = d.cdf(j / 10000.0);
      if (F < prev - 1e-13) monotone = false;
      prev = F;
    }
    CHECK(monotone);
    CHECK(d.cdf(0.0) == 0.0);
    CHECK(std::abs(d.cdf(1.0) + d.atom_mass_at(1.0) - 1.0) <= 1e-12);

    // Density against central differences, and the inverse round trip.
    double worst_fd = 0.0, worst_inv = 0.0;
    for (const auto& seg : d.segments()) {
      for (int j = 1; j < 100; ++j) {
        const double x = seg.lo + (seg.hi - seg.lo) * j / 100.0;
        if (near_knot(d, x, 1e-5)) continue;
        const double f = d.density(x);
        const double h = 1e-6;
        const double fd = (d.cdf(x + h) - d.cdf(x - h)) / (2 * h);
        worst_fd = std::max(worst_fd, std::abs(fd - f) / std::max(1.0, std::abs(f)));
        if (f > 1e-3 && d.jet(x).survival > 0.0)
          worst_inv = std::max(worst_inv, std::abs(d.inverse_cdf(d.cdf(x)) - x));
      }
    }
    CHECK(worst_fd <= 1e-6);
    CHECK(worst_inv <= 1e-9);

    // Class certification; MHR implies regular.
    const auto cls = certify(d, e.property);
    CHECK(cls.passed);
    const auto mhr = certify(d, Property::MHR);
    if (mhr.passed && mhr.min_margin >= 0.0) CHECK(certify(d, Property::Regular).passed);

    // Revenue in quantile space q b(q) is concave.
    double worst = -kInf;
    double last_slope = kInf;
    double last_r = 0.0;
    for (int j = 0; j <= 1000; ++j) {
      const double q = j / 1000.0;
      const double r = q * d.inverse_cdf(1.0 - q);
      if (j > 0) {
        const double slope = (r - last_r) * 1000.0;
        if (j > 1) worst = std::max(worst, slope - last_slope);
        last_slope = slope;
      }
      last_r = r;
    }
    CHECK(worst <= 1e-6);
  }
}
