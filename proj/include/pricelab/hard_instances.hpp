#pragma once

// Base and perturbed instances for the five lower-bound families.
//
// Interval conventions (all half-open [lo, hi) in doubles):
//   two-regular-25, two-mhr-25: the bump support [a, a + 4 sqrt(eps)), with
//     the lower end nudged up one ulp for two-mhr-25 so the base monopoly
//     price 0.7 = a_1 stays outside.
//   three-regular-3, two-regular-3, three-mhr-3: (m - eps, m], stored as
//     [next(m - eps), next(m)). The perturbation lives on (c, m] or (s, m]
//     and the member's monopoly price is m itself.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pricelab/distribution.hpp"
#include "pricelab/errors.hpp"
#include "pricelab/learners.hpp"
#include "pricelab/market.hpp"
#include "pricelab/validation.hpp"

namespace pricelab {

enum class FamilyTag { TwoRegular25, ThreeRegular3, TwoRegular3, TwoMhr25, ThreeMhr3 };

inline constexpr FamilyTag kAllFamilies[] = {FamilyTag::TwoRegular25, FamilyTag::ThreeRegular3,
                                             FamilyTag::TwoRegular3, FamilyTag::TwoMhr25,
                                             FamilyTag::ThreeMhr3};

inline const char* to_string(FamilyTag t) {
  switch (t) {
    case FamilyTag::TwoRegular25: return "two-regular-25";
    case FamilyTag::ThreeRegular3: return "three-regular-3";
    case FamilyTag::TwoRegular3: return "two-regular-3";
    case FamilyTag::TwoMhr25: return "two-mhr-25";
    case FamilyTag::ThreeMhr3: return "three-mhr-3";
  }
  return "?";
}

inline FamilyTag parse_family_tag(const std::string& s) {
  for (auto t : kAllFamilies)
    if (s == to_string(t)) return t;
  throw ConfigError("unknown family '" + s +
                    "' (expected two-regular-25, three-regular-3, two-regular-3, two-mhr-25, "
                    "three-mhr-3)");
}

inline Property class_of(FamilyTag t) {
  return (t == FamilyTag::TwoMhr25 || t == FamilyTag::ThreeMhr3) ? Property::MHR
                                                                 : Property::Regular;
}

struct Member {
  Instance instance;
  PriceInterval interval;
  double bump_price = 0.0;
  double nominal_gap = 0.0;
  double parameter = 0.0;  // a or m, depending on the family
};

struct HardFamily {
  FamilyTag tag = FamilyTag::TwoRegular25;
  double eps = 0.0;
  Instance base;
  std::vector<Member> members;

  int K() const { return static_cast<int>(members.size()); }

  std::vector<PriceInterval> intervals() const {
    std::vector<PriceInterval> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.interval);
    return out;
  }
};

namespace detail {

inline constexpr double kThird = 1.0 / 3.0;
inline constexpr double kSlack = 1e-12;

inline double up(double x) { return std::nextafter(x, 2.0); }

// floor that forgives representation error, e.g. 0.3 / 0.05 = 5.999...
inline int robust_floor(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

inline std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

inline std::string member_label(FamilyTag t, double eps, const char* param, double v) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s/eps=%.6g/%s=%.10g", to_string(t), eps, param, v);
  return buf;
}

inline RationalForm one_over_x_plus(double a) { return RationalForm{{0.0, 1.0}, {a, 1.0}}; }
inline RationalForm one_minus_third_form() { return RationalForm{{-1.0, 3.0}, {0.0, 3.0}}; }

// (3x-1)(x+1) / (3x^2)
inline RationalExpForm two_reg_second_form() {
  return RationalExpForm{Polynomial{-1.0, 3.0} * Polynomial{1.0, 1.0}, {0.0, 0.0, 3.0}};
}

// (1 - 0.7/x) / (1 - exp(-0.4x)) = (x - 0.7) / (x (1 - exp(-0.4x)))
inline RationalExpForm mhr_second_form() {
  return RationalExpForm{{-0.7, 1.0}, {0.0, 1.0}, 1.0, -1.0, -0.4};
}

// The same divided by k x.
inline RationalExpForm mhr_second_over_linear(double k) {
  return RationalExpForm{{-0.7, 1.0}, {0.0, 0.0, k}, 1.0, -1.0, -0.4};
}

// Quadratic bump of total depth eps centred on [lo, lo + 4 sqrt(eps)]: the
// added density is piecewise linear with slope -1, +1, -1 over widths
// sqrt(eps), 2 sqrt(eps), sqrt(eps).
inline void add_bump(DistributionBuilder& b, const RationalExpForm& base, double lo, double eps) {
  const double r = std::sqrt(eps);
  b.piece(lo + r, BumpedForm{base, 0.0, -0.5, lo});
  b.piece(lo + 3.0 * r, BumpedForm{base, -eps, 0.5, lo + 2.0 * r});
  b.piece(lo + 4.0 * r, BumpedForm{base, 0.0, -0.5, lo + 4.0 * r});
}

inline void check_range(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

// Neighbouring intervals built from separately rounded endpoints may overlap
// or leave a gap of an ulp; glue them.
inline void glue_intervals(std::vector<Member>& members) {
  for (std::size_t i = 0; i + 1 < members.size(); ++i) {
    auto& hi = members[i].interval.hi;
    const double lo = members[i + 1].interval.lo;
    if (std::abs(hi - lo) <= 1e-12) hi = lo;
  }
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Building blocks

inline PiecewiseDistribution one_minus_third_buyer(std::string label = "1-1/(3x)") {
  return DistributionBuilder()
      .piece(detail::kThird, ConstantForm{0.0})
      .piece(1.0, detail::one_minus_third_form())
      .close_with_atom()
      .build(std::move(label));
}

inline PiecewiseDistribution two_regular_first_buyer() {
  return DistributionBuilder()
      .piece(0.5, detail::one_over_x_plus(1.0))
      .piece(1.0, detail::one_minus_third_form())
      .close_with_atom()
      .build("F_{1,0} two-regular");
}

inline PiecewiseDistribution two_regular_second_buyer() {
  return DistributionBuilder()
      .piece(detail::kThird, ConstantForm{0.0})
      .piece(0.5, detail::two_reg_second_form())
      .piece(1.0, ConstantForm{1.0})
      .build("F_{2,0} two-regular");
}

inline PiecewiseDistribution exponential_buyer(std::string label = "1-exp(-0.4x)") {
  return DistributionBuilder()
      .piece(1.0, ExponentialForm{1.0, -1.0, -0.4})
      .close_with_atom()
      .build(std::move(label));
}

inline PiecewiseDistribution mhr_second_buyer() {
  return DistributionBuilder()
      .piece(0.7, ConstantForm{0.0})
      .piece(1.0, detail::mhr_second_form())
      .close_with_atom()
      .build("F_{2,0} two-mhr");
}

/// Segment solving 2 f^2 + (1-F) f' = 0 on (s, hi] with F(s) = y, F'(s) = y'.
inline Segment saturated_regular_tail(double y, double yprime, double s, double hi) {
  if (!(y < 1.0)) throw ParameterError("saturated tail needs y < 1");
  if (!(yprime > 0.0)) throw ParameterError("saturated tail needs yprime > 0");
  if (!(s < hi)) throw ParameterError("saturated tail needs s < hi");
  return {s, hi, SaturatedRegularTail{y, yprime, s}};
}

/// Segment solving f^2 + (1-F) f' = 0 (constant hazard y'/(1-y)).
inline Segment saturated_mhr_tail(double y, double yprime, double s, double hi) {
  if (!(y < 1.0)) throw ParameterError("saturated tail needs y < 1");
  if (!(yprime > 0.0)) throw ParameterError("saturated tail needs yprime > 0");
  if (!(s < hi)) throw ParameterError("saturated tail needs s < hi");
  return {s, hi, SaturatedMhrTail{y, yprime, s}};
}

// ----------------------------------------------------------------------------
// Base instances

inline Instance two_regular_base() {
  return Instance("two-regular-base", {two_regular_first_buyer(), two_regular_second_buyer()});
}

inline Instance three_regular_base() {
  return Instance("three-regular-base",
                  {one_minus_third_buyer("F_{1,0} three-regular"), degenerate_at_zero("F_{2,0}"),
                   degenerate_at_zero("F_{3,0}")});
}

inline Instance two_regular3_base() {
  return Instance("two-regular-3-base",
                  {one_minus_third_buyer("F_{1,0} two-regular-3"), degenerate_at_zero("F_{2,0}")});
}

inline Instance two_mhr_base() {
  return Instance("two-mhr-base", {exponential_buyer("F_{1,0} mhr"), mhr_second_buyer()});
}

inline Instance three_mhr_base() {
  return Instance("three-mhr-base", {exponential_buyer("F_{1,0} mhr"), mhr_second_buyer(),
                                     degenerate_at_zero("F_{3,0}")});
}

// Value 0.5 w.p. 0.6 and 1 w.p. 0.4: on ArmGrid(10) price 0.5 earns 0.5 and
// every other arm at most 0.4.
inline Instance findbest_demo() {
  return Instance("findbest-demo",
                  {discrete_distribution("V in {0.5, 1}", {{0.5, 0.6}, {1.0, 0.4}})});
}

inline Instance base_instance(FamilyTag t) {
  switch (t) {
    case FamilyTag::TwoRegular25: return two_regular_base();
    case FamilyTag::ThreeRegular3: return three_regular_base();
    case FamilyTag::TwoRegular3: return two_regular3_base();
    case FamilyTag::TwoMhr25: return two_mhr_base();
    case FamilyTag::ThreeMhr3: return three_mhr_base();
  }
  throw ConfigError("unknown family");
}

// ----------------------------------------------------------------------------
// Certification

/// Grid of at least 10^4 points that still gives every live segment 20 points.
inline GridSpec certification_grid(const PiecewiseDistribution& d, int base_points = 10000) {
  GridSpec g;
  double narrowest = 1.0;
  for (const auto& s : d.segments()) {
    if (evaluate(s.form, 0.5 * (s.lo + s.hi)).survival > 0.0)
      narrowest = std::min(narrowest, s.hi - s.lo);
  }
  const double needed = std::ceil(20.0 / narrowest);
  g.points = static_cast<int>(std::min(4e6, std::max<double>(base_points, needed)));
  return g;
}

inline ValidationReport certify(const PiecewiseDistribution& d, Property p) {
  return check_property(d, p, certification_grid(d));
}

inline void certify_or_throw(const Instance& inst, Property p) {
  for (const auto& b : inst.buyers()) {
    const auto rep = certify(b, p);
    if (!rep.passed) throw ValidationFailure(inst.label() + ": " + rep.summary());
  }
}

namespace detail {

inline Member finish_member(Instance inst, const Instance& base, PriceInterval iv,
                            double bump_price, double parameter) {
  const double gap = revenue_at(inst, bump_price) - revenue_at(base, bump_price);
  return Member{std::move(inst), iv, bump_price, gap, parameter};
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Two regular buyers, eps^-2.5

inline Member two_regular_25_member(double a, double eps) {
  using namespace detail;
  check_range(a >= 0.9 - kSlack && a <= 1.0 + kSlack, "two-regular-25: a must lie in [0.9, 1]");
  check_range(eps > 0.0 && eps < 0.05, "two-regular-25: eps must lie in (0, 0.05)");
  const double r = std::sqrt(eps);
  const double lo = a / 2.0;
  check_range(lo + 4.0 * r <= 0.5 + kSlack,
              "two-regular-25: a/2 + 4 sqrt(eps) exceeds 0.5 (eps too large for this a)");
  const auto base_form = two_reg_second_form();
  DistributionBuilder b;
  b.piece(kThird, ConstantForm{0.0}).piece(lo, base_form);
  add_bump(b, base_form, lo, eps);
  b.piece(0.5, base_form).piece(1.0, ConstantForm{1.0});
  auto f2 = b.build(fmt("F_{2,a} two-regular a=%.10g", a));
  Instance inst(member_label(FamilyTag::TwoRegular25, eps, "a", a),
                {two_regular_first_buyer(), std::move(f2)});
  return finish_member(std::move(inst), two_regular_base(), {lo, lo + 4.0 * r}, lo + 2.0 * r, a);
}

inline int two_regular_25_count(double eps) { return detail::robust_floor(0.1 / (8.0 * std::sqrt(eps))); }

// ----------------------------------------------------------------------------
// Three regular buyers, eps^-3

struct ThreeRegularParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double c_alt = 0.0;  // same root via the second discriminant
};

inline ThreeRegularParams three_regular_params(double a, double b) {
  const double den = 2.0 * (3.0 * (a + b) - 1.0);
  const double c = (a + b - 3.0 * a * b +
                    std::sqrt((3.0 * a * b + a + b) * (3.0 * a * b + a + b) - 4.0 * a * b)) /
                   den;
  const double c_alt = (a + b - 3.0 * a * b +
                        std::sqrt((3.0 * a * b + a - b) * (3.0 * a * b + a - b) +
                                  12.0 * a * b * b)) /
                       den;
  return {a, b, c, c_alt};
}

inline Member three_regular_3_member(double m, double eps,
                                     std::optional<PriceInterval> interval = std::nullopt) {
  using namespace detail;
  check_range(m > 0.4 && m <= 0.5 + kSlack, "three-regular-3: m must lie in (0.4, 0.5]");
  check_range(eps > 0.0 && eps <= 0.1 + kSlack, "three-regular-3: eps must lie in (0, 0.1]");
  m = std::min(m, 0.5);
  const double a = m / (3.0 * m - 1.0);
  const auto prm = three_regular_params(a, eps);
  if (std::abs(prm.c - prm.c_alt) > 1e-12)
    throw ConsistencyError("three-regular-3: discriminant forms disagree");
  check_range(prm.c > kThird && prm.c < m, "three-regular-3: root c outside (1/3, m)");

  auto f1 = DistributionBuilder()
                .piece(m, one_over_x_plus(a))
                .piece(1.0, one_minus_third_form())
                .close_with_atom()
                .build(fmt("F_{1,a} three-regular a=%.10g", a));
  auto f2 = DistributionBuilder()
                .piece(m, one_over_x_plus(eps))
                .piece(1.0, ConstantForm{1.0})
                .atom(m, eps / (m + eps))
                .build(fmt("F_{2,a} three-regular a=%.10g", a));
  const Polynomial num = Polynomial{-1.0, 3.0} * Polynomial{a, 1.0} * Polynomial{eps, 1.0};
  auto f3 = DistributionBuilder()
                .piece(kThird, ConstantForm{0.0})
                .piece(prm.c, RationalForm{num, {0.0, 0.0, 0.0, 3.0}})
                .piece(1.0, ConstantForm{1.0})
                .build(fmt("F_{3,a} three-regular a=%.10g", a));
  Instance inst(member_label(FamilyTag::ThreeRegular3, eps, "m", m),
                {std::move(f1), std::move(f2), std::move(f3)});
  const PriceInterval iv = interval.value_or(PriceInterval{up(m - eps), up(m)});
  return finish_member(std::move(inst), three_regular_base(), iv, m, m);
}

inline int three_regular_3_count(double eps) { return detail::robust_floor(0.1 / eps); }

// ----------------------------------------------------------------------------
// Two regular buyers, eps^-3

inline Member two_regular_3_member(double m, double eps,
                                   std::optional<PriceInterval> interval = std::nullopt) {
  using namespace detail;
  check_range(m > kThird && m <= 1.0 + kSlack, "two-regular-3: m must lie in (1/3, 1]");
  check_range(eps > 0.0, "two-regular-3: eps must be positive");
  m = std::min(m, 1.0);
  const double a = m / (3.0 * m - 1.0);
  double s = m - eps;
  check_range(s >= kThird - 1e-9, "two-regular-3: eps exceeds m - 1/3");
  s = std::max(s, kThird);

  const RationalForm tilde{Polynomial{-1.0, 3.0} * Polynomial{a, 1.0}, {0.0, 0.0, 3.0}};
  const Jet at_s = evaluate(tilde, s);
  const double y = std::max(0.0, at_s.value);
  const auto tail = saturated_regular_tail(y, at_s.d1, s, m);

  DistributionBuilder b2;
  b2.piece(kThird, ConstantForm{0.0}).piece(s, tilde).piece(m, tail.form);
  const double top = evaluate(tail.form, m).value;
  if (m < 1.0) {
    b2.atom(m, 1.0 - top).piece(1.0, ConstantForm{1.0});
  } else {
    b2.close_with_atom();
  }
  auto f2 = b2.build(fmt("F_{2,a} two-regular-3 a=%.10g", a));
  auto f1 = DistributionBuilder()
                .piece(m, one_over_x_plus(a))
                .piece(1.0, one_minus_third_form())
                .close_with_atom()
                .build(fmt("F_{1,a} two-regular-3 a=%.10g", a));
  Instance inst(member_label(FamilyTag::TwoRegular3, eps, "m", m), {std::move(f1), std::move(f2)});
  const PriceInterval iv = interval.value_or(PriceInterval{up(m - eps), up(m)});
  return finish_member(std::move(inst), two_regular3_base(), iv, m, m);
}

inline int two_regular_3_count(double eps) { return detail::robust_floor(2.0 / (3.0 * eps)); }

// ----------------------------------------------------------------------------
// Two MHR buyers, eps^-2.5

inline Member two_mhr_25_member(double a, double eps) {
  using namespace detail;
  check_range(a >= 0.7 - kSlack && a < 1.0, "two-mhr-25: a must lie in [0.7, 1)");
  check_range(eps > 0.0 && eps < 0.05, "two-mhr-25: eps must lie in (0, 0.05)");
  a = std::max(a, 0.7);
  const double r = std::sqrt(eps);
  check_range(a + 4.0 * r <= 1.0 + kSlack, "two-mhr-25: a + 4 sqrt(eps) exceeds 1");
  const auto base_form = mhr_second_form();
  DistributionBuilder b;
  b.piece(0.7, ConstantForm{0.0}).piece(a, base_form);
  add_bump(b, base_form, a, eps);
  b.piece(1.0, base_form).close_with_atom();
  auto f2 = b.build(fmt("F_{2,a} two-mhr a=%.10g", a));
  Instance inst(member_label(FamilyTag::TwoMhr25, eps, "a", a),
                {exponential_buyer("F_{1,0} mhr"), std::move(f2)});
  return finish_member(std::move(inst), two_mhr_base(), {up(a), a + 4.0 * r}, a + 2.0 * r, a);
}

inline int two_mhr_25_count(double eps) { return detail::robust_floor(0.3 / (8.0 * std::sqrt(eps))); }

// ----------------------------------------------------------------------------
// Three MHR buyers, eps^-3

inline Member three_mhr_3_member(double a, double eps,
                                 std::optional<PriceInterval> interval = std::nullopt) {
  using namespace detail;
  check_range(a > 0.7 && a <= 1.0 + kSlack, "three-mhr-3: a must lie in (0.7, 1]");
  check_range(eps > 0.0 && eps <= 0.05 + kSlack, "three-mhr-3: eps must lie in (0, 0.05]");
  a = std::min(a, 1.0);
  double s = a - eps;
  check_range(s >= 0.7 - 1e-9, "three-mhr-3: eps exceeds a - 0.7");
  s = std::max(s, 0.7);

  const double k = evaluate(mhr_second_form(), a).value / a;
  DistributionBuilder b2;
  b2.piece(a, LinearForm{k, 0.0}).piece(1.0, mhr_second_form()).close_with_atom();
  auto f2 = b2.build(fmt("F_{2,a} three-mhr a=%.10g", a));

  const auto tilde = mhr_second_over_linear(k);
  const Jet at_s = evaluate(tilde, s);
  const double y = std::max(0.0, at_s.value);
  const auto tail = saturated_mhr_tail(y, at_s.d1, s, a);
  DistributionBuilder b3;
  b3.piece(0.7, ConstantForm{0.0}).piece(s, tilde).piece(a, tail.form);
  const double top = evaluate(tail.form, a).value;
  if (a < 1.0) {
    b3.atom(a, 1.0 - top).piece(1.0, ConstantForm{1.0});
  } else {
    b3.close_with_atom();
  }
  auto f3 = b3.build(fmt("F_{3,a} three-mhr a=%.10g", a));
  Instance inst(member_label(FamilyTag::ThreeMhr3, eps, "a", a),
                {exponential_buyer("F_{1,0} mhr"), std::move(f2), std::move(f3)});
  const PriceInterval iv = interval.value_or(PriceInterval{up(a - eps), up(a)});
  return finish_member(std::move(inst), three_mhr_base(), iv, a, a);
}

inline int three_mhr_3_count(double eps) { return detail::robust_floor(0.3 / eps); }

// ----------------------------------------------------------------------------
// Families

inline int family_size(FamilyTag t, double eps) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  switch (t) {
    case FamilyTag::TwoRegular25: return two_regular_25_count(eps);
    case FamilyTag::ThreeRegular3: return three_regular_3_count(eps);
    case FamilyTag::TwoRegular3: return two_regular_3_count(eps);
    case FamilyTag::TwoMhr25: return two_mhr_25_count(eps);
    case FamilyTag::ThreeMhr3: return three_mhr_3_count(eps);
  }
  return 0;
}

struct FamilyOptions {
  // Run the class validator on every buyer and abort on the first failure.
  bool certify = true;
};

inline HardFamily make_family(FamilyTag tag, double eps, const FamilyOptions& opts = {}) {
  using namespace detail;
  const int K = family_size(tag, eps);
  if (K < 1) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "%s: eps=%g gives K = 0 members; choose a smaller eps", to_string(tag), eps);
    throw ParameterError(buf);
  }
  HardFamily fam{tag, eps, base_instance(tag), {}};
  fam.members.reserve(static_cast<std::size_t>(K));
  const double r = std::sqrt(eps);
  for (int i = 1; i <= K; ++i) {
    switch (tag) {
      case FamilyTag::TwoRegular25:
        fam.members.push_back(two_regular_25_member(8.0 * (i - 1) * r + 0.9, eps));
        break;
      case FamilyTag::ThreeRegular3: {
        const double m = 0.4 + i * eps;
        const double prev = 0.4 + (i - 1) * eps;
        fam.members.push_back(three_regular_3_member(m, eps, PriceInterval{up(prev), up(std::min(m, 0.5))}));
        break;
      }
      case FamilyTag::TwoRegular3: {
        const double m = kThird + i * eps;
        const double prev = kThird + (i - 1) * eps;
        fam.members.push_back(two_regular_3_member(m, eps, PriceInterval{up(prev), up(std::min(m, 1.0))}));
        break;
      }
      case FamilyTag::TwoMhr25:
        fam.members.push_back(two_mhr_25_member(0.7 + 8.0 * (i - 1) * r, eps));
        break;
      case FamilyTag::ThreeMhr3: {
        const double a = 0.7 + i * eps;
        const double prev = 0.7 + (i - 1) * eps;
        fam.members.push_back(three_mhr_3_member(a, eps, PriceInterval{up(prev), up(std::min(a, 1.0))}));
        break;
      }
    }
  }
  glue_intervals(fam.members);
  require_disjoint(fam.intervals());
  if (opts.certify) {
    const Property p = class_of(tag);
    certify_or_throw(fam.base, p);
    for (const auto& m : fam.members) certify_or_throw(m.instance, p);
  }
  return fam;
}

inline HardFamily two_regular_25_family(double eps) { return make_family(FamilyTag::TwoRegular25, eps); }
inline HardFamily three_regular_3_family(double eps) { return make_family(FamilyTag::ThreeRegular3, eps); }
inline HardFamily two_regular_3_family(double eps) { return make_family(FamilyTag::TwoRegular3, eps); }
inline HardFamily two_mhr_25_family(double eps) { return make_family(FamilyTag::TwoMhr25, eps); }
inline HardFamily three_mhr_3_family(double eps) { return make_family(FamilyTag::ThreeMhr3, eps); }

inline json manifest_json(const HardFamily& fam) {
  json j;
  j["family_tag"] = to_string(fam.tag);
  j["eps"] = fam.eps;
  j["K"] = fam.K();
  j["members"] = json::array();
  for (const auto& m : fam.members) {
    j["members"].push_back({{"label", m.instance.label()},
                            {"interval", {m.interval.lo, m.interval.hi}},
                            {"bump_price", m.bump_price},
                            {"nominal_gap", m.nominal_gap}});
  }
  return j;
}

}  // namespace pricelab
