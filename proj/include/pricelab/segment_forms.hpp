#pragma once

// Closed-form CDF pieces. Every form evaluates value, first and second
// derivative, and the survival 1 - F, which some forms can compute without
// cancellation.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace pricelab {

struct Jet {
  double value = 0.0;     // F(x)
  double d1 = 0.0;        // f(x)
  double d2 = 0.0;        // f'(x)
  double survival = 1.0;  // 1 - F(x)
};

/// Dense polynomial with ascending coefficients.
struct Polynomial {
  std::vector<double> coeffs;

  Polynomial() = default;
  Polynomial(std::initializer_list<double> c) : coeffs(c) {}
  explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {}

  int degree() const { return coeffs.empty() ? -1 : static_cast<int>(coeffs.size()) - 1; }

  // p(x), p'(x), p''(x) by Horner.
  std::array<double, 3> eval3(double x) const {
    double p = 0.0, dp = 0.0, ddp = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
      ddp = ddp * x + 2.0 * dp;
      dp = dp * x + p;
      p = p * x + *it;
    }
    return {p, dp, ddp};
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.coeffs.empty() || b.coeffs.empty()) return Polynomial{};
    std::vector<double> out(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs.size(); ++j) out[i + j] += a.coeffs[i] * b.coeffs[j];
    return Polynomial(std::move(out));
  }

  bool operator==(const Polynomial&) const = default;
};

struct ConstantForm {
  double value = 0.0;
  bool operator==(const ConstantForm&) const = default;
};

struct LinearForm {
  double slope = 0.0;
  double intercept = 0.0;
  bool operator==(const LinearForm&) const = default;
};

// P(x) / Q(x)
struct RationalForm {
  Polynomial num;
  Polynomial den{1.0};
  bool operator==(const RationalForm&) const = default;
};

// a + b * exp(c x)
struct ExponentialForm {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  bool operator==(const ExponentialForm&) const = default;
};

// P(x) / (Q(x) * (a + b exp(c x)))
struct RationalExpForm {
  Polynomial num;
  Polynomial den{1.0};
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  bool operator==(const RationalExpForm&) const = default;
};

// base(x) + shift + curvature * (x - center)^2
struct BumpedForm {
  RationalExpForm base;
  double shift = 0.0;
  double curvature = 0.0;
  double center = 0.0;
  bool operator==(const BumpedForm&) const = default;
};

// 1 - (1-y)^2 / ((x-s) y' + 1 - y): saturates 2 f^2 + (1-F) f' = 0.
struct SaturatedRegularTail {
  double y = 0.0;
  double yprime = 1.0;
  double s = 0.0;
  bool operator==(const SaturatedRegularTail&) const = default;
};

// 1 - (1-y) exp(-y' (x-s) / (1-y)): saturates f^2 + (1-F) f' = 0.
struct SaturatedMhrTail {
  double y = 0.0;
  double yprime = 1.0;
  double s = 0.0;
  bool operator==(const SaturatedMhrTail&) const = default;
};

using SegmentForm = std::variant<ConstantForm, LinearForm, RationalForm, ExponentialForm,
                                 RationalExpForm, BumpedForm, SaturatedRegularTail,
                                 SaturatedMhrTail>;

namespace detail {

inline std::array<double, 3> rational_jet(const Polynomial& num, const Polynomial& den, double x) {
  const auto [p, dp, ddp] = num.eval3(x);
  const auto [q, dq, ddq] = den.eval3(x);
  const double g = p / q;
  const double g1 = (dp * q - p * dq) / (q * q);
  const double g2 = (ddp * q - p * ddq) / (q * q) - 2.0 * dq * (dp * q - p * dq) / (q * q * q);
  return {g, g1, g2};
}

inline Jet rational_exp_jet(const RationalExpForm& r, double x) {
  const auto [g0, g1, g2] = rational_jet(r.num, r.den, x);
  const double ex = r.b * std::exp(r.c * x);
  const double e0 = r.a + ex;
  const double e1 = r.c * ex;
  const double e2 = r.c * r.c * ex;
  const double h0 = 1.0 / e0;
  const double h1 = -e1 / (e0 * e0);
  const double h2 = (2.0 * e1 * e1 - e0 * e2) / (e0 * e0 * e0);
  Jet j;
  j.value = g0 * h0;
  j.d1 = g1 * h0 + g0 * h1;
  j.d2 = g2 * h0 + 2.0 * g1 * h1 + g0 * h2;
  j.survival = 1.0 - j.value;
  return j;
}

template <class>
inline constexpr bool always_false = false;

}  // namespace detail

inline Jet evaluate(const SegmentForm& form, double x) {
  return std::visit(
      [x](const auto& f) -> Jet {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantForm>) {
          return {f.value, 0.0, 0.0, 1.0 - f.value};
        } else if constexpr (std::is_same_v<T, LinearForm>) {
          const double v = f.intercept + f.slope * x;
          return {v, f.slope, 0.0, 1.0 - v};
        } else if constexpr (std::is_same_v<T, RationalForm>) {
          const auto [g0, g1, g2] = detail::rational_jet(f.num, f.den, x);
          return {g0, g1, g2, 1.0 - g0};
        } else if constexpr (std::is_same_v<T, ExponentialForm>) {
          const double ex = f.b * std::exp(f.c * x);
          return {f.a + ex, f.c * ex, f.c * f.c * ex, (1.0 - f.a) - ex};
        } else if constexpr (std::is_same_v<T, RationalExpForm>) {
          return detail::rational_exp_jet(f, x);
        } else if constexpr (std::is_same_v<T, BumpedForm>) {
          Jet j = detail::rational_exp_jet(f.base, x);
          const double u = x - f.center;
          j.value += f.shift + f.curvature * u * u;
          j.d1 += 2.0 * f.curvature * u;
          j.d2 += 2.0 * f.curvature;
          j.survival = 1.0 - j.value;
          return j;
        } else if constexpr (std::is_same_v<T, SaturatedRegularTail>) {
          const double head = 1.0 - f.y;
          const double d = (x - f.s) * f.yprime + head;
          const double surv = head * head / d;
          return {1.0 - surv, surv * f.yprime / d, -2.0 * surv * f.yprime * f.yprime / (d * d),
                  surv};
        } else if constexpr (std::is_same_v<T, SaturatedMhrTail>) {
          const double head = 1.0 - f.y;
          const double rate = f.yprime / head;
          const double surv = head * std::exp(-rate * (x - f.s));
          return {1.0 - surv, rate * surv, -rate * rate * surv, surv};
        } else {
          static_assert(detail::always_false<T>);
        }
      },
      form);
}

inline std::string_view form_name(const SegmentForm& form) {
  static constexpr std::string_view names[] = {
      "constant",    "linear", "rational", "exponential", "rational_exp", "bumped",
      "saturated_regular_tail", "saturated_mhr_tail"};
  return names[form.index()];
}

/// Solves F(x) = u on [lo, hi] analytically when the form permits it.
inline std::optional<double> closed_form_inverse(const SegmentForm& form, double u, double lo,
                                                 double hi) {
  auto clamp = [lo, hi](double x) -> std::optional<double> {
    if (!std::isfinite(x)) return std::nullopt;
    return std::min(hi, std::max(lo, x));
  };
  return std::visit(
      [&](const auto& f) -> std::optional<double> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearForm>) {
          if (f.slope == 0.0) return std::nullopt;
          return clamp((u - f.intercept) / f.slope);
        } else if constexpr (std::is_same_v<T, RationalForm>) {
          if (f.num.degree() > 1 || f.den.degree() > 1) return std::nullopt;
          const double p0 = f.num.coeffs.empty() ? 0.0 : f.num.coeffs[0];
          const double p1 = f.num.degree() >= 1 ? f.num.coeffs[1] : 0.0;
          const double q0 = f.den.coeffs[0];
          const double q1 = f.den.degree() >= 1 ? f.den.coeffs[1] : 0.0;
          const double denom = p1 - u * q1;
          if (denom == 0.0) return std::nullopt;
          return clamp((u * q0 - p0) / denom);
        } else if constexpr (std::is_same_v<T, ExponentialForm>) {
          if (f.b == 0.0 || f.c == 0.0) return std::nullopt;
          const double ratio = (u - f.a) / f.b;
          if (ratio <= 0.0) return std::nullopt;
          return clamp(std::log(ratio) / f.c);
        } else if constexpr (std::is_same_v<T, SaturatedRegularTail>) {
          const double head = 1.0 - f.y;
          if (u >= 1.0) return hi;
          const double d = head * head / (1.0 - u);
          return clamp(f.s + (d - head) / f.yprime);
        } else if constexpr (std::is_same_v<T, SaturatedMhrTail>) {
          const double head = 1.0 - f.y;
          if (u >= 1.0) return hi;
          return clamp(f.s + std::log(head / (1.0 - u)) * head / f.yprime);
        } else {
          return std::nullopt;
        }
      },
      form);
}

}  // namespace pricelab
