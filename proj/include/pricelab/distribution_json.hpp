#pragma once

// JSON spec format:
//   {"label": ..., "segments": [{"lo", "hi", "form", "params": {...}}],
//    "atoms": [{"loc", "mass"}]}
// Scalars may be JSON numbers, decimal strings ("0.25") or ratios ("1/3").

#include <cerrno>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "pricelab/distribution.hpp"
#include "pricelab/errors.hpp"

namespace pricelab {

using json = nlohmann::json;

namespace detail {

inline double parse_decimal(const std::string& s) {
  if (s.empty()) throw ConfigError("empty numeric string");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno == ERANGE || end != s.c_str() + s.size())
    throw ConfigError("not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline double parse_scalar(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw ConfigError("expected a number, got " + j.dump());
  const auto s = j.get<std::string>();
  const auto slash = s.find('/');
  if (slash == std::string::npos) return detail::parse_decimal(s);
  const double p = detail::parse_decimal(s.substr(0, slash));
  const double q = detail::parse_decimal(s.substr(slash + 1));
  if (q == 0.0) throw ConfigError("zero denominator in '" + s + "'");
  return p / q;
}

namespace detail {

inline const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw ConfigError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline double scalar_or(const json& obj, const char* key, double fallback) {
  return obj.contains(key) ? parse_scalar(obj.at(key)) : fallback;
}

inline Polynomial parse_poly(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("polynomial must be a non-empty array");
  std::vector<double> c;
  for (const auto& v : j) c.push_back(parse_scalar(v));
  return Polynomial(std::move(c));
}

inline void put_rational_exp(json& p, const RationalExpForm& r) {
  p["num"] = r.num.coeffs;
  p["den"] = r.den.coeffs;
  p["a"] = r.a;
  p["b"] = r.b;
  p["c"] = r.c;
}

inline RationalExpForm get_rational_exp(const json& p) {
  RationalExpForm r;
  r.num = parse_poly(field(p, "num"));
  r.den = parse_poly(field(p, "den"));
  r.a = scalar_or(p, "a", 1.0);
  r.b = scalar_or(p, "b", 0.0);
  r.c = scalar_or(p, "c", 0.0);
  return r;
}

}  // namespace detail

inline json form_params(const SegmentForm& form) {
  json p = json::object();
  std::visit(
      [&p](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantForm>) {
          p["value"] = f.value;
        } else if constexpr (std::is_same_v<T, LinearForm>) {
          p["slope"] = f.slope;
          p["intercept"] = f.intercept;
        } else if constexpr (std::is_same_v<T, RationalForm>) {
          p["num"] = f.num.coeffs;
          p["den"] = f.den.coeffs;
        } else if constexpr (std::is_same_v<T, ExponentialForm>) {
          p["a"] = f.a;
          p["b"] = f.b;
          p["c"] = f.c;
        } else if constexpr (std::is_same_v<T, RationalExpForm>) {
          detail::put_rational_exp(p, f);
        } else if constexpr (std::is_same_v<T, BumpedForm>) {
          detail::put_rational_exp(p, f.base);
          p["shift"] = f.shift;
          p["curvature"] = f.curvature;
          p["center"] = f.center;
        } else {
          p["y"] = f.y;
          p["yprime"] = f.yprime;
          p["s"] = f.s;
        }
      },
      form);
  return p;
}

inline SegmentForm parse_form(const std::string& name, const json& p) {
  using detail::field;
  if (name == "constant") return ConstantForm{parse_scalar(field(p, "value"))};
  if (name == "linear")
    return LinearForm{parse_scalar(field(p, "slope")), parse_scalar(field(p, "intercept"))};
  if (name == "rational")
    return RationalForm{detail::parse_poly(field(p, "num")), detail::parse_poly(field(p, "den"))};
  if (name == "exponential")
    return ExponentialForm{parse_scalar(field(p, "a")), parse_scalar(field(p, "b")),
                           parse_scalar(field(p, "c"))};
  if (name == "rational_exp") return detail::get_rational_exp(p);
  if (name == "bumped")
    return BumpedForm{detail::get_rational_exp(p), parse_scalar(field(p, "shift")),
                      parse_scalar(field(p, "curvature")), parse_scalar(field(p, "center"))};
  if (name == "saturated_regular_tail" || name == "saturated_mhr_tail") {
    const double y = parse_scalar(field(p, "y"));
    const double yp = parse_scalar(field(p, "yprime"));
    const double s = parse_scalar(field(p, "s"));
    if (!(y < 1.0) || !(yp > 0.0)) throw ConfigError(name + " needs y < 1 and yprime > 0");
    if (name == "saturated_regular_tail") return SaturatedRegularTail{y, yp, s};
    return SaturatedMhrTail{y, yp, s};
  }
  throw ConfigError("unknown segment form '" + name + "'");
}

inline json to_json(const PiecewiseDistribution& d) {
  json j;
  j["label"] = d.label();
  j["segments"] = json::array();
  for (const auto& s : d.segments()) {
    j["segments"].push_back(
        {{"lo", s.lo}, {"hi", s.hi}, {"form", std::string(form_name(s.form))},
         {"params", form_params(s.form)}});
  }
  j["atoms"] = json::array();
  for (const auto& a : d.atoms()) j["atoms"].push_back({{"loc", a.location}, {"mass", a.mass}});
  return j;
}

// Throws ConfigError on schema problems and DistributionError when the
// resulting distribution is malformed.
inline PiecewiseDistribution distribution_from_json(const json& j) {
  using detail::field;
  if (!j.is_object()) throw ConfigError("distribution spec must be an object");
  const std::string label = j.value("label", std::string("unnamed"));
  std::vector<Segment> segments;
  const auto& segs = field(j, "segments");
  if (!segs.is_array()) throw ConfigError("'segments' must be an array");
  for (const auto& s : segs) {
    segments.push_back({parse_scalar(field(s, "lo")), parse_scalar(field(s, "hi")),
                        parse_form(field(s, "form").get<std::string>(),
                                   s.contains("params") ? s.at("params") : json::object())});
  }
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms"))
      atoms.push_back({parse_scalar(field(a, "loc")), parse_scalar(field(a, "mass"))});
  }
  return PiecewiseDistribution(label, std::move(segments), std::move(atoms));
}

}  // namespace pricelab
