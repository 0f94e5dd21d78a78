#pragma once

// Piecewise-analytic value distributions on [0, 1].
//
// Conventions:
//   * F is left-continuous, F(x) = Pr[X < x]. Segment i covers (lo_i, hi_i],
//     the first segment also owns x = 0, and F(0) = 0 always.
//   * A segment's form gives the continuous part of F including the mass of
//     every atom strictly below the segment. An atom at a breakpoint k shows up
//     as the jump between the left form at k and the right form at k.
//   * The generalized density is +inf at atoms and the right-hand derivative
//     at interior breakpoints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pricelab/errors.hpp"
#include "pricelab/rng.hpp"
#include "pricelab/segment_forms.hpp"

namespace pricelab {

struct Segment {
  double lo = 0.0;
  double hi = 1.0;
  SegmentForm form;
  bool operator==(const Segment&) const = default;
};

struct Atom {
  double location = 0.0;
  double mass = 0.0;
  bool operator==(const Atom&) const = default;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class PiecewiseDistribution {
 public:
  // Construction-time checks use these tolerances.
  static constexpr double kJumpTolerance = 1e-10;
  static constexpr double kMassTolerance = 1e-12;
  static constexpr int kMonotoneProbes = 64;

  PiecewiseDistribution(std::string label, std::vector<Segment> segments,
                        std::vector<Atom> atoms = {})
      : label_(std::move(label)), segments_(std::move(segments)), atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    validate();
    his_.reserve(segments_.size());
    for (const auto& s : segments_) his_.push_back(s.hi);
  }

  const std::string& label() const { return label_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  // Interior segment boundaries.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < segments_.size(); ++i) out.push_back(segments_[i].lo);
    return out;
  }

  double atom_mass_at(double x) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, double v) { return a.location < v; });
    return (it != atoms_.end() && it->location == x) ? it->mass : 0.0;
  }

  /// Pr[X < x]; values above 1 return 1.
  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x > 1.0) return 1.0;
    const auto& seg = segments_[left_index(x)];
    return std::clamp(evaluate(seg.form, x).value, 0.0, 1.0);
  }

  /// Pr[X <= x].
  double cdf_right(double x) const {
    if (x < 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const auto& seg = segments_[right_index(x)];
    return std::clamp(evaluate(seg.form, x).value, 0.0, 1.0);
  }

  /// Right-hand jet (F, f, f', 1-F) of the segment containing x in [lo, hi).
  Jet jet(double x) const { return evaluate(segments_[right_index(x)].form, x); }

  double density(double x) const {
    if (atom_mass_at(x) > 0.0) return kInfinity;
    return jet(x).d1;
  }

  double virtual_value(double x) const {
    if (atom_mass_at(x) > 0.0) return x;
    const Jet j = jet(x);
    if (!(j.d1 > 0.0)) {
      std::ostringstream os;
      os << label_ << ": virtual value undefined at x=" << x << " (density is zero)";
      throw UndefinedVirtualValue(os.str());
    }
    return x - j.survival / j.d1;
  }

  double hazard_rate(double x) const {
    if (atom_mass_at(x) > 0.0) return kInfinity;
    const Jet j = jet(x);
    if (!(j.survival > 0.0)) {
      std::ostringstream os;
      os << label_ << ": hazard rate undefined at x=" << x << " (F(x) = 1)";
      throw ExhaustedSupport(os.str());
    }
    return j.d1 / j.survival;
  }

  /// inf{x : F(x+) >= u}; u = 0 maps to the infimum of the support.
  double inverse_cdf(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    const bool strict = (u == 0.0);
    auto reached = [u, strict](double v) { return strict ? v > u : v >= u; };
    for (const auto& seg : segments_) {
      const double at_lo = evaluate(seg.form, seg.lo).value;
      if (reached(at_lo)) return seg.lo;
      const double at_hi = evaluate(seg.form, seg.hi).value;
      if (!reached(at_hi)) continue;
      if (!strict) {
        if (auto x = closed_form_inverse(seg.form, u, seg.lo, seg.hi)) return *x;
      }
      double a = seg.lo;
      double b = seg.hi;
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double mid = 0.5 * (a + b);
        if (reached(evaluate(seg.form, mid).value)) {
          b = mid;
        } else {
          a = mid;
        }
      }
      return b;
    }
    return 1.0;
  }

  double sample(RandomStream& rng) const { return inverse_cdf(rng.uniform()); }

 private:
  // Segment owning x under the (lo, hi] convention.
  std::size_t left_index(double x) const {
    auto it = std::lower_bound(his_.begin(), his_.end(), x);
    if (it == his_.end()) return segments_.size() - 1;
    return static_cast<std::size_t>(it - his_.begin());
  }

  // Segment owning x under the [lo, hi) convention; x = 1 maps to the last one.
  std::size_t right_index(double x) const {
    auto it = std::upper_bound(his_.begin(), his_.end(), x);
    if (it == his_.end()) return segments_.size() - 1;
    return static_cast<std::size_t>(it - his_.begin());
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DistributionError(label_ + ": " + what);
  }

  void validate() const {
    if (segments_.empty()) fail("no segments");
    if (segments_.front().lo != 0.0) fail("first segment must start at 0");
    if (segments_.back().hi != 1.0) fail("last segment must end at 1");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      if (!(std::isfinite(s.lo) && std::isfinite(s.hi)) || !(s.lo < s.hi)) {
        std::ostringstream os;
        os << "segment " << i << " has lo >= hi (" << s.lo << ", " << s.hi << ")";
        fail(os.str());
      }
      if (i > 0 && s.lo != segments_[i - 1].hi) {
        std::ostringstream os;
        os << "segments " << i - 1 << " and " << i << " do not tile [0,1]";
        fail(os.str());
      }
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      if (!(a.mass > 0.0) || a.location < 0.0 || a.location > 1.0)
        fail("atom outside [0,1] or with non-positive mass");
      if (i > 0 && atoms_[i - 1].location == a.location) fail("duplicate atom location");
      const bool at_knot =
          a.location == 0.0 || a.location == 1.0 ||
          std::any_of(segments_.begin() + 1, segments_.end(),
                      [&](const Segment& s) { return s.lo == a.location; });
      if (!at_knot) fail("atoms must sit at 0, 1, or a segment boundary");
    }

    auto check_jump = [&](double at, double left, double right) {
      const double expected = atom_mass_at(at);
      if (std::abs((right - left) - expected) > kJumpTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "jump of " << (right - left) << " at x=" << at << " does not match atom mass "
           << expected;
        fail(os.str());
      }
    };
    check_jump(0.0, 0.0, evaluate(segments_.front().form, 0.0).value);
    for (std::size_t i = 1; i < segments_.size(); ++i) {
      const double k = segments_[i].lo;
      check_jump(k, evaluate(segments_[i - 1].form, k).value,
                 evaluate(segments_[i].form, k).value);
    }
    const double total = evaluate(segments_.back().form, 1.0).value + atom_mass_at(1.0);
    if (std::abs(total - 1.0) > kMassTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "total mass " << total << " differs from 1";
      fail(os.str());
    }

    for (const auto& s : segments_) {
      double prev = evaluate(s.form, s.lo).value;
      for (int j = 1; j <= kMonotoneProbes; ++j) {
        const double x = s.lo + (s.hi - s.lo) * j / kMonotoneProbes;
        const Jet jt = evaluate(s.form, x);
        if (!std::isfinite(jt.value) || jt.value < -kMassTolerance ||
            jt.value > 1.0 + kMassTolerance) {
          std::ostringstream os;
          os << "F(" << x << ") = " << jt.value << " is outside [0,1]";
          fail(os.str());
        }
        if (jt.value < prev - 1e-13 || jt.d1 < -1e-12) {
          std::ostringstream os;
          os << "CDF decreases near x=" << x;
          fail(os.str());
        }
        prev = jt.value;
      }
    }
  }

  std::string label_;
  std::vector<Segment> segments_;
  std::vector<Atom> atoms_;
  std::vector<double> his_;
};

/// Incremental builder; pieces narrower than kMinWidth are dropped and the
/// next piece absorbs their range.
class DistributionBuilder {
 public:
  static constexpr double kMinWidth = 1e-12;

  DistributionBuilder& piece(double hi, SegmentForm form) {
    if (hi - cursor_ <= kMinWidth) return *this;
    segments_.push_back({cursor_, hi, std::move(form)});
    cursor_ = hi;
    return *this;
  }

  DistributionBuilder& atom(double location, double mass) {
    if (mass > 0.0) atoms_.push_back({location, mass});
    return *this;
  }

  // Atom carrying whatever mass the last piece leaves at x = 1.
  DistributionBuilder& close_with_atom() {
    if (segments_.empty()) return *this;
    const double top = evaluate(segments_.back().form, 1.0).value;
    if (1.0 - top > 0.0) atoms_.push_back({1.0, 1.0 - top});
    return *this;
  }

  PiecewiseDistribution build(std::string label) const {
    auto segs = segments_;
    if (!segs.empty()) {
      // Snap the tail onto 1 when the final piece stops within kMinWidth.
      if (segs.back().hi < 1.0 && 1.0 - segs.back().hi <= kMinWidth) segs.back().hi = 1.0;
    }
    return PiecewiseDistribution(std::move(label), std::move(segs), atoms_);
  }

 private:
  double cursor_ = 0.0;
  std::vector<Segment> segments_;
  std::vector<Atom> atoms_;
};

/// Finite support: F is a step function with a knot at every interior atom.
inline PiecewiseDistribution discrete_distribution(std::string label, std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Segment> segs;
  double lo = 0.0, below = 0.0;
  for (const auto& a : atoms) {
    if (a.location <= 0.0) {
      below += a.mass;
      continue;
    }
    if (a.location >= 1.0) break;
    segs.push_back({lo, a.location, ConstantForm{below}});
    lo = a.location;
    below += a.mass;
  }
  segs.push_back({lo, 1.0, ConstantForm{below}});
  return PiecewiseDistribution(std::move(label), std::move(segs), std::move(atoms));
}

/// All mass at 0: F(0) = 0 and F(x) = 1 for x > 0.
inline PiecewiseDistribution degenerate_at_zero(std::string label = "point-mass-at-0") {
  return PiecewiseDistribution(std::move(label), {{0.0, 1.0, ConstantForm{1.0}}}, {{0.0, 1.0}});
}

}  // namespace pricelab
