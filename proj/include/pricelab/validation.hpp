#pragma once

// Numerical certification of regularity and MHR.
//
// Inside segments the checks evaluate the differential forms
//   regular: 2 f^2 + (1-F) f' >= 0
//   MHR:       f^2 + (1-F) f' >= 0
// on a uniform grid, skipping points within `knot_radius` of breakpoints and
// points where F = 1. At every breakpoint the one-sided limits of phi (or
// lambda) are compared separately, since the grid never sees a kink.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pricelab/distribution.hpp"
#include "pricelab/errors.hpp"

namespace pricelab {

enum class Property { Regular, MHR };

inline const char* to_string(Property p) { return p == Property::Regular ? "regular" : "mhr"; }

struct GridSpec {
  int points = 10000;
  double knot_radius = 1e-7;
  double tolerance = 1e-9;
  // Central difference of f with this step replaces the closed-form f'.
  bool finite_difference = false;
  double fd_step = 1e-6;
  // Restrict the check to [domain_lo, domain_hi].
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  int min_points_per_segment = 10;
};

struct KnotViolation {
  double location = 0.0;
  double left = 0.0;   // phi or lambda just below the knot
  double right = 0.0;  // ... and just above it
};

struct ValidationReport {
  Property property = Property::Regular;
  std::string label;
  int grid_points = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  double argmin = 0.0;
  std::vector<double> excluded_knots;
  std::vector<KnotViolation> knot_violations;
  double tolerance = 1e-9;
  bool passed = true;

  std::string summary() const {
    std::ostringstream os;
    os.precision(10);
    os << label << " [" << to_string(property) << "] " << (passed ? "passed" : "FAILED")
       << ": min_margin=" << min_margin << " at x=" << argmin;
    for (const auto& k : knot_violations)
      os << "; knot x=" << k.location << " drops " << k.left << " -> " << k.right;
    return os.str();
  }
};

namespace detail {

inline double margin_weight(Property p) { return p == Property::Regular ? 2.0 : 1.0; }

// phi or lambda from a one-sided jet.
inline double monotone_quantity(Property p, double x, const Jet& j) {
  if (p == Property::Regular) {
    if (!(j.d1 > 0.0)) return -std::numeric_limits<double>::infinity();
    return x - j.survival / j.d1;
  }
  return j.d1 / j.survival;
}

}  // namespace detail

inline ValidationReport check_property(const PiecewiseDistribution& d, Property property,
                                       const GridSpec& grid = {}) {
  if (grid.points < grid.min_points_per_segment)
    throw ConfigError("grid needs at least " + std::to_string(grid.min_points_per_segment) +
                      " points");
  if (!(grid.domain_lo < grid.domain_hi))
    throw ConfigError("grid domain must satisfy domain_lo < domain_hi");

  ValidationReport report;
  report.property = property;
  report.label = d.label();
  report.grid_points = grid.points;
  report.tolerance = grid.tolerance;

  const double weight = detail::margin_weight(property);
  const double span = grid.domain_hi - grid.domain_lo;
  const double step = span / grid.points;

  for (const auto& seg : d.segments()) {
    const double lo = std::max(seg.lo, grid.domain_lo);
    const double hi = std::min(seg.hi, grid.domain_hi);
    if (!(hi - lo > 2.0 * grid.knot_radius)) continue;
    const double mid_survival = evaluate(seg.form, 0.5 * (lo + hi)).survival;
    if (!(mid_survival > 0.0)) continue;

    // Grid indices j with x_j = domain_lo + (j + 1/2) step inside (lo + r, hi - r).
    const auto first = static_cast<long>(
        std::ceil((lo + grid.knot_radius - grid.domain_lo) / step - 0.5));
    const auto last = static_cast<long>(
        std::floor((hi - grid.knot_radius - grid.domain_lo) / step - 0.5));
    long used = 0;
    for (long j = std::max(0L, first); j <= std::min<long>(last, grid.points - 1); ++j) {
      const double x = grid.domain_lo + (static_cast<double>(j) + 0.5) * step;
      if (x <= lo + grid.knot_radius || x >= hi - grid.knot_radius) continue;
      const Jet jt = evaluate(seg.form, x);
      ++used;
      if (!(jt.survival > 0.0)) continue;
      double fprime = jt.d2;
      if (grid.finite_difference) {
        fprime = (evaluate(seg.form, x + grid.fd_step).d1 -
                  evaluate(seg.form, x - grid.fd_step).d1) /
                 (2.0 * grid.fd_step);
      }
      const double margin = weight * jt.d1 * jt.d1 + jt.survival * fprime;
      if (margin < report.min_margin || std::isnan(margin)) {
        report.min_margin = std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin;
        report.argmin = x;
      }
    }
    if (used < grid.min_points_per_segment) {
      std::ostringstream os;
      os << d.label() << ": grid too coarse, segment (" << seg.lo << ", " << seg.hi
         << "] receives " << used << " of the required " << grid.min_points_per_segment
         << " points";
      throw ConfigError(os.str());
    }
  }

  const auto& segs = d.segments();
  for (std::size_t i = 1; i < segs.size(); ++i) {
    const double k = segs[i].lo;
    if (k < grid.domain_lo || k >= grid.domain_hi) continue;
    report.excluded_knots.push_back(k);
    const Jet right = evaluate(segs[i].form, k);
    if (!(right.survival > 1e-15)) continue;
    const Jet left = evaluate(segs[i - 1].form, k);
    double below = left.survival > 0.0 ? detail::monotone_quantity(property, k, left)
                                       : std::numeric_limits<double>::infinity();
    if (d.atom_mass_at(k) > 0.0) {
      // An interior jump that leaves mass above it.
      below = property == Property::Regular ? k : std::numeric_limits<double>::infinity();
    }
    const double above = detail::monotone_quantity(property, k, right);
    const double slack =
        grid.tolerance * std::max(1.0, std::isfinite(below) ? std::abs(below) : 1.0);
    if (above < below - slack) report.knot_violations.push_back({k, below, above});
  }

  report.passed = report.min_margin >= -grid.tolerance && report.knot_violations.empty();
  if (!report.passed && report.min_margin >= -grid.tolerance &&
      !report.knot_violations.empty()) {
    report.argmin = report.knot_violations.front().location;
  }
  return report;
}

inline ValidationReport check_regularity(const PiecewiseDistribution& d,
                                         const GridSpec& grid = {}) {
  return check_property(d, Property::Regular, grid);
}

inline ValidationReport check_mhr(const PiecewiseDistribution& d, const GridSpec& grid = {}) {
  return check_property(d, Property::MHR, grid);
}

}  // namespace pricelab
