#pragma once

#include <cstddef>
#include <vector>

#include "rcofdma/allocation.hpp"
#include "rcofdma/solver_rs.hpp"

namespace rcofdma {

/// Concave piecewise-linear relay value function: ordered breakpoints
/// starting at (0,0), strictly increasing r, nondecreasing g, strictly
/// decreasing segment slopes, constant past the last breakpoint.
struct GoodputCurve {
  std::vector<CurvePoint> pts;

  /// Piecewise-linear interpolation; constant after saturation.
  /// Throws std::invalid_argument for negative r.
  double eval(double r) const;
  /// Right-derivative: slope of the segment to the right of r, 0 past
  /// saturation.
  double slope(double r) const;

  double r_sat() const { return pts.empty() ? 0.0 : pts.back().r; }
  double g_max() const { return pts.empty() ? 0.0 : pts.back().g; }
  bool trivial() const { return pts.size() <= 1; }
  /// Feedback overhead of one curve transmission, in reals.
  std::size_t feedback_reals() const { return 2 * pts.size(); }
  /// Verifies the breakpoint invariants; returns false on any violation.
  bool well_formed() const;
};

/// Upper concave envelope of {(0,0)} union class_points, restricted to
/// nondecreasing in r and constant after the last kept vertex. Dominated
/// points are dropped.
GoodputCurve build_curve_general(std::vector<CurvePoint> class_points);

/// Per-class unconstrained-backhaul optima: for QoS class c (a set of user
/// indices), g_c is the cluster's best weighted goodput when only class-c
/// users are schedulable and flow balance is absent, and r_c the matching
/// total transmit rate.
std::vector<CurvePoint> compute_class_points(const ClusterProblem& prob,
                                             const std::vector<std::vector<int>>& classes,
                                             const SolverOptions& opts = {});

/// Two-segment PFS curve: equal power over available subchannels, per-
/// subchannel winner by weighted rate, saturation at the winners' total
/// rate. literal_l keeps the extra long-term-gain factor inside the winner
/// rule and rates (requires prob.l).
GoodputCurve build_curve_pfs(const ClusterProblem& prob, bool literal_l = false);

}  // namespace rcofdma
