#pragma once

#include <vector>

namespace rcofdma {

/// One scheduled component of a cluster allocation. alpha is the time
/// fraction of the frame on subchannel n (1 for exclusive use; fractional
/// entries arise from time-shared hull mixes), p the energy spent there,
/// and r the scheduled bits, carrying the outage margin
/// r = g * alpha * log2(1 + p*phi/alpha).
struct RsLink {
  int n = 0;
  int k = 0;
  double alpha = 1.0;
  double p = 0.0;
  double r = 0.0;
};

/// A relay value-curve vertex: total backhaul bits r, the weighted goodput
/// g realized from them, the per-user phase-two rate plan (packet
/// partitioning) and the concrete allocation achieving the vertex (used to
/// time-share between adjacent vertices). Only the (r, g) pairs travel over
/// the feedback channel.
struct CurvePoint {
  double r = 0.0;
  double g = 0.0;
  std::vector<double> user_rates;
  std::vector<RsLink> links;
};

}  // namespace rcofdma
