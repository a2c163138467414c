#pragma once

#include <complex>
#include <vector>

#include "rcofdma/rng.hpp"
#include "rcofdma/scenario.hpp"

namespace rcofdma {

struct Link {
  std::complex<double> h;     // true fading
  std::complex<double> hhat;  // CSIT
  double phi = 0.0;           // outage-margin effective gain (includes l)
};

/// Per-frame fading for every (cluster, subchannel, receiver) link of the
/// two-hop system. Cluster-0 receivers k < M are the relays (backhaul
/// links); k >= M are the direct MSs. Immutable after the draw.
struct ChannelSnapshot {
  std::vector<std::vector<std::vector<Link>>> link;  // [m][n][k]
};

/// Fading for the no-RS baselines: BS -> every MS, indexed [n][u] with u
/// running over Topology::ms.
struct DirectChannelSnapshot {
  std::vector<std::vector<Link>> link;
};

/// CDF of the noncentral chi-square distribution with 2 degrees of freedom
/// and noncentrality lambda, via the Poisson mixture of central chi-squares
/// (terms outside a 1e-14 Poisson tail are dropped).
double noncentral_chi2_cdf(double x, double lambda);

/// Inverse CDF: the x >= 0 with CDF(x) = prob, to ~1e-10 in probability
/// space. Bracketed bisection on [0, lambda + 50 + 20 sqrt(lambda + 25)].
/// Throws std::invalid_argument unless prob lies in (0,1).
double noncentral_chi2_inv_cdf(double lambda, double prob);

/// Outage-margin effective gain: scheduling rate g*log2(1 + p*phi) yields
/// per-hop outage exactly epsilon under CSIT uncertainty. For sigma_e2 = 0
/// returns l*|hhat|^2 directly.
double effective_gain_phi(std::complex<double> hhat, double l, double sigma_e2, double epsilon);

ChannelSnapshot draw_channel(const Topology& topo, Rng& rng);
DirectChannelSnapshot draw_channel_bs_direct(const Topology& topo, Rng& rng);

}  // namespace rcofdma
