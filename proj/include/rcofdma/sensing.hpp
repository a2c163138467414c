#pragma once

#include <span>
#include <vector>

#include "rcofdma/rng.hpp"
#include "rcofdma/scenario.hpp"

namespace rcofdma {

/// True PU states, per-user reports, and fused availability posteriors for
/// one frame. S = 1 means the subchannel is free of PU activity.
struct SensingSnapshot {
  std::vector<std::vector<int>> S;                     // [m][n]
  std::vector<std::vector<std::vector<int>>> report;   // [m][n][k]
  std::vector<std::vector<double>> beta;               // [m][n]
  bool degenerate = false;  // some fusion hit a zero/zero likelihood product
};

/// Draws S[m][n] = 0 with probability q_act[m], independently across (m,n).
std::vector<std::vector<int>> draw_pu_states(const std::vector<double>& q_act, int n_sub,
                                             Rng& rng);

/// Per-user binary availability reports: Pr(report=0 | S=1) = q_f,
/// Pr(report=1 | S=0) = 1 - q_d, independent across users given S.
std::vector<std::vector<std::vector<int>>> draw_reports(
    const std::vector<std::vector<int>>& S, const std::vector<int>& users_per_cluster,
    double q_f, double q_d, Rng& rng);

/// Bayes fusion of conditionally independent reports against the prior
/// availability. A degenerate (0/0) likelihood product returns the prior
/// and sets *degenerate.
double posterior_beta(std::span<const int> reports, double prior_avail, double q_f, double q_d,
                      bool* degenerate = nullptr);

SensingSnapshot make_sensing_snapshot(const std::vector<double>& q_act,
                                      const std::vector<int>& users_per_cluster, int n_sub,
                                      double q_f, double q_d, Rng& rng);

/// Conditional average interference level of Eq.-(3) form:
/// total_power * tau * (1 - beta). The caller compares against I_bar.
double interference_level(double total_power, double tau, double beta);

}  // namespace rcofdma
