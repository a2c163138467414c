#pragma once

#include <span>
#include <vector>

#include "rcofdma/scheduler.hpp"
#include "rcofdma/solver_bs.hpp"

namespace rcofdma {

/// Aggregated outputs of one replication.
struct RunMetrics {
  std::vector<double> user_avg_goodput;  // per flattened MS, bits/frame
  std::vector<double> user_dist_m;
  std::vector<char> user_is_edge;
  double sum_log_rtilde = 0.0;     // PFS objective at the final frame (natural log)
  double edge_access_prob = 0.0;   // fraction of (edge user, frame) pairs scheduled
  double mean_goodput = 0.0;
  double mean_edge_goodput = 0.0;
  double total_goodput = 0.0;      // per frame, summed over users
  double feedback_reals_per_frame = 0.0;
  std::vector<double> hist_mean;   // distance-binned mean user goodput
  std::vector<int> hist_count;
  int frames = 0;
};

/// Streaming aggregation over frames; finish() needs the final PFS state.
class RunAccumulator {
 public:
  explicit RunAccumulator(const Topology& topo);
  void add(const FrameOutcome& frame);
  RunMetrics finish(const PfsState& pfs) const;

 private:
  const Topology* topo_;
  std::vector<double> goodput_sum_;
  std::vector<long> access_count_;
  double feedback_sum_ = 0.0;
  int frames_ = 0;
};

/// aggregate over stored frames; rejects empty input.
RunMetrics aggregate(const Topology& topo, std::span<const FrameOutcome> frames,
                     const PfsState& pfs);

/// Closed-form asymptotic per-user PFS throughput of a relay cluster:
/// N(1-q)(1-q^N)/(4 K_c) * log2(1 + (P_m/N) l ln K_c).
double theorem1_throughput(int n_sub, double q_act, int k_c, double p_m, double l_mk);

/// Finite-K_c integral form: the log term averaged against the CDF of the
/// maximum of K_c unit-exponential fading powers (quadrature).
double theorem1_throughput_quadrature(int n_sub, double q_act, int k_c, double p_m, double l_mk);

/// No-RS counterpart: (1-q)^(M+1) N/(M K_c) * log2(1 + (P_0/N) l ln(K_c M)).
double baseline_throughput_no_rs(int n_sub, double q_act, int k_c, int n_rs, double p_0,
                                 double l_b);

/// The asymptotic PFS winner: the user with the largest fading magnitude.
int pfs_user_selection_asymptotic(std::span<const double> fading_magnitudes);

/// Exhaustive grid oracle for the relay subproblem (N <= 2, K <= 2):
/// all subchannel assignments x power grid x budget-respecting rates.
double oracle_rs(const ClusterProblem& prob, std::span<const double> budgets, int grid = 50);

/// Exhaustive grid oracle for the BS subproblem (at most 2 candidates).
double oracle_bs(const BsProblem& prob, int grid = 50);

/// Desk-scale single-cluster PFS simulation in the Theorem-1 setting
/// (strong backhaul, equal long-term gains, perfect CSIT, no margin):
/// equal power over idle subchannels, weighted-rate winner, PFS averaging.
struct AsymptoticPfsResult {
  double avg_user_throughput = 0.0;  // bits/frame per user
  double winner_agreement = 0.0;     // fraction matching the max-fading rule
};
AsymptoticPfsResult asymptotic_pfs_sim(int k_c, int n_sub, double q_act, double snr_per_sub,
                                       int frames, int warmup, int t_s, std::uint64_t seed);

}  // namespace rcofdma
