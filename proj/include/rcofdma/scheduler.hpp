#pragma once

#include <complex>
#include <vector>

#include "rcofdma/channel.hpp"
#include "rcofdma/sensing.hpp"
#include "rcofdma/solver_bs.hpp"
#include "rcofdma/solver_rs.hpp"

namespace rcofdma {

/// 1 iff the PU is idle and the scheduled rate clears the realized mutual
/// information g*alpha*log2(1 + p*l*|h|^2/alpha).
bool decode_indicator(double r, std::complex<double> h, double l, double alpha, double p, int S,
                      double g);

/// Exponentially averaged throughput update:
/// rtilde' = (1 - 1/t_s)*rtilde + (1/t_s)*sched_rate_sum.
double update_pfs(double rtilde, double sched_rate_sum, int t_s);

/// Per-MS exponentially averaged throughput; PFS weights are
/// 1/max(rtilde, floor). Indexed by Topology::ms position.
struct PfsState {
  std::vector<double> rtilde;
  double floor = 1e-6;
  int t_s = 100;

  void init(std::size_t n_users, double floor_value, int window) {
    floor = floor_value;
    t_s = window;
    rtilde.assign(n_users, floor_value);
  }
  double weight(int u) const { return 1.0 / std::max(rtilde[u], floor); }
  void update(int u, double sched_rate_sum) { rtilde[u] = update_pfs(rtilde[u], sched_rate_sum, t_s); }
};

/// One scheduled transmission attempt (any hop).
struct HopRecord {
  int m = 0;
  int n = 0;
  int k = 0;
  double r = 0.0;
  bool pu_idle = false;
  bool success = false;
  bool backhaul = false;
};

struct FrameOutcome {
  BsAllocation bs;
  std::vector<RsAllocation> rs;                 // per relay; empty winners if idle
  SensingSnapshot sensing;
  std::vector<double> beta_comp;                // no-RS baselines only
  std::vector<char> s_comp;                     // no-RS baselines only
  std::vector<std::vector<char>> decode_t;      // [m][n] backhaul decode indicators
  std::vector<std::vector<double>> budgets;     // [m][k] realized phase-two budgets
  std::vector<HopRecord> hops;
  std::vector<double> ms_sched_rate;            // per flattened MS
  std::vector<double> ms_goodput;
  std::vector<char> ms_scheduled;               // assigned at least one subchannel
  std::vector<char> ms_allowed;                 // scheduled and PU-idle at the receiving hop
  std::size_t feedback_reals = 0;
  int rs_multi_subchannel = 0;
  bool all_converged = true;
};

/// Frame-by-frame driver of the two-hop system: sensing collection, curve
/// feedback, phase-one BS transmission, decode simulation, phase-two RS
/// transmission, goodput accounting, and PFS weight updates. Frames are
/// sequential (PFS state); independent replications own their instance.
class ProposedScheduler {
 public:
  explicit ProposedScheduler(const Topology& topo);

  FrameOutcome run_frame(Rng& rng);
  const PfsState& pfs() const { return pfs_; }
  const Topology& topology() const { return topo_; }

  /// The cluster-m problem under the current weights and a given draw;
  /// exposed for tests and curve inspection.
  ClusterProblem cluster_problem(int m, const ChannelSnapshot& chan,
                                 const SensingSnapshot& sensing) const;

 private:
  Topology topo_;
  PfsState pfs_;
  SolverOptions opts_;
  std::vector<std::vector<int>> pu_states_;  // held for pu_coherence_frames
  int frame_count_ = 0;
};

}  // namespace rcofdma
