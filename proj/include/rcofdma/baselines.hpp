#pragma once

#include "rcofdma/scheduler.hpp"

namespace rcofdma {

/// Comparison systems. NaivePerfectCsit schedules against l*|hhat|^2 with
/// no outage margin; the no-RS variants differ in the PU activity assumed
/// inside the relay clusters.
enum class BaselineKind { NaivePerfectCsit, NoRsEqualPuActivity, NoRsLowRsPuActivity };

/// Per-cluster PU activity for a baseline: q_act everywhere for the equal
/// variant, 1 - (1 - q_act)^(1/6) in RS clusters for the low variant.
std::vector<double> baseline_activity(const ScenarioConfig& cfg, BaselineKind kind);

/// Single-phase cognitive OFDMA downlink without relays: the BS serves
/// every MS directly (g = 0.5); a subchannel is usable only when all M+1
/// cluster PUs are idle, with the availability posterior fused across the
/// whole cell and the interference coefficient taken as the worst case
/// over the PUs.
class NoRsScheduler {
 public:
  NoRsScheduler(const Topology& topo, BaselineKind kind);

  FrameOutcome run_frame(Rng& rng);
  const PfsState& pfs() const { return pfs_; }
  BaselineKind kind() const { return kind_; }

 private:
  Topology topo_;
  BaselineKind kind_;
  PfsState pfs_;
  SolverOptions opts_;
  std::vector<double> activity_;
  std::vector<std::vector<int>> pu_states_;
  int frame_count_ = 0;
};

}  // namespace rcofdma
