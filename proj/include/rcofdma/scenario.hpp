#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcofdma/rng.hpp"

namespace rcofdma {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SnrRef { ClusterEdge, CellEdge };
enum class CsitModel { Mmse, Additive };
enum class CurveMode { Pfs, General };
enum class LinkType { Access, Backhaul };

/// All system parameters. dB <-> linear conversion happens only here; the
/// rest of the library works in linear units with noise power normalized
/// to 1.
struct ScenarioConfig {
  int M = 6;    // relay clusters
  int N = 4;    // independent subchannels
  int K0 = 16;  // cluster-0 receivers; the first M of them are the RSs
  int Km = 5;   // users per relay cluster

  double receive_snr_dB = 10.0;
  SnrRef snr_ref = SnrRef::ClusterEdge;
  std::optional<double> P0_dB;  // direct power override (dB over noise)
  std::optional<double> Pm_dB;
  double I_bar_dB = 0.0;

  double epsilon = 0.05;   // per-hop outage target
  double sigma_e2 = 0.01;  // CSIT error variance
  double q_act = 0.3;      // PU active probability per (cluster, subchannel)
  double q_f = 0.2;        // false alarm
  double q_d = 0.8;        // detection

  int t_s = 100;  // PFS averaging window (frames)

  double cell_radius_m = 5000.0;
  double cluster0_radius_m = 2000.0;
  double rs_ring_radius_m = 3000.0;
  double rs_cluster_radius_m = 1500.0;
  double guard_distance_m = 50.0;
  double shadowing_sigma_dB = 8.0;

  std::uint64_t seed = 1;
  int frames = 100;
  int pu_coherence_frames = 1;

  CsitModel csit_model = CsitModel::Mmse;
  bool interference_tau_squared = false;  // Appendix-A tau^2 form of Eq. (3)
  bool lemma3_literal_l = false;          // keep the extra l factor in the PFS curve
  bool pfs_goodput_averaging = false;     // average realized goodput instead of scheduled rate
  CurveMode curve_mode = CurveMode::Pfs;

  int solver_max_iter = 1200;
  double solver_tol = 1e-5;
  double solver_delta0 = 1.0;
  double pfs_floor = 1e-6;
  int hist_bins = 10;

  /// Throws ConfigError with a descriptive message on any violated invariant.
  void validate() const;

  double i_bar_linear() const;
  /// BS power budget (linear). Uses P0_dB if set, otherwise calibrates so the
  /// zero-shadowing per-subchannel SNR at the snr_ref distance equals
  /// receive_snr_dB.
  double p0_linear() const;
  /// Per-RS power budget (linear), calibrated at the RS cluster edge.
  double pm_linear() const;
};

/// Parses a key = value config file ('#' comments). Unknown keys are
/// rejected. Missing keys keep their defaults.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

/// Canonical one-line-per-key echo of a config (used for hashing and the
/// run manifest).
std::string serialize_config(const ScenarioConfig& cfg);

/// FNV-1a over the canonical serialization; stable for a given build.
std::uint64_t config_hash(const ScenarioConfig& cfg);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dist(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct UserInfo {
  Vec2 pos;
  double dist_server_m = 0.0;
  double dist_bs_m = 0.0;
  double l_server = 1.0;  // long-term linear gain to the serving node
  double l_bs = 1.0;      // long-term linear gain to the BS (baselines)
  bool is_rs = false;
};

struct ClusterInfo {
  Vec2 server_pos;
  Vec2 pu_pos;
  double tau = 1.0;     // server -> cluster PU gain (frequency-flat)
  double tau_bs = 1.0;  // BS -> cluster PU gain
};

struct MsRef {
  int m = 0;
  int k = 0;
};

/// Node placement and long-term gains. Pure function of (config, seed);
/// immutable after construction and safe to share across parallel trials.
struct Topology {
  ScenarioConfig cfg;
  double P0 = 0.0;
  double Pm = 0.0;
  double I_bar = 1.0;
  std::vector<ClusterInfo> clusters;          // size M+1; cluster 0 is the BS
  std::vector<std::vector<UserInfo>> users;   // users[m][k]
  std::vector<MsRef> ms;                      // all mobile stations (RSs excluded)
  std::vector<std::vector<int>> ms_index;     // [m][k] -> position in ms, -1 for RSs

  int cluster_size(int m) const { return static_cast<int>(users[m].size()); }
  bool is_edge_ms(const MsRef& u) const { return u.m > 0; }
};

/// Path loss in dB before shadowing. Access: 128.1 + 37.6 log10(R);
/// backhaul (BS-RS): 128.1 + 28.8 log10(R). Throws on non-positive distance.
double path_gain_dB(double distance_km, LinkType link);

/// Linear gain 10^(-(PL + X)/10) with X ~ N(0, sigma_dB^2), clamped to (0, 1].
double apply_shadowing(double path_loss_dB, double sigma_dB, Rng& rng);

Topology build_topology(const ScenarioConfig& cfg);

}  // namespace rcofdma
