#include "rcofdma/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace rcofdma {

namespace {

constexpr std::uint64_t kTopologyStream = 0x746f706fULL;  // "topo"

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(M >= 0, "M must be >= 0");
  require(N >= 1, "N must be >= 1");
  require(K0 > M, "K0 must exceed M (the first M cluster-0 users are the RSs)");
  require(M == 0 || Km >= 1, "Km must be >= 1 when M > 0");
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0,1)");
  require(sigma_e2 >= 0.0, "sigma_e2 must be >= 0");
  require(csit_model != CsitModel::Mmse || sigma_e2 < 1.0,
          "sigma_e2 must be < 1 under the mmse CSIT model");
  require(q_act >= 0.0 && q_act <= 1.0, "q_act must lie in [0,1]");
  require(q_f >= 0.0 && q_f <= 1.0, "q_f must lie in [0,1]");
  require(q_d > 0.0 && q_d <= 1.0, "q_d must lie in (0,1]");
  require(t_s >= 1, "t_s must be >= 1");
  require(cell_radius_m > 0.0 && cluster0_radius_m > 0.0 && rs_ring_radius_m > 0.0 &&
              rs_cluster_radius_m > 0.0,
          "radii must be positive");
  require(guard_distance_m > 0.0 && guard_distance_m < cluster0_radius_m &&
              guard_distance_m < rs_cluster_radius_m,
          "guard distance must be positive and smaller than the cluster radii");
  require(shadowing_sigma_dB >= 0.0, "shadowing sigma must be >= 0");
  require(frames >= 1, "frames must be >= 1");
  require(pu_coherence_frames >= 1, "pu_coherence_frames must be >= 1");
  require(solver_max_iter >= 1, "solver_max_iter must be >= 1");
  require(solver_tol > 0.0, "solver_tol must be positive");
  require(solver_delta0 > 0.0, "solver_delta0 must be positive");
  require(pfs_floor > 0.0, "pfs_floor must be positive");
  require(hist_bins >= 1, "hist_bins must be >= 1");
  if (P0_dB) require(std::isfinite(*P0_dB), "P0_dB must be finite");
  if (Pm_dB) require(std::isfinite(*Pm_dB), "Pm_dB must be finite");
  require(p0_linear() > 0.0, "P0 must be positive");
  require(M == 0 || pm_linear() > 0.0, "Pm must be positive");
  require(i_bar_linear() > 0.0, "I_bar must be positive");
}

double ScenarioConfig::i_bar_linear() const { return db_to_linear(I_bar_dB); }

double ScenarioConfig::p0_linear() const {
  if (P0_dB) return db_to_linear(*P0_dB);
  const double ref_m = (snr_ref == SnrRef::CellEdge) ? cell_radius_m : cluster0_radius_m;
  const double l_med = db_to_linear(-path_gain_dB(ref_m / 1000.0, LinkType::Access));
  return N * db_to_linear(receive_snr_dB) / l_med;
}

double ScenarioConfig::pm_linear() const {
  if (M == 0) return 0.0;
  if (Pm_dB) return db_to_linear(*Pm_dB);
  const double l_med = db_to_linear(-path_gain_dB(rs_cluster_radius_m / 1000.0, LinkType::Access));
  return N * db_to_linear(receive_snr_dB) / l_med;
}

namespace {

struct KeyParser {
  std::map<std::string, bool> seen;

  static bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail("key '" + key + "': expected boolean, got '" + v + "'");
  }

  static double parse_double(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &pos);
    } catch (const std::exception&) {
      fail("key '" + key + "': expected number, got '" + v + "'");
    }
    if (pos != v.size()) fail("key '" + key + "': trailing characters in '" + v + "'");
    return d;
  }

  static int parse_int(const std::string& v, const std::string& key) {
    const double d = parse_double(v, key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) fail("key '" + key + "': expected integer, got '" + v + "'");
    return i;
  }

  static std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      fail("key '" + key + "': expected unsigned integer, got '" + v + "'");
    }
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      fail("line " + std::to_string(lineno) + ": empty key or value");

    using P = KeyParser;
    if (key == "M") cfg.M = P::parse_int(val, key);
    else if (key == "N") cfg.N = P::parse_int(val, key);
    else if (key == "K0") cfg.K0 = P::parse_int(val, key);
    else if (key == "Km") cfg.Km = P::parse_int(val, key);
    else if (key == "receive_snr_dB") cfg.receive_snr_dB = P::parse_double(val, key);
    else if (key == "snr_ref") {
      if (val == "cluster_edge") cfg.snr_ref = SnrRef::ClusterEdge;
      else if (val == "cell_edge") cfg.snr_ref = SnrRef::CellEdge;
      else fail("key 'snr_ref': expected cluster_edge|cell_edge");
    }
    else if (key == "P0_dB") cfg.P0_dB = P::parse_double(val, key);
    else if (key == "Pm_dB") cfg.Pm_dB = P::parse_double(val, key);
    else if (key == "I_bar_dB") cfg.I_bar_dB = P::parse_double(val, key);
    else if (key == "epsilon") cfg.epsilon = P::parse_double(val, key);
    else if (key == "sigma_e2") cfg.sigma_e2 = P::parse_double(val, key);
    else if (key == "q_act") cfg.q_act = P::parse_double(val, key);
    else if (key == "q_f") cfg.q_f = P::parse_double(val, key);
    else if (key == "q_d") cfg.q_d = P::parse_double(val, key);
    else if (key == "t_s") cfg.t_s = P::parse_int(val, key);
    else if (key == "cell_radius_m") cfg.cell_radius_m = P::parse_double(val, key);
    else if (key == "cluster0_radius_m") cfg.cluster0_radius_m = P::parse_double(val, key);
    else if (key == "rs_ring_radius_m") cfg.rs_ring_radius_m = P::parse_double(val, key);
    else if (key == "rs_cluster_radius_m") cfg.rs_cluster_radius_m = P::parse_double(val, key);
    else if (key == "guard_distance_m") cfg.guard_distance_m = P::parse_double(val, key);
    else if (key == "shadowing_sigma_dB") cfg.shadowing_sigma_dB = P::parse_double(val, key);
    else if (key == "seed") cfg.seed = P::parse_u64(val, key);
    else if (key == "frames") cfg.frames = P::parse_int(val, key);
    else if (key == "pu_coherence_frames") cfg.pu_coherence_frames = P::parse_int(val, key);
    else if (key == "csit_model") {
      if (val == "mmse") cfg.csit_model = CsitModel::Mmse;
      else if (val == "additive") cfg.csit_model = CsitModel::Additive;
      else fail("key 'csit_model': expected mmse|additive");
    }
    else if (key == "interference_tau_squared")
      cfg.interference_tau_squared = P::parse_bool(val, key);
    else if (key == "lemma3_literal_l") cfg.lemma3_literal_l = P::parse_bool(val, key);
    else if (key == "pfs_goodput_averaging") cfg.pfs_goodput_averaging = P::parse_bool(val, key);
    else if (key == "curve_mode") {
      if (val == "pfs") cfg.curve_mode = CurveMode::Pfs;
      else if (val == "general") cfg.curve_mode = CurveMode::General;
      else fail("key 'curve_mode': expected pfs|general");
    }
    else if (key == "solver_max_iter") cfg.solver_max_iter = P::parse_int(val, key);
    else if (key == "solver_tol") cfg.solver_tol = P::parse_double(val, key);
    else if (key == "solver_delta0") cfg.solver_delta0 = P::parse_double(val, key);
    else if (key == "pfs_floor") cfg.pfs_floor = P::parse_double(val, key);
    else if (key == "hist_bins") cfg.hist_bins = P::parse_int(val, key);
    else fail("unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "M = " << cfg.M << "\n"
     << "N = " << cfg.N << "\n"
     << "K0 = " << cfg.K0 << "\n"
     << "Km = " << cfg.Km << "\n"
     << "receive_snr_dB = " << cfg.receive_snr_dB << "\n"
     << "snr_ref = " << (cfg.snr_ref == SnrRef::CellEdge ? "cell_edge" : "cluster_edge") << "\n";
  if (cfg.P0_dB) os << "P0_dB = " << *cfg.P0_dB << "\n";
  if (cfg.Pm_dB) os << "Pm_dB = " << *cfg.Pm_dB << "\n";
  os << "I_bar_dB = " << cfg.I_bar_dB << "\n"
     << "epsilon = " << cfg.epsilon << "\n"
     << "sigma_e2 = " << cfg.sigma_e2 << "\n"
     << "q_act = " << cfg.q_act << "\n"
     << "q_f = " << cfg.q_f << "\n"
     << "q_d = " << cfg.q_d << "\n"
     << "t_s = " << cfg.t_s << "\n"
     << "cell_radius_m = " << cfg.cell_radius_m << "\n"
     << "cluster0_radius_m = " << cfg.cluster0_radius_m << "\n"
     << "rs_ring_radius_m = " << cfg.rs_ring_radius_m << "\n"
     << "rs_cluster_radius_m = " << cfg.rs_cluster_radius_m << "\n"
     << "guard_distance_m = " << cfg.guard_distance_m << "\n"
     << "shadowing_sigma_dB = " << cfg.shadowing_sigma_dB << "\n"
     << "seed = " << cfg.seed << "\n"
     << "frames = " << cfg.frames << "\n"
     << "pu_coherence_frames = " << cfg.pu_coherence_frames << "\n"
     << "csit_model = " << (cfg.csit_model == CsitModel::Mmse ? "mmse" : "additive") << "\n"
     << "interference_tau_squared = " << (cfg.interference_tau_squared ? "true" : "false") << "\n"
     << "lemma3_literal_l = " << (cfg.lemma3_literal_l ? "true" : "false") << "\n"
     << "pfs_goodput_averaging = " << (cfg.pfs_goodput_averaging ? "true" : "false") << "\n"
     << "curve_mode = " << (cfg.curve_mode == CurveMode::Pfs ? "pfs" : "general") << "\n"
     << "solver_max_iter = " << cfg.solver_max_iter << "\n"
     << "solver_tol = " << cfg.solver_tol << "\n"
     << "solver_delta0 = " << cfg.solver_delta0 << "\n"
     << "pfs_floor = " << cfg.pfs_floor << "\n"
     << "hist_bins = " << cfg.hist_bins << "\n";
  return os.str();
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double path_gain_dB(double distance_km, LinkType link) {
  if (!(distance_km > 0.0)) throw std::invalid_argument("path_gain_dB: distance must be positive");
  const double slope = (link == LinkType::Access) ? 37.6 : 28.8;
  return 128.1 + slope * std::log10(distance_km);
}

double apply_shadowing(double path_loss_dB, double sigma_dB, Rng& rng) {
  const double x = (sigma_dB > 0.0) ? rng.normal(sigma_dB) : 0.0;
  const double gain = std::pow(10.0, -(path_loss_dB + x) / 10.0);
  return std::min(gain, 1.0);
}

namespace {

Vec2 uniform_in_disk(const Vec2& center, double radius, Rng& rng) {
  const double r = radius * std::sqrt(rng.uniform01());
  const double th = 6.283185307179586 * rng.uniform01();
  return {center.x + r * std::cos(th), center.y + r * std::sin(th)};
}

Vec2 uniform_in_disk_guarded(const Vec2& center, double radius, double guard, Rng& rng) {
  for (;;) {
    const Vec2 p = uniform_in_disk(center, radius, rng);
    if (dist(p, center) >= guard) return p;
  }
}

double link_gain(const Vec2& a, const Vec2& b, LinkType link, double sigma_dB, Rng& rng) {
  const double d_km = std::max(dist(a, b), 1.0) / 1000.0;  // floor at 1 m
  return apply_shadowing(path_gain_dB(d_km, link), sigma_dB, rng);
}

}  // namespace

Topology build_topology(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, kTopologyStream));

  Topology topo;
  topo.cfg = cfg;
  topo.P0 = cfg.p0_linear();
  topo.Pm = cfg.pm_linear();
  topo.I_bar = cfg.i_bar_linear();

  const Vec2 bs{0.0, 0.0};
  topo.clusters.resize(cfg.M + 1);
  topo.users.resize(cfg.M + 1);
  topo.clusters[0].server_pos = bs;
  for (int m = 1; m <= cfg.M; ++m) {
    const double th = 6.283185307179586 * (m - 1) / cfg.M;
    topo.clusters[m].server_pos = {cfg.rs_ring_radius_m * std::cos(th),
                                   cfg.rs_ring_radius_m * std::sin(th)};
  }

  // Placements first, then gains; the draw order is part of the contract
  // that (config, seed) fully determines the topology.
  auto& c0 = topo.users[0];
  c0.resize(cfg.K0);
  for (int m = 0; m < cfg.M; ++m) {
    c0[m].pos = topo.clusters[m + 1].server_pos;
    c0[m].is_rs = true;
  }
  for (int k = cfg.M; k < cfg.K0; ++k)
    c0[k].pos = uniform_in_disk_guarded(bs, cfg.cluster0_radius_m, cfg.guard_distance_m, rng);
  for (int m = 1; m <= cfg.M; ++m) {
    topo.users[m].resize(cfg.Km);
    for (int k = 0; k < cfg.Km; ++k)
      topo.users[m][k].pos = uniform_in_disk_guarded(topo.clusters[m].server_pos,
                                                     cfg.rs_cluster_radius_m,
                                                     cfg.guard_distance_m, rng);
  }
  topo.clusters[0].pu_pos = uniform_in_disk(bs, cfg.cluster0_radius_m, rng);
  for (int m = 1; m <= cfg.M; ++m)
    topo.clusters[m].pu_pos = uniform_in_disk(topo.clusters[m].server_pos,
                                              cfg.rs_cluster_radius_m, rng);

  const double sh = cfg.shadowing_sigma_dB;
  for (int m = 0; m <= cfg.M; ++m) {
    const Vec2 server = topo.clusters[m].server_pos;
    for (auto& u : topo.users[m]) {
      u.dist_server_m = dist(u.pos, server);
      u.dist_bs_m = dist(u.pos, bs);
      const LinkType lt = u.is_rs ? LinkType::Backhaul : LinkType::Access;
      u.l_server = link_gain(server, u.pos, lt, sh, rng);
      if (m == 0) {
        u.l_bs = u.l_server;
      } else {
        u.l_bs = link_gain(bs, u.pos, LinkType::Access, sh, rng);
      }
    }
    topo.clusters[m].tau = link_gain(server, topo.clusters[m].pu_pos, LinkType::Access, sh, rng);
    topo.clusters[m].tau_bs =
        (m == 0) ? topo.clusters[m].tau
                 : link_gain(bs, topo.clusters[m].pu_pos, LinkType::Access, sh, rng);
  }

  topo.ms_index.resize(cfg.M + 1);
  for (int m = 0; m <= cfg.M; ++m) {
    topo.ms_index[m].assign(topo.cluster_size(m), -1);
    for (int k = 0; k < topo.cluster_size(m); ++k) {
      if (topo.users[m][k].is_rs) continue;
      topo.ms_index[m][k] = static_cast<int>(topo.ms.size());
      topo.ms.push_back({m, k});
    }
  }

  return topo;
}

}  // namespace rcofdma
