#include "rcofdma/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace rcofdma {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}  // namespace

bool decode_indicator(double r, std::complex<double> h, double l, double alpha, double p, int S,
                      double g) {
  if (r <= 0.0) return true;  // vacuously decodable, contributes zero goodput
  if (S == 0) return false;
  if (alpha <= 0.0 || p <= 0.0) return false;
  const double cap = g * alpha * std::log1p(p * l * std::norm(h) / alpha) / kLn2;
  // The margin-exact case (perfect CSIT) lands on the boundary up to
  // rounding from the solver's power normalization.
  return r <= cap * (1.0 + 1e-12) + 1e-15;
}

double update_pfs(double rtilde, double sched_rate_sum, int t_s) {
  const double a = 1.0 / t_s;
  return (1.0 - a) * rtilde + a * sched_rate_sum;
}

ProposedScheduler::ProposedScheduler(const Topology& topo) : topo_(topo) {
  const auto& cfg = topo_.cfg;
  pfs_.init(topo_.ms.size(), cfg.pfs_floor, cfg.t_s);
  opts_.max_iter = cfg.solver_max_iter;
  opts_.tol = cfg.solver_tol;
  opts_.delta0 = cfg.solver_delta0;
}

ClusterProblem ProposedScheduler::cluster_problem(int m, const ChannelSnapshot& chan,
                                                  const SensingSnapshot& sensing) const {
  const auto& cfg = topo_.cfg;
  const int K = topo_.cluster_size(m);
  ClusterProblem cp;
  cp.n_sub = cfg.N;
  cp.n_users = K;
  cp.beta = sensing.beta[m];
  const double tau = topo_.clusters[m].tau;
  const double tau_eff = cfg.interference_tau_squared ? tau * tau : tau;
  cp.itau.resize(cfg.N);
  for (int n = 0; n < cfg.N; ++n) cp.itau[n] = tau_eff * (1.0 - cp.beta[n]);
  cp.phi.resize(cfg.N * K);
  for (int n = 0; n < cfg.N; ++n)
    for (int k = 0; k < K; ++k) cp.phi[n * K + k] = chan.link[m][n][k].phi;
  cp.w.resize(K);
  cp.l.resize(K);
  for (int k = 0; k < K; ++k) {
    const int u = topo_.ms_index[m][k];
    cp.w[k] = u >= 0 ? pfs_.weight(u) : 0.0;
    cp.l[k] = topo_.users[m][k].l_server;
  }
  cp.power = m == 0 ? topo_.P0 : topo_.Pm;
  cp.i_bar = topo_.I_bar;
  cp.epsilon = cfg.epsilon;
  cp.rate_factor = m == 0 ? 0.5 : 0.25;
  return cp;
}

FrameOutcome ProposedScheduler::run_frame(Rng& rng) {
  const auto& cfg = topo_.cfg;
  const int M = cfg.M;
  const int N = cfg.N;

  FrameOutcome out;
  out.ms_sched_rate.assign(topo_.ms.size(), 0.0);
  out.ms_goodput.assign(topo_.ms.size(), 0.0);
  out.ms_scheduled.assign(topo_.ms.size(), 0);
  out.ms_allowed.assign(topo_.ms.size(), 0);

  // Step 1: cluster-based spectrum sensing.
  if (frame_count_ % cfg.pu_coherence_frames == 0 || pu_states_.empty())
    pu_states_ = draw_pu_states(std::vector<double>(M + 1, cfg.q_act), N, rng);
  std::vector<int> cluster_sizes(M + 1);
  for (int m = 0; m <= M; ++m) cluster_sizes[m] = topo_.cluster_size(m);
  out.sensing.S = pu_states_;
  out.sensing.report = draw_reports(pu_states_, cluster_sizes, cfg.q_f, cfg.q_d, rng);
  out.sensing.beta.resize(M + 1);
  for (int m = 0; m <= M; ++m) {
    out.sensing.beta[m].resize(N);
    for (int n = 0; n < N; ++n)
      out.sensing.beta[m][n] = posterior_beta(out.sensing.report[m][n], 1.0 - cfg.q_act, cfg.q_f,
                                              cfg.q_d, &out.sensing.degenerate);
  }
  ++frame_count_;

  const ChannelSnapshot chan = draw_channel(topo_, rng);

  // Step 2: backward recursion. Each relay builds its value curve from
  // local CSI/RSI and feeds the breakpoints back.
  std::vector<GoodputCurve> curves;
  curves.reserve(M);
  std::vector<ClusterProblem> cluster_probs;
  cluster_probs.reserve(M);
  for (int m = 1; m <= M; ++m) {
    cluster_probs.push_back(cluster_problem(m, chan, out.sensing));
    const auto& cp = cluster_probs.back();
    if (cfg.curve_mode == CurveMode::Pfs) {
      curves.push_back(build_curve_pfs(cp, cfg.lemma3_literal_l));
    } else {
      std::vector<std::vector<int>> classes(cp.n_users);
      for (int k = 0; k < cp.n_users; ++k) classes[k] = {k};
      curves.push_back(build_curve_general(compute_class_points(cp, classes, opts_)));
    }
    out.feedback_reals += curves.back().feedback_reals();
  }

  // Step 3: phase one at the BS.
  BsProblem bp;
  bp.n_sub = N;
  bp.beta0 = out.sensing.beta[0];
  const double tau0 = topo_.clusters[0].tau;
  const double tau0_eff = cfg.interference_tau_squared ? tau0 * tau0 : tau0;
  bp.itau0.resize(N);
  for (int n = 0; n < N; ++n) bp.itau0[n] = tau0_eff * (1.0 - bp.beta0[n]);
  const int n_direct = topo_.cluster_size(0) - M;
  bp.phi_ms.assign(N, std::vector<double>(n_direct));
  bp.phi_rs.assign(N, std::vector<double>(M));
  for (int n = 0; n < N; ++n) {
    for (int j = 0; j < n_direct; ++j) bp.phi_ms[n][j] = chan.link[0][n][M + j].phi;
    for (int m = 0; m < M; ++m) bp.phi_rs[n][m] = chan.link[0][n][m].phi;
  }
  bp.w_ms.resize(n_direct);
  for (int j = 0; j < n_direct; ++j) bp.w_ms[j] = pfs_.weight(topo_.ms_index[0][M + j]);
  bp.curves = curves;
  bp.power = topo_.P0;
  bp.i_bar = topo_.I_bar;
  bp.epsilon = cfg.epsilon;
  out.bs = solve_bs(bp, opts_);
  out.rs_multi_subchannel = out.bs.rs_multi_subchannel;
  out.all_converged = out.bs.converged;

  // Phase-one decode simulation.
  out.decode_t.assign(M + 1, std::vector<char>(N, 0));
  for (int n = 0; n < N; ++n) {
    if (out.bs.kind[n] == BsWinner::None) continue;
    const int S0 = out.sensing.S[0][n];
    if (out.bs.kind[n] == BsWinner::Ms) {
      const int k0 = M + out.bs.idx[n];
      const auto& lk = chan.link[0][n][k0];
      const bool ok = decode_indicator(out.bs.r[n], lk.h, topo_.users[0][k0].l_server, 1.0,
                                       out.bs.p[n], S0, 0.5);
      const int u = topo_.ms_index[0][k0];
      out.ms_scheduled[u] = 1;
      if (S0 && out.bs.r[n] > 0.0) out.ms_allowed[u] = 1;
      out.ms_sched_rate[u] += out.bs.r[n];
      if (ok) out.ms_goodput[u] += out.bs.r[n];
      out.hops.push_back({0, n, k0, out.bs.r[n], S0 == 1, ok, false});
    } else {
      const int m0 = out.bs.idx[n];  // relay index, cluster m0 + 1
      const auto& lk = chan.link[0][n][m0];
      const bool ok = decode_indicator(out.bs.r[n], lk.h, topo_.users[0][m0].l_server, 1.0,
                                       out.bs.p[n], S0, 0.5);
      out.decode_t[m0 + 1][n] = ok ? 1 : 0;
      out.hops.push_back({0, n, m0, out.bs.r[n], S0 == 1, ok, true});
    }
  }

  // Step 4: phase two at each decoding relay. Realized budgets scale the
  // partition by what actually arrived.
  out.budgets.assign(M + 1, {});
  out.rs.resize(M);
  for (int m = 1; m <= M; ++m) {
    const int m0 = m - 1;
    const int K = topo_.cluster_size(m);
    out.budgets[m].assign(K, 0.0);
    if (out.bs.d[m0].empty()) continue;
    double arrived = 0.0;
    for (int n = 0; n < N; ++n)
      if (out.bs.kind[n] == BsWinner::Rs && out.bs.idx[n] == m0 && out.decode_t[m][n])
        arrived += out.bs.r[n];
    if (arrived <= 0.0) continue;
    double total_budget = 0.0;
    for (int k = 0; k < K; ++k) {
      out.budgets[m][k] = out.bs.d[m0][k] * arrived;
      total_budget += out.budgets[m][k];
    }
    if (total_budget <= 0.0) continue;

    out.rs[m0] = solve_rs(cluster_probs[m0], out.budgets[m], opts_, curves[m0].pts);
    out.all_converged = out.all_converged && out.rs[m0].converged;
    for (const auto& lk : out.rs[m0].links) {
      if (lk.r <= 0.0) continue;
      const auto& ch = chan.link[m][lk.n][lk.k];
      const bool ok = decode_indicator(lk.r, ch.h, topo_.users[m][lk.k].l_server, lk.alpha,
                                       lk.p, out.sensing.S[m][lk.n], 0.25);
      const int u = topo_.ms_index[m][lk.k];
      out.ms_scheduled[u] = 1;
      if (out.sensing.S[m][lk.n] == 1) out.ms_allowed[u] = 1;
      out.ms_sched_rate[u] += lk.r;
      if (ok) out.ms_goodput[u] += lk.r;
      out.hops.push_back({m, lk.n, lk.k, lk.r, out.sensing.S[m][lk.n] == 1, ok, false});
    }
  }

  // PFS averaging; the scheduled rate enters the recursion (goodput-based
  // averaging behind a config flag).
  for (std::size_t u = 0; u < topo_.ms.size(); ++u)
    pfs_.update(static_cast<int>(u),
                cfg.pfs_goodput_averaging ? out.ms_goodput[u] : out.ms_sched_rate[u]);

  return out;
}

}  // namespace rcofdma
