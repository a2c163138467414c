#include "rcofdma/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace rcofdma {

std::vector<double> baseline_activity(const ScenarioConfig& cfg, BaselineKind kind) {
  std::vector<double> q(cfg.M + 1, cfg.q_act);
  if (kind == BaselineKind::NoRsLowRsPuActivity)
    for (int m = 1; m <= cfg.M; ++m) q[m] = 1.0 - std::pow(1.0 - cfg.q_act, 1.0 / 6.0);
  return q;
}

NoRsScheduler::NoRsScheduler(const Topology& topo, BaselineKind kind)
    : topo_(topo), kind_(kind) {
  const auto& cfg = topo_.cfg;
  pfs_.init(topo_.ms.size(), cfg.pfs_floor, cfg.t_s);
  opts_.max_iter = cfg.solver_max_iter;
  opts_.tol = cfg.solver_tol;
  opts_.delta0 = cfg.solver_delta0;
  activity_ = baseline_activity(cfg, kind);
}

FrameOutcome NoRsScheduler::run_frame(Rng& rng) {
  const auto& cfg = topo_.cfg;
  const int M = cfg.M;
  const int N = cfg.N;
  const int U = static_cast<int>(topo_.ms.size());

  FrameOutcome out;
  out.ms_sched_rate.assign(U, 0.0);
  out.ms_goodput.assign(U, 0.0);
  out.ms_scheduled.assign(U, 0);
  out.ms_allowed.assign(U, 0);

  if (frame_count_ % cfg.pu_coherence_frames == 0 || pu_states_.empty())
    pu_states_ = draw_pu_states(activity_, N, rng);
  std::vector<int> cluster_sizes(M + 1);
  for (int m = 0; m <= M; ++m) cluster_sizes[m] = topo_.cluster_size(m);
  out.sensing.S = pu_states_;
  out.sensing.report = draw_reports(pu_states_, cluster_sizes, cfg.q_f, cfg.q_d, rng);
  out.sensing.beta.resize(M + 1);
  for (int m = 0; m <= M; ++m) {
    out.sensing.beta[m].resize(N);
    for (int n = 0; n < N; ++n)
      out.sensing.beta[m][n] = posterior_beta(out.sensing.report[m][n], 1.0 - activity_[m],
                                              cfg.q_f, cfg.q_d, &out.sensing.degenerate);
  }
  ++frame_count_;

  // Composite availability: the BS coverage spans every PU, so a subchannel
  // is usable only when all M+1 clusters are idle. Independence across
  // clusters makes the joint posterior the product of the per-cluster ones.
  out.beta_comp.assign(N, 1.0);
  out.s_comp.assign(N, 1);
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m <= M; ++m) {
      out.beta_comp[n] *= out.sensing.beta[m][n];
      out.s_comp[n] = out.s_comp[n] && out.sensing.S[m][n];
    }
  }

  const DirectChannelSnapshot chan = draw_channel_bs_direct(topo_, rng);

  BsProblem bp;
  bp.n_sub = N;
  bp.beta0 = out.beta_comp;
  bp.itau0.assign(N, 0.0);
  for (int n = 0; n < N; ++n) {
    double worst = 0.0;
    for (int m = 0; m <= M; ++m) {
      const double tau = topo_.clusters[m].tau_bs;
      const double tau_eff = cfg.interference_tau_squared ? tau * tau : tau;
      worst = std::max(worst, tau_eff * (1.0 - out.sensing.beta[m][n]));
    }
    bp.itau0[n] = worst;
  }
  bp.phi_ms.assign(N, std::vector<double>(U));
  for (int n = 0; n < N; ++n)
    for (int u = 0; u < U; ++u) {
      if (kind_ == BaselineKind::NaivePerfectCsit) {
        const auto& ref = topo_.ms[u];
        bp.phi_ms[n][u] = topo_.users[ref.m][ref.k].l_bs * std::norm(chan.link[n][u].hhat);
      } else {
        bp.phi_ms[n][u] = chan.link[n][u].phi;
      }
    }
  bp.w_ms.resize(U);
  for (int u = 0; u < U; ++u) bp.w_ms[u] = pfs_.weight(u);
  bp.power = topo_.P0;
  bp.i_bar = topo_.I_bar;
  bp.epsilon = cfg.epsilon;
  out.bs = solve_bs(bp, opts_);
  out.all_converged = out.bs.converged;

  for (int n = 0; n < N; ++n) {
    if (out.bs.kind[n] != BsWinner::Ms) continue;
    const int u = out.bs.idx[n];
    const auto& ref = topo_.ms[u];
    const bool ok = decode_indicator(out.bs.r[n], chan.link[n][u].h,
                                     topo_.users[ref.m][ref.k].l_bs, 1.0, out.bs.p[n],
                                     out.s_comp[n], 0.5);
    out.ms_scheduled[u] = 1;
    if (out.s_comp[n] && out.bs.r[n] > 0.0) out.ms_allowed[u] = 1;
    out.ms_sched_rate[u] += out.bs.r[n];
    if (ok) out.ms_goodput[u] += out.bs.r[n];
    out.hops.push_back({ref.m, n, ref.k, out.bs.r[n], out.s_comp[n] == 1, ok, false});
  }

  for (int u = 0; u < U; ++u)
    pfs_.update(u, cfg.pfs_goodput_averaging ? out.ms_goodput[u] : out.ms_sched_rate[u]);

  return out;
}

}  // namespace rcofdma
