#include "rcofdma/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rcofdma/rng.hpp"

namespace rcofdma {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

RunAccumulator::RunAccumulator(const Topology& topo) : topo_(&topo) {
  goodput_sum_.assign(topo.ms.size(), 0.0);
  access_count_.assign(topo.ms.size(), 0);
}

void RunAccumulator::add(const FrameOutcome& frame) {
  for (std::size_t u = 0; u < goodput_sum_.size(); ++u) {
    goodput_sum_[u] += frame.ms_goodput[u];
    access_count_[u] += frame.ms_allowed[u] ? 1 : 0;
  }
  feedback_sum_ += static_cast<double>(frame.feedback_reals);
  ++frames_;
}

RunMetrics RunAccumulator::finish(const PfsState& pfs) const {
  if (frames_ == 0) throw std::invalid_argument("aggregate: no frames");
  const Topology& topo = *topo_;
  const auto& cfg = topo.cfg;
  RunMetrics m;
  m.frames = frames_;
  const std::size_t U = goodput_sum_.size();
  m.user_avg_goodput.resize(U);
  m.user_dist_m.resize(U);
  m.user_is_edge.resize(U);

  long edge_access = 0;
  long edge_users = 0;
  double edge_goodput = 0.0;
  for (std::size_t u = 0; u < U; ++u) {
    m.user_avg_goodput[u] = goodput_sum_[u] / frames_;
    const auto& ref = topo.ms[u];
    m.user_dist_m[u] = topo.users[ref.m][ref.k].dist_bs_m;
    m.user_is_edge[u] = topo.is_edge_ms(ref) ? 1 : 0;
    m.total_goodput += m.user_avg_goodput[u];
    if (m.user_is_edge[u]) {
      ++edge_users;
      edge_access += access_count_[u];
      edge_goodput += m.user_avg_goodput[u];
    }
    m.sum_log_rtilde += std::log(std::max(pfs.rtilde[u], pfs.floor));
  }
  m.mean_goodput = m.total_goodput / static_cast<double>(U);
  m.mean_edge_goodput = edge_users ? edge_goodput / edge_users : 0.0;
  m.edge_access_prob =
      edge_users ? static_cast<double>(edge_access) / (static_cast<double>(edge_users) * frames_)
                 : 0.0;
  m.feedback_reals_per_frame = feedback_sum_ / frames_;

  m.hist_mean.assign(cfg.hist_bins, 0.0);
  m.hist_count.assign(cfg.hist_bins, 0);
  for (std::size_t u = 0; u < U; ++u) {
    int bin = static_cast<int>(m.user_dist_m[u] / cfg.cell_radius_m * cfg.hist_bins);
    bin = std::clamp(bin, 0, cfg.hist_bins - 1);
    m.hist_mean[bin] += m.user_avg_goodput[u];
    m.hist_count[bin] += 1;
  }
  for (int b = 0; b < cfg.hist_bins; ++b)
    if (m.hist_count[b] > 0) m.hist_mean[b] /= m.hist_count[b];
  return m;
}

RunMetrics aggregate(const Topology& topo, std::span<const FrameOutcome> frames,
                     const PfsState& pfs) {
  if (frames.empty()) throw std::invalid_argument("aggregate: no frames");
  RunAccumulator acc(topo);
  for (const auto& f : frames) acc.add(f);
  return acc.finish(pfs);
}

double theorem1_throughput(int n_sub, double q_act, int k_c, double p_m, double l_mk) {
  if (k_c < 2) throw std::invalid_argument("theorem1_throughput: K_c must be >= 2");
  const double gate = n_sub * (1.0 - q_act) * (1.0 - std::pow(q_act, n_sub));
  return gate / (4.0 * k_c) * std::log2(1.0 + p_m / n_sub * l_mk * std::log(k_c));
}

double theorem1_throughput_quadrature(int n_sub, double q_act, int k_c, double p_m, double l_mk) {
  if (k_c < 2) throw std::invalid_argument("theorem1_throughput_quadrature: K_c must be >= 2");
  // E[(1/4) log2(1 + (P/N) l X)], X the max of K_c unit exponentials:
  // density K (1-e^-x)^(K-1) e^-x. Simpson on [0, ln K + 45].
  const double c = p_m / n_sub * l_mk;
  const double hi = std::log(static_cast<double>(k_c)) + 45.0;
  const int steps = 20000;  // even
  const double h = hi / steps;
  auto f = [&](double x) {
    const double cdf_pow = std::pow(-std::expm1(-x), k_c - 1);
    return k_c * cdf_pow * std::exp(-x) * 0.25 * std::log2(1.0 + c * x);
  };
  double sum = f(0.0) + f(hi);
  for (int i = 1; i < steps; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  const double integral = sum * h / 3.0;
  const double gate = n_sub * (1.0 - q_act) * (1.0 - std::pow(q_act, n_sub));
  return gate / k_c * integral;
}

double baseline_throughput_no_rs(int n_sub, double q_act, int k_c, int n_rs, double p_0,
                                 double l_b) {
  if (n_rs < 1) throw std::invalid_argument("baseline_throughput_no_rs: M must be >= 1");
  const double gate = std::pow(1.0 - q_act, n_rs + 1);
  return gate * n_sub / (static_cast<double>(n_rs) * k_c) *
         std::log2(1.0 + p_0 / n_sub * l_b * std::log(static_cast<double>(k_c) * n_rs));
}

int pfs_user_selection_asymptotic(std::span<const double> fading_magnitudes) {
  if (fading_magnitudes.empty())
    throw std::invalid_argument("pfs_user_selection_asymptotic: empty input");
  int best = 0;
  for (std::size_t k = 1; k < fading_magnitudes.size(); ++k)
    if (fading_magnitudes[k] > fading_magnitudes[best]) best = static_cast<int>(k);
  return best;
}

namespace {

// Budget-respecting goodput of a fixed assignment/power choice: bits go to
// the highest-beta subchannels first.
double graded_goodput(const ClusterProblem& prob, std::span<const double> budgets,
                      const std::vector<int>& assign, const std::vector<double>& power) {
  const int N = prob.n_sub;
  std::vector<double> rate(N, 0.0);
  for (int n = 0; n < N; ++n) {
    if (assign[n] < 0 || power[n] <= 0.0) continue;
    const double phi = prob.phi_at(n, assign[n]);
    if (phi <= 0.0) continue;
    rate[n] = prob.rate_factor * std::log1p(power[n] * phi) / kLn2;
  }
  for (int k = 0; k < prob.n_users; ++k) {
    if (!std::isfinite(budgets[k])) continue;
    std::vector<int> owned;
    double total = 0.0;
    for (int n = 0; n < N; ++n)
      if (assign[n] == k) {
        owned.push_back(n);
        total += rate[n];
      }
    if (total <= budgets[k]) continue;
    std::sort(owned.begin(), owned.end(), [&](int a, int b) {
      if (prob.beta[a] != prob.beta[b]) return prob.beta[a] < prob.beta[b];
      return a < b;
    });
    double excess = total - budgets[k];
    for (int n : owned) {
      const double cut = std::min(excess, rate[n]);
      rate[n] -= cut;
      excess -= cut;
      if (excess <= 0.0) break;
    }
  }
  double obj = 0.0;
  for (int n = 0; n < N; ++n)
    if (assign[n] >= 0)
      obj += prob.w[assign[n]] * (1.0 - prob.epsilon) * prob.beta[n] * rate[n];
  return obj;
}

}  // namespace

double oracle_rs(const ClusterProblem& prob, std::span<const double> budgets, int grid) {
  if (prob.n_sub > 2 || prob.n_users > 2)
    throw std::invalid_argument("oracle_rs: instance too large (N <= 2, K <= 2)");
  const int N = prob.n_sub;
  const int K = prob.n_users;
  const double P = prob.power;

  std::vector<double> icap(N, std::numeric_limits<double>::infinity());
  for (int n = 0; n < N; ++n)
    if (prob.itau[n] > 0.0) icap[n] = prob.i_bar / prob.itau[n];

  double best = 0.0;
  std::vector<int> assign(N, -1);
  std::vector<double> power(N, 0.0);

  const int combos = static_cast<int>(std::pow(K + 1, N));
  for (int c = 0; c < combos; ++c) {
    int rem = c;
    for (int n = 0; n < N; ++n) {
      assign[n] = rem % (K + 1) - 1;
      rem /= K + 1;
    }
    if (N == 1 || assign[1] < 0 || assign[0] < 0) {
      // at most one active subchannel: single power loop
      const int active = assign[0] >= 0 ? 0 : (N > 1 && assign[1] >= 0 ? 1 : -1);
      std::fill(power.begin(), power.end(), 0.0);
      if (active < 0) {
        best = std::max(best, graded_goodput(prob, budgets, assign, power));
        continue;
      }
      for (int i = 0; i <= grid; ++i) {
        power[active] = std::min(P * i / grid, icap[active]);
        best = std::max(best, graded_goodput(prob, budgets, assign, power));
      }
    } else {
      for (int i = 0; i <= grid; ++i) {
        for (int j = 0; i + j <= grid; ++j) {
          power[0] = std::min(P * i / grid, icap[0]);
          power[1] = std::min(P * j / grid, icap[1]);
          best = std::max(best, graded_goodput(prob, budgets, assign, power));
        }
      }
    }
  }
  return best;
}

double oracle_bs(const BsProblem& prob, int grid) {
  const int N = prob.n_sub;
  const int C = prob.n_ms() + prob.n_rs();  // candidate count
  if (N > 2 || C > 2) throw std::invalid_argument("oracle_bs: instance too large");

  std::vector<double> icap(N, std::numeric_limits<double>::infinity());
  for (int n = 0; n < N; ++n)
    if (prob.itau0[n] > 0.0) icap[n] = prob.i_bar / prob.itau0[n];

  auto value_of = [&](int n, int cand, double p) {
    if (cand < 0 || p <= 0.0) return 0.0;
    if (cand < prob.n_ms()) {
      const double phi = prob.phi_ms[n][cand];
      if (phi <= 0.0) return 0.0;
      const double r = prob.rate_factor * std::log1p(p * phi) / kLn2;
      return prob.w_ms[cand] * (1.0 - prob.epsilon) * prob.beta0[n] * r;
    }
    const int m = cand - prob.n_ms();
    const double phi = prob.phi_rs[n][m];
    if (phi <= 0.0) return 0.0;
    const double r = prob.rate_factor * std::log1p(p * phi) / kLn2;
    return (1.0 - prob.epsilon) * prob.beta0[n] * prob.curves[m].eval(r);
  };

  double best = 0.0;
  std::vector<int> assign(N, -1);
  const int combos = static_cast<int>(std::pow(C + 1, N));
  for (int c = 0; c < combos; ++c) {
    int rem = c;
    for (int n = 0; n < N; ++n) {
      assign[n] = rem % (C + 1) - 1;
      rem /= C + 1;
    }
    if (N == 1 || assign[1] < 0 || assign[0] < 0) {
      const int active = assign[0] >= 0 ? 0 : (N > 1 && assign[1] >= 0 ? 1 : -1);
      if (active < 0) continue;
      for (int i = 0; i <= grid; ++i) {
        const double p = std::min(prob.power * i / grid, icap[active]);
        best = std::max(best, value_of(active, assign[active], p));
      }
    } else {
      for (int i = 0; i <= grid; ++i)
        for (int j = 0; i + j <= grid; ++j) {
          const double p0 = std::min(prob.power * i / grid, icap[0]);
          const double p1 = std::min(prob.power * j / grid, icap[1]);
          best = std::max(best, value_of(0, assign[0], p0) + value_of(1, assign[1], p1));
        }
    }
  }
  return best;
}

AsymptoticPfsResult asymptotic_pfs_sim(int k_c, int n_sub, double q_act, double snr_per_sub,
                                       int frames, int warmup, int t_s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> rtilde(k_c, 1e-6);
  std::vector<double> goodput(k_c, 0.0);
  std::vector<double> fade(k_c);
  std::vector<double> sched(k_c);
  long decisions = 0;
  long agree = 0;
  int counted_frames = 0;

  for (int t = 0; t < frames; ++t) {
    // Strong-backhaul gate: the BS reaches the relay unless every
    // cluster-0 subchannel is PU-occupied.
    bool delivered = false;
    for (int n = 0; n < n_sub; ++n) {
      const bool idle = !rng.bernoulli(q_act);
      delivered = delivered || idle;
    }
    std::fill(sched.begin(), sched.end(), 0.0);
    const bool counting = t >= warmup;
    if (counting) ++counted_frames;

    if (delivered) {
      for (int n = 0; n < n_sub; ++n) {
        if (rng.bernoulli(q_act)) continue;  // cluster PU active
        for (int k = 0; k < k_c; ++k) fade[k] = rng.exponential();
        int win = 0;
        double bestv = -1.0;
        for (int k = 0; k < k_c; ++k) {
          const double v = std::log1p(snr_per_sub * fade[k]) / kLn2 / std::max(rtilde[k], 1e-6);
          if (v > bestv) {
            bestv = v;
            win = k;
          }
        }
        const double rate = 0.25 * std::log1p(snr_per_sub * fade[win]) / kLn2;
        sched[win] += rate;
        if (counting) {
          goodput[win] += rate;
          ++decisions;
          if (pfs_user_selection_asymptotic(fade) == win) ++agree;
        }
      }
    }
    for (int k = 0; k < k_c; ++k)
      rtilde[k] = (1.0 - 1.0 / t_s) * rtilde[k] + sched[k] / t_s;
  }

  AsymptoticPfsResult out;
  double total = 0.0;
  for (double g : goodput) total += g;
  out.avg_user_throughput = counted_frames ? total / (static_cast<double>(k_c) * counted_frames) : 0.0;
  out.winner_agreement = decisions ? static_cast<double>(agree) / decisions : 0.0;
  return out;
}

}  // namespace rcofdma
