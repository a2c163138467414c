#include "rcofdma/solver_bs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rcofdma {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kActionCap = 2.0;

double rate_from_power(double p, double phi, double g) {
  return p > 0.0 && phi > 0.0 ? g * std::log1p(p * phi) / kLn2 : 0.0;
}

double power_from_rate(double r, double phi, double g) {
  return r > 0.0 && phi > 0.0 ? std::expm1(r / g * kLn2) / phi : 0.0;
}

// BS closed-form power (factor 1/2, no flow-balance multiplier).
double bs_power(double beta, double w, double nu, double eta, double itau, double phi,
                double eps, double g0) {
  if (phi <= 0.0) return 0.0;
  const double a = g0 * (1.0 - eps) * beta * w;
  if (a <= 0.0) return 0.0;
  const double denom = kLn2 * (nu + eta * itau);
  if (denom <= 0.0) return kInf;
  const double p = a / denom - 1.0 / phi;
  return p > 0.0 ? p : 0.0;
}

double bs_marginal(double p, double phi, double beta, double w, double eps, double g0) {
  if (p <= 0.0 || phi <= 0.0) return 0.0;
  const double a = g0 * (1.0 - eps) * beta * w;
  const double pphi = p * phi;
  return a * (std::log1p(pphi) / kLn2 - pphi / (kLn2 * (1.0 + pphi)));
}

}  // namespace

double decoupled_objective(const BsProblem& prob, const std::vector<std::vector<double>>& r_ms,
                           const std::vector<std::vector<double>>& r_rs) {
  double v = 0.0;
  for (int n = 0; n < prob.n_sub; ++n)
    for (int j = 0; j < prob.n_ms(); ++j)
      v += prob.w_ms[j] * (1.0 - prob.epsilon) * prob.beta0[n] * r_ms[n][j];
  for (int m = 0; m < prob.n_rs(); ++m)
    for (int n = 0; n < prob.n_sub; ++n)
      v += (1.0 - prob.epsilon) * prob.beta0[n] * prob.curves[m].eval(r_rs[m][n]);
  return v;
}

RsCandidate rs_candidate(const GoodputCurve& curve, double beta0n, double phi, double price,
                         double epsilon, double g0) {
  RsCandidate best;  // r = 0 always available at value 0
  if (curve.trivial() || phi <= 0.0 || beta0n <= 0.0) return best;
  const double weight = (1.0 - epsilon) * beta0n;

  auto consider = [&](double r) {
    if (r <= 0.0) return;
    const double p = power_from_rate(r, phi, g0);
    const double v = weight * curve.eval(r) - price * p;
    if (v > best.value) best = {r, p, v};
  };

  for (std::size_t i = 1; i < curve.pts.size(); ++i) {
    consider(curve.pts[i].r);
    // Interior stationary point of the segment ending at vertex i.
    const double s =
        (curve.pts[i].g - curve.pts[i - 1].g) / (curve.pts[i].r - curve.pts[i - 1].r);
    if (price > 0.0 && s > 0.0) {
      const double arg = weight * s * g0 * phi / (price * kLn2);
      if (arg > 1.0) {
        const double r_star = g0 * std::log2(arg);
        if (r_star > curve.pts[i - 1].r && r_star < curve.pts[i].r) consider(r_star);
      }
    }
  }
  return best;
}

std::vector<double> packet_partition(const GoodputCurve& curve, double granted_rate) {
  if (granted_rate < 0.0)
    throw std::invalid_argument("packet_partition: granted rate must be >= 0");
  std::vector<double> budgets;
  if (curve.pts.empty()) return budgets;
  const std::size_t n_users = curve.pts.back().user_rates.size();
  budgets.assign(n_users, 0.0);
  if (granted_rate == 0.0 || curve.trivial()) return budgets;

  const double r = std::min(granted_rate, curve.r_sat());
  std::size_t i = 0;
  while (i + 1 < curve.pts.size() && curve.pts[i + 1].r <= r) ++i;
  if (i + 1 == curve.pts.size()) return curve.pts.back().user_rates;  // r at saturation

  const auto& a = curve.pts[i];
  const auto& b = curve.pts[i + 1];
  const double theta = (r - a.r) / (b.r - a.r);
  for (std::size_t k = 0; k < n_users; ++k) {
    const double ra = a.user_rates.empty() ? 0.0 : a.user_rates[k];
    budgets[k] = (1.0 - theta) * ra + theta * b.user_rates[k];
  }
  return budgets;
}

namespace {

struct BsRecovered {
  std::vector<BsWinner> kind;
  std::vector<int> idx;
  std::vector<double> p, r;
  double objective = 0.0;
};

// Exact power split for a frozen assignment: the per-subchannel values are
// concave in p, so water-filling on a common price (bisection, with the
// interference/saturation boxes as caps) is optimal.
std::vector<double> waterfill_power(const BsProblem& prob, const std::vector<BsWinner>& kind,
                                    const std::vector<int>& idx) {
  const int N = prob.n_sub;
  const double g0 = prob.rate_factor;
  std::vector<double> cap(N, 0.0);
  for (int n = 0; n < N; ++n) {
    if (kind[n] == BsWinner::None) continue;
    double c = prob.itau0[n] > 0.0 ? prob.i_bar / prob.itau0[n] : kInf;
    if (kind[n] == BsWinner::Rs)
      c = std::min(c, power_from_rate(prob.curves[idx[n]].r_sat(), prob.phi_rs[n][idx[n]], g0));
    cap[n] = std::min(c, 1.0);  // normalized budget bound
  }
  auto power_at = [&](int n, double price) {
    if (kind[n] == BsWinner::None) return 0.0;
    if (kind[n] == BsWinner::Ms) {
      const double phi = prob.phi_ms[n][idx[n]];
      if (phi <= 0.0) return 0.0;
      const double a = g0 * (1.0 - prob.epsilon) * prob.beta0[n] * prob.w_ms[idx[n]];
      if (a <= 0.0) return 0.0;
      if (price <= 0.0) return cap[n];
      return std::clamp(a / (kLn2 * price) - 1.0 / phi, 0.0, cap[n]);
    }
    const RsCandidate c = rs_candidate(prob.curves[idx[n]], prob.beta0[n], prob.phi_rs[n][idx[n]],
                                       std::max(price, 1e-12), prob.epsilon, g0);
    return std::min(c.p, cap[n]);
  };
  auto total_at = [&](double price) {
    double s = 0.0;
    for (int n = 0; n < N; ++n) s += power_at(n, price);
    return s;
  };
  double price = 0.0;
  if (total_at(0.0) > 1.0) {
    double lo = 1e-9, hi = 1.0;
    while (total_at(hi) > 1.0 && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (total_at(mid) > 1.0 ? lo : hi) = mid;
    }
    price = hi;
  }
  std::vector<double> p(N, 0.0);
  for (int n = 0; n < N; ++n) p[n] = power_at(n, price);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total > 1.0)
    for (auto& v : p) v /= total;
  return p;
}

BsRecovered finalize_bs(const BsProblem& prob, const std::vector<BsWinner>& kind,
                        const std::vector<int>& idx, const std::vector<double>& pw) {
  const int N = prob.n_sub;
  const double g0 = prob.rate_factor;
  BsRecovered out;
  out.kind = kind;
  out.idx = idx;
  out.p = pw;
  out.r.assign(N, 0.0);
  out.objective = 0.0;
  for (int n = 0; n < N; ++n) {
    if (kind[n] == BsWinner::None) continue;
    const double phi = kind[n] == BsWinner::Ms ? prob.phi_ms[n][idx[n]] : prob.phi_rs[n][idx[n]];
    out.r[n] = rate_from_power(pw[n], phi, g0);
    if (kind[n] == BsWinner::Rs) {
      const double sat = prob.curves[idx[n]].r_sat();
      if (out.r[n] > sat) {  // bits past saturation are worthless
        out.r[n] = sat;
        out.p[n] = power_from_rate(sat, phi, g0);
      }
      out.objective += (1.0 - prob.epsilon) * prob.beta0[n] * prob.curves[idx[n]].eval(out.r[n]);
    } else {
      out.objective += prob.w_ms[idx[n]] * (1.0 - prob.epsilon) * prob.beta0[n] * out.r[n];
    }
  }
  return out;
}

BsRecovered recover_primal(const BsProblem& prob, const std::vector<BsWinner>& kind,
                           const std::vector<int>& idx, const DualState& duals) {
  const int N = prob.n_sub;
  const double g0 = prob.rate_factor;

  std::vector<double> p(N, 0.0), icap(N, kInf), pcap(N, kInf);
  for (int n = 0; n < N; ++n) {
    if (prob.itau0[n] > 0.0) icap[n] = prob.i_bar / prob.itau0[n];
    if (kind[n] == BsWinner::Ms) {
      p[n] = bs_power(prob.beta0[n], prob.w_ms[idx[n]], duals.nu, duals.eta[n], prob.itau0[n],
                      prob.phi_ms[n][idx[n]], prob.epsilon, g0);
    } else if (kind[n] == BsWinner::Rs) {
      const double price = duals.nu + duals.eta[n] * prob.itau0[n];
      const RsCandidate c = rs_candidate(prob.curves[idx[n]], prob.beta0[n],
                                         prob.phi_rs[n][idx[n]], price, prob.epsilon, g0);
      p[n] = c.p;
      pcap[n] = power_from_rate(prob.curves[idx[n]].r_sat(), prob.phi_rs[n][idx[n]], g0);
    }
    p[n] = std::min(std::min(p[n], kActionCap), std::min(icap[n], pcap[n]));
  }

  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total <= 0.0) return finalize_bs(prob, kind, idx, p);
  if (total > 1.0) {
    for (auto& v : p) v *= 1.0 / total;
    return finalize_bs(prob, kind, idx, p);
  }
  double scale = 1.0 / total;
  for (int n = 0; n < N; ++n)
    if (p[n] > 0.0) scale = std::min(scale, std::min(icap[n], pcap[n]) / p[n]);
  if (scale <= 1.0) return finalize_bs(prob, kind, idx, p);
  std::vector<double> up = p;
  for (auto& v : up) v *= scale;
  BsRecovered a = finalize_bs(prob, kind, idx, p);
  BsRecovered b = finalize_bs(prob, kind, idx, up);
  return b.objective > a.objective ? b : a;
}

}  // namespace

BsAllocation solve_bs(const BsProblem& prob, const SolverOptions& opts) {
  const int N = prob.n_sub;
  const int J = prob.n_ms();
  const int M = prob.n_rs();

  // Normalize powers onto a unit budget.
  BsProblem np = prob;
  np.power = 1.0;
  for (auto& row : np.phi_ms)
    for (auto& v : row) v *= prob.power;
  for (auto& row : np.phi_rs)
    for (auto& v : row) v *= prob.power;
  for (auto& v : np.itau0) v *= prob.power;

  DualState duals;
  duals.lambda.assign(N, 0.0);
  duals.eta.assign(N, 0.0);
  duals.nu = 1.0;

  BsRecovered best;
  best.kind.assign(N, BsWinner::None);
  best.idx.assign(N, -1);
  best.p.assign(N, 0.0);
  best.r.assign(N, 0.0);
  best.objective = -1.0;
  double best_dual = kInf;
  bool converged = false;
  int iter = 0;

  std::vector<BsWinner> kind(N);
  std::vector<int> idx(N);
  std::vector<double> lambda_res(N), eta_res(N);

  for (iter = 1; iter <= opts.max_iter; ++iter) {
    double dual_val = 0.0;
    bool dual_unbounded = false;
    double used_power = 0.0;

    for (int n = 0; n < N; ++n) {
      BsWinner bk = BsWinner::None;
      int bi = -1;
      double bv = 0.0;
      double bp = 0.0;

      for (int j = 0; j < J; ++j) {
        const double p = bs_power(np.beta0[n], np.w_ms[j], duals.nu, duals.eta[n], np.itau0[n],
                                  np.phi_ms[n][j], np.epsilon, np.rate_factor);
        if (std::isinf(p)) {
          dual_unbounded = true;
          continue;
        }
        const double x =
            bs_marginal(p, np.phi_ms[n][j], np.beta0[n], np.w_ms[j], np.epsilon, np.rate_factor);
        if (x - duals.lambda[n] > 0.0) dual_val += x - duals.lambda[n];
        if (x > bv) {
          bv = x;
          bk = BsWinner::Ms;
          bi = j;
          bp = std::min(p, kActionCap);
        }
      }
      const double price = duals.nu + duals.eta[n] * np.itau0[n];
      for (int m = 0; m < M; ++m) {
        const RsCandidate c = rs_candidate(np.curves[m], np.beta0[n], np.phi_rs[n][m], price,
                                           np.epsilon, np.rate_factor);
        if (c.value - duals.lambda[n] > 0.0) dual_val += c.value - duals.lambda[n];
        if (c.value > bv) {
          bv = c.value;
          bk = BsWinner::Rs;
          bi = m;
          bp = std::min(c.p, kActionCap);
        }
      }

      kind[n] = bk;
      idx[n] = bi;
      dual_val += duals.lambda[n];
      lambda_res[n] = 1.0 - (bk != BsWinner::None ? 1.0 : 0.0);
      used_power += bp;
      eta_res[n] = np.i_bar - np.itau0[n] * bp;
    }
    const double nu_res = 1.0 - used_power;
    dual_val += duals.nu;
    for (int n = 0; n < N; ++n) dual_val += duals.eta[n] * np.i_bar;
    if (!dual_unbounded) best_dual = std::min(best_dual, dual_val);

    BsRecovered rec = recover_primal(np, kind, idx, duals);
    if (rec.objective > best.objective) best = std::move(rec);

    const double max_change =
        subgradient_step(duals, lambda_res, nu_res, eta_res, {}, iter, opts.delta0);
    if (max_change < opts.tol) {
      converged = true;
      break;
    }
  }

  // Exact water-filling polish: every assignment on desk-size instances,
  // otherwise the best assignment the dual pass visited.
  const int n_cand = J + M;
  const double combos = std::pow(static_cast<double>(n_cand) + 1.0, N);
  if (combos <= 81.0) {
    std::vector<BsWinner> ek(N);
    std::vector<int> ei(N);
    for (int c = 0; c < static_cast<int>(combos); ++c) {
      int rem = c;
      for (int n = 0; n < N; ++n) {
        const int v = rem % (n_cand + 1) - 1;
        rem /= n_cand + 1;
        if (v < 0) {
          ek[n] = BsWinner::None;
          ei[n] = -1;
        } else if (v < J) {
          ek[n] = BsWinner::Ms;
          ei[n] = v;
        } else {
          ek[n] = BsWinner::Rs;
          ei[n] = v - J;
        }
      }
      BsRecovered cand = finalize_bs(np, ek, ei, waterfill_power(np, ek, ei));
      if (cand.objective > best.objective) best = std::move(cand);
    }
  } else if (best.objective > 0.0) {
    const std::vector<double> pw = waterfill_power(np, best.kind, best.idx);
    BsRecovered polished = finalize_bs(np, best.kind, best.idx, pw);
    if (polished.objective > best.objective) best = std::move(polished);
  }

  BsAllocation out;
  out.kind = best.kind;
  out.idx = best.idx;
  out.p = best.p;
  for (auto& v : out.p) v *= prob.power;
  out.r = best.r;
  out.objective = std::max(best.objective, 0.0);
  out.dual_bound = best_dual;
  out.converged = converged;
  out.iters = std::min(iter, opts.max_iter);

  // Packet partition per relay from its total granted rate; d fractions are
  // uniform across the relay's subchannels.
  out.budgets.assign(M, {});
  out.d.assign(M, {});
  for (int m = 0; m < M; ++m) {
    const double granted = out.rs_rate(m);
    int held = 0;
    for (int n = 0; n < N; ++n)
      if (out.kind[n] == BsWinner::Rs && out.idx[n] == m) ++held;
    if (held > 1) ++out.rs_multi_subchannel;
    if (granted <= 0.0) continue;
    out.budgets[m] = packet_partition(prob.curves[m], granted);
    out.d[m].assign(out.budgets[m].size(), 0.0);
    double dsum = 0.0;
    for (std::size_t k = 0; k < out.budgets[m].size(); ++k) {
      out.d[m][k] = out.budgets[m][k] / granted;
      dsum += out.d[m][k];
    }
    if (dsum > 1.0)  // floating-point guard; the partition sums to <= 1 by construction
      for (auto& v : out.d[m]) v /= dsum;
  }
  return out;
}

}  // namespace rcofdma
