#include "rcofdma/solver_rs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rcofdma {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Per-link cap on the normalized inner-problem power action. The dual
// objective is still evaluated with the uncapped stationary power; the cap
// only keeps early-iteration residuals on the budget scale.
constexpr double kActionCap = 2.0;

double rate_from_power(double p, double phi, double g) {
  return p > 0.0 && phi > 0.0 ? g * std::log1p(p * phi) / kLn2 : 0.0;
}

double power_from_rate(double r, double phi, double g) {
  return r > 0.0 && phi > 0.0 ? std::expm1(r / g * kLn2) / phi : 0.0;
}

}  // namespace

double power_closed_form(double alpha, double beta, double w, double mu_k, double nu,
                         double eta_n, double tau_eff, double phi, double epsilon) {
  if (alpha <= 0.0 || phi <= 0.0) return 0.0;
  const double a = 0.25 * ((1.0 - epsilon) * beta * w - mu_k);
  if (a <= 0.0) return 0.0;
  const double denom = kLn2 * (nu + eta_n * tau_eff);
  if (denom <= 0.0) return kInf;
  const double p = a / denom - 1.0 / phi;
  return p > 0.0 ? alpha * p : 0.0;
}

double marginal_benefit_X(double alpha, double p, double phi, double beta, double w, double mu_k,
                          double epsilon) {
  (void)alpha;
  if (p <= 0.0 || phi <= 0.0) return 0.0;
  const double a = 0.25 * ((1.0 - epsilon) * beta * w - mu_k);
  const double pphi = p * phi;
  const double bracket = std::log1p(pphi) / kLn2 - pphi / (kLn2 * (1.0 + pphi));
  return a * bracket;
}

int assign_subchannel(std::span<const double> X) {
  int winner = -1;
  double best = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    if (X[k] > best) {
      best = X[k];
      winner = static_cast<int>(k);
    }
  }
  return winner;
}

double subgradient_step(DualState& duals, std::span<const double> lambda_res, double nu_res,
                        std::span<const double> eta_res, std::span<const double> mu_res, int i,
                        double delta0) {
  const double delta = delta0 / std::sqrt(static_cast<double>(i));
  double max_change = 0.0;
  auto update = [&](double& mult, double res) {
    const double next = std::max(0.0, mult - delta * res);
    max_change = std::max(max_change, std::fabs(next - mult));
    mult = next;
  };
  for (std::size_t n = 0; n < lambda_res.size(); ++n) update(duals.lambda[n], lambda_res[n]);
  update(duals.nu, nu_res);
  for (std::size_t n = 0; n < eta_res.size(); ++n) update(duals.eta[n], eta_res[n]);
  for (std::size_t k = 0; k < mu_res.size(); ++k)
    if (std::isfinite(mu_res[k])) update(duals.mu[k], mu_res[k]);
  duals.iter = i;
  return max_change;
}

namespace {

struct Candidate {
  std::vector<RsLink> links;
  double objective = -1.0;
};

double links_objective(const ClusterProblem& prob, const std::vector<RsLink>& links) {
  double obj = 0.0;
  for (const auto& lk : links)
    obj += prob.w[lk.k] * (1.0 - prob.epsilon) * prob.beta[lk.n] * lk.r;
  return obj;
}

// Rates from frozen winners and powers, truncated onto the flow-balance
// budgets (dropping bits from the lowest-beta subchannels first) with each
// power re-matched to its final rate so every link sits exactly on the
// outage margin.
Candidate finalize_integer(const ClusterProblem& prob, std::span<const double> budgets,
                           const std::vector<int>& winner, const std::vector<double>& pw) {
  const int N = prob.n_sub;
  const double g = prob.rate_factor;
  std::vector<double> rate(N, 0.0), pfin = pw;
  for (int n = 0; n < N; ++n)
    if (winner[n] >= 0) rate[n] = rate_from_power(pw[n], prob.phi_at(n, winner[n]), g);

  for (int k = 0; k < prob.n_users; ++k) {
    const double budget = budgets[k];
    if (!std::isfinite(budget)) continue;
    double total = 0.0;
    std::vector<int> owned;
    for (int n = 0; n < N; ++n)
      if (winner[n] == k) {
        total += rate[n];
        owned.push_back(n);
      }
    if (total <= budget) continue;
    std::sort(owned.begin(), owned.end(), [&](int a, int b) {
      if (prob.beta[a] != prob.beta[b]) return prob.beta[a] < prob.beta[b];
      return a < b;
    });
    double excess = total - budget;
    for (int n : owned) {
      const double cut = std::min(excess, rate[n]);
      rate[n] -= cut;
      excess -= cut;
      pfin[n] = power_from_rate(rate[n], prob.phi_at(n, winner[n]), g);
      if (excess <= 0.0) break;
    }
  }
  Candidate out;
  for (int n = 0; n < N; ++n)
    if (winner[n] >= 0 && rate[n] > 0.0)
      out.links.push_back({n, winner[n], 1.0, pfin[n], rate[n]});
  out.objective = links_objective(prob, out.links);
  return out;
}

// Integer-winner primal recovery on a normalized problem (power budget 1):
// freeze winners, cap per-subchannel interference, rescale the power sum
// onto the budget when that helps.
Candidate recover_integer(const ClusterProblem& prob, std::span<const double> budgets,
                          const std::vector<int>& winner, const DualState& duals) {
  const int N = prob.n_sub;

  std::vector<double> p(N, 0.0), icap(N, kInf);
  for (int n = 0; n < N; ++n) {
    if (winner[n] < 0) continue;
    const int k = winner[n];
    p[n] = std::min(power_closed_form(1.0, prob.beta[n], prob.w[k], duals.mu[k], duals.nu,
                                      duals.eta[n], prob.itau[n], prob.phi_at(n, k),
                                      prob.epsilon),
                    kActionCap);
    if (prob.itau[n] > 0.0) icap[n] = prob.i_bar / prob.itau[n];
    p[n] = std::min(p[n], icap[n]);
  }

  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total <= 0.0) return finalize_integer(prob, budgets, winner, p);
  if (total > 1.0) {
    for (auto& v : p) v *= 1.0 / total;
    return finalize_integer(prob, budgets, winner, p);
  }
  // Under budget: scaling up to the tightest cap is either neutral or
  // beneficial; keep whichever recovers more goodput.
  double scale = 1.0 / total;
  for (int n = 0; n < N; ++n)
    if (p[n] > 0.0) scale = std::min(scale, icap[n] / p[n]);
  if (scale <= 1.0) return finalize_integer(prob, budgets, winner, p);
  std::vector<double> up = p;
  for (auto& v : up) v *= scale;
  Candidate a = finalize_integer(prob, budgets, winner, p);
  Candidate b = finalize_integer(prob, budgets, winner, up);
  return b.objective > a.objective ? b : a;
}

// Budget-aware exact split for a frozen winner set: KKT water-filling with
// an outer bisection on the power price and, per user, an inner bisection
// on the flow-balance multiplier whenever the budget binds.
std::vector<double> budget_waterfill_rs(const ClusterProblem& prob,
                                        const std::vector<int>& winner,
                                        std::span<const double> budgets) {
  const int N = prob.n_sub;
  const double g = prob.rate_factor;
  std::vector<double> cap(N, 0.0);
  for (int n = 0; n < N; ++n) {
    if (winner[n] < 0) continue;
    cap[n] = std::min(prob.itau[n] > 0.0 ? prob.i_bar / prob.itau[n] : kInf, 1.0);
  }

  auto power_one = [&](int n, double price, double mu) {
    const double phi = prob.phi_at(n, winner[n]);
    if (phi <= 0.0) return 0.0;
    const double a = g * ((1.0 - prob.epsilon) * prob.beta[n] * prob.w[winner[n]] - mu);
    if (a <= 0.0) return 0.0;
    if (price <= 0.0) return cap[n];
    return std::clamp(a / (kLn2 * price) - 1.0 / phi, 0.0, cap[n]);
  };

  std::vector<std::vector<int>> owned(prob.n_users);
  for (int n = 0; n < N; ++n)
    if (winner[n] >= 0) owned[winner[n]].push_back(n);

  std::vector<double> p(N, 0.0);
  auto solve_user = [&](int k, double price) {
    if (owned[k].empty()) return;
    auto rate_total = [&](double mu) {
      double t = 0.0;
      for (int n : owned[k])
        t += rate_from_power(power_one(n, price, mu), prob.phi_at(n, k), g);
      return t;
    };
    double mu = 0.0;
    if (std::isfinite(budgets[k]) && rate_total(0.0) > budgets[k]) {
      double lo = 0.0, hi = (1.0 - prob.epsilon) * prob.w[k];
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rate_total(mid) > budgets[k] ? lo : hi) = mid;
      }
      mu = hi;
    }
    for (int n : owned[k]) p[n] = power_one(n, price, mu);
  };
  auto total_at = [&](double price) {
    std::fill(p.begin(), p.end(), 0.0);
    for (int k = 0; k < prob.n_users; ++k) solve_user(k, price);
    return std::accumulate(p.begin(), p.end(), 0.0);
  };

  if (total_at(0.0) > 1.0) {
    double lo = 1e-9, hi = 1.0;
    while (total_at(hi) > 1.0 && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 70; ++i) {
      const double mid = 0.5 * (lo + hi);
      (total_at(mid) > 1.0 ? lo : hi) = mid;
    }
    total_at(hi);
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total > 1.0)
    for (auto& v : p) v /= total;
  return p;
}

// Time-share candidates from the relay's own hull: for each segment, mix
// the adjacent vertex allocations with weight theta and scale the mix onto
// the budgets. All quantities are linear in the mix, so feasibility is
// inherited from the vertices.
Candidate best_hull_mix(const ClusterProblem& prob, std::span<const double> budgets,
                        std::span<const CurvePoint> plans, double power_scale) {
  Candidate best;
  if (plans.size() < 2) return best;

  auto mix_value = [&](const CurvePoint& a, const CurvePoint& b, double theta, double* sigma_out) {
    double sigma = 1.0;
    for (int k = 0; k < prob.n_users; ++k) {
      const double ra = a.user_rates.empty() ? 0.0 : a.user_rates[k];
      const double rb = b.user_rates.empty() ? 0.0 : b.user_rates[k];
      const double mixed = (1.0 - theta) * ra + theta * rb;
      if (mixed <= 0.0) continue;
      if (!std::isfinite(budgets[k])) continue;
      sigma = std::min(sigma, budgets[k] / mixed);
    }
    if (sigma_out) *sigma_out = sigma;
    const double g_mix = (1.0 - theta) * a.g + theta * b.g;
    return sigma * g_mix;
  };

  for (std::size_t i = 0; i + 1 < plans.size(); ++i) {
    const CurvePoint& a = plans[i];
    const CurvePoint& b = plans[i + 1];
    // coarse scan then golden-section refinement
    double t_best = 0.0, v_best = -1.0;
    for (int j = 0; j <= 64; ++j) {
      const double t = j / 64.0;
      const double v = mix_value(a, b, t, nullptr);
      if (v > v_best) {
        v_best = v;
        t_best = t;
      }
    }
    double lo = std::max(0.0, t_best - 1.0 / 64.0);
    double hi = std::min(1.0, t_best + 1.0 / 64.0);
    const double gr = 0.3819660112501051;
    double x1 = lo + gr * (hi - lo), x2 = hi - gr * (hi - lo);
    double f1 = mix_value(a, b, x1, nullptr), f2 = mix_value(a, b, x2, nullptr);
    for (int it = 0; it < 40; ++it) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = lo + gr * (hi - lo);
        f1 = mix_value(a, b, x1, nullptr);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = hi - gr * (hi - lo);
        f2 = mix_value(a, b, x2, nullptr);
      }
    }
    const double theta = f1 > f2 ? x1 : x2;
    double sigma = 1.0;
    const double value = mix_value(a, b, theta, &sigma);
    if (value <= best.objective || sigma <= 0.0) continue;

    Candidate cand;
    auto push_scaled = [&](const std::vector<RsLink>& links, double f) {
      if (f <= 0.0) return;
      for (const auto& lk : links) {
        if (lk.r <= 0.0) continue;
        cand.links.push_back({lk.n, lk.k, f * lk.alpha, f * lk.p * power_scale, f * lk.r});
      }
    };
    push_scaled(a.links, sigma * (1.0 - theta));
    push_scaled(b.links, sigma * theta);
    cand.objective = links_objective(prob, cand.links);
    if (cand.objective > best.objective) best = std::move(cand);
  }
  return best;
}

}  // namespace

RsAllocation solve_rs(const ClusterProblem& prob, std::span<const double> budgets,
                      const SolverOptions& opts, std::span<const CurvePoint> hull_plans) {
  if (static_cast<int>(budgets.size()) != prob.n_users)
    throw std::invalid_argument("solve_rs: budgets size mismatch");
  for (double b : budgets)
    if (b < 0.0) throw std::invalid_argument("solve_rs: budgets must be >= 0");
  const int N = prob.n_sub;
  const int K = prob.n_users;
  const double g = prob.rate_factor;

  // Normalized instance: powers in units of the budget.
  ClusterProblem np = prob;
  np.power = 1.0;
  for (auto& v : np.phi) v *= prob.power;
  for (auto& v : np.itau) v *= prob.power;

  std::vector<char> active(K, 1);
  for (int k = 0; k < K; ++k) active[k] = budgets[k] > 0.0;

  DualState duals;
  duals.lambda.assign(N, 0.0);
  duals.eta.assign(N, 0.0);
  duals.mu.assign(K, 0.0);
  duals.nu = 1.0;

  std::ofstream trace;
  if (opts.trace && !opts.trace_path.empty()) {
    trace.open(opts.trace_path);
    trace << "iter\tdual\tbest_primal\tmax_change\tnu\n";
  }

  // Hull plans carry physical powers; the normalized problem divides them
  // out again through power_scale = 1/P.
  Candidate best = best_hull_mix(np, budgets, hull_plans, 1.0 / prob.power);
  std::vector<int> best_winner;
  double best_integer = -1.0;
  double best_dual = kInf;
  bool converged = false;
  int iter = 0;

  std::vector<double> X(K), p_act(K);
  std::vector<int> winner(N, -1);
  std::vector<double> lambda_res(N), eta_res(N), mu_res(K);

  for (iter = 1; iter <= opts.max_iter; ++iter) {
    double dual_val = 0.0;
    bool dual_unbounded = false;
    double used_power = 0.0;
    std::fill(mu_res.begin(), mu_res.end(), 0.0);

    for (int n = 0; n < N; ++n) {
      for (int k = 0; k < K; ++k) {
        if (!active[k]) {
          X[k] = 0.0;
          p_act[k] = 0.0;
          continue;
        }
        const double phi = np.phi_at(n, k);
        const double p = power_closed_form(1.0, np.beta[n], np.w[k], duals.mu[k], duals.nu,
                                           duals.eta[n], np.itau[n], phi, np.epsilon);
        if (std::isinf(p)) {
          dual_unbounded = true;
          p_act[k] = kActionCap;
          X[k] = kInf;
          continue;
        }
        X[k] = marginal_benefit_X(1.0, p, phi, np.beta[n], np.w[k], duals.mu[k], np.epsilon);
        p_act[k] = std::min(p, kActionCap);
        const double excess = X[k] - duals.lambda[n];
        if (excess > 0.0) dual_val += excess;
      }
      winner[n] = assign_subchannel(X);
      dual_val += duals.lambda[n];

      lambda_res[n] = 1.0 - (winner[n] >= 0 ? 1.0 : 0.0);
      const double pw = winner[n] >= 0 ? p_act[winner[n]] : 0.0;
      used_power += pw;
      eta_res[n] = np.i_bar - np.itau[n] * pw;
      if (winner[n] >= 0) {
        const double r = rate_from_power(pw, np.phi_at(n, winner[n]), g);
        mu_res[winner[n]] -= r;
      }
    }
    for (int k = 0; k < K; ++k)
      mu_res[k] = std::isfinite(budgets[k]) ? budgets[k] + mu_res[k] : kInf;
    const double nu_res = 1.0 - used_power;

    dual_val += duals.nu * 1.0;
    for (int n = 0; n < N; ++n) dual_val += duals.eta[n] * np.i_bar;
    for (int k = 0; k < K; ++k)
      if (std::isfinite(budgets[k])) dual_val += duals.mu[k] * budgets[k];
    if (!dual_unbounded) best_dual = std::min(best_dual, dual_val);

    Candidate rec = recover_integer(np, budgets, winner, duals);
    if (rec.objective > best_integer) {
      best_integer = rec.objective;
      best_winner = winner;
    }
    if (rec.objective > best.objective) best = std::move(rec);

    const double max_change =
        subgradient_step(duals, lambda_res, nu_res, eta_res, mu_res, iter, opts.delta0);
    if (trace.is_open())
      trace << iter << '\t' << (dual_unbounded ? kInf : dual_val) << '\t' << best.objective
            << '\t' << max_change << '\t' << duals.nu << '\n';
    if (max_change < opts.tol) {
      converged = true;
      break;
    }
  }

  // Exact water-filling polish: every assignment on desk-size instances,
  // otherwise the best integer assignment the dual pass visited.
  const double combos = std::pow(static_cast<double>(K) + 1.0, N);
  if (combos <= 81.0) {
    std::vector<int> assign(N, -1);
    for (int c = 0; c < static_cast<int>(combos); ++c) {
      int rem = c;
      for (int n = 0; n < N; ++n) {
        assign[n] = rem % (K + 1) - 1;
        rem /= K + 1;
      }
      bool usable = true;
      for (int n = 0; n < N; ++n)
        if (assign[n] >= 0 && !active[assign[n]]) usable = false;
      if (!usable) continue;
      Candidate cand =
          finalize_integer(np, budgets, assign, budget_waterfill_rs(np, assign, budgets));
      if (cand.objective > best.objective) best = std::move(cand);
    }
  } else if (!best_winner.empty()) {
    const std::vector<double> pw = budget_waterfill_rs(np, best_winner, budgets);
    Candidate polished = finalize_integer(np, budgets, best_winner, pw);
    if (polished.objective > best.objective) best = std::move(polished);
  }

  RsAllocation out;
  out.links = std::move(best.links);
  for (auto& lk : out.links) lk.p *= prob.power;  // back to physical units
  out.objective = std::max(best.objective, 0.0);
  out.dual_bound = best_dual;
  out.converged = converged;
  out.iters = std::min(iter, opts.max_iter);
  return out;
}

}  // namespace rcofdma
