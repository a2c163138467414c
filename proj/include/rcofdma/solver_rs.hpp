#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rcofdma/allocation.hpp"

namespace rcofdma {

constexpr double kInfBudget = std::numeric_limits<double>::infinity();

/// One cluster's conditional allocation problem as seen by its server:
/// availability posteriors, interference coefficients, outage-margin gains,
/// weights, and budgets. Interference coefficient itau[n] is the per-unit-
/// power term of Eq. (3), tau*(1-beta) (or tau^2*(1-beta) under the
/// Appendix-A switch), so the solver never needs tau separately.
struct ClusterProblem {
  int n_sub = 0;
  int n_users = 0;
  std::vector<double> beta;  // [n]
  std::vector<double> itau;  // [n]
  std::vector<double> phi;   // [n * n_users + k]
  std::vector<double> w;     // [k]
  std::vector<double> l;     // [k] optional; only used by the literal Lemma-3 form
  double power = 0.0;
  double i_bar = 0.0;
  double epsilon = 0.0;
  double rate_factor = 0.25;  // spectral-efficiency factor g

  double phi_at(int n, int k) const { return phi[n * n_users + k]; }
};

struct SolverOptions {
  int max_iter = 5000;
  double tol = 1e-5;    // terminate when the largest multiplier change drops below this
  double delta0 = 1.0;  // step size delta0 / sqrt(i)
  bool trace = false;
  std::string trace_path;
};

/// Subgradient state. All multipliers stay nonnegative (projection).
struct DualState {
  std::vector<double> lambda;  // subchannel constraints, per n
  std::vector<double> eta;     // interference constraints, per n
  std::vector<double> mu;      // flow-balance constraints, per user
  double nu = 1.0;             // power constraint
  int iter = 0;
};

/// Feasible per-cluster allocation as a list of links. Integer winners have
/// alpha = 1; time-shared recoveries carry fractional alpha summing to at
/// most 1 per subchannel.
struct RsAllocation {
  std::vector<RsLink> links;
  double objective = 0.0;   // conditional weighted goodput sum w*(1-eps)*beta*r
  double dual_bound = 0.0;  // best dual value seen (upper bound)
  bool converged = false;
  int iters = 0;

  double rate_of(int k) const {
    double s = 0.0;
    for (const auto& lk : links)
      if (lk.k == k) s += lk.r;
    return s;
  }
  double power_total() const {
    double s = 0.0;
    for (const auto& lk : links) s += lk.p;
    return s;
  }
};

/// Stationary power of the relay Lagrangian:
/// p = alpha * ( (1/4)((1-eps)*beta*w - mu) / (ln2*(nu + eta*tau_eff)) - 1/phi )^+.
/// tau_eff already carries the (1-beta) factor of Eq. (3).
double power_closed_form(double alpha, double beta, double w, double mu_k, double nu,
                         double eta_n, double tau_eff, double phi, double epsilon);

/// Marginal benefit of extra bandwidth at alpha = 1:
/// X = (1/4)((1-eps)*beta*w - mu) * (log2(1+p*phi) - p*phi/(ln2*(1+p*phi))).
double marginal_benefit_X(double alpha, double p, double phi, double beta, double w, double mu_k,
                          double epsilon);

/// Winner of one subchannel: the maximizer of X if max X > 0, else -1.
/// Exact ties go to the lowest index.
int assign_subchannel(std::span<const double> X);

/// One projected subgradient step with delta(i) = delta0 / sqrt(i); the
/// residuals are in budget-minus-usage form as in the update display.
/// Returns the largest absolute multiplier change.
double subgradient_step(DualState& duals, std::span<const double> lambda_res, double nu_res,
                        std::span<const double> eta_res, std::span<const double> mu_res, int i,
                        double delta0);

/// Solves the relay subproblem by dual descent with explicit primal
/// recovery; returns the best feasible iterate. budgets[k] may be
/// kInfBudget when flow balance is absent (curve construction). hull_plans,
/// when given (the relay's own curve vertices), contributes time-shared
/// mixes of adjacent vertex allocations scaled onto the budgets as extra
/// recovery candidates.
RsAllocation solve_rs(const ClusterProblem& prob, std::span<const double> budgets,
                      const SolverOptions& opts = {},
                      std::span<const CurvePoint> hull_plans = {});

}  // namespace rcofdma
