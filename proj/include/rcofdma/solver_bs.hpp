#pragma once

#include <span>
#include <vector>

#include "rcofdma/goodput_curve.hpp"
#include "rcofdma/solver_rs.hpp"

namespace rcofdma {

/// The BS-side allocation problem over cluster-0 direct MSs and RS backhaul
/// links, with relay value expressed through goodput curves.
struct BsProblem {
  int n_sub = 0;
  std::vector<double> beta0;               // [n]
  std::vector<double> itau0;               // [n] per-unit-power interference coefficient
  std::vector<std::vector<double>> phi_ms;  // [n][j] direct MSs
  std::vector<double> w_ms;                // [j]
  std::vector<std::vector<double>> phi_rs;  // [n][m] BS->RS links
  std::vector<GoodputCurve> curves;        // [m]
  double power = 0.0;
  double i_bar = 0.0;
  double epsilon = 0.0;
  double rate_factor = 0.5;  // g0

  int n_ms() const { return static_cast<int>(w_ms.size()); }
  int n_rs() const { return static_cast<int>(curves.size()); }
};

enum class BsWinner { None, Ms, Rs };

struct BsAllocation {
  std::vector<BsWinner> kind;  // [n]
  std::vector<int> idx;        // [n] MS index or RS index
  std::vector<double> p;       // [n]
  std::vector<double> r;       // [n]
  // Packet partition fractions d[m][k] per assigned subchannel of RS m
  // (uniform across that RS's subchannels), and the underlying per-user bit
  // budgets at full decode.
  std::vector<std::vector<double>> d;
  std::vector<std::vector<double>> budgets;
  double objective = 0.0;  // decoupled conditional weighted goodput
  double dual_bound = 0.0;
  bool converged = false;
  int iters = 0;
  int rs_multi_subchannel = 0;  // diagnostic: relays holding > 1 subchannel

  double rs_rate(int m) const {
    double s = 0.0;
    for (std::size_t n = 0; n < kind.size(); ++n)
      if (kind[n] == BsWinner::Rs && idx[n] == m) s += r[n];
    return s;
  }
};

/// The decoupled objective (per-subchannel relay expectation):
/// G0 + sum_m sum_n (1-eps) * beta0[n] * curve_m(r_rs[m][n]).
double decoupled_objective(const BsProblem& prob, const std::vector<std::vector<double>>& r_ms,
                           const std::vector<std::vector<double>>& r_rs);

struct RsCandidate {
  double r = 0.0;
  double p = 0.0;
  double value = 0.0;
};

/// Best backhaul operating point for relay m on one subchannel given the
/// power prices: scans curve vertices plus each segment's interior
/// stationary point of (1-eps)*beta0*G(r) - price*p(r) with
/// p(r) = (2^(r/g0) - 1)/phi.
RsCandidate rs_candidate(const GoodputCurve& curve, double beta0n, double phi, double price,
                         double epsilon, double g0 = 0.5);

/// Splits a granted backhaul rate along the curve's hull into per-user bit
/// budgets: time-share of the two adjacent vertex plans (single vertex when
/// r hits one exactly; the saturation plan beyond the last vertex).
std::vector<double> packet_partition(const GoodputCurve& curve, double granted_rate);

BsAllocation solve_bs(const BsProblem& prob, const SolverOptions& opts = {});

}  // namespace rcofdma
