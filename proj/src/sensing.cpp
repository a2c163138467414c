#include "rcofdma/sensing.hpp"

#include <stdexcept>

namespace rcofdma {

std::vector<std::vector<int>> draw_pu_states(const std::vector<double>& q_act, int n_sub,
                                             Rng& rng) {
  std::vector<std::vector<int>> S(q_act.size());
  for (std::size_t m = 0; m < q_act.size(); ++m) {
    if (!(q_act[m] >= 0.0 && q_act[m] <= 1.0))
      throw std::invalid_argument("draw_pu_states: q_act must lie in [0,1]");
    S[m].resize(n_sub);
    for (int n = 0; n < n_sub; ++n) S[m][n] = rng.bernoulli(q_act[m]) ? 0 : 1;
  }
  return S;
}

std::vector<std::vector<std::vector<int>>> draw_reports(
    const std::vector<std::vector<int>>& S, const std::vector<int>& users_per_cluster,
    double q_f, double q_d, Rng& rng) {
  std::vector<std::vector<std::vector<int>>> rep(S.size());
  for (std::size_t m = 0; m < S.size(); ++m) {
    rep[m].resize(S[m].size());
    for (std::size_t n = 0; n < S[m].size(); ++n) {
      rep[m][n].resize(users_per_cluster[m]);
      for (int k = 0; k < users_per_cluster[m]; ++k) {
        if (S[m][n] == 1)
          rep[m][n][k] = rng.bernoulli(q_f) ? 0 : 1;  // false alarm
        else
          rep[m][n][k] = rng.bernoulli(1.0 - q_d) ? 1 : 0;  // mis-detection
      }
    }
  }
  return rep;
}

double posterior_beta(std::span<const int> reports, double prior_avail, double q_f, double q_d,
                      bool* degenerate) {
  if (reports.empty()) return prior_avail;
  double l1 = 1.0;  // Pr(reports | S = 1)
  double l0 = 1.0;  // Pr(reports | S = 0)
  for (int s : reports) {
    l1 *= s ? (1.0 - q_f) : q_f;
    l0 *= s ? (1.0 - q_d) : q_d;
  }
  const double num = prior_avail * l1;
  const double den = num + (1.0 - prior_avail) * l0;
  if (den <= 0.0) {
    if (degenerate) *degenerate = true;
    return prior_avail;
  }
  return num / den;
}

SensingSnapshot make_sensing_snapshot(const std::vector<double>& q_act,
                                      const std::vector<int>& users_per_cluster, int n_sub,
                                      double q_f, double q_d, Rng& rng) {
  SensingSnapshot snap;
  snap.S = draw_pu_states(q_act, n_sub, rng);
  snap.report = draw_reports(snap.S, users_per_cluster, q_f, q_d, rng);
  snap.beta.resize(q_act.size());
  for (std::size_t m = 0; m < q_act.size(); ++m) {
    snap.beta[m].resize(n_sub);
    for (int n = 0; n < n_sub; ++n)
      snap.beta[m][n] =
          posterior_beta(snap.report[m][n], 1.0 - q_act[m], q_f, q_d, &snap.degenerate);
  }
  return snap;
}

double interference_level(double total_power, double tau, double beta) {
  return total_power * tau * (1.0 - beta);
}

}  // namespace rcofdma
