#include "rcofdma/goodput_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rcofdma {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

double GoodputCurve::eval(double r) const {
  if (r < 0.0) throw std::invalid_argument("GoodputCurve::eval: r must be >= 0");
  if (pts.empty()) return 0.0;
  if (r >= pts.back().r) return pts.back().g;
  // Last vertex with r_i <= r; pts start at (0,0) so i exists.
  std::size_t i = 0;
  while (i + 1 < pts.size() && pts[i + 1].r <= r) ++i;
  const auto& a = pts[i];
  const auto& b = pts[i + 1];
  const double t = (r - a.r) / (b.r - a.r);
  return a.g + t * (b.g - a.g);
}

double GoodputCurve::slope(double r) const {
  if (r < 0.0) throw std::invalid_argument("GoodputCurve::slope: r must be >= 0");
  if (pts.size() < 2 || r >= pts.back().r) return 0.0;
  std::size_t i = 0;
  while (i + 1 < pts.size() && pts[i + 1].r <= r) ++i;
  return (pts[i + 1].g - pts[i].g) / (pts[i + 1].r - pts[i].r);
}

bool GoodputCurve::well_formed() const {
  if (pts.empty()) return false;
  if (pts[0].r != 0.0 || pts[0].g != 0.0) return false;
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].r > pts[i - 1].r)) return false;
    if (pts[i].g < pts[i - 1].g) return false;
    const double s = (pts[i].g - pts[i - 1].g) / (pts[i].r - pts[i - 1].r);
    if (!(s < prev_slope)) return false;
    prev_slope = s;
  }
  return true;
}

GoodputCurve build_curve_general(std::vector<CurvePoint> class_points) {
  GoodputCurve curve;
  curve.pts.push_back(CurvePoint{});

  // Keep only the best g per r, sorted by r; nonpositive points collapse
  // into the origin.
  std::sort(class_points.begin(), class_points.end(), [](const auto& a, const auto& b) {
    if (a.r != b.r) return a.r < b.r;
    return a.g > b.g;
  });
  std::vector<CurvePoint> cand;
  for (auto& p : class_points) {
    if (!(p.r > 0.0) || !(p.g > 0.0)) continue;
    if (!cand.empty() && cand.back().r == p.r) continue;
    cand.push_back(std::move(p));
  }

  // Upper hull scan: pop while the incoming point does not break the
  // strictly-decreasing-slope chain.
  auto slope_of = [](const CurvePoint& a, const CurvePoint& b) {
    return (b.g - a.g) / (b.r - a.r);
  };
  for (auto& p : cand) {
    while (curve.pts.size() >= 2) {
      const auto& b = curve.pts.back();
      const auto& a = curve.pts[curve.pts.size() - 2];
      if (slope_of(a, b) <= slope_of(b, p))
        curve.pts.pop_back();
      else
        break;
    }
    curve.pts.push_back(std::move(p));
  }

  // Truncate at the goodput maximum; segments past it would slope downward
  // and the curve is constant there instead.
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < curve.pts.size(); ++i)
    if (curve.pts[i].g > curve.pts[argmax].g) argmax = i;
  curve.pts.resize(argmax + 1);
  return curve;
}

std::vector<CurvePoint> compute_class_points(const ClusterProblem& prob,
                                             const std::vector<std::vector<int>>& classes,
                                             const SolverOptions& opts) {
  std::vector<CurvePoint> points;
  const std::vector<double> budgets(prob.n_users, kInfBudget);
  for (const auto& members : classes) {
    ClusterProblem sub = prob;
    std::vector<char> in_class(prob.n_users, 0);
    for (int k : members) in_class[k] = 1;
    for (int n = 0; n < prob.n_sub; ++n)
      for (int k = 0; k < prob.n_users; ++k)
        if (!in_class[k]) sub.phi[n * prob.n_users + k] = 0.0;

    const RsAllocation alloc = solve_rs(sub, budgets, opts);
    CurvePoint pt;
    pt.user_rates.assign(prob.n_users, 0.0);
    for (const auto& lk : alloc.links) {
      pt.r += lk.r;
      pt.user_rates[lk.k] += lk.r;
    }
    pt.g = alloc.objective;
    pt.links = alloc.links;
    points.push_back(std::move(pt));
  }
  return points;
}

GoodputCurve build_curve_pfs(const ClusterProblem& prob, bool literal_l) {
  GoodputCurve curve;
  curve.pts.push_back(CurvePoint{});

  double beta_sum = 0.0;
  for (double b : prob.beta) beta_sum += b;
  if (beta_sum <= 0.0 || prob.n_users == 0) return curve;

  CurvePoint sat;
  sat.user_rates.assign(prob.n_users, 0.0);
  for (int n = 0; n < prob.n_sub; ++n) {
    double p_n = prob.beta[n] * prob.power / beta_sum;
    // The equal-power rule predates the interference constraint (its regime
    // has beta -> S); the advertised plan must still satisfy Eq.-(3) caps.
    if (prob.itau[n] > 0.0) p_n = std::min(p_n, prob.i_bar / prob.itau[n]);
    if (p_n <= 0.0) continue;
    int win = -1;
    double best = 0.0;
    for (int k = 0; k < prob.n_users; ++k) {
      double gain = prob.phi_at(n, k);
      if (literal_l) gain *= prob.l.empty() ? 1.0 : prob.l[k];
      const double v = prob.w[k] * std::log1p(p_n * gain) / kLn2;
      if (v > best) {
        best = v;
        win = k;
      }
    }
    if (win < 0) continue;
    double gain = prob.phi_at(n, win);
    if (literal_l) gain *= prob.l.empty() ? 1.0 : prob.l[win];
    const double rate = prob.rate_factor * std::log1p(p_n * gain) / kLn2;
    sat.r += rate;
    sat.user_rates[win] += rate;
    sat.links.push_back({n, win, 1.0, p_n, rate});
    sat.g += prob.w[win] * prob.beta[n] * (1.0 - prob.epsilon) * rate;
  }
  if (sat.r > 0.0 && sat.g > 0.0) curve.pts.push_back(std::move(sat));
  return curve;
}

}  // namespace rcofdma
