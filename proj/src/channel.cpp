#include "rcofdma/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace rcofdma {

namespace {

// Regularized lower incomplete gamma P(a, x), Numerical-Recipes style:
// series for x < a + 1, continued fraction otherwise.
double igamma_lower_reg(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace

namespace {

// CDF and density of the noncentral chi-square (2 dof) in one pass over the
// Poisson(lambda/2) weight bulk; weights/gamma terms follow one-step
// recurrences from a log-domain anchor at j_lo. Terms outside the bulk are
// below 1e-14 in total weight.
void ncx2_cdf_pdf(double x, double lambda, double* cdf, double* pdf) {
  if (x <= 0.0) {
    *cdf = 0.0;
    *pdf = 0.0;
    return;
  }
  const double y = 0.5 * x;
  const double hl = 0.5 * lambda;
  if (hl == 0.0) {
    *cdf = -std::expm1(-y);
    *pdf = 0.5 * std::exp(-y);
    return;
  }
  const double spread = 10.0 * std::sqrt(hl + 4.0) + 25.0;
  const long j_lo = std::max(0L, static_cast<long>(std::floor(hl - spread)));
  const long j_hi = static_cast<long>(std::ceil(hl + spread));

  double w = std::exp(-hl + j_lo * std::log(hl) - std::lgamma(j_lo + 1.0));
  double pj = igamma_lower_reg(j_lo + 1.0, y);            // P(j+1, y)
  double tj = std::exp(-y + j_lo * std::log(y) - std::lgamma(j_lo + 1.0));
  double c = 0.0, d = 0.0;
  for (long j = j_lo; j <= j_hi; ++j) {
    c += w * pj;
    d += w * tj;               // central chi2(2j+2) density at x is tj/2
    tj *= y / (j + 1.0);       // e^-y y^(j+1) / (j+1)!
    pj -= tj;                  // P(j+2, y)
    if (pj < 0.0) pj = 0.0;
    w *= hl / (j + 1.0);
  }
  *cdf = std::min(c, 1.0);
  *pdf = 0.5 * d;
}

// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9);
// only used to seed the quantile search.
double inv_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) return -inv_normal_cdf(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double noncentral_chi2_cdf(double x, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("noncentral_chi2_cdf: lambda must be >= 0");
  double c, d;
  ncx2_cdf_pdf(x, lambda, &c, &d);
  return c;
}

double noncentral_chi2_inv_cdf(double lambda, double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("noncentral_chi2_inv_cdf: prob must lie in (0,1)");
  if (lambda < 0.0) throw std::invalid_argument("noncentral_chi2_inv_cdf: lambda must be >= 0");
  if (lambda == 0.0) return -2.0 * std::log1p(-prob);  // central case is Exp(1/2)

  double lo = 0.0;
  double hi = lambda + 50.0 + 20.0 * std::sqrt(lambda + 25.0);
  while (noncentral_chi2_cdf(hi, lambda) < prob) hi *= 2.0;  // defensive; never hit in practice

  // Bracketed Newton from a normal-approximation seed (mean 2 + lambda,
  // variance 4 + 4 lambda); bisection whenever Newton leaves the bracket.
  double x = 2.0 + lambda + inv_normal_cdf(prob) * 2.0 * std::sqrt(1.0 + lambda);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    double c, d;
    ncx2_cdf_pdf(x, lambda, &c, &d);
    if (c < prob)
      lo = x;
    else
      hi = x;
    const double err = c - prob;
    if (std::fabs(err) < 1e-13 || hi - lo < 1e-13 * (1.0 + hi)) break;
    double next = d > 0.0 ? x - err / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

double effective_gain_phi(std::complex<double> hhat, double l, double sigma_e2, double epsilon) {
  if (!(l > 0.0)) throw std::invalid_argument("effective_gain_phi: l must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("effective_gain_phi: epsilon must lie in (0,1)");
  if (sigma_e2 <= 0.0) return l * std::norm(hhat);
  const double lambda = std::norm(hhat) / (0.5 * sigma_e2);
  return 0.5 * l * sigma_e2 * noncentral_chi2_inv_cdf(lambda, epsilon);
}

namespace {

Link draw_link(double l, const ScenarioConfig& cfg, Rng& rng) {
  Link lk;
  const double se2 = cfg.sigma_e2;
  if (se2 <= 0.0) {
    lk.h = rng.cnormal(1.0);
    lk.hhat = lk.h;
  } else if (cfg.csit_model == CsitModel::Mmse) {
    // Estimate orthogonal to the error: hhat ~ CN(0, 1 - se2), h | hhat ~
    // CN(hhat, se2). Marginally h ~ CN(0,1) and Var(hhat - h) = se2.
    lk.hhat = rng.cnormal(1.0 - se2);
    lk.h = lk.hhat + rng.cnormal(se2);
  } else {
    lk.h = rng.cnormal(1.0);
    lk.hhat = lk.h + rng.cnormal(se2);
  }
  lk.phi = effective_gain_phi(lk.hhat, l, se2, cfg.epsilon);
  return lk;
}

}  // namespace

ChannelSnapshot draw_channel(const Topology& topo, Rng& rng) {
  const auto& cfg = topo.cfg;
  ChannelSnapshot snap;
  snap.link.resize(cfg.M + 1);
  for (int m = 0; m <= cfg.M; ++m) {
    snap.link[m].resize(cfg.N);
    for (int n = 0; n < cfg.N; ++n) {
      snap.link[m][n].resize(topo.cluster_size(m));
      for (int k = 0; k < topo.cluster_size(m); ++k)
        snap.link[m][n][k] = draw_link(topo.users[m][k].l_server, cfg, rng);
    }
  }
  return snap;
}

DirectChannelSnapshot draw_channel_bs_direct(const Topology& topo, Rng& rng) {
  const auto& cfg = topo.cfg;
  DirectChannelSnapshot snap;
  snap.link.resize(cfg.N);
  for (int n = 0; n < cfg.N; ++n) {
    snap.link[n].resize(topo.ms.size());
    for (std::size_t u = 0; u < topo.ms.size(); ++u) {
      const auto& ref = topo.ms[u];
      snap.link[n][u] = draw_link(topo.users[ref.m][ref.k].l_bs, cfg, rng);
    }
  }
  return snap;
}

}  // namespace rcofdma
