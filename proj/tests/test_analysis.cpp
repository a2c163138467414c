#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rcofdma/analysis.hpp"
#include "rcofdma/rng.hpp"

using namespace rcofdma;

TEST_CASE("theorem-1 closed form") {
  SUBCASE("gating factor zeros") {
    CHECK(theorem1_throughput(4, 1.0, 100, 10.0, 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("no PU activity reduces to the log term") {
    const double t = theorem1_throughput(4, 0.0, 100, 40.0, 1.0);
    CHECK(t == doctest::Approx(4.0 / (4.0 * 100) * std::log2(1.0 + 10.0 * std::log(100.0))));
  }
  SUBCASE("hand value") {
    // N=4, q=0.3, K=1000, (P/N) l = 10 -> 2.77732/4000 * log2(1+10 ln 1000)
    const double t = theorem1_throughput(4, 0.3, 1000, 40.0, 1.0);
    CHECK(t == doctest::Approx(4.2570e-3).epsilon(1e-4));
  }
  SUBCASE("algebraic identity") {
    for (int k_c : {25, 200, 1000}) {
      const double t = theorem1_throughput(4, 0.3, k_c, 40.0, 0.7);
      const double gate = 4.0 * 0.7 * (1.0 - std::pow(0.3, 4));
      CHECK(t * 4.0 * k_c / gate ==
            doctest::Approx(std::log2(1.0 + 10.0 * 0.7 * std::log(k_c))).epsilon(1e-12));
    }
  }
  SUBCASE("quadrature form approaches the closed form") {
    const double exact_small = theorem1_throughput(4, 0.3, 50, 40.0, 1.0);
    const double quad_small = theorem1_throughput_quadrature(4, 0.3, 50, 40.0, 1.0);
    const double exact_big = theorem1_throughput(4, 0.3, 20000, 40.0, 1.0);
    const double quad_big = theorem1_throughput_quadrature(4, 0.3, 20000, 40.0, 1.0);
    CHECK(std::fabs(quad_big / exact_big - 1.0) < std::fabs(quad_small / exact_small - 1.0));
    CHECK(quad_big == doctest::Approx(exact_big).epsilon(0.02));
  }
}

TEST_CASE("no-rs closed form") {
  SUBCASE("simple reduction") {
    const double t = baseline_throughput_no_rs(4, 0.0, 100, 1, 40.0, 1.0);
    CHECK(t == doctest::Approx(4.0 / 100.0 * std::log2(1.0 + 10.0 * std::log(100.0))));
  }
  SUBCASE("saturated activity") {
    CHECK(baseline_throughput_no_rs(4, 1.0, 100, 6, 40.0, 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("gating ratio against theorem 1") {
    // 0.7^7 / (0.7 (1 - 0.3^4)) = 0.118610...
    const double b = std::pow(0.7, 7);
    const double r = 0.7 * (1.0 - std::pow(0.3, 4));
    CHECK(b / r == doctest::Approx(0.11861039).epsilon(1e-6));
  }
  SUBCASE("relay gating dominates no-rs gating") {
    for (double q : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
      for (int m : {1, 2, 4, 6, 8}) {
        for (int n : {1, 2, 4, 8}) {
          const double relay = (1.0 - q) * (1.0 - std::pow(q, n));
          const double no_rs = std::pow(1.0 - q, m + 1);
          CHECK(relay >= no_rs - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("asymptotic winner rule") {
  SUBCASE("singleton") {
    const double a[] = {0.4};
    CHECK(pfs_user_selection_asymptotic(a) == 0);
  }
  SUBCASE("direct argmax") {
    const double a[] = {0.1, 2.0, 0.5};
    CHECK(pfs_user_selection_asymptotic(a) == 1);
  }
  SUBCASE("empty rejected") {
    CHECK_THROWS_AS(pfs_user_selection_asymptotic({}), std::invalid_argument);
  }
}

TEST_CASE("oracle self checks") {
  SUBCASE("single link matches the closed form at grid points") {
    ClusterProblem p;
    p.n_sub = 1;
    p.n_users = 1;
    p.beta = {1.0};
    p.itau = {0.0};
    p.phi = {2.5};
    p.w = {1.0};
    p.power = 2.0;
    p.i_bar = 1.0;
    p.epsilon = 0.0;
    p.rate_factor = 0.25;
    const std::vector<double> budgets{kInfBudget};
    const double oracle = oracle_rs(p, budgets, 50);
    CHECK(oracle == doctest::Approx(0.25 * std::log2(1.0 + 2.0 * 2.5)).epsilon(1e-12));
  }
  SUBCASE("zero power budget yields zero") {
    ClusterProblem p;
    p.n_sub = 2;
    p.n_users = 2;
    p.beta = {1.0, 1.0};
    p.itau = {0.0, 0.0};
    p.phi = {1.0, 1.0, 1.0, 1.0};
    p.w = {1.0, 1.0};
    p.power = 0.0;
    p.i_bar = 1.0;
    p.epsilon = 0.0;
    p.rate_factor = 0.25;
    const std::vector<double> budgets{kInfBudget, kInfBudget};
    CHECK(oracle_rs(p, budgets, 50) == doctest::Approx(0.0));
  }
  SUBCASE("oversized instances rejected") {
    ClusterProblem p;
    p.n_sub = 3;
    p.n_users = 2;
    const std::vector<double> budgets{kInfBudget, kInfBudget};
    CHECK_THROWS_AS(oracle_rs(p, budgets, 50), std::invalid_argument);
  }
}

TEST_CASE("asymptotic pfs simulation sanity") {
  const AsymptoticPfsResult r = asymptotic_pfs_sim(25, 4, 0.3, 10.0, 4000, 500, 50, 99);
  CHECK(r.avg_user_throughput > 0.0);
  CHECK(r.winner_agreement > 0.5);
  CHECK(r.winner_agreement <= 1.0);
  // saturated PU activity kills throughput
  const AsymptoticPfsResult dead = asymptotic_pfs_sim(25, 4, 1.0, 10.0, 500, 100, 50, 99);
  CHECK(dead.avg_user_throughput == doctest::Approx(0.0));
}

TEST_CASE("aggregate metrics") {
  ScenarioConfig cfg;
  cfg.M = 1;
  cfg.K0 = 3;
  cfg.Km = 2;
  cfg.N = 2;
  cfg.seed = 50;
  const Topology topo = build_topology(cfg);
  const std::size_t U = topo.ms.size();
  REQUIRE(U == 4);

  PfsState pfs;
  pfs.init(U, 1e-6, 10);
  pfs.rtilde[0] = 1.0;  // log contribution exactly 0
  pfs.rtilde[1] = 2.0;
  pfs.rtilde[2] = 1.0;
  pfs.rtilde[3] = 1.0;

  FrameOutcome f;
  f.ms_sched_rate.assign(U, 1.0);
  f.ms_goodput.assign(U, 0.5);
  f.ms_scheduled.assign(U, 1);
  f.ms_allowed.assign(U, 1);
  f.feedback_reals = 4;

  SUBCASE("empty input rejected") {
    CHECK_THROWS_AS(aggregate(topo, {}, pfs), std::invalid_argument);
  }
  SUBCASE("single frame accounting") {
    std::vector<FrameOutcome> frames{f};
    const RunMetrics m = aggregate(topo, frames, pfs);
    CHECK(m.frames == 1);
    CHECK(m.sum_log_rtilde == doctest::Approx(std::log(2.0)));
    CHECK(m.edge_access_prob == doctest::Approx(1.0));
    CHECK(m.mean_goodput == doctest::Approx(0.5));
    CHECK(m.feedback_reals_per_frame == doctest::Approx(4.0));
    int count = 0;
    for (int c : m.hist_count) count += c;
    CHECK(count == static_cast<int>(U));
  }
  SUBCASE("never-scheduled users zero the access probability") {
    FrameOutcome g = f;
    g.ms_scheduled.assign(U, 0);
    g.ms_allowed.assign(U, 0);
    std::vector<FrameOutcome> frames{g, g};
    const RunMetrics m = aggregate(topo, frames, pfs);
    CHECK(m.edge_access_prob == doctest::Approx(0.0));
  }
}
