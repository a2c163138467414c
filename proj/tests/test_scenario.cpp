#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rcofdma/scenario.hpp"

using namespace rcofdma;

TEST_CASE("path gain formulas") {
  CHECK(path_gain_dB(1.0, LinkType::Access) == doctest::Approx(128.1).epsilon(1e-12));
  // 128.1 + 28.8*log10(3)
  CHECK(path_gain_dB(3.0, LinkType::Backhaul) ==
        doctest::Approx(141.84109213592626).epsilon(1e-9));
  CHECK_THROWS_AS(path_gain_dB(0.0, LinkType::Access), std::invalid_argument);
  CHECK_THROWS_AS(path_gain_dB(-1.0, LinkType::Backhaul), std::invalid_argument);
}

TEST_CASE("path gain monotone in distance") {
  double prev = path_gain_dB(0.05, LinkType::Access);
  for (double r = 0.1; r < 8.0; r += 0.37) {
    const double cur = path_gain_dB(r, LinkType::Access);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("shadowing") {
  Rng rng(42);
  SUBCASE("sigma zero is deterministic") {
    CHECK(apply_shadowing(100.0, 0.0, rng) == doctest::Approx(1e-10).epsilon(1e-12));
    CHECK(apply_shadowing(0.0, 0.0, rng) == doctest::Approx(1.0));
  }
  SUBCASE("dB-domain std is sigma") {
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double g = apply_shadowing(60.0, 8.0, rng);
      const double x = -10.0 * std::log10(g) - 60.0;
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(sd == doctest::Approx(8.0).epsilon(0.0125));
  }
}

TEST_CASE("config validation") {
  ScenarioConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SUBCASE("epsilon bounds") {
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.epsilon = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("K0 must exceed M") {
    cfg.K0 = cfg.M;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("q_d positive") {
    cfg.q_d = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("negative radius") {
    cfg.cell_radius_m = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("mmse needs sigma_e2 < 1") {
    cfg.sigma_e2 = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.csit_model = CsitModel::Additive;
    CHECK_NOTHROW(cfg.validate());
  }
}

TEST_CASE("config file parsing") {
  SUBCASE("roundtrip with comments") {
    std::istringstream in("M = 2 # two relays\nK0 = 5\nKm = 3\nq_act = 0.25\n");
    const ScenarioConfig cfg = parse_config(in);
    CHECK(cfg.M == 2);
    CHECK(cfg.K0 == 5);
    CHECK(cfg.q_act == doctest::Approx(0.25));
  }
  SUBCASE("unknown key rejected") {
    std::istringstream in("M = 2\nbogus_key = 1\n");
    CHECK_THROWS_AS(parse_config(in), ConfigError);
  }
  SUBCASE("malformed line rejected") {
    std::istringstream in("M 2\n");
    CHECK_THROWS_AS(parse_config(in), ConfigError);
  }
  SUBCASE("bad value rejected") {
    std::istringstream in("M = abc\n");
    CHECK_THROWS_AS(parse_config(in), ConfigError);
  }
  SUBCASE("hash is stable and sensitive") {
    ScenarioConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.q_act = 0.31;
    CHECK(config_hash(a) != config_hash(b));
  }
}

TEST_CASE("topology construction") {
  ScenarioConfig cfg;
  cfg.seed = 7;

  SUBCASE("RS ring placement is exact") {
    const Topology topo = build_topology(cfg);
    REQUIRE(static_cast<int>(topo.clusters.size()) == 7);
    for (int m = 1; m <= 6; ++m) {
      const double th = 2.0 * 3.14159265358979323846 * (m - 1) / 6.0;
      CHECK(topo.clusters[m].server_pos.x == doctest::Approx(3000.0 * std::cos(th)).epsilon(1e-12));
      CHECK(topo.clusters[m].server_pos.y == doctest::Approx(3000.0 * std::sin(th)).epsilon(1e-12));
      CHECK(dist(topo.clusters[m].server_pos, {0, 0}) == doctest::Approx(3000.0));
    }
    // first M cluster-0 users sit at the RS positions
    for (int m = 0; m < 6; ++m) {
      CHECK(topo.users[0][m].is_rs);
      CHECK(topo.users[0][m].pos.x == doctest::Approx(topo.clusters[m + 1].server_pos.x));
    }
  }

  SUBCASE("M = 0 degenerates to a single cluster") {
    cfg.M = 0;
    cfg.K0 = 10;
    const Topology topo = build_topology(cfg);
    CHECK(topo.clusters.size() == 1);
    CHECK(topo.ms.size() == 10);
    for (const auto& u : topo.users[0]) CHECK(!u.is_rs);
  }

  SUBCASE("determinism: same seed, same topology") {
    const Topology a = build_topology(cfg);
    const Topology b = build_topology(cfg);
    REQUIRE(a.ms.size() == b.ms.size());
    for (int m = 0; m <= cfg.M; ++m) {
      for (int k = 0; k < a.cluster_size(m); ++k) {
        CHECK(a.users[m][k].pos.x == b.users[m][k].pos.x);
        CHECK(a.users[m][k].pos.y == b.users[m][k].pos.y);
        CHECK(a.users[m][k].l_server == b.users[m][k].l_server);
        CHECK(a.users[m][k].l_bs == b.users[m][k].l_bs);
      }
      CHECK(a.clusters[m].tau == b.clusters[m].tau);
    }
    ScenarioConfig other = cfg;
    other.seed = 8;
    const Topology c = build_topology(other);
    CHECK(c.users[0][cfg.M].pos.x != a.users[0][cfg.M].pos.x);
  }

  SUBCASE("gains lie in (0,1] and users respect the guard distance") {
    const Topology topo = build_topology(cfg);
    for (int m = 0; m <= cfg.M; ++m) {
      for (const auto& u : topo.users[m]) {
        CHECK(u.l_server > 0.0);
        CHECK(u.l_server <= 1.0);
        CHECK(u.l_bs > 0.0);
        CHECK(u.l_bs <= 1.0);
        if (!u.is_rs) CHECK(u.dist_server_m >= cfg.guard_distance_m);
      }
      CHECK(topo.clusters[m].tau > 0.0);
      CHECK(topo.clusters[m].tau <= 1.0);
    }
  }

  SUBCASE("relays reduce path loss (shadowing off)") {
    cfg.shadowing_sigma_dB = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      cfg.seed = s;
      const Topology topo = build_topology(cfg);
      for (int m = 1; m <= cfg.M; ++m)
        for (const auto& u : topo.users[m]) CHECK(u.l_server > u.l_bs);
    }
  }

  SUBCASE("ms index covers exactly the non-RS users") {
    const Topology topo = build_topology(cfg);
    CHECK(topo.ms.size() == static_cast<std::size_t>((cfg.K0 - cfg.M) + cfg.M * cfg.Km));
    for (int m = 0; m < cfg.M; ++m) CHECK(topo.ms_index[0][m] == -1);
    for (std::size_t u = 0; u < topo.ms.size(); ++u)
      CHECK(topo.ms_index[topo.ms[u].m][topo.ms[u].k] == static_cast<int>(u));
  }
}

TEST_CASE("snr calibration sets the edge SNR") {
  ScenarioConfig cfg;
  const double l_edge =
      std::pow(10.0, -path_gain_dB(cfg.cluster0_radius_m / 1000.0, LinkType::Access) / 10.0);
  CHECK(cfg.p0_linear() / cfg.N * l_edge == doctest::Approx(10.0).epsilon(1e-9));
  cfg.P0_dB = 30.0;
  CHECK(cfg.p0_linear() == doctest::Approx(1000.0));
}
