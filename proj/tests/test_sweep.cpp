#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcofdma/sweep.hpp"

using namespace rcofdma;

namespace {

ScenarioConfig tiny_config() {
  ScenarioConfig cfg;
  cfg.M = 2;
  cfg.K0 = 5;
  cfg.Km = 2;
  cfg.N = 2;
  cfg.t_s = 5;
  cfg.frames = 6;
  cfg.solver_max_iter = 120;
  cfg.seed = 3;
  return cfg;
}

SweepSpec tiny_spec(const std::string& outdir) {
  SweepSpec spec;
  spec.param = SweepParam::QAct;
  spec.values = {0.2, 0.4};
  spec.trials = 2;
  spec.systems = {SystemKind::Proposed, SystemKind::NoRs2};
  spec.outdir = outdir;
  spec.workers = 2;
  spec.seed = 11;
  return spec;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("system and parameter parsing") {
  CHECK(parse_system("proposed") == SystemKind::Proposed);
  CHECK(parse_system("no-rs-3") == SystemKind::NoRs3);
  CHECK(parse_system("naive") == SystemKind::Naive);
  CHECK_THROWS_AS(parse_system("bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_system("ssa"), doctest::Contains("not implemented"), ConfigError);
  CHECK(parse_param("q_act") == SweepParam::QAct);
  CHECK(parse_param("snr") == SweepParam::Snr);
  CHECK_THROWS_AS(parse_param("nope"), ConfigError);
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec = tiny_spec("/tmp/unused");
  CHECK_NOTHROW(spec.validate());
  SUBCASE("empty values") {
    spec.values.clear();
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
  SUBCASE("zero trials") {
    spec.trials = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
  SUBCASE("no systems") {
    spec.systems.clear();
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
}

TEST_CASE("sweep value application") {
  const ScenarioConfig base = tiny_config();
  SUBCASE("q_act") {
    CHECK(apply_sweep_value(base, SweepParam::QAct, 0.45).q_act == doctest::Approx(0.45));
  }
  SUBCASE("snr") {
    CHECK(apply_sweep_value(base, SweepParam::Snr, 4.0).receive_snr_dB == doctest::Approx(4.0));
  }
  SUBCASE("user scaling keeps the ratio") {
    // base: 3 direct + 2*2 relay users = 7 total
    const ScenarioConfig big = apply_sweep_value(base, SweepParam::TotalUsers, 14.0);
    CHECK(big.K0 - big.M == 6);
    CHECK(big.Km == 4);
  }
  SUBCASE("invalid swept value is rejected") {
    CHECK_THROWS_AS(apply_sweep_value(base, SweepParam::QAct, 1.5), ConfigError);
  }
}

TEST_CASE("collected sweep shape and matched seeds") {
  const ScenarioConfig base = tiny_config();
  const SweepSpec spec = tiny_spec("");
  const SweepResult res = run_sweep_collect(base, spec);
  CHECK(res.rows.size() == 2 * 2 * 2);
  CHECK(res.aggregates.size() == 4);
  for (const auto& a : res.aggregates) CHECK(a.n == 2);
  // same (value, rep) share the seed across systems
  for (const auto& r1 : res.rows)
    for (const auto& r2 : res.rows)
      if (r1.value_idx == r2.value_idx && r1.rep == r2.rep) CHECK(r1.seed == r2.seed);
}

TEST_CASE("histogram pooling") {
  const ScenarioConfig base = tiny_config();
  SweepSpec spec = tiny_spec("");
  spec.values = {0.3};
  spec.systems = {SystemKind::NoRs2};
  const SweepResult res = run_sweep_collect(base, spec);
  std::vector<RunMetrics> group;
  for (const auto& row : res.rows) group.push_back(row.metrics);
  const auto table = emit_distance_histogram(group, base.hist_bins, base.cell_radius_m);
  int users = 0;
  for (const auto& row : table) users += row.count;
  CHECK(users == static_cast<int>(group.size() * group[0].user_avg_goodput.size()));
}

TEST_CASE("file outputs are deterministic") {
  const ScenarioConfig base = tiny_config();
  const auto dir = std::filesystem::temp_directory_path() / "rcofdma_sweep_test";
  std::filesystem::remove_all(dir);

  SweepSpec a = tiny_spec((dir / "a").string());
  SweepSpec b = tiny_spec((dir / "b").string());
  b.workers = 1;  // merge order must not depend on dispatch
  REQUIRE(run_sweep(base, a) == 0);
  REQUIRE(run_sweep(base, b) == 0);

  for (const char* name : {"results.csv", "aggregate.csv", "histogram.csv", "cdf.csv"}) {
    const std::string fa = slurp(dir / "a" / name);
    const std::string fb = slurp(dir / "b" / name);
    REQUIRE(!fa.empty());
    CHECK(fa == fb);
  }
  CHECK(std::filesystem::exists(dir / "a" / "manifest.json"));

  SUBCASE("results carry header and expected row count") {
    std::ifstream in(dir / "a" / "results.csv");
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line.rfind("param,value,system", 0) == 0);
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 8);
  }
  std::filesystem::remove_all(dir);
}
