#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "rcofdma/sensing.hpp"

using namespace rcofdma;

TEST_CASE("pu state draws") {
  Rng rng(3);
  SUBCASE("degenerate activities") {
    auto all_on = draw_pu_states({0.0, 0.0}, 4, rng);
    for (const auto& row : all_on)
      for (int s : row) CHECK(s == 1);
    auto all_off = draw_pu_states({1.0, 1.0}, 4, rng);
    for (const auto& row : all_off)
      for (int s : row) CHECK(s == 0);
  }
  SUBCASE("empirical activity") {
    long busy = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      auto s = draw_pu_states({0.3}, 1, rng);
      busy += 1 - s[0][0];
    }
    CHECK(std::fabs(static_cast<double>(busy) / n - 0.3) < 0.005);
  }
  SUBCASE("invalid probability rejected") {
    CHECK_THROWS_AS(draw_pu_states({1.5}, 1, rng), std::invalid_argument);
  }
}

TEST_CASE("report error rates") {
  Rng rng(5);
  SUBCASE("perfect sensing copies S") {
    const std::vector<std::vector<int>> S{{1, 0, 1, 0}};
    auto rep = draw_reports(S, {6}, 0.0, 1.0, rng);
    for (int n = 0; n < 4; ++n)
      for (int k = 0; k < 6; ++k) CHECK(rep[0][n][k] == S[0][n]);
  }
  SUBCASE("false alarm rate") {
    const std::vector<std::vector<int>> S{{1}};
    long misses = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      auto rep = draw_reports(S, {1}, 0.2, 0.8, rng);
      misses += rep[0][0][0] == 0;
    }
    CHECK(std::fabs(static_cast<double>(misses) / n - 0.2) < 0.005);
  }
  SUBCASE("mis-detection rate") {
    const std::vector<std::vector<int>> S{{0}};
    long wrong = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      auto rep = draw_reports(S, {1}, 0.2, 0.8, rng);
      wrong += rep[0][0][0] == 1;
    }
    CHECK(std::fabs(static_cast<double>(wrong) / n - 0.2) < 0.005);
  }
}

TEST_CASE("posterior fusion") {
  SUBCASE("hand Bayes example") {
    const int rep[] = {1};
    // 0.7*0.8 / (0.7*0.8 + 0.3*0.2)
    CHECK(posterior_beta(rep, 0.7, 0.2, 0.8) == doctest::Approx(0.9032258064516129).epsilon(1e-12));
  }
  SUBCASE("no evidence returns prior") {
    CHECK(posterior_beta({}, 0.42, 0.2, 0.8) == doctest::Approx(0.42));
  }
  SUBCASE("certainty under perfect sensing") {
    const int rep[] = {1, 1, 1};
    CHECK(posterior_beta(rep, 0.5, 0.0, 1.0) == doctest::Approx(1.0));
  }
  SUBCASE("degenerate product flags and returns prior") {
    // q_f = 0 and q_d = 1 with contradictory reports: impossible event.
    const int rep[] = {1, 0};
    bool degenerate = false;
    CHECK(posterior_beta(rep, 0.6, 0.0, 1.0, &degenerate) == doctest::Approx(0.6));
    CHECK(degenerate);
  }
  SUBCASE("monotone in positive report count") {
    double prev = 0.0;
    for (int ones = 0; ones <= 5; ++ones) {
      std::vector<int> rep(5, 0);
      for (int i = 0; i < ones; ++i) rep[i] = 1;
      const double b = posterior_beta(rep, 0.7, 0.2, 0.8);
      if (ones > 0) CHECK(b > prev);
      prev = b;
    }
  }
}

TEST_CASE("posterior calibration against the generative model") {
  // Bin (S, reports) samples by the computed beta; within each bin the
  // empirical availability frequency must match the bin's beta.
  Rng rng(11);
  const double q_act = 0.3, q_f = 0.2, q_d = 0.8;
  std::map<int, std::pair<long, long>> bins;  // beta-percent -> (count, S=1 count)
  std::map<int, double> beta_sum;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    auto snap = make_sensing_snapshot({q_act}, {5}, 1, q_f, q_d, rng);
    const double beta = snap.beta[0][0];
    const int key = static_cast<int>(beta * 50.0);
    auto& [count, avail] = bins[key];
    ++count;
    avail += snap.S[0][0];
    beta_sum[key] += beta;
  }
  int checked = 0;
  for (const auto& [key, stat] : bins) {
    if (stat.first < 2000) continue;  // skip sparse bins
    const double freq = static_cast<double>(stat.second) / stat.first;
    const double mean_beta = beta_sum[key] / stat.first;
    CHECK(std::fabs(freq - mean_beta) < 0.02);
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("interference level") {
  CHECK(interference_level(5.0, 0.7, 1.0) == doctest::Approx(0.0));
  CHECK(interference_level(0.0, 0.7, 0.2) == doctest::Approx(0.0));
  CHECK(interference_level(2.0, 0.5, 0.6) == doctest::Approx(0.4).epsilon(1e-12));
}
