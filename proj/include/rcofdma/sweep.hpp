#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rcofdma/analysis.hpp"
#include "rcofdma/scenario.hpp"

namespace rcofdma {

inline constexpr const char* kVersion = "0.2.0";

enum class SystemKind { Proposed, NoRs2, NoRs3, Naive };
enum class SweepParam { QAct, Snr, TotalUsers, SigmaE2 };

std::string system_name(SystemKind s);
std::string param_name(SweepParam p);

/// Parses a system name; "ssa" (baseline 1) is recognized but rejected with
/// an explanatory message since its algorithm lives in an external
/// reference.
SystemKind parse_system(const std::string& name);
SweepParam parse_param(const std::string& name);

struct SweepSpec {
  SweepParam param = SweepParam::QAct;
  std::vector<double> values;
  int trials = 200;
  std::vector<SystemKind> systems = {SystemKind::Proposed, SystemKind::NoRs2};
  std::string outdir = "out";
  int workers = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 1;
  int frames_override = 0;  // 0 = config value
  int verbosity = 0;

  void validate() const;  // throws ConfigError
};

struct ReplicationRow {
  int value_idx = 0;
  SystemKind system = SystemKind::Proposed;
  int rep = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
};

struct AggregateRow {
  double value = 0.0;
  SystemKind system = SystemKind::Proposed;
  int n = 0;
  Stat sum_log_rtilde, edge_access_prob, mean_goodput, mean_edge_goodput, total_goodput,
      feedback_reals_per_frame;
};

struct HistRow {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  double mean_goodput = 0.0;
};

struct SweepResult {
  ScenarioConfig base;
  SweepSpec spec;
  std::vector<ReplicationRow> rows;       // ordered by (value, system, rep)
  std::vector<AggregateRow> aggregates;   // ordered by (value, system)
};

/// Applies one sweep value to a config copy. TotalUsers scales K0 and Km
/// keeping their ratio.
ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepParam param, double value);

/// Runs one replication of one system; rep_seed drives topology and frames.
RunMetrics run_replication(const ScenarioConfig& cfg, SystemKind system, std::uint64_t rep_seed,
                           int frames);

/// Dispatches all (value, system, replication) tasks to a worker pool and
/// merges deterministically by task index.
SweepResult run_sweep_collect(const ScenarioConfig& base, const SweepSpec& spec);

/// Pooled distance histogram over the replications of one (value, system).
std::vector<HistRow> emit_distance_histogram(std::span<const RunMetrics> reps, int bins,
                                             double cell_radius_m);

/// Full batch run: collect + write results.csv, aggregate.csv,
/// histogram.csv, cdf.csv and manifest.json under spec.outdir.
/// Returns a process exit status.
int run_sweep(const ScenarioConfig& base, const SweepSpec& spec);

}  // namespace rcofdma
