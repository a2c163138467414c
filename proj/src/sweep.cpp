#include "rcofdma/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "rcofdma/baselines.hpp"
#include "rcofdma/scheduler.hpp"

namespace rcofdma {

namespace {

constexpr std::uint64_t kFrameStream = 0x6672616dULL;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string system_name(SystemKind s) {
  switch (s) {
    case SystemKind::Proposed: return "proposed";
    case SystemKind::NoRs2: return "no-rs-2";
    case SystemKind::NoRs3: return "no-rs-3";
    case SystemKind::Naive: return "naive";
  }
  return "?";
}

std::string param_name(SweepParam p) {
  switch (p) {
    case SweepParam::QAct: return "q_act";
    case SweepParam::Snr: return "receive_snr_dB";
    case SweepParam::TotalUsers: return "K";
    case SweepParam::SigmaE2: return "sigma_e2";
  }
  return "?";
}

SystemKind parse_system(const std::string& name) {
  if (name == "proposed") return SystemKind::Proposed;
  if (name == "no-rs-2") return SystemKind::NoRs2;
  if (name == "no-rs-3") return SystemKind::NoRs3;
  if (name == "naive") return SystemKind::Naive;
  if (name == "ssa")
    throw ConfigError(
        "system 'ssa' (baseline 1) is not implemented: the SSA algorithm is specified in an "
        "external reference; available systems: proposed, no-rs-2, no-rs-3, naive");
  throw ConfigError("unknown system '" + name + "' (proposed, no-rs-2, no-rs-3, naive)");
}

SweepParam parse_param(const std::string& name) {
  if (name == "q_act") return SweepParam::QAct;
  if (name == "snr" || name == "receive_snr_dB") return SweepParam::Snr;
  if (name == "K" || name == "users") return SweepParam::TotalUsers;
  if (name == "sigma_e2") return SweepParam::SigmaE2;
  throw ConfigError("unknown sweep parameter '" + name + "' (q_act, snr, K, sigma_e2)");
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep: value list must not be empty");
  if (trials < 1) throw ConfigError("sweep: trials must be >= 1");
  if (systems.empty()) throw ConfigError("sweep: system list must not be empty");
  if (frames_override < 0) throw ConfigError("sweep: frames override must be >= 0");
  if (workers < 0) throw ConfigError("sweep: workers must be >= 0");
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepParam param, double value) {
  ScenarioConfig cfg = base;
  switch (param) {
    case SweepParam::QAct:
      cfg.q_act = value;
      break;
    case SweepParam::Snr:
      cfg.receive_snr_dB = value;
      break;
    case SweepParam::SigmaE2:
      cfg.sigma_e2 = value;
      break;
    case SweepParam::TotalUsers: {
      const int base_total = (base.K0 - base.M) + base.M * base.Km;
      const double f = value / base_total;
      cfg.K0 = base.M + std::max(1, static_cast<int>(std::lround((base.K0 - base.M) * f)));
      cfg.Km = std::max(1, static_cast<int>(std::lround(base.Km * f)));
      break;
    }
  }
  cfg.validate();
  return cfg;
}

RunMetrics run_replication(const ScenarioConfig& cfg_in, SystemKind system,
                           std::uint64_t rep_seed, int frames) {
  ScenarioConfig cfg = cfg_in;
  cfg.seed = rep_seed;
  const Topology topo = build_topology(cfg);
  Rng rng(derive_seed(rep_seed, kFrameStream));
  RunAccumulator acc(topo);

  if (system == SystemKind::Proposed) {
    ProposedScheduler sched(topo);
    for (int t = 0; t < frames; ++t) acc.add(sched.run_frame(rng));
    return acc.finish(sched.pfs());
  }
  const BaselineKind kind = system == SystemKind::NoRs2   ? BaselineKind::NoRsEqualPuActivity
                            : system == SystemKind::NoRs3 ? BaselineKind::NoRsLowRsPuActivity
                                                          : BaselineKind::NaivePerfectCsit;
  NoRsScheduler sched(topo, kind);
  for (int t = 0; t < frames; ++t) acc.add(sched.run_frame(rng));
  return acc.finish(sched.pfs());
}

namespace {

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (xs.size() - 1));
  }
  return s;
}

}  // namespace

SweepResult run_sweep_collect(const ScenarioConfig& base, const SweepSpec& spec) {
  base.validate();
  spec.validate();

  SweepResult result;
  result.base = base;
  result.spec = spec;

  struct Task {
    int value_idx;
    int sys_idx;
    int rep;
  };
  std::vector<Task> tasks;
  for (int v = 0; v < static_cast<int>(spec.values.size()); ++v)
    for (int s = 0; s < static_cast<int>(spec.systems.size()); ++s)
      for (int r = 0; r < spec.trials; ++r) tasks.push_back({v, s, r});

  // Per-value configs validated up front so a bad sweep value fails fast.
  std::vector<ScenarioConfig> cfgs;
  for (double value : spec.values) cfgs.push_back(apply_sweep_value(base, spec.param, value));

  result.rows.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::string error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || failed.load()) return;
      const Task& t = tasks[i];
      // The seed depends on (master, value, rep) but not the system, so
      // systems see matched topologies and draws.
      const std::uint64_t rep_seed =
          derive_seed(derive_seed(spec.seed, 1000 + t.value_idx), t.rep);
      const int frames = spec.frames_override > 0 ? spec.frames_override : cfgs[t.value_idx].frames;
      try {
        ReplicationRow row;
        row.value_idx = t.value_idx;
        row.system = spec.systems[t.sys_idx];
        row.rep = t.rep;
        row.seed = rep_seed;
        row.metrics = run_replication(cfgs[t.value_idx], row.system, rep_seed, frames);
        result.rows[i] = std::move(row);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        error = e.what();
        failed.store(true);
        return;
      }
    }
  };

  int n_workers = spec.workers > 0 ? spec.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed.load()) throw std::runtime_error("sweep replication failed: " + error);

  for (int v = 0; v < static_cast<int>(spec.values.size()); ++v) {
    for (int s = 0; s < static_cast<int>(spec.systems.size()); ++s) {
      std::vector<double> slr, eap, mg, meg, tg, fb;
      for (const auto& row : result.rows) {
        if (row.value_idx != v || row.system != spec.systems[s]) continue;
        slr.push_back(row.metrics.sum_log_rtilde);
        eap.push_back(row.metrics.edge_access_prob);
        mg.push_back(row.metrics.mean_goodput);
        meg.push_back(row.metrics.mean_edge_goodput);
        tg.push_back(row.metrics.total_goodput);
        fb.push_back(row.metrics.feedback_reals_per_frame);
      }
      AggregateRow a;
      a.value = spec.values[v];
      a.system = spec.systems[s];
      a.n = static_cast<int>(slr.size());
      a.sum_log_rtilde = stat_of(slr);
      a.edge_access_prob = stat_of(eap);
      a.mean_goodput = stat_of(mg);
      a.mean_edge_goodput = stat_of(meg);
      a.total_goodput = stat_of(tg);
      a.feedback_reals_per_frame = stat_of(fb);
      result.aggregates.push_back(a);
    }
  }
  return result;
}

std::vector<HistRow> emit_distance_histogram(std::span<const RunMetrics> reps, int bins,
                                             double cell_radius_m) {
  std::vector<HistRow> table(bins);
  for (int b = 0; b < bins; ++b) {
    table[b].lo = cell_radius_m * b / bins;
    table[b].hi = cell_radius_m * (b + 1) / bins;
  }
  for (const auto& m : reps) {
    for (std::size_t u = 0; u < m.user_avg_goodput.size(); ++u) {
      int b = static_cast<int>(m.user_dist_m[u] / cell_radius_m * bins);
      b = std::clamp(b, 0, bins - 1);
      table[b].count += 1;
      table[b].mean_goodput += m.user_avg_goodput[u];
    }
  }
  for (auto& row : table)
    if (row.count > 0) row.mean_goodput /= row.count;
  return table;
}

int run_sweep(const ScenarioConfig& base, const SweepSpec& spec) {
  namespace fs = std::filesystem;
  SweepResult res = run_sweep_collect(base, spec);
  fs::create_directories(spec.outdir);
  const std::string pname = param_name(spec.param);

  {
    std::ofstream f(fs::path(spec.outdir) / "results.csv");
    if (!f) throw std::runtime_error("cannot write results.csv");
    f << "param,value,system,replication,seed,config_hash,frames,sum_log_rtilde,"
         "edge_access_prob,mean_goodput,mean_edge_goodput,total_goodput,"
         "feedback_reals_per_frame";
    const int bins = base.hist_bins;
    for (int b = 0; b < bins; ++b) f << ",hist_count_" << b << ",hist_mean_" << b;
    f << "\n";
    for (const auto& row : res.rows) {
      ScenarioConfig cfg = apply_sweep_value(base, spec.param, spec.values[row.value_idx]);
      cfg.seed = row.seed;
      const auto& m = row.metrics;
      f << pname << ',' << fmt(spec.values[row.value_idx]) << ',' << system_name(row.system)
        << ',' << row.rep << ',' << row.seed << ',' << config_hash(cfg) << ',' << m.frames << ','
        << fmt(m.sum_log_rtilde) << ',' << fmt(m.edge_access_prob) << ',' << fmt(m.mean_goodput)
        << ',' << fmt(m.mean_edge_goodput) << ',' << fmt(m.total_goodput) << ','
        << fmt(m.feedback_reals_per_frame);
      for (int b = 0; b < bins; ++b)
        f << ',' << m.hist_count[b] << ',' << fmt(m.hist_mean[b]);
      f << "\n";
    }
  }

  {
    std::ofstream f(fs::path(spec.outdir) / "aggregate.csv");
    f << "param,value,system,n,sum_log_rtilde_mean,sum_log_rtilde_sd,edge_access_mean,"
         "edge_access_sd,mean_goodput_mean,mean_goodput_sd,mean_edge_goodput_mean,"
         "mean_edge_goodput_sd,total_goodput_mean,total_goodput_sd,feedback_mean,feedback_sd\n";
    for (const auto& a : res.aggregates) {
      f << pname << ',' << fmt(a.value) << ',' << system_name(a.system) << ',' << a.n << ','
        << fmt(a.sum_log_rtilde.mean) << ',' << fmt(a.sum_log_rtilde.sd) << ','
        << fmt(a.edge_access_prob.mean) << ',' << fmt(a.edge_access_prob.sd) << ','
        << fmt(a.mean_goodput.mean) << ',' << fmt(a.mean_goodput.sd) << ','
        << fmt(a.mean_edge_goodput.mean) << ',' << fmt(a.mean_edge_goodput.sd) << ','
        << fmt(a.total_goodput.mean) << ',' << fmt(a.total_goodput.sd) << ','
        << fmt(a.feedback_reals_per_frame.mean) << ',' << fmt(a.feedback_reals_per_frame.sd)
        << "\n";
    }
  }

  {
    std::ofstream hf(fs::path(spec.outdir) / "histogram.csv");
    std::ofstream cf(fs::path(spec.outdir) / "cdf.csv");
    hf << "param,value,system,bin_lo_m,bin_hi_m,users,mean_goodput\n";
    cf << "param,value,system,goodput,cum_fraction\n";
    for (int v = 0; v < static_cast<int>(spec.values.size()); ++v) {
      for (const auto sys : spec.systems) {
        std::vector<RunMetrics> group;
        std::vector<double> pooled;
        for (const auto& row : res.rows)
          if (row.value_idx == v && row.system == sys) {
            group.push_back(row.metrics);
            pooled.insert(pooled.end(), row.metrics.user_avg_goodput.begin(),
                          row.metrics.user_avg_goodput.end());
          }
        const auto table = emit_distance_histogram(group, base.hist_bins, base.cell_radius_m);
        for (const auto& rowt : table)
          hf << pname << ',' << fmt(spec.values[v]) << ',' << system_name(sys) << ','
             << fmt(rowt.lo) << ',' << fmt(rowt.hi) << ',' << rowt.count << ','
             << fmt(rowt.mean_goodput) << "\n";
        std::sort(pooled.begin(), pooled.end());
        for (int pct = 0; pct <= 100; ++pct) {
          if (pooled.empty()) break;
          const std::size_t i =
              std::min(pooled.size() - 1,
                       static_cast<std::size_t>(pct / 100.0 * (pooled.size() - 1) + 0.5));
          cf << pname << ',' << fmt(spec.values[v]) << ',' << system_name(sys) << ','
             << fmt(pooled[i]) << ',' << fmt(pct / 100.0) << "\n";
        }
      }
    }
  }

  {
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["master_seed"] = spec.seed;
    manifest["config_hash"] = config_hash(base);
    manifest["param"] = pname;
    manifest["values"] = spec.values;
    manifest["trials"] = spec.trials;
    manifest["frames_override"] = spec.frames_override;
    std::vector<std::string> names;
    for (auto s : spec.systems) names.push_back(system_name(s));
    manifest["systems"] = names;
    nlohmann::json cfgj;
    std::istringstream echo(serialize_config(base));
    std::string line;
    while (std::getline(echo, line)) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) cfgj[line.substr(0, eq)] = line.substr(eq + 3);
    }
    manifest["config"] = cfgj;
    manifest["outputs"] = {"results.csv", "aggregate.csv", "histogram.csv", "cdf.csv"};
    std::ofstream f(std::filesystem::path(spec.outdir) / "manifest.json");
    f << manifest.dump(2) << "\n";
  }

  if (spec.verbosity > 0) {
    std::printf("sweep complete: %zu replications, outputs in %s\n", res.rows.size(),
                spec.outdir.c_str());
  }
  return 0;
}

}  // namespace rcofdma
