#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcofdma/sweep.hpp"

namespace {

// Environment overrides, applied when the corresponding flag is left at its
// default: RCOFDMA_OUT_DIR, RCOFDMA_WORKERS.
void apply_env(rcofdma::SweepSpec& spec, bool outdir_set, bool workers_set) {
  if (!outdir_set) {
    if (const char* v = std::getenv("RCOFDMA_OUT_DIR")) spec.outdir = v;
  }
  if (!workers_set) {
    if (const char* v = std::getenv("RCOFDMA_WORKERS")) spec.workers = std::atoi(v);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-hop relay-assisted cognitive OFDMA downlink simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string param = "q_act";
  std::vector<double> values;
  std::vector<std::string> systems = {"proposed", "no-rs-2"};
  std::string outdir = "out";
  int trials = 200;
  int workers = 0;
  std::uint64_t seed = 1;
  int frames = 0;
  int verbosity = 1;

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep across systems");
  sweep->add_option("-c,--config", config_path, "scenario config file")->required();
  sweep->add_option("-p,--param", param, "swept parameter: q_act, snr, K, sigma_e2");
  sweep->add_option("-v,--values", values, "sweep values")->required()->delimiter(',');
  sweep->add_option("-s,--systems", systems, "systems: proposed, no-rs-2, no-rs-3, naive")
      ->delimiter(',');
  sweep->add_option("-t,--trials", trials, "independent replications per point");
  sweep->add_option("-w,--workers", workers, "worker threads (0 = hardware)");
  sweep->add_option("-o,--out", outdir, "output directory");
  sweep->add_option("--seed", seed, "master seed");
  sweep->add_option("--frames", frames, "frames per replication (0 = config value)");
  sweep->add_option("--verbosity", verbosity, "0 quiet, 1 progress");

  auto* run = app.add_subcommand("run", "run a single operating point");
  std::string run_system = "proposed";
  run->add_option("-c,--config", config_path, "scenario config file")->required();
  run->add_option("-s,--system", run_system, "system to run");
  run->add_option("-t,--trials", trials, "independent replications");
  run->add_option("-w,--workers", workers, "worker threads (0 = hardware)");
  run->add_option("-o,--out", outdir, "output directory");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--frames", frames, "frames per replication (0 = config value)");
  run->add_option("--verbosity", verbosity, "0 quiet, 1 progress");

  auto* check = app.add_subcommand("check-config", "validate a config file and echo it");
  check->add_option("-c,--config", config_path, "scenario config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const rcofdma::ScenarioConfig cfg = rcofdma::load_config(config_path);

    if (check->parsed()) {
      std::fputs(rcofdma::serialize_config(cfg).c_str(), stdout);
      std::printf("config_hash = %llu\n",
                  static_cast<unsigned long long>(rcofdma::config_hash(cfg)));
      return 0;
    }

    rcofdma::SweepSpec spec;
    spec.trials = trials;
    spec.workers = workers;
    spec.outdir = outdir;
    spec.seed = seed;
    spec.frames_override = frames;
    spec.verbosity = verbosity;

    if (run->parsed()) {
      // A single point is a one-value sweep on the config's own q_act.
      spec.param = rcofdma::SweepParam::QAct;
      spec.values = {cfg.q_act};
      spec.systems = {rcofdma::parse_system(run_system)};
      apply_env(spec, run->count("--out") || run->count("-o"),
                run->count("--workers") || run->count("-w"));
      return rcofdma::run_sweep(cfg, spec);
    }

    spec.param = rcofdma::parse_param(param);
    spec.values = values;
    spec.systems.clear();
    for (const auto& s : systems) spec.systems.push_back(rcofdma::parse_system(s));
    apply_env(spec, sweep->count("--out") || sweep->count("-o"),
              sweep->count("--workers") || sweep->count("-w"));
    return rcofdma::run_sweep(cfg, spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
