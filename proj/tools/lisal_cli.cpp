#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lisal/harness/config.hpp"
#include "lisal/harness/experiment.hpp"
#include "lisal/harness/snapshot.hpp"
#include "lisal/oracle.hpp"

namespace fs = std::filesystem;
using namespace lisal;
using namespace lisal::harness;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment config (TOML subset)");
  cmd->add_option("--seed", f.seed, "overrides the config seed");
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  cfg.validate();
  return cfg;
}

int cmd_synth(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const SynthData s = synth_generate(cfg.synth, derive_seed(cfg.seed, 1000));
  fs::create_directories(cfg.out_dir);
  write_csv(fs::path(cfg.out_dir) / "dataset.csv", s.data);
  write_latent_csv(fs::path(cfg.out_dir) / "latent.csv", s);
  std::cout << "wrote " << s.data.train.size() << " train and " << s.data.test.size() << " test rows to "
            << cfg.out_dir << "\n";
  return kOk;
}

int cmd_fit(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const ExperimentData data = load_experiment_data(cfg);
  const Standardizer st = cfg.standardize ? Standardizer::fit(data.raw.train.values()) : Standardizer{};
  LisalConfig lcfg = cfg.lisal;
  lcfg.seed = cfg.seed;
  const LisalResult r = lisal_fit(st.apply(data.raw.train), lcfg);
  fs::create_directories(cfg.out_dir);
  save_snapshot(fs::path(cfg.out_dir) / "model.json", ModelSnapshot{r.model, st});
  std::cout << "objective " << r.trace.iterations.back().objective << " with "
            << r.model.latent.front().size() << " latent locations\n";
  return kOk;
}

int cmd_simulate(const CommonFlags& f, const std::string& model_path) {
  const ExperimentConfig cfg = resolve(f);
  const ExperimentData data = load_experiment_data(cfg);
  const ModelSnapshot snap = load_snapshot(model_path);
  const SimulationReport sim =
      simulate_sensing(snap.model, data.raw.train, data.raw.test, simulation_options(cfg, snap.standardizer));
  write_simulation(cfg.out_dir, sim);
  std::cout << "mean rmse " << sim.mean_rmse << "\n";
  return kOk;
}

int cmd_run(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const ExperimentReport r = run_experiment(cfg);
  write_reports(cfg, r);
  std::cout << "stationary mean rmse " << r.stationary.mean_rmse << "\n";
  for (const auto& it : r.iterations) {
    std::cout << "iteration " << it.iteration << " (m = " << it.latent_locations << ") mean rmse "
              << it.sim.mean_rmse << "\n";
  }
  return kOk;
}

int cmd_oracle(std::uint64_t seed, std::size_t instances, double tolerance) {
  bool ok = true;
  for (const auto& c : oracle::run_suite(seed, instances)) {
    const bool pass = c.max_abs_error <= tolerance;
    ok = ok && pass;
    std::cout << (pass ? "ok   " : "FAIL ") << c.name << " instances=" << c.instances
              << " max_abs_error=" << c.max_abs_error << "\n";
  }
  return ok ? kOk : kNumericalError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonstationary GP learning with adaptively selected latent locations"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset and its true latent field");
  add_common(synth, flags);
  auto* fit = app.add_subcommand("fit", "fit a model and write model.json");
  add_common(fit, flags);
  auto* simulate = app.add_subcommand("simulate", "run the sensing simulation for a saved model");
  add_common(simulate, flags);
  std::string model_path;
  simulate->add_option("--model", model_path, "model snapshot")->required();
  auto* run = app.add_subcommand("run", "fit, evaluate every iteration and write reports");
  add_common(run, flags);
  auto* oracle_cmd = app.add_subcommand("oracle", "compare the library against brute-force oracles");
  add_common(oracle_cmd, flags);
  std::size_t instances = 100;
  double tolerance = 1e-8;
  oracle_cmd->add_option("--instances", instances, "random instances");
  oracle_cmd->add_option("--tolerance", tolerance, "absolute tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*synth) return cmd_synth(flags);
    if (*fit) return cmd_fit(flags);
    if (*simulate) return cmd_simulate(flags, model_path);
    if (*run) return cmd_run(flags);
    if (*oracle_cmd) return cmd_oracle(flags.seed.value_or(0), instances, tolerance);
  } catch (const LisalStageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kOk;
}
