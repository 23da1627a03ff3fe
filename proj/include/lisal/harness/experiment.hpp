#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lisal/harness/config.hpp"
#include "lisal/harness/simulate.hpp"
#include "lisal/lisal.hpp"

namespace lisal::harness {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kIoError = 4 };

// Maps an in-flight exception to its exit code.
int exit_code_for(const std::exception& e);

struct ExperimentData {
  Dataset raw;
  std::optional<SynthData> synth;
};
ExperimentData load_experiment_data(const ExperimentConfig& cfg);

struct IterationReport {
  std::size_t iteration = 0;
  std::size_t latent_locations = 0;
  double objective = 0.0;
  SimulationReport sim;
  std::optional<double> recovery;  // |Pearson| between learned and true latent values
};

struct ExperimentReport {
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  Standardizer standardizer;
  LisalResult fit;
  SimulationReport stationary;
  std::vector<IterationReport> iterations;
  double simulate_seconds = 0.0;
};

SimulationOptions simulation_options(const ExperimentConfig& cfg, const Standardizer& standardizer);

// Load or generate data, fit, evaluate the stationary model and every LISAL
// iteration. Pure compute; writing is separate.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// report.json and rmse.csv are functions of the config alone (byte-identical
// across runs); wall-clock times go to timings.json. model.json holds the
// final model.
void write_reports(const ExperimentConfig& cfg, const ExperimentReport& report);
void write_simulation(const std::filesystem::path& dir, const SimulationReport& sim);

double abs_pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace lisal::harness
