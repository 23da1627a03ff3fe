#pragma once

#include <cstddef>
#include <vector>

#include "lisal/harness/dataset.hpp"
#include "lisal/nonstationary.hpp"

namespace lisal::harness {

struct SimulationOptions {
  std::size_t k = 6;               // observations per timestep
  std::size_t history_window = 0;  // earlier timesteps whose picks stay in the conditioning set
  Standardizer standardizer;       // maps readings to the model's units
};

struct SimulationReport {
  std::vector<double> timesteps;
  std::vector<double> rmse;                      // original units, one per timestep
  std::vector<std::vector<std::size_t>> picks;   // training indices chosen at each timestep
  double mean_rmse = 0.0;
  int clamped_variances = 0;
};

// At each timestep: choose k training locations of that timestep by greedy
// MI under the model covariance, condition on their readings (plus those of
// the previous `history_window` timesteps) and predict every test location of
// the timestep. Train and test are in original units.
SimulationReport simulate_sensing(const FittedNGP& model, const ObservationSet& train,
                                  const ObservationSet& test, const SimulationOptions& options);

}  // namespace lisal::harness
