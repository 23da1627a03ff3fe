#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lisal/error.hpp"
#include "lisal/joint.hpp"
#include "lisal/kernel.hpp"
#include "lisal/nonstationary.hpp"
#include "lisal/types.hpp"

namespace lisal {

struct LisalConfig {
  std::size_t m1 = 6;  // latent locations chosen before the first joint fit
  std::size_t m2 = 6;  // latent locations added per adaptive iteration
  std::size_t c = 0;   // adaptive iterations
  ModelKind kind = ModelKind::kLeis;
  KernelFamily family = KernelFamily::kSeAniso;
  std::uint64_t seed = 0;
  std::size_t restarts = 4;
  double perturbation_sd = 0.3;
  double value_perturbation_sd = 1.0;
  double latent_jitter_sd = 1e-3;

  void validate(std::size_t n) const;
};

struct LisalIteration {
  std::size_t iteration = 0;
  std::vector<std::size_t> selected;  // indices into the training set, this iteration only
  double objective = 0.0;
  FittedNGP model;
  double seconds = 0.0;
};

struct LisalTrace {
  GlobalHypers stationary;
  double stationary_objective = 0.0;
  double stationary_seconds = 0.0;
  std::vector<LisalIteration> iterations;
};

struct LisalResult {
  FittedNGP model;
  LisalTrace trace;
};

// A failure inside one stage of lisal_fit, with everything completed so far.
class LisalStageError : public Error {
 public:
  LisalStageError(std::string stage, const std::string& what, LisalTrace partial)
      : Error(stage + ": " + what), stage_(std::move(stage)), partial_(std::move(partial)) {}
  const std::string& stage() const { return stage_; }
  const LisalTrace& partial_trace() const { return partial_; }

 private:
  std::string stage_;
  LisalTrace partial_;
};

// Splits one seed into independent per-stage streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct StationaryFit {
  GlobalHypers hypers;
  double objective = 0.0;
};

// ML-II fit of the stationary base kernel.
StationaryFit fit_stationary(const ObservationSet& data, KernelFamily family, std::uint64_t seed = 0,
                             std::size_t restarts = 4);

FittedNGP stationary_model(const GlobalHypers& hypers);

// Half the data extent per axis (1 where the extent is zero).
std::array<double, 3> half_extents(PointSpan points);

LisalResult lisal_fit(const ObservationSet& data, const LisalConfig& config);

Prediction predict(const FittedNGP& model, const ObservationSet& cond, PointSpan queries);

}  // namespace lisal
