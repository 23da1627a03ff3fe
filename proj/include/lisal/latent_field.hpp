#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "lisal/gp.hpp"
#include "lisal/kernel.hpp"
#include "lisal/types.hpp"

namespace lisal {

// Hyper-parameters of the stationary latent GP (SE kernel over x, y, t).
// Only the length scales are learned; signal and jitter sd stay at their
// configured values (see joint.hpp).
struct LatentHypers {
  double log_signal_sd = 0.0;
  std::array<double, 3> log_lengths{};
  double log_jitter_sd = -6.907755278982137;  // log(1e-3)

  double signal_sd() const;
  double jitter_sd() const;
  std::array<double, 3> lengths() const;
  StationaryKernel kernel() const;
};

// Latent locations X_M (a subset of the training inputs), their local
// hyper-parameter values z_M, and the latent-GP hyper-parameters. The first
// `frozen_prefix` values are held fixed by the joint optimizer.
struct LatentField {
  PointList locations;
  Eigen::VectorXd values;
  LatentHypers hypers;
  std::size_t frozen_prefix = 0;

  std::size_t size() const { return locations.size(); }
  void validate() const;
};

// Posterior mean of the zero-mean latent GP conditioned on (X_M, z_M) with the
// jitter sd as observation noise. Holds the factorisation so that repeated
// queries against one field are cheap.
class LatentPredictor {
 public:
  explicit LatentPredictor(const LatentField& field);

  Eigen::VectorXd predict(PointSpan queries) const;

 private:
  PointList locations_;
  StationaryKernel kernel_;
  Eigen::VectorXd weights_;  // (K_MM + jitter^2 I)^{-1} z_M
};

Eigen::VectorXd latent_predict_mean(const LatentField& field, PointSpan queries);

// Log marginal likelihood of z_M at X_M under the latent GP.
double latent_lml(const LatentField& field);

}  // namespace lisal
