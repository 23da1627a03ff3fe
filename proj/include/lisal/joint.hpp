#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lisal/kernel.hpp"
#include "lisal/latent_field.hpp"
#include "lisal/nonstationary.hpp"
#include "lisal/types.hpp"

namespace lisal {

// Global hyper-parameters plus one latent field per local-parameter dimension.
struct JointState {
  GlobalHypers globals;
  std::vector<LatentField> fields;
};

// Which parameter groups the optimizer may move. The latent-GP signal and
// jitter sd are never optimised: with z_M free, the latent log likelihood is
// unbounded along the direction (z_M, signal sd) -> 0.
struct FreeParams {
  bool sigma_f = true;
  bool sigma_n = true;
  bool base = true;
  bool latent_length = true;   // LEIS l_l
  bool latent_lengths = true;  // latent-GP length scales
  bool latent_values = true;   // unfrozen z_M entries
};

struct JointOptions {
  std::size_t restarts = 4;
  double perturbation_sd = 0.3;        // log-parameterised entries
  double value_perturbation_sd = 1.0;  // latent values
  int max_iterations = 200;
  double tolerance = 1e-5;
  std::uint64_t seed = 0;
  FreeParams free;
};

struct JointResult {
  JointState state;
  double objective = 0.0;
  double initial_objective = 0.0;
  std::size_t failed_restarts = 0;
  std::vector<double> restart_objectives;
};

// log p(y | X, theta_y, z^m) + sum over fields of latent_lml, where z^m is the
// latent predictive mean at every training point. Returns -infinity when any
// covariance cannot be factorised.
double joint_objective(const ObservationSet& data, ModelKind kind, const GlobalHypers& globals,
                       const std::vector<LatentField>& fields);

// The joint objective as a function of the free parameters (logs of positive
// quantities, z_M entries as-is), with an analytic gradient.
class JointObjective {
 public:
  JointObjective(const ObservationSet& data, ModelKind kind, JointState reference, FreeParams free);

  std::size_t num_free() const { return free_index_.size(); }
  // Whether free parameter k is a latent value (identity-parameterised).
  bool is_latent_value(std::size_t k) const { return free_is_value_[k]; }
  Eigen::VectorXd pack(const JointState& state) const;
  JointState unpack(const Eigen::VectorXd& x) const;

  double value(const Eigen::VectorXd& x) const;
  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& gradient) const;

  // Objective and gradient over the full parameter layout of `state`.
  double evaluate(const JointState& state, Eigen::VectorXd* full_gradient) const;

 private:
  Eigen::VectorXd full_vector(const JointState& state) const;
  JointState state_from_full(const Eigen::VectorXd& full) const;

  const ObservationSet& data_;
  ModelKind kind_;
  JointState reference_;
  std::vector<Eigen::Index> free_index_;
  std::vector<bool> free_is_value_;
  Eigen::Index full_size_ = 0;
};

// Multi-start quasi-Newton maximisation of the joint objective. Restart 0
// starts from `init`; the others from Gaussian perturbations of the free
// parameters. The result never scores below `init`.
JointResult joint_optimize(const ObservationSet& data, ModelKind kind, const JointState& init,
                           const JointOptions& options);

}  // namespace lisal
