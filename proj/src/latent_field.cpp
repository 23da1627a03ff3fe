#include "lisal/latent_field.hpp"

#include <cmath>
#include <string>

#include "lisal/error.hpp"

namespace lisal {

double LatentHypers::signal_sd() const { return std::exp(log_signal_sd); }
double LatentHypers::jitter_sd() const { return std::exp(log_jitter_sd); }

std::array<double, 3> LatentHypers::lengths() const {
  return {std::exp(log_lengths[0]), std::exp(log_lengths[1]), std::exp(log_lengths[2])};
}

StationaryKernel LatentHypers::kernel() const {
  return StationaryKernel(KernelFamily::kSeAniso, signal_sd(), lengths());
}

void LatentField::validate() const {
  if (locations.empty()) throw InvalidInput("latent field has no latent locations");
  if (static_cast<std::size_t>(values.size()) != locations.size()) {
    throw InvalidInput("latent field: " + std::to_string(locations.size()) + " locations but " +
                       std::to_string(values.size()) + " values");
  }
  if (frozen_prefix > locations.size()) throw InvalidInput("latent field: frozen prefix exceeds size");
  if (!values.allFinite()) throw InvalidInput("latent field: non-finite latent values");
  require_finite(locations);
}

namespace {

Eigen::MatrixXd noisy_latent_cov(const LatentField& field, const StationaryKernel& k) {
  Eigen::MatrixXd c = cov_matrix(field.locations, k);
  const double jit = field.hypers.jitter_sd();
  c.diagonal().array() += jit * jit;
  return c;
}

}  // namespace

LatentPredictor::LatentPredictor(const LatentField& field)
    : locations_(field.locations), kernel_(field.hypers.kernel()) {
  field.validate();
  const auto chol = CholeskyFactor::compute(noisy_latent_cov(field, kernel_));
  weights_ = chol.solve(field.values);
}

Eigen::VectorXd LatentPredictor::predict(PointSpan queries) const {
  return cov_matrix(queries, locations_, kernel_) * weights_;
}

Eigen::VectorXd latent_predict_mean(const LatentField& field, PointSpan queries) {
  return LatentPredictor(field).predict(queries);
}

double latent_lml(const LatentField& field) {
  field.validate();
  return gaussian_log_density(noisy_latent_cov(field, field.hypers.kernel()), field.values);
}

}  // namespace lisal
