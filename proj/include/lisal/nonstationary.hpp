#pragma once

#include <array>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lisal/kernel.hpp"
#include "lisal/latent_field.hpp"
#include "lisal/types.hpp"

namespace lisal {

enum class ModelKind { kStationary, kPclsk, kLeis };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

// Number of latent fields a model of this kind carries: 0, 3 (log l_x, log l_y,
// log l_t) or 1 (latent input coordinate).
std::size_t latent_dimensions(ModelKind kind);

using AxisScales = std::array<double, 3>;

// Determinant prefactor |S_p|^{1/4} |S_q|^{1/4} / |(S_p + S_q)/2|^{1/2} for
// diagonal S = diag(l_x^2, l_y^2, l_t^2). Always in (0, 1].
double pclsk_prefactor(const AxisScales& scales_p, const AxisScales& scales_q);

// Process-convolution covariance: prefactor times the unit-scale base profile
// evaluated at the Mahalanobis distances under the averaged local kernels.
double pclsk_cov(const Point& p, const Point& q, const AxisScales& scales_p,
                 const AxisScales& scales_q, KernelFamily family, double sigma_f);

// Base stationary covariance times exp(-1/2 ((lp - lq) / l_l)^2).
double leis_cov(const Point& p, const Point& q, double lp, double lq, const GlobalHypers& h);

// Local hyper-parameters annotating a point list.
struct LocalParams {
  ModelKind kind = ModelKind::kStationary;
  std::vector<AxisScales> log_scales;  // PCLSK
  std::vector<double> latent_coord;    // LEIS

  std::size_t size() const;
};

// Covariance matrix under explicitly supplied local parameters.
Eigen::MatrixXd nonstationary_cov_matrix(ModelKind kind, const GlobalHypers& globals, PointSpan a,
                                         const LocalParams& local_a, PointSpan b,
                                         const LocalParams& local_b);

// A fitted nonstationary GP. For PCLSK the local log length scale on axis d
// at x is log(base axis length d) + (latent mean of field d at x); for LEIS the
// latent coordinate is the latent mean of the single field.
struct FittedNGP {
  ModelKind kind = ModelKind::kStationary;
  GlobalHypers globals;
  std::vector<LatentField> latent;
  std::shared_ptr<const ObservationSet> train;

  void validate() const;
  LocalParams local_params(PointSpan points) const;
};

Eigen::MatrixXd ngp_cov_matrix(const FittedNGP& model, PointSpan a, PointSpan b);
Eigen::MatrixXd ngp_cov_matrix(const FittedNGP& model, PointSpan a);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  int clamped_variances = 0;
};

Prediction ngp_predict(const FittedNGP& model, const ObservationSet& cond, PointSpan queries);

}  // namespace lisal
