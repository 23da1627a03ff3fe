#pragma once

// Brute-force reference computations. Everything here is written from the
// closed forms with dense inverses and determinants, sharing no numerical
// code with the library beyond the plain data types, so tests can use it as
// an independent check.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lisal/kernel.hpp"
#include "lisal/latent_field.hpp"
#include "lisal/nonstationary.hpp"
#include "lisal/types.hpp"

namespace lisal::oracle {

double base_cov(const Point& p, const Point& q, const GlobalHypers& h);
double latent_cov(const Point& p, const Point& q, const LatentHypers& h);

// Log N(y; 0, K) via LU inverse and determinant.
double gaussian_log_density(const Eigen::MatrixXd& k, const Eigen::VectorXd& y);

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
DensePosterior condition(const Eigen::MatrixXd& k_noisy, const Eigen::MatrixXd& k_cross,
                         const Eigen::MatrixXd& k_query, const Eigen::VectorXd& y);

Eigen::VectorXd latent_mean(const LatentField& f, PointSpan queries);
double latent_lml(const LatentField& f);

// Local parameters predicted one point at a time and the pairwise covariance
// evaluated from the textbook formulas (3x3 determinants for PCLSK).
double ngp_entry(const FittedNGP& m, const Point& p, const Point& q);
Eigen::MatrixXd ngp_cov(const FittedNGP& m, PointSpan a, PointSpan b);
DensePosterior ngp_posterior(const FittedNGP& m, const ObservationSet& cond, PointSpan queries);

// Data log likelihood plus latent log likelihoods, recomposed from the above.
double joint_objective(const ObservationSet& data, const FittedNGP& m);

// I(A; V \ A) from log determinants of the noisy covariance.
double mutual_information(const Eigen::MatrixXd& cov, double noise_sd, const std::vector<std::size_t>& a);
double conditional_variance(const Eigen::MatrixXd& cov, double noise_sd, std::size_t y,
                            const std::vector<std::size_t>& given);

struct SubsetOptimum {
  std::vector<std::size_t> subset;  // added indices, ascending
  double value = 0.0;
};
// Best set of `budget` additions to `pre` under mutual_information.
SubsetOptimum exhaustive_mi(const Eigen::MatrixXd& cov, double noise_sd, const std::vector<std::size_t>& pre,
                            std::size_t budget);

struct SuiteCheck {
  std::string name;
  std::size_t instances = 0;
  double max_abs_error = 0.0;
};
// Random small instances (n <= 8) comparing the library against the oracles
// above. One entry per compared operation.
std::vector<SuiteCheck> run_suite(std::uint64_t seed, std::size_t instances);

}  // namespace lisal::oracle
