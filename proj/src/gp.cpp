#include "lisal/gp.hpp"

#include <cmath>
#include <numbers>

#include "lisal/error.hpp"

namespace lisal {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

}  // namespace

std::optional<CholeskyFactor> CholeskyFactor::try_compute(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols()) throw InvalidInput("cholesky: matrix is not square");
  if (!k.allFinite()) return std::nullopt;
  const double mean_diag = k.rows() > 0 ? k.diagonal().mean() : 1.0;
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;

  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() == Eigen::Success) return CholeskyFactor(std::move(llt), 0.0);

  for (double rel = kJitterStart; rel <= kJitterMax * (1.0 + 1e-9); rel *= 10.0) {
    const double jitter = rel * scale;
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt.compute(kj);
    if (llt.info() == Eigen::Success) return CholeskyFactor(std::move(llt), jitter);
  }
  return std::nullopt;
}

CholeskyFactor CholeskyFactor::compute(const Eigen::MatrixXd& k) {
  auto f = try_compute(k);
  if (!f) {
    const double mean_diag = k.rows() > 0 ? k.diagonal().mean() : 1.0;
    const double jitter = kJitterMax * (mean_diag > 0.0 ? mean_diag : 1.0);
    throw NumericalFailure("covariance not positive definite after jitter " + std::to_string(jitter),
                           jitter);
  }
  return std::move(*f);
}

Eigen::MatrixXd CholeskyFactor::half_solve(const Eigen::MatrixXd& b) const {
  return llt_.matrixL().solve(b);
}

double CholeskyFactor::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd CholeskyFactor::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(size(), size()));
}

double gaussian_log_density(const Eigen::MatrixXd& k_noisy, const Eigen::VectorXd& y) {
  if (y.size() != k_noisy.rows()) throw InvalidInput("log density: size mismatch");
  if (y.size() == 0) return 0.0;
  const auto chol = CholeskyFactor::compute(k_noisy);
  const Eigen::VectorXd alpha = chol.solve(y);
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(alpha) - 0.5 * chol.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

double log_marginal_likelihood(const ObservationSet& data, const KernelFn& kernel, double sigma_n) {
  Eigen::MatrixXd k = cov_matrix(data.points(), kernel);
  k.diagonal().array() += sigma_n * sigma_n;
  return gaussian_log_density(k, data.values());
}

Posterior condition(const Eigen::MatrixXd& k_noisy, const Eigen::MatrixXd& k_cross,
                    const Eigen::MatrixXd& k_query, const Eigen::VectorXd& y) {
  Posterior post;
  if (y.size() == 0) {
    post.mean = Eigen::VectorXd::Zero(k_query.rows());
    post.cov = k_query;
  } else {
    const auto chol = CholeskyFactor::compute(k_noisy);
    post.mean = k_cross * chol.solve(y);
    const Eigen::MatrixXd v = chol.half_solve(k_cross.transpose());
    post.cov = k_query - v.transpose() * v;
  }
  for (Eigen::Index i = 0; i < post.cov.rows(); ++i) {
    if (post.cov(i, i) < 0.0) {
      post.cov(i, i) = 0.0;
      ++post.clamped_variances;
    }
  }
  return post;
}

Posterior posterior(const ObservationSet& data, const KernelFn& kernel, double sigma_n,
                    PointSpan queries) {
  Eigen::MatrixXd k = cov_matrix(data.points(), kernel);
  k.diagonal().array() += sigma_n * sigma_n;
  return condition(k, cov_matrix(queries, data.points(), kernel), cov_matrix(queries, kernel),
                   data.values());
}

}  // namespace lisal
