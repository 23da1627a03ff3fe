#pragma once

#include <functional>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "lisal/types.hpp"

namespace lisal {

using KernelFn = std::function<double(const Point&, const Point&)>;

// M(i, j) = k(a[i], b[j]).
template <typename Kernel>
Eigen::MatrixXd cov_matrix(PointSpan a, PointSpan b, const Kernel& k) {
  require_finite(a);
  require_finite(b);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k(a[i], b[j]);
    }
  }
  return m;
}

// Symmetric variant: evaluates the upper triangle once and mirrors it.
template <typename Kernel>
Eigen::MatrixXd cov_matrix(PointSpan a, const Kernel& k) {
  require_finite(a);
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      m(i, j) = k(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(j)]);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

// Cholesky factor of a symmetric matrix under the jitter policy: try jitter
// 0, then 1e-10 * mean(diag) growing x10 up to 1e-4 * mean(diag).
class CholeskyFactor {
 public:
  // Throws NumericalFailure carrying the last attempted jitter.
  static CholeskyFactor compute(const Eigen::MatrixXd& k);
  static std::optional<CholeskyFactor> try_compute(const Eigen::MatrixXd& k);

  Eigen::Index size() const { return llt_.rows(); }
  double jitter() const { return jitter_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const { return llt_.solve(b); }
  // L^{-1} b
  Eigen::MatrixXd half_solve(const Eigen::MatrixXd& b) const;
  double log_det() const;
  Eigen::MatrixXd inverse() const;

 private:
  CholeskyFactor(Eigen::LLT<Eigen::MatrixXd> llt, double jitter)
      : llt_(std::move(llt)), jitter_(jitter) {}

  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

// -1/2 y^T K^{-1} y - 1/2 log|K| - n/2 log 2pi for a covariance K that
// already includes the noise term.
double gaussian_log_density(const Eigen::MatrixXd& k_noisy, const Eigen::VectorXd& y);

double log_marginal_likelihood(const ObservationSet& data, const KernelFn& kernel, double sigma_n);

struct Posterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  int clamped_variances = 0;  // negative predictive variances reset to zero

  Eigen::VectorXd variance() const { return cov.diagonal(); }
};

// Block conditioning: k_noisy = K(X,X) + noise, k_cross = K(Xq, X), k_query = K(Xq, Xq).
Posterior condition(const Eigen::MatrixXd& k_noisy, const Eigen::MatrixXd& k_cross,
                    const Eigen::MatrixXd& k_query, const Eigen::VectorXd& y);

Posterior posterior(const ObservationSet& data, const KernelFn& kernel, double sigma_n,
                    PointSpan queries);

}  // namespace lisal
