#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lisal/gp.hpp"
#include "lisal/types.hpp"

namespace lisal {

// Greedy placement over a finite candidate set. `covariance` is the prior
// (noise-free) covariance of the candidates; `noise_sd` is added to its
// diagonal for all conditional variances.
struct SelectionProblem {
  Eigen::MatrixXd covariance;
  double noise_sd = 0.0;
  std::vector<std::size_t> preselected;
  std::size_t budget = 0;

  std::size_t size() const { return static_cast<std::size_t>(covariance.rows()); }
  void validate() const;
};

template <typename Kernel>
SelectionProblem make_selection_problem(PointSpan candidates, const Kernel& kernel, double noise_sd,
                                        std::vector<std::size_t> preselected, std::size_t budget) {
  return SelectionProblem{cov_matrix(candidates, kernel), noise_sd, std::move(preselected), budget};
}

// Variance of candidate y given noisy observations of `given`.
double conditional_variance(const SelectionProblem& problem, std::size_t y,
                            std::span<const std::size_t> given);

// sigma^2(y | A) / sigma^2(y | rest), rest = candidates \ (A u {y}). Half its
// log is the mutual-information gain of adding y to A.
double mi_score(std::size_t y, std::span<const std::size_t> selected, const SelectionProblem& problem);

// Lazy greedy maximisation of I(A; V \ A), starting from A = preselected.
// Returns the `budget` newly chosen indices in pick order; ties go to the
// lowest index.
std::vector<std::size_t> greedy_mi_select(const SelectionProblem& problem);

// Same loop, maximising the conditional variance sigma^2(y | A).
std::vector<std::size_t> entropy_select(const SelectionProblem& problem);

}  // namespace lisal
