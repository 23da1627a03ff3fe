#include "lisal/selection.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "lisal/error.hpp"

namespace lisal {

void SelectionProblem::validate() const {
  const std::size_t n = size();
  if (covariance.rows() != covariance.cols()) throw InvalidInput("selection: covariance is not square");
  if (!covariance.allFinite()) throw InvalidInput("selection: non-finite covariance");
  if (!(noise_sd >= 0.0)) throw InvalidInput("selection: negative noise sd");
  std::vector<bool> seen(n, false);
  for (std::size_t p : preselected) {
    if (p >= n) throw InvalidInput("selection: preselected index " + std::to_string(p) + " out of range");
    if (seen[p]) throw InvalidInput("selection: repeated preselected index " + std::to_string(p));
    seen[p] = true;
  }
  if (budget + preselected.size() > n) {
    throw InvalidInput("selection: budget " + std::to_string(budget) + " plus " +
                       std::to_string(preselected.size()) + " preselected exceeds " +
                       std::to_string(n) + " candidates");
  }
}

namespace {

Eigen::MatrixXd noisy(const SelectionProblem& p) {
  Eigen::MatrixXd s = p.covariance;
  s.diagonal().array() += p.noise_sd * p.noise_sd;
  return s;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, std::span<const std::size_t> rows,
                       std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

double conditional_variance_noisy(const Eigen::MatrixXd& s, std::size_t y,
                                  std::span<const std::size_t> given) {
  const auto yi = static_cast<Eigen::Index>(y);
  if (given.empty()) return s(yi, yi);
  const std::size_t ys[1] = {y};
  const auto chol = CholeskyFactor::compute(gather(s, given, given));
  const Eigen::MatrixXd v = chol.half_solve(gather(s, given, ys));
  return s(yi, yi) - v.squaredNorm();
}

// Cholesky factor grown one row at a time.
class GrowingCholesky {
 public:
  explicit GrowingCholesky(Eigen::Index capacity) : l_(capacity, capacity) {}

  Eigen::Index size() const { return k_; }

  // ||L^{-1} b||^2 for the current factor
  double quad(const Eigen::VectorXd& b) const {
    if (k_ == 0) return 0.0;
    return l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solve(b).squaredNorm();
  }

  void append(const Eigen::VectorXd& b, double diag) {
    if (k_ > 0) {
      l_.row(k_).head(k_) = l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solve(b).transpose();
    }
    const double rest = diag - (k_ > 0 ? l_.row(k_).head(k_).squaredNorm() : 0.0);
    l_(k_, k_) = std::sqrt(std::max(rest, 1e-300));
    ++k_;
  }

 private:
  Eigen::MatrixXd l_;
  Eigen::Index k_ = 0;
};

enum class Criterion { kMutualInformation, kEntropy };

class GreedyState {
 public:
  GreedyState(const SelectionProblem& p, Criterion criterion)
      : s_(noisy(p)),
        floor_(std::max(p.noise_sd * p.noise_sd, 1e-300)),
        criterion_(criterion),
        in_a_(p.size(), false),
        a_chol_(static_cast<Eigen::Index>(p.preselected.size() + p.budget)),
        r_chol_(static_cast<Eigen::Index>(p.budget)) {
    for (std::size_t i : p.preselected) add_to_a(i);
    if (criterion_ == Criterion::kMutualInformation) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!in_a_[i]) {
          pos_in_u_.emplace_back(i);
        }
      }
      position_.assign(p.size(), -1);
      for (std::size_t k = 0; k < pos_in_u_.size(); ++k) position_[pos_in_u_[k]] = static_cast<Eigen::Index>(k);
      if (!pos_in_u_.empty()) {
        p0_ = CholeskyFactor::compute(gather(s_, pos_in_u_, pos_in_u_)).inverse();
      }
    }
  }

  double numerator(std::size_t y) const {
    Eigen::VectorXd b(static_cast<Eigen::Index>(a_.size()));
    for (std::size_t k = 0; k < a_.size(); ++k) {
      b[static_cast<Eigen::Index>(k)] = s_(static_cast<Eigen::Index>(a_[k]), static_cast<Eigen::Index>(y));
    }
    const auto yi = static_cast<Eigen::Index>(y);
    return std::max(s_(yi, yi) - a_chol_.quad(b), floor_);
  }

  double denominator(std::size_t y) const {
    const Eigen::Index py = position_[y];
    Eigen::VectorXd b(static_cast<Eigen::Index>(r_.size()));
    for (std::size_t k = 0; k < r_.size(); ++k) b[static_cast<Eigen::Index>(k)] = p0_(r_[k], py);
    const double precision = p0_(py, py) - r_chol_.quad(b);
    return std::max(1.0 / std::max(precision, 1e-300), floor_);
  }

  double score(std::size_t y) const {
    if (criterion_ == Criterion::kEntropy) return numerator(y);
    return numerator(y) / denominator(y);
  }

  bool selected(std::size_t y) const { return in_a_[y]; }

  void pick(std::size_t y) {
    add_to_a(y);
    if (criterion_ == Criterion::kMutualInformation) {
      const Eigen::Index py = position_[y];
      Eigen::VectorXd b(static_cast<Eigen::Index>(r_.size()));
      for (std::size_t k = 0; k < r_.size(); ++k) b[static_cast<Eigen::Index>(k)] = p0_(r_[k], py);
      r_chol_.append(b, p0_(py, py));
      r_.push_back(py);
    }
  }

 private:
  void add_to_a(std::size_t y) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(a_.size()));
    for (std::size_t k = 0; k < a_.size(); ++k) {
      b[static_cast<Eigen::Index>(k)] = s_(static_cast<Eigen::Index>(a_[k]), static_cast<Eigen::Index>(y));
    }
    const auto yi = static_cast<Eigen::Index>(y);
    a_chol_.append(b, s_(yi, yi));
    a_.push_back(y);
    in_a_[y] = true;
  }

  Eigen::MatrixXd s_;
  double floor_;
  Criterion criterion_;
  std::vector<bool> in_a_;
  std::vector<std::size_t> a_;
  GrowingCholesky a_chol_;
  // Precision of the candidates left after preselection, downdated lazily
  // through the Cholesky factor of its picked block.
  std::vector<std::size_t> pos_in_u_;
  std::vector<Eigen::Index> position_;
  Eigen::MatrixXd p0_;
  std::vector<Eigen::Index> r_;
  GrowingCholesky r_chol_;
};

struct Entry {
  double score;
  std::size_t index;
  std::size_t round;
};

struct EntryOrder {
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.score != b.score) return a.score < b.score;
    return a.index > b.index;
  }
};

std::vector<std::size_t> lazy_greedy(const SelectionProblem& problem, Criterion criterion) {
  problem.validate();
  if (problem.budget == 0) throw InvalidInput("selection: budget must be at least 1");
  GreedyState state(problem, criterion);

  std::priority_queue<Entry, std::vector<Entry>, EntryOrder> queue;
  for (std::size_t y = 0; y < problem.size(); ++y) {
    if (!state.selected(y)) queue.push(Entry{state.score(y), y, 0});
  }

  std::vector<std::size_t> picks;
  picks.reserve(problem.budget);
  for (std::size_t round = 0; round < problem.budget; ++round) {
    while (true) {
      Entry top = queue.top();
      queue.pop();
      if (top.round == round) {
        state.pick(top.index);
        picks.push_back(top.index);
        break;
      }
      // Scores only shrink as the selected set grows, so a stale score is an
      // upper bound and the first fresh entry on top is the maximiser.
      top.score = state.score(top.index);
      top.round = round;
      queue.push(top);
    }
  }
  return picks;
}

}  // namespace

double conditional_variance(const SelectionProblem& problem, std::size_t y,
                            std::span<const std::size_t> given) {
  if (y >= problem.size()) throw InvalidInput("selection: candidate index out of range");
  return conditional_variance_noisy(noisy(problem), y, given);
}

double mi_score(std::size_t y, std::span<const std::size_t> selected, const SelectionProblem& problem) {
  const std::size_t n = problem.size();
  if (y >= n) throw InvalidInput("mi_score: candidate index out of range");
  std::vector<bool> in_a(n, false);
  for (std::size_t a : selected) {
    if (a >= n) throw InvalidInput("mi_score: selected index out of range");
    in_a[a] = true;
  }
  if (in_a[y]) throw InvalidInput("mi_score: candidate already selected");
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_a[i] && i != y) rest.push_back(i);
  }
  const Eigen::MatrixXd s = noisy(problem);
  const double floor = std::max(problem.noise_sd * problem.noise_sd, 1e-300);
  const double num = std::max(conditional_variance_noisy(s, y, selected), floor);
  const double den = std::max(conditional_variance_noisy(s, y, rest), floor);
  return num / den;
}

std::vector<std::size_t> greedy_mi_select(const SelectionProblem& problem) {
  return lazy_greedy(problem, Criterion::kMutualInformation);
}

std::vector<std::size_t> entropy_select(const SelectionProblem& problem) {
  return lazy_greedy(problem, Criterion::kEntropy);
}

}  // namespace lisal
