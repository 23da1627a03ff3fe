#include "lisal/harness/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "lisal/selection.hpp"

namespace lisal::harness {

namespace {

// Floor for the observation noise used in selection; a noiseless model would
// make every conditional variance of an already-seen location zero.
constexpr double kMinSelectionNoise = 1e-3;

std::map<double, std::vector<std::size_t>> by_timestep(const ObservationSet& s) {
  std::map<double, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < s.size(); ++i) out[s.points()[i].t].push_back(i);
  return out;
}

PointList gather(const ObservationSet& s, const std::vector<std::size_t>& idx) {
  PointList p;
  p.reserve(idx.size());
  for (std::size_t i : idx) p.push_back(s.points()[i]);
  return p;
}

}  // namespace

SimulationReport simulate_sensing(const FittedNGP& model, const ObservationSet& train,
                                  const ObservationSet& test, const SimulationOptions& options) {
  if (options.k < 1) throw InvalidInput("k must be at least 1");
  model.validate();
  const auto train_t = by_timestep(train);
  const auto test_t = by_timestep(test);
  const Eigen::VectorXd train_std = options.standardizer.apply(train.values());
  const double noise = std::max(model.globals.sigma_n(), kMinSelectionNoise);

  SimulationReport report;
  std::vector<std::vector<std::size_t>> history;  // picks of earlier timesteps, oldest first
  for (const auto& [t, test_idx] : test_t) {
    const auto it = train_t.find(t);
    if (it == train_t.end()) {
      throw InvalidInput("timestep " + std::to_string(t) + " has test points but no training points");
    }
    const std::vector<std::size_t>& cand = it->second;
    if (options.k > cand.size()) {
      throw InvalidInput("timestep " + std::to_string(t) + ": k = " + std::to_string(options.k) +
                         " exceeds its " + std::to_string(cand.size()) + " training locations");
    }
    try {
      const PointList cand_pts = gather(train, cand);
      SelectionProblem problem{ngp_cov_matrix(model, cand_pts), noise, {}, options.k};
      std::vector<std::size_t> picks;
      for (std::size_t local : greedy_mi_select(problem)) picks.push_back(cand[local]);

      std::vector<std::size_t> cond_idx;
      const std::size_t h = std::min(options.history_window, history.size());
      for (std::size_t b = history.size() - h; b < history.size(); ++b) {
        cond_idx.insert(cond_idx.end(), history[b].begin(), history[b].end());
      }
      cond_idx.insert(cond_idx.end(), picks.begin(), picks.end());
      Eigen::VectorXd cond_y(static_cast<Eigen::Index>(cond_idx.size()));
      for (std::size_t i = 0; i < cond_idx.size(); ++i) {
        cond_y[static_cast<Eigen::Index>(i)] = train_std[static_cast<Eigen::Index>(cond_idx[i])];
      }
      const ObservationSet cond(gather(train, cond_idx), cond_y);
      const PointList query = gather(test, test_idx);
      const Prediction pred = ngp_predict(model, cond, query);
      const Eigen::VectorXd mean = options.standardizer.invert(pred.mean);

      double sse = 0.0;
      for (std::size_t i = 0; i < test_idx.size(); ++i) {
        const double e = mean[static_cast<Eigen::Index>(i)] - test.values()[static_cast<Eigen::Index>(test_idx[i])];
        sse += e * e;
      }
      report.timesteps.push_back(t);
      report.rmse.push_back(std::sqrt(sse / static_cast<double>(test_idx.size())));
      report.picks.push_back(picks);
      report.clamped_variances += pred.clamped_variances;
      history.push_back(std::move(picks));
    } catch (const NumericalFailure& e) {
      throw NumericalFailure("timestep " + std::to_string(t) + ": " + e.what(), e.attempted_jitter());
    }
  }
  double total = 0.0;
  for (double r : report.rmse) total += r;
  report.mean_rmse = report.rmse.empty() ? 0.0 : total / static_cast<double>(report.rmse.size());
  return report;
}

}  // namespace lisal::harness
