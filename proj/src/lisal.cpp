#include "lisal/lisal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lisal/selection.hpp"

namespace lisal {

void LisalConfig::validate(std::size_t n) const {
  if (m1 < 1) throw InvalidInput("m1 must be at least 1");
  if (m2 < 1) throw InvalidInput("m2 must be at least 1");
  if (restarts < 1) throw InvalidInput("restarts must be at least 1");
  if (!(perturbation_sd >= 0.0) || !(value_perturbation_sd >= 0.0) || !std::isfinite(perturbation_sd) ||
      !std::isfinite(value_perturbation_sd)) {
    throw InvalidInput("perturbation sds must be finite and non-negative");
  }
  if (!(latent_jitter_sd > 0.0)) throw InvalidInput("latent jitter sd must be positive");
  if (kind == ModelKind::kStationary) throw InvalidInput("LISAL needs a nonstationary model kind");
  if (m1 + c * m2 > n) {
    throw InvalidInput("m1 + c*m2 = " + std::to_string(m1 + c * m2) + " exceeds " + std::to_string(n) +
                       " training points");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::array<double, 3> half_extents(PointSpan points) {
  std::array<double, 3> out{1.0, 1.0, 1.0};
  if (points.empty()) return out;
  std::array<double, 3> lo{points[0].x, points[0].y, points[0].t};
  std::array<double, 3> hi = lo;
  for (const Point& p : points) {
    const double c[3] = {p.x, p.y, p.t};
    for (std::size_t d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], c[d]);
      hi[d] = std::max(hi[d], c[d]);
    }
  }
  for (std::size_t d = 0; d < 3; ++d) {
    if (hi[d] > lo[d]) out[d] = 0.5 * (hi[d] - lo[d]);
  }
  return out;
}

StationaryFit fit_stationary(const ObservationSet& data, KernelFamily family, std::uint64_t seed,
                             std::size_t restarts) {
  if (data.size() < 2) throw InvalidInput("stationary fit needs at least two observations");
  const Eigen::VectorXd& y = data.values();
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size()));
  const double sigma_f = sd > 0.0 ? sd : 1.0;

  auto lengths = half_extents(data.points());
  if (family != KernelFamily::kSeAniso) lengths[0] = lengths[1] = 0.5 * (lengths[0] + lengths[1]);
  JointState init{GlobalHypers::make(sigma_f, 0.1 * sigma_f, BaseKernelSpec::from_axis_lengths(family, lengths)),
                  {}};
  JointOptions options;
  options.seed = seed;
  options.restarts = restarts;
  const JointResult r = joint_optimize(data, ModelKind::kStationary, init, options);
  return StationaryFit{r.state.globals, r.objective};
}

FittedNGP stationary_model(const GlobalHypers& hypers) {
  FittedNGP m;
  m.kind = ModelKind::kStationary;
  m.globals = hypers;
  m.globals.log_latent_length.reset();
  return m;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// The latent field whose values vary most drives the next selection.
std::size_t most_varying_field(const std::vector<LatentField>& fields) {
  std::size_t best = 0;
  double best_var = -1.0;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const Eigen::VectorXd& v = fields[f].values;
    const double var = (v.array() - v.mean()).square().mean();
    if (var > best_var) {
      best_var = var;
      best = f;
    }
  }
  return best;
}

FittedNGP to_model(ModelKind kind, const JointState& s, std::shared_ptr<const ObservationSet> train) {
  FittedNGP m;
  m.kind = kind;
  m.globals = s.globals;
  m.latent = s.fields;
  m.train = std::move(train);
  return m;
}

}  // namespace

LisalResult lisal_fit(const ObservationSet& data, const LisalConfig& config) {
  config.validate(data.size());
  const auto train = std::make_shared<const ObservationSet>(data);
  const PointList& pts = data.points();
  LisalTrace trace;
  std::string stage = "stationary_fit";

  try {
    auto start = Clock::now();
    const StationaryFit stat = fit_stationary(data, config.family, derive_seed(config.seed, 0), config.restarts);
    trace.stationary = stat.hypers;
    trace.stationary_objective = stat.objective;
    trace.stationary_seconds = seconds_since(start);

    start = Clock::now();
    stage = "select_0";
    std::vector<std::size_t> latent_indices =
        greedy_mi_select(make_selection_problem(pts, StationaryKernel(stat.hypers), config.latent_jitter_sd,
                                                {}, config.m1));

    JointState state;
    state.globals = stat.hypers;
    if (config.kind == ModelKind::kLeis) state.globals.log_latent_length = 0.0;
    const auto extents = half_extents(pts);
    for (std::size_t d = 0; d < latent_dimensions(config.kind); ++d) {
      LatentField f;
      for (std::size_t i : latent_indices) f.locations.push_back(pts[i]);
      f.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(latent_indices.size()));
      f.hypers.log_signal_sd = 0.0;
      f.hypers.log_jitter_sd = std::log(config.latent_jitter_sd);
      for (std::size_t a = 0; a < 3; ++a) f.hypers.log_lengths[a] = std::log(extents[a]);
      state.fields.push_back(std::move(f));
    }

    stage = "optimize_0";
    JointOptions options;
    options.restarts = config.restarts;
    options.perturbation_sd = config.perturbation_sd;
    options.value_perturbation_sd = config.value_perturbation_sd;
    options.seed = derive_seed(config.seed, 1);
    JointResult r = joint_optimize(data, config.kind, state, options);
    state = r.state;
    trace.iterations.push_back(LisalIteration{0, latent_indices, r.objective,
                                              to_model(config.kind, state, train), seconds_since(start)});

    for (std::size_t it = 1; it <= config.c; ++it) {
      start = Clock::now();
      stage = "select_" + std::to_string(it);
      const LatentField& driver = state.fields[most_varying_field(state.fields)];
      const std::vector<std::size_t> picks = greedy_mi_select(make_selection_problem(
          pts, driver.hypers.kernel(), driver.hypers.jitter_sd(), latent_indices, config.m2));

      PointList new_points;
      for (std::size_t i : picks) new_points.push_back(pts[i]);
      for (auto& f : state.fields) {
        // New latent values start at the current predictive mean, so the
        // warm start reproduces the previous iteration's local parameters.
        const Eigen::VectorXd init = latent_predict_mean(f, new_points);
        const auto old_m = static_cast<Eigen::Index>(f.size());
        f.frozen_prefix = f.size();
        f.locations.insert(f.locations.end(), new_points.begin(), new_points.end());
        f.values.conservativeResize(old_m + init.size());
        f.values.tail(init.size()) = init;
      }
      latent_indices.insert(latent_indices.end(), picks.begin(), picks.end());

      stage = "optimize_" + std::to_string(it);
      options.seed = derive_seed(config.seed, 1 + it);
      r = joint_optimize(data, config.kind, state, options);
      state = r.state;
      trace.iterations.push_back(
          LisalIteration{it, picks, r.objective, to_model(config.kind, state, train), seconds_since(start)});
    }
  } catch (const Error& e) {
    throw LisalStageError(stage, e.what(), trace);
  }

  LisalResult result{trace.iterations.back().model, std::move(trace)};
  return result;
}

Prediction predict(const FittedNGP& model, const ObservationSet& cond, PointSpan queries) {
  return ngp_predict(model, cond, queries);
}

}  // namespace lisal
