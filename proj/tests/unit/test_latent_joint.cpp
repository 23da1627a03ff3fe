#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "helpers.hpp"
#include "lisal/error.hpp"
#include "lisal/gp.hpp"
#include "lisal/harness/synth.hpp"
#include "lisal/joint.hpp"
#include "lisal/latent_field.hpp"
#include "lisal/oracle.hpp"

using namespace lisal;
using testing::Rng;

namespace {

JointState random_state(Rng& rng, ModelKind kind, KernelFamily family, std::size_t m, const PointList& pool) {
  JointState s;
  s.globals = rng.globals(family, kind == ModelKind::kLeis, 0.1);
  PointList xm(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
  for (std::size_t d = 0; d < latent_dimensions(kind); ++d) s.fields.push_back(rng.field(xm, 0.3));
  return s;
}

double stationary_lml(const ObservationSet& data, const GlobalHypers& g) {
  const StationaryKernel k(g);
  return log_marginal_likelihood(data, [&k](const Point& a, const Point& b) { return k(a, b); }, g.sigma_n());
}

}  // namespace

TEST_CASE("latent mean interpolates its knots") {
  Rng rng(1);
  LatentField f = rng.field(rng.points(5));
  f.hypers.log_jitter_sd = std::log(1e-10);
  const Eigen::VectorXd at = latent_predict_mean(f, f.locations);
  CHECK(testing::max_abs_diff(at, f.values) <= 1e-6);
}

TEST_CASE("constant latent values revert to the zero prior mean") {
  LatentField f;
  f.locations = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  f.values = Eigen::VectorXd::Constant(3, 2.5);
  f.hypers.log_lengths = {std::log(0.8), 0.0, 0.0};
  f.hypers.log_jitter_sd = std::log(1e-6);
  const PointList q{{0, 0, 0}, {0.5, 0, 0}, {1.5, 0, 0}, {2.3, 0, 0}, {6, 0, 0}, {20, 0, 0}};
  const Eigen::VectorXd z = latent_predict_mean(f, q);
  CHECK(z[0] == doctest::Approx(2.5).epsilon(1e-6));
  // between knots SE interpolation may overshoot, so only the sign is fixed
  for (Eigen::Index i = 1; i < 4; ++i) CHECK(z[i] > 0.0);
  CHECK(testing::max_abs_diff(z, oracle::latent_mean(f, q)) <= 1e-8);
  CHECK(z[4] < z[3]);
  CHECK(std::abs(z[5]) < 1e-12);
}

TEST_CASE("latent mean and lml against the dense oracle; linearity") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const LatentField f3 = rng.field(rng.points(3));
    const PointList q = rng.points(2);
    CHECK(testing::max_abs_diff(latent_predict_mean(f3, q), oracle::latent_mean(f3, q)) <= 1e-8);
    const LatentField f4 = rng.field(rng.points(4));
    CHECK(std::abs(latent_lml(f4) - oracle::latent_lml(f4)) <= 1e-8);

    LatentField scaled = f4;
    const double alpha = rng.uniform(-3, 3);
    scaled.values *= alpha;
    CHECK(testing::max_abs_diff(latent_predict_mean(scaled, q), alpha * latent_predict_mean(f4, q)) <= 1e-10);
  }
}

TEST_CASE("latent lml scalar case and quadratic decay") {
  LatentField f;
  f.locations = {{0.2, 0.3, 0.4}};
  f.values = Eigen::VectorXd::Zero(1);
  f.hypers.log_signal_sd = std::log(1.3);
  f.hypers.log_jitter_sd = std::log(0.2);
  CHECK(latent_lml(f) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi * (1.69 + 0.04))).epsilon(1e-14));

  Rng rng(3);
  LatentField g = rng.field(rng.points(4));
  double prev = latent_lml(g);
  for (double s : {2.0, 4.0, 8.0}) {
    LatentField h = g;
    h.values *= s;
    const double v = latent_lml(h);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("latent field validation") {
  LatentField f;
  CHECK_THROWS_AS(f.validate(), InvalidInput);
  f.locations = {{0, 0, 0}};
  f.values = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(f.validate(), InvalidInput);
  f.values = Eigen::VectorXd::Zero(1);
  f.frozen_prefix = 2;
  CHECK_THROWS_AS(f.validate(), InvalidInput);
}

TEST_CASE("joint objective: degeneracy, permutation, recomposition") {
  Rng rng(4);
  for (ModelKind kind : {ModelKind::kPclsk, ModelKind::kLeis}) {
    for (KernelFamily family : testing::kFamilies) {
      const PointList x = rng.points(7);
      const ObservationSet data(x, rng.vector(7));
      JointState s = random_state(rng, kind, family, 3, x);

      JointState flat = s;
      double latent_sum = 0.0;
      for (auto& f : flat.fields) {
        f.values.setZero();
        latent_sum += latent_lml(f);
      }
      CHECK(joint_objective(data, kind, flat.globals, flat.fields) - latent_sum ==
            doctest::Approx(stationary_lml(data, flat.globals)).epsilon(1e-12));

      const double v = joint_objective(data, kind, s.globals, s.fields);
      const std::vector<std::size_t> perm{6, 2, 0, 5, 1, 4, 3};
      CHECK(joint_objective(data.subset(perm), kind, s.globals, s.fields) == doctest::Approx(v).epsilon(1e-12));

      FittedNGP m;
      m.kind = kind;
      m.globals = s.globals;
      m.latent = s.fields;
      CHECK(std::abs(v - oracle::joint_objective(data, m)) <= 1e-8);
    }
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(5);
  for (ModelKind kind : {ModelKind::kStationary, ModelKind::kPclsk, ModelKind::kLeis}) {
    for (KernelFamily family : testing::kFamilies) {
      for (int trial = 0; trial < 3; ++trial) {
        const PointList x = rng.points(6);
        const ObservationSet data(x, rng.vector(6));
        JointState s = random_state(rng, kind, family, 3, x);
        if (!s.fields.empty() && trial == 2) {
          for (auto& f : s.fields) f.frozen_prefix = 1;
        }
        const JointObjective obj(data, kind, s, FreeParams{});
        const Eigen::VectorXd x0 = obj.pack(s);
        Eigen::VectorXd g;
        obj.value_and_gradient(x0, g);
        REQUIRE(g.size() == x0.size());
        for (Eigen::Index k = 0; k < x0.size(); ++k) {
          const double h = 1e-5 * std::max(1.0, std::abs(x0[k]));
          Eigen::VectorXd xp = x0, xm = x0;
          xp[k] += h;
          xm[k] -= h;
          const double fd = (obj.value(xp) - obj.value(xm)) / (2 * h);
          INFO("kind " << to_string(kind) << " family " << to_string(family) << " param " << k);
          CHECK(std::abs(fd - g[k]) <= 1e-4 * std::max({std::abs(fd), std::abs(g[k]), 1e-2}));
        }
      }
    }
  }
}

TEST_CASE("joint_optimize: monotone, frozen entries untouched, deterministic") {
  Rng rng(6);
  const PointList x = rng.points(10);
  const ObservationSet data(x, rng.vector(10));
  for (ModelKind kind : {ModelKind::kPclsk, ModelKind::kLeis}) {
    JointState s = random_state(rng, kind, KernelFamily::kSeAniso, 4, x);
    for (auto& f : s.fields) f.frozen_prefix = 2;
    JointOptions opts;
    opts.seed = 42;
    const JointResult r = joint_optimize(data, kind, s, opts);
    CHECK(r.objective >= r.initial_objective - 1e-9);
    CHECK(r.objective == doctest::Approx(joint_objective(data, kind, r.state.globals, r.state.fields)).epsilon(1e-12));
    for (std::size_t d = 0; d < s.fields.size(); ++d) {
      CHECK(r.state.fields[d].values[0] == s.fields[d].values[0]);
      CHECK(r.state.fields[d].values[1] == s.fields[d].values[1]);
    }
    const JointResult again = joint_optimize(data, kind, s, opts);
    CHECK(again.objective == r.objective);

    JointState all_frozen = s;
    for (auto& f : all_frozen.fields) f.frozen_prefix = f.size();
    const JointResult rf = joint_optimize(data, kind, all_frozen, opts);
    for (std::size_t d = 0; d < s.fields.size(); ++d) {
      CHECK(std::memcmp(rf.state.fields[d].values.data(), s.fields[d].values.data(),
                        sizeof(double) * s.fields[d].size()) == 0);
    }
  }
}

TEST_CASE("joint_optimize with only sigma_f free finds the grid optimum") {
  Rng rng(7);
  const PointList x = rng.points(12);
  const ObservationSet data(x, 1.7 * rng.vector(12));
  JointState s;
  s.globals = GlobalHypers::make(1.0, 0.2, BaseKernelSpec::se_aniso(0.4, 0.4, 1.0));
  JointOptions opts;
  opts.free = FreeParams{true, false, false, false, false, false};
  opts.tolerance = 1e-12;
  const JointResult r = joint_optimize(data, ModelKind::kStationary, s, opts);

  double best_sf = 0.0, best = -INFINITY;
  for (int i = 0; i < 10000; ++i) {
    const double sf = 0.01 + i * (5.0 - 0.01) / 9999.0;
    GlobalHypers g = s.globals;
    g.log_sigma_f = std::log(sf);
    const double v = stationary_lml(data, g);
    if (v > best) {
      best = v;
      best_sf = sf;
    }
  }
  CHECK(std::abs(r.state.globals.sigma_f() - best_sf) <= 1e-3);
}

TEST_CASE("frozen constant latent fields reduce to stationary ML-II") {
  Rng rng(8);
  const PointList x = rng.points(15);
  const ObservationSet data(x, rng.vector(15));
  JointState stat;
  stat.globals = GlobalHypers::make(1.0, 0.3, BaseKernelSpec::se_aniso(0.5, 0.5, 1.0));
  JointOptions opts;
  opts.seed = 9;
  opts.tolerance = 1e-12;
  const JointResult rs = joint_optimize(data, ModelKind::kStationary, stat, opts);

  JointState leis = stat;
  leis.globals.log_latent_length = 0.0;
  LatentField f;
  f.locations = {x[0], x[1], x[2]};
  f.values = Eigen::VectorXd::Zero(3);
  f.frozen_prefix = 3;
  leis.fields = {f};
  JointOptions lopts = opts;
  lopts.free.latent_length = false;
  lopts.free.latent_lengths = false;
  const JointResult rl = joint_optimize(data, ModelKind::kLeis, leis, lopts);
  CHECK(std::abs((rl.objective - latent_lml(f)) - rs.objective) <= 1e-6);
}

TEST_CASE("LEIS on stationary data learns a nearly flat latent field") {
  harness::SynthSpec spec;
  spec.nx = 6;
  spec.ny = 6;
  spec.nt = 3;
  spec.kind = ModelKind::kStationary;
  spec.profile = harness::LatentProfile::kConstant;
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto synth = harness::synth_generate(spec, seed);
    const ObservationSet& train = synth.data.train;
    JointState s;
    s.globals = spec.globals();
    s.globals.log_latent_length = 0.0;
    LatentField f;
    for (std::size_t i = 0; i < 6; ++i) f.locations.push_back(train.points()[i * 9]);
    f.values = Eigen::VectorXd::Zero(6);
    f.hypers.log_lengths = {std::log(0.5), std::log(0.5), std::log(1.0)};
    s.fields = {f};
    JointOptions opts;
    opts.seed = seed;
    const JointResult r = joint_optimize(train, ModelKind::kLeis, s, opts);
    const Eigen::VectorXd z = latent_predict_mean(r.state.fields[0], train.points());
    ratios.push_back((z.maxCoeff() - z.minCoeff()) / r.state.globals.latent_length());
  }
  std::nth_element(ratios.begin(), ratios.begin() + 5, ratios.end());
  CHECK(ratios[5] <= 0.2);
}
