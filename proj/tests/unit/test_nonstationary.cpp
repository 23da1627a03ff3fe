#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lisal/error.hpp"
#include "lisal/gp.hpp"
#include "lisal/nonstationary.hpp"
#include "lisal/oracle.hpp"

using namespace lisal;
using testing::Rng;

namespace {

LocalParams pclsk_locals(const std::vector<AxisScales>& scales) {
  LocalParams lp;
  lp.kind = ModelKind::kPclsk;
  for (const auto& s : scales) lp.log_scales.push_back({std::log(s[0]), std::log(s[1]), std::log(s[2])});
  return lp;
}

LocalParams leis_locals(std::vector<double> coords) {
  LocalParams lp;
  lp.kind = ModelKind::kLeis;
  lp.latent_coord = std::move(coords);
  return lp;
}

FittedNGP random_model(Rng& rng, ModelKind kind, KernelFamily family, std::size_t m) {
  FittedNGP model;
  model.kind = kind;
  model.globals = rng.globals(family, kind == ModelKind::kLeis);
  const PointList xm = rng.points(m);
  for (std::size_t d = 0; d < latent_dimensions(kind); ++d) model.latent.push_back(rng.field(xm));
  return model;
}

}  // namespace

TEST_CASE("pclsk prefactor") {
  // one active dimension: l_i^2 = 1, l_j^2 = 4
  CHECK(pclsk_prefactor({1, 1, 1}, {2, 1, 1}) == doctest::Approx(0.8944271909999159).epsilon(1e-14));
  CHECK(pclsk_prefactor({0.3, 0.5, 2.0}, {0.3, 0.5, 2.0}) == 1.0);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const AxisScales a{rng.uniform(0.01, 10), rng.uniform(0.01, 10), rng.uniform(0.01, 10)};
    const AxisScales b{rng.uniform(0.01, 10), rng.uniform(0.01, 10), rng.uniform(0.01, 10)};
    const double pre = pclsk_prefactor(a, b);
    CHECK(pre > 0.0);
    CHECK(pre <= 1.0);
  }
  CHECK_THROWS_AS(pclsk_prefactor({0, 1, 1}, {1, 1, 1}), InvalidInput);
  CHECK_THROWS_AS(pclsk_cov({0, 0, 0}, {1, 0, 0}, {-1, 1, 1}, {1, 1, 1}, KernelFamily::kSeAniso, 1.0), InvalidInput);
}

TEST_CASE("pclsk with equal local scales is the stationary kernel") {
  Rng rng(4);
  for (KernelFamily f : testing::kFamilies) {
    for (int trial = 0; trial < 10; ++trial) {
      const BaseKernelSpec base = rng.base(f);
      const auto axes = base.axis_lengths();
      const StationaryKernel k(f, 1.3, axes);
      const Point p = rng.points(1)[0], q = rng.points(1)[0];
      CHECK(std::abs(pclsk_cov(p, q, axes, axes, f, 1.3) - k(p, q)) <= 1e-12);
    }
  }
}

TEST_CASE("leis multiplier") {
  const GlobalHypers h = GlobalHypers::make(1.5, 0.0, BaseKernelSpec::se_aniso(1.0, 2.0, 0.5), 1.7);
  const Point p{0.3, -1.2, 2.0}, q{1.1, 0.4, 2.5};
  const double base = StationaryKernel(h)(p, q);
  CHECK(leis_cov(p, q, 0.4, 0.4, h) == base);
  CHECK(leis_cov(p, q, 0.4, 0.4 + 1.7, h) == doctest::Approx(base * std::exp(-0.5)).epsilon(1e-14));
  // independent evaluation: base value times exp(-1/2 (3/1.7)^2)
  CHECK(std::abs(leis_cov(p, q, 3.0, 0.0, h) - 0.15165255311874856) < 1e-14);
  CHECK(leis_cov(p, q, 3.0, 0.0, h) == leis_cov(q, p, 0.0, 3.0, h));
}

TEST_CASE("nonstationary matrices: symmetry, PSD and degeneracy") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const KernelFamily f = testing::kFamilies[trial % 3];
    const PointList a = rng.points(rng.index(1, 25));
    const std::size_t n = a.size();

    const GlobalHypers hp = rng.globals(f, false);
    std::vector<AxisScales> scales;
    for (std::size_t i = 0; i < n; ++i) {
      scales.push_back({rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.3, 4)});
    }
    const LocalParams lp = pclsk_locals(scales);
    const Eigen::MatrixXd kp = nonstationary_cov_matrix(ModelKind::kPclsk, hp, a, lp, a, lp);
    CHECK(testing::max_abs_diff(kp, kp.transpose()) == 0.0);
    CHECK(testing::min_eigenvalue(kp) >= -1e-8);

    const GlobalHypers hl = rng.globals(f, true);
    std::vector<double> coords;
    for (std::size_t i = 0; i < n; ++i) coords.push_back(rng.normal());
    const LocalParams ll = leis_locals(coords);
    const Eigen::MatrixXd kl = nonstationary_cov_matrix(ModelKind::kLeis, hl, a, ll, a, ll);
    CHECK(testing::max_abs_diff(kl, kl.transpose()) == 0.0);
    CHECK(testing::min_eigenvalue(kl) >= -1e-8);

    // All-equal locals reproduce the stationary matrices.
    const auto axes = hp.base.axis_lengths();
    const LocalParams eq = pclsk_locals(std::vector<AxisScales>(n, axes));
    CHECK(testing::max_abs_diff(nonstationary_cov_matrix(ModelKind::kPclsk, hp, a, eq, a, eq),
                                cov_matrix(a, StationaryKernel(hp))) <= 1e-10);
    const LocalParams same = leis_locals(std::vector<double>(n, 0.37));
    CHECK(testing::max_abs_diff(nonstationary_cov_matrix(ModelKind::kLeis, hl, a, same, a, same),
                                cov_matrix(a, StationaryKernel(hl))) <= 1e-12);
  }
}

TEST_CASE("ngp_cov_matrix degeneracy, 1x1 and naive assembly") {
  Rng rng(12);
  for (ModelKind kind : {ModelKind::kPclsk, ModelKind::kLeis}) {
    for (KernelFamily f : testing::kFamilies) {
      FittedNGP m = random_model(rng, kind, f, 4);
      const PointList a = rng.points(8);

      // z_M = 0 gives the base kernel for both kinds.
      FittedNGP flat = m;
      for (auto& field : flat.latent) field.values.setZero();
      CHECK(testing::max_abs_diff(ngp_cov_matrix(flat, a), cov_matrix(a, StationaryKernel(flat.globals))) <= 1e-10);

      const PointList one{a[0]};
      CHECK(ngp_cov_matrix(m, one)(0, 0) == doctest::Approx(m.globals.sigma_f() * m.globals.sigma_f()).epsilon(1e-14));

      CHECK(testing::max_abs_diff(ngp_cov_matrix(m, a), oracle::ngp_cov(m, a, a)) <= 1e-12);
      const PointList b = rng.points(3);
      CHECK(testing::max_abs_diff(ngp_cov_matrix(m, a, b), oracle::ngp_cov(m, a, b)) <= 1e-12);
    }
  }
}

TEST_CASE("LEIS latent coordinates shift invariance") {
  Rng rng(13);
  FittedNGP m = random_model(rng, ModelKind::kLeis, KernelFamily::kSeAniso, 3);
  const PointList a = rng.points(6);
  const LocalParams lp = m.local_params(a);
  LocalParams shifted = lp;
  for (double& c : shifted.latent_coord) c = -c + 5.0;
  CHECK(testing::max_abs_diff(nonstationary_cov_matrix(ModelKind::kLeis, m.globals, a, lp, a, lp),
                              nonstationary_cov_matrix(ModelKind::kLeis, m.globals, a, shifted, a, shifted)) <= 1e-12);
}

TEST_CASE("ngp_predict: degeneracy, interpolation, oracle") {
  Rng rng(14);
  for (ModelKind kind : {ModelKind::kPclsk, ModelKind::kLeis}) {
    FittedNGP m = random_model(rng, kind, KernelFamily::kSeAniso, 3);
    const PointList x = rng.points(5);
    const ObservationSet cond(x, rng.vector(5));
    const PointList q = rng.points(3);

    FittedNGP flat = m;
    for (auto& f : flat.latent) f.values.setZero();
    const StationaryKernel k(flat.globals);
    const Posterior sp = posterior(cond, [&k](const Point& a, const Point& b) { return k(a, b); },
                                   flat.globals.sigma_n(), q);
    const Prediction fp = ngp_predict(flat, cond, q);
    CHECK(testing::max_abs_diff(fp.mean, sp.mean) <= 1e-12);
    CHECK(testing::max_abs_diff(fp.variance, sp.variance()) <= 1e-12);

    FittedNGP noiseless = m;
    noiseless.globals.log_sigma_n = -INFINITY;
    const PointList at{x[1]};
    CHECK(ngp_predict(noiseless, cond, at).mean[0] == doctest::Approx(cond.values()[1]).epsilon(1e-8));

    const auto dense = oracle::ngp_posterior(m, cond, q);
    const Prediction p = ngp_predict(m, cond, q);
    CHECK(testing::max_abs_diff(p.mean, dense.mean) <= 1e-8);
    CHECK(testing::max_abs_diff(p.variance, dense.cov.diagonal()) <= 1e-8);

    const Prediction prior = ngp_predict(m, ObservationSet{}, q);
    CHECK(prior.mean.isZero());
  }
}

TEST_CASE("fitted model validation") {
  Rng rng(15);
  FittedNGP m = random_model(rng, ModelKind::kPclsk, KernelFamily::kSeAniso, 3);
  m.latent.pop_back();
  CHECK_THROWS_AS(m.validate(), InvalidInput);
  FittedNGP l = random_model(rng, ModelKind::kLeis, KernelFamily::kSeAniso, 3);
  l.globals.log_latent_length.reset();
  CHECK_THROWS_AS(l.validate(), InvalidInput);
  FittedNGP p = random_model(rng, ModelKind::kPclsk, KernelFamily::kSeAniso, 3);
  p.latent[1].locations[0].x += 0.1;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
}
