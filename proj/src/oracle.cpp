#include "lisal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/LU>

#include "lisal/gp.hpp"
#include "lisal/joint.hpp"

namespace lisal::oracle {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double sq(double v) { return v * v; }

// Cressie-Huang examples written directly in (a, b, h, u) with d = 2.
double ch1(double a, double b, double h2, double u2) {
  const double s = a * a * u2 + 1.0;
  return std::pow(s, -1.0) * std::exp(-b * b * h2 / s);
}

double ch3(double a, double b, double h2, double u2) {
  const double s = a * a * u2 + 1.0;
  return s / std::pow(s * s + b * b * h2, 1.5);
}

// Unit-scale profile on squared Mahalanobis distances (a = b = 1).
double unit_profile(KernelFamily f, double qs, double qt) {
  switch (f) {
    case KernelFamily::kSeAniso:
      return std::exp(-0.5 * (qs + qt));
    case KernelFamily::kCressieHuang1:
      return ch1(1.0, 1.0, qs, qt);
    case KernelFamily::kCressieHuang3:
      return ch3(1.0, 1.0, qs, qt);
  }
  return 0.0;
}

}  // namespace

double base_cov(const Point& p, const Point& q, const GlobalHypers& h) {
  const double s2 = std::exp(2.0 * h.log_sigma_f);
  const auto lp = h.base.log_params();
  const double h2 = sq(p.x - q.x) + sq(p.y - q.y);
  const double u2 = sq(p.t - q.t);
  switch (h.base.family()) {
    case KernelFamily::kSeAniso:
      return s2 * std::exp(-0.5 * (sq(p.x - q.x) / std::exp(2 * lp[0]) + sq(p.y - q.y) / std::exp(2 * lp[1]) +
                                   u2 / std::exp(2 * lp[2])));
    case KernelFamily::kCressieHuang1:
      return s2 * ch1(std::exp(lp[0]), std::exp(lp[1]), h2, u2);
    case KernelFamily::kCressieHuang3:
      return s2 * ch3(std::exp(lp[0]), std::exp(lp[1]), h2, u2);
  }
  return 0.0;
}

double latent_cov(const Point& p, const Point& q, const LatentHypers& h) {
  const double d[3] = {p.x - q.x, p.y - q.y, p.t - q.t};
  double r = 0.0;
  for (int i = 0; i < 3; ++i) r += sq(d[i] / std::exp(h.log_lengths[static_cast<std::size_t>(i)]));
  return std::exp(2.0 * h.log_signal_sd) * std::exp(-0.5 * r);
}

double gaussian_log_density(const Eigen::MatrixXd& k, const Eigen::VectorXd& y) {
  const auto n = static_cast<double>(y.size());
  if (y.size() == 0) return 0.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  const Eigen::MatrixXd inv = lu.inverse();
  return -0.5 * y.dot(inv * y) - 0.5 * std::log(lu.determinant()) - 0.5 * n * kLog2Pi;
}

DensePosterior condition(const Eigen::MatrixXd& k_noisy, const Eigen::MatrixXd& k_cross,
                         const Eigen::MatrixXd& k_query, const Eigen::VectorXd& y) {
  if (y.size() == 0) return {Eigen::VectorXd::Zero(k_query.rows()), k_query};
  const Eigen::MatrixXd inv = k_noisy.fullPivLu().inverse();
  return {k_cross * inv * y, k_query - k_cross * inv * k_cross.transpose()};
}

namespace {

Eigen::MatrixXd latent_matrix(const LatentField& f, PointSpan a, PointSpan b) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = latent_cov(a[i], b[j], f.hypers);
    }
  }
  return m;
}

Eigen::MatrixXd latent_noisy(const LatentField& f) {
  Eigen::MatrixXd k = latent_matrix(f, f.locations, f.locations);
  k += std::exp(2.0 * f.hypers.log_jitter_sd) * Eigen::MatrixXd::Identity(k.rows(), k.cols());
  return k;
}

double latent_at(const LatentField& f, const Point& p) {
  const Point one[1] = {p};
  return latent_mean(f, one)[0];
}

}  // namespace

Eigen::VectorXd latent_mean(const LatentField& f, PointSpan queries) {
  const Eigen::MatrixXd inv = latent_noisy(f).fullPivLu().inverse();
  return latent_matrix(f, queries, f.locations) * inv * f.values;
}

double latent_lml(const LatentField& f) { return gaussian_log_density(latent_noisy(f), f.values); }

double ngp_entry(const FittedNGP& m, const Point& p, const Point& q) {
  if (m.kind == ModelKind::kStationary) return base_cov(p, q, m.globals);
  if (m.kind == ModelKind::kLeis) {
    const double lp = latent_at(m.latent[0], p);
    const double lq = latent_at(m.latent[0], q);
    return base_cov(p, q, m.globals) * std::exp(-0.5 * sq((lp - lq) / std::exp(*m.globals.log_latent_length)));
  }
  const auto base = m.globals.base.axis_lengths();
  Eigen::Matrix3d sp = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d sq_ = Eigen::Matrix3d::Zero();
  for (int d = 0; d < 3; ++d) {
    const auto du = static_cast<std::size_t>(d);
    sp(d, d) = std::exp(2.0 * (std::log(base[du]) + latent_at(m.latent[du], p)));
    sq_(d, d) = std::exp(2.0 * (std::log(base[du]) + latent_at(m.latent[du], q)));
  }
  const Eigen::Matrix3d avg = 0.5 * (sp + sq_);
  const Eigen::Matrix3d avg_inv = avg.inverse();
  const Eigen::Vector3d diff(p.x - q.x, p.y - q.y, p.t - q.t);
  const double qs = diff.head<2>().dot(avg_inv.topLeftCorner<2, 2>() * diff.head<2>());
  const double qt = diff[2] * avg_inv(2, 2) * diff[2];
  const double pre =
      std::pow(sp.determinant(), 0.25) * std::pow(sq_.determinant(), 0.25) / std::sqrt(avg.determinant());
  return std::exp(2.0 * m.globals.log_sigma_f) * pre * unit_profile(m.globals.base.family(), qs, qt);
}

Eigen::MatrixXd ngp_cov(const FittedNGP& m, PointSpan a, PointSpan b) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ngp_entry(m, a[i], b[j]);
    }
  }
  return k;
}

DensePosterior ngp_posterior(const FittedNGP& m, const ObservationSet& cond, PointSpan queries) {
  Eigen::MatrixXd kcc = ngp_cov(m, cond.points(), cond.points());
  kcc += std::exp(2.0 * m.globals.log_sigma_n) * Eigen::MatrixXd::Identity(kcc.rows(), kcc.cols());
  return condition(kcc, ngp_cov(m, queries, cond.points()), ngp_cov(m, queries, queries), cond.values());
}

double joint_objective(const ObservationSet& data, const FittedNGP& m) {
  Eigen::MatrixXd k = ngp_cov(m, data.points(), data.points());
  k += std::exp(2.0 * m.globals.log_sigma_n) * Eigen::MatrixXd::Identity(k.rows(), k.cols());
  double total = gaussian_log_density(k, data.values());
  for (const auto& f : m.latent) total += oracle::latent_lml(f);
  return total;
}

namespace {

Eigen::MatrixXd principal(const Eigen::MatrixXd& cov, double noise_sd, const std::vector<std::size_t>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s(i, j) = cov(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    }
    s(i, i) += noise_sd * noise_sd;
  }
  return s;
}

double log_det(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  return std::log(m.fullPivLu().determinant());
}

}  // namespace

double mutual_information(const Eigen::MatrixXd& cov, double noise_sd, const std::vector<std::size_t>& a) {
  std::vector<std::size_t> rest;
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < static_cast<std::size_t>(cov.rows()); ++i) {
    all.push_back(i);
    if (std::find(a.begin(), a.end(), i) == a.end()) rest.push_back(i);
  }
  // Entropies up to the common 1/2 log(2 pi e) per dimension, which cancels.
  return 0.5 * (log_det(principal(cov, noise_sd, a)) + log_det(principal(cov, noise_sd, rest)) -
                log_det(principal(cov, noise_sd, all)));
}

double conditional_variance(const Eigen::MatrixXd& cov, double noise_sd, std::size_t y,
                            const std::vector<std::size_t>& given) {
  std::vector<std::size_t> idx{y};
  idx.insert(idx.end(), given.begin(), given.end());
  const Eigen::MatrixXd s = principal(cov, noise_sd, idx);
  if (given.empty()) return s(0, 0);
  const auto g = static_cast<Eigen::Index>(given.size());
  const Eigen::MatrixXd inv = s.bottomRightCorner(g, g).fullPivLu().inverse();
  const Eigen::VectorXd c = s.block(1, 0, g, 1);
  return s(0, 0) - c.dot(inv * c);
}

SubsetOptimum exhaustive_mi(const Eigen::MatrixXd& cov, double noise_sd, const std::vector<std::size_t>& pre,
                            std::size_t budget) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < static_cast<std::size_t>(cov.rows()); ++i) {
    if (std::find(pre.begin(), pre.end(), i) == pre.end()) pool.push_back(i);
  }
  SubsetOptimum best;
  best.value = -std::numeric_limits<double>::infinity();
  if (budget > pool.size()) return best;
  std::vector<bool> mask(pool.size(), false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(budget), true);
  do {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (mask[i]) chosen.push_back(pool[i]);
    }
    std::vector<std::size_t> a = pre;
    a.insert(a.end(), chosen.begin(), chosen.end());
    const double v = mutual_information(cov, noise_sd, a);
    if (v > best.value) best = {chosen, v};
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

namespace {

struct Instance {
  std::mt19937_64 rng;
  explicit Instance(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::size_t count(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }

  PointList points(std::size_t n) {
    PointList p;
    for (std::size_t i = 0; i < n; ++i) p.push_back({uniform(0, 1), uniform(0, 1), uniform(0, 3)});
    return p;
  }
  Eigen::VectorXd values(std::size_t n) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = normal();
    return v;
  }
  GlobalHypers globals(ModelKind kind) {
    const auto family = static_cast<KernelFamily>(count(0, 2));
    const BaseKernelSpec base =
        family == KernelFamily::kSeAniso
            ? BaseKernelSpec::se_aniso(uniform(0.2, 1.0), uniform(0.2, 1.0), uniform(0.5, 3.0))
            : BaseKernelSpec::cressie_huang(family, uniform(0.3, 2.0), uniform(1.0, 5.0));
    std::optional<double> ll;
    if (kind == ModelKind::kLeis) ll = uniform(0.3, 2.0);
    return GlobalHypers::make(uniform(0.5, 2.0), uniform(0.05, 0.5), base, ll);
  }
  LatentField field(const PointList& locations) {
    LatentField f;
    f.locations = locations;
    f.values = 0.5 * values(locations.size());
    f.hypers.log_signal_sd = std::log(uniform(0.5, 1.5));
    for (auto& l : f.hypers.log_lengths) l = std::log(uniform(0.3, 2.0));
    f.hypers.log_jitter_sd = std::log(uniform(0.01, 0.3));
    return f;
  }
  FittedNGP model() {
    FittedNGP m;
    m.kind = static_cast<ModelKind>(count(0, 2));
    m.globals = globals(m.kind);
    const PointList xm = points(count(1, 4));
    for (std::size_t d = 0; d < latent_dimensions(m.kind); ++d) m.latent.push_back(field(xm));
    return m;
  }
};

void track(SuiteCheck& c, double err) {
  ++c.instances;
  c.max_abs_error = std::max(c.max_abs_error, std::isfinite(err) ? err : 1e300);
}

double max_abs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<SuiteCheck> run_suite(std::uint64_t seed, std::size_t instances) {
  SuiteCheck lml{"log_marginal_likelihood"}, post{"posterior"}, lmean{"latent_predict_mean"},
      llml{"latent_lml"}, cov{"ngp_cov_matrix"}, pred{"ngp_predict"}, joint{"joint_objective"};
  for (std::size_t it = 0; it < instances; ++it) {
    Instance r(seed * 7919 + it);
    const std::size_t n = r.count(1, 8);
    const PointList x = r.points(n);
    const ObservationSet data(x, r.values(n));
    const PointList xq = r.points(r.count(1, 3));

    const GlobalHypers g = r.globals(ModelKind::kStationary);
    const StationaryKernel k(g);
    const KernelFn kfn = [&k](const Point& p, const Point& q) { return k(p, q); };
    FittedNGP stat;
    stat.globals = g;
    Eigen::MatrixXd kn = ngp_cov(stat, x, x);
    kn.diagonal().array() += g.sigma_n() * g.sigma_n();
    track(lml, std::abs(log_marginal_likelihood(data, kfn, g.sigma_n()) - gaussian_log_density(kn, data.values())));
    const Posterior p = posterior(data, kfn, g.sigma_n(), xq);
    const DensePosterior po = condition(kn, ngp_cov(stat, xq, x), ngp_cov(stat, xq, xq), data.values());
    track(post, std::max(max_abs(p.mean, po.mean), max_abs(p.cov, po.cov)));

    const LatentField f = r.field(r.points(r.count(1, 4)));
    track(lmean, max_abs(latent_predict_mean(f, xq), latent_mean(f, xq)));
    track(llml, std::abs(lisal::latent_lml(f) - oracle::latent_lml(f)));

    const FittedNGP m = r.model();
    track(cov, max_abs(ngp_cov_matrix(m, x), ngp_cov(m, x, x)));
    const Prediction pr = ngp_predict(m, data, xq);
    const DensePosterior pro = ngp_posterior(m, data, xq);
    track(pred, std::max(max_abs(pr.mean, pro.mean), max_abs(pr.variance, pro.cov.diagonal())));
    track(joint, std::abs(lisal::joint_objective(data, m.kind, m.globals, m.latent) - joint_objective(data, m)));
  }
  return {lml, post, lmean, llml, cov, pred, joint};
}

}  // namespace lisal::oracle
