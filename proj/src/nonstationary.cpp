#include "lisal/nonstationary.hpp"

#include <cmath>
#include <string>

#include "lisal/error.hpp"
#include "lisal/gp.hpp"

namespace lisal {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kStationary:
      return "stationary";
    case ModelKind::kPclsk:
      return "pclsk";
    case ModelKind::kLeis:
      return "leis";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "stationary") return ModelKind::kStationary;
  if (name == "pclsk") return ModelKind::kPclsk;
  if (name == "leis") return ModelKind::kLeis;
  throw InvalidInput("unknown model kind '" + std::string(name) + "'");
}

std::size_t latent_dimensions(ModelKind kind) {
  switch (kind) {
    case ModelKind::kStationary:
      return 0;
    case ModelKind::kPclsk:
      return 3;
    case ModelKind::kLeis:
      return 1;
  }
  return 0;
}

namespace {

void require_positive_scales(const AxisScales& s) {
  for (double v : s) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("local length scales must be positive");
  }
}

// Works on squared scales so the matrix assembly can pass exp(2 log l).
inline double pclsk_entry(const Point& p, const Point& q, const double* l2p, const double* l2q,
                          KernelFamily family, double sigma_f2) {
  const double ax = 0.5 * (l2p[0] + l2q[0]);
  const double ay = 0.5 * (l2p[1] + l2q[1]);
  const double at = 0.5 * (l2p[2] + l2q[2]);
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  const double dt = p.t - q.t;
  const double qs = dx * dx / ax + dy * dy / ay;
  const double qt = dt * dt / at;
  const double pre = std::sqrt(std::sqrt(l2p[0] * l2q[0] * l2p[1] * l2q[1] * l2p[2] * l2q[2]) /
                               (ax * ay * at));
  return sigma_f2 * pre * profile(family, qs, qt);
}

inline double leis_multiplier(double lp, double lq, double latent_length) {
  const double r = (lp - lq) / latent_length;
  return std::exp(-0.5 * r * r);
}

}  // namespace

double pclsk_prefactor(const AxisScales& scales_p, const AxisScales& scales_q) {
  require_positive_scales(scales_p);
  require_positive_scales(scales_q);
  double pre = 1.0;
  for (std::size_t d = 0; d < 3; ++d) {
    const double a = scales_p[d] * scales_p[d];
    const double b = scales_q[d] * scales_q[d];
    pre *= std::sqrt(scales_p[d] * scales_q[d] / (0.5 * (a + b)));
  }
  return pre;
}

double pclsk_cov(const Point& p, const Point& q, const AxisScales& scales_p,
                 const AxisScales& scales_q, KernelFamily family, double sigma_f) {
  if (!p.is_finite() || !q.is_finite()) throw InvalidInput("pclsk_cov: non-finite input");
  require_positive_scales(scales_p);
  require_positive_scales(scales_q);
  const double l2p[3] = {scales_p[0] * scales_p[0], scales_p[1] * scales_p[1], scales_p[2] * scales_p[2]};
  const double l2q[3] = {scales_q[0] * scales_q[0], scales_q[1] * scales_q[1], scales_q[2] * scales_q[2]};
  return pclsk_entry(p, q, l2p, l2q, family, sigma_f * sigma_f);
}

double leis_cov(const Point& p, const Point& q, double lp, double lq, const GlobalHypers& h) {
  if (!p.is_finite() || !q.is_finite() || !std::isfinite(lp) || !std::isfinite(lq)) {
    throw InvalidInput("leis_cov: non-finite input");
  }
  return StationaryKernel(h)(p, q) * leis_multiplier(lp, lq, h.latent_length());
}

std::size_t LocalParams::size() const {
  switch (kind) {
    case ModelKind::kPclsk:
      return log_scales.size();
    case ModelKind::kLeis:
      return latent_coord.size();
    case ModelKind::kStationary:
      break;
  }
  return 0;
}

Eigen::MatrixXd nonstationary_cov_matrix(ModelKind kind, const GlobalHypers& globals, PointSpan a,
                                         const LocalParams& local_a, PointSpan b,
                                         const LocalParams& local_b) {
  require_finite(a);
  require_finite(b);
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  const bool same = a.data() == b.data() && a.size() == b.size();
  if (kind == ModelKind::kStationary) {
    return same ? cov_matrix(a, StationaryKernel(globals)) : cov_matrix(a, b, StationaryKernel(globals));
  }
  Eigen::MatrixXd m(na, nb);
  if (local_a.kind != kind || local_b.kind != kind || local_a.size() != a.size() ||
      local_b.size() != b.size()) {
    throw InvalidInput("local parameters do not match the point lists");
  }

  if (kind == ModelKind::kLeis) {
    const StationaryKernel base(globals);
    const double ll = globals.latent_length();
    for (Eigen::Index j = 0; j < nb; ++j) {
      const auto bj = static_cast<std::size_t>(j);
      for (Eigen::Index i = same ? j : 0; i < na; ++i) {
        const auto ai = static_cast<std::size_t>(i);
        m(i, j) = base(a[ai], b[bj]) *
                  leis_multiplier(local_a.latent_coord[ai], local_b.latent_coord[bj], ll);
        if (same) m(j, i) = m(i, j);
      }
    }
    return m;
  }

  // PCLSK
  const auto squared = [](const LocalParams& lp) {
    std::vector<std::array<double, 3>> out(lp.log_scales.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t d = 0; d < 3; ++d) out[i][d] = std::exp(2.0 * lp.log_scales[i][d]);
    }
    return out;
  };
  const auto l2a = squared(local_a);
  const auto l2b = same ? l2a : squared(local_b);
  const double sf2 = globals.sigma_f() * globals.sigma_f();
  const KernelFamily family = globals.base.family();
  for (Eigen::Index j = 0; j < nb; ++j) {
    const auto bj = static_cast<std::size_t>(j);
    for (Eigen::Index i = same ? j : 0; i < na; ++i) {
      const auto ai = static_cast<std::size_t>(i);
      m(i, j) = pclsk_entry(a[ai], b[bj], l2a[ai].data(), l2b[bj].data(), family, sf2);
      if (same) m(j, i) = m(i, j);
    }
  }
  return m;
}

void FittedNGP::validate() const {
  if (latent.size() != latent_dimensions(kind)) {
    throw InvalidInput("model of kind " + std::string(to_string(kind)) + " needs " +
                       std::to_string(latent_dimensions(kind)) + " latent fields, got " +
                       std::to_string(latent.size()));
  }
  if (kind == ModelKind::kLeis && !globals.log_latent_length) {
    throw InvalidInput("LEIS model needs a latent length scale");
  }
  for (const auto& f : latent) {
    f.validate();
    if (f.locations != latent.front().locations) {
      throw InvalidInput("latent fields must share their latent locations");
    }
  }
}

LocalParams FittedNGP::local_params(PointSpan points) const {
  LocalParams lp;
  lp.kind = kind;
  if (kind == ModelKind::kLeis) {
    const Eigen::VectorXd z = latent_predict_mean(latent.at(0), points);
    lp.latent_coord.assign(z.data(), z.data() + z.size());
  } else if (kind == ModelKind::kPclsk) {
    const auto base = globals.base.axis_lengths();
    lp.log_scales.resize(points.size());
    for (std::size_t d = 0; d < 3; ++d) {
      const Eigen::VectorXd z = latent_predict_mean(latent.at(d), points);
      const double offset = std::log(base[d]);
      for (std::size_t i = 0; i < points.size(); ++i) {
        lp.log_scales[i][d] = offset + z[static_cast<Eigen::Index>(i)];
      }
    }
  }
  return lp;
}

Eigen::MatrixXd ngp_cov_matrix(const FittedNGP& model, PointSpan a, PointSpan b) {
  model.validate();
  const bool same = a.data() == b.data() && a.size() == b.size();
  const LocalParams la = model.local_params(a);
  if (same) return nonstationary_cov_matrix(model.kind, model.globals, a, la, a, la);
  return nonstationary_cov_matrix(model.kind, model.globals, a, la, b, model.local_params(b));
}

Eigen::MatrixXd ngp_cov_matrix(const FittedNGP& model, PointSpan a) {
  return ngp_cov_matrix(model, a, a);
}

Prediction ngp_predict(const FittedNGP& model, const ObservationSet& cond, PointSpan queries) {
  model.validate();
  const PointSpan cp = cond.points();
  const LocalParams lc = model.local_params(cp);
  const LocalParams lq = model.local_params(queries);
  Eigen::MatrixXd k_cc = nonstationary_cov_matrix(model.kind, model.globals, cp, lc, cp, lc);
  const double sn = model.globals.sigma_n();
  k_cc.diagonal().array() += sn * sn;
  const Eigen::MatrixXd k_qc = nonstationary_cov_matrix(model.kind, model.globals, queries, lq, cp, lc);
  const Eigen::MatrixXd k_qq =
      nonstationary_cov_matrix(model.kind, model.globals, queries, lq, queries, lq);
  const Posterior post = condition(k_cc, k_qc, k_qq, cond.values());
  return Prediction{post.mean, post.variance(), post.clamped_variances};
}

}  // namespace lisal
