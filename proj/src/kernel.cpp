#include "lisal/kernel.hpp"

#include <cmath>
#include <string>

#include "lisal/error.hpp"

namespace lisal {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kSeAniso:
      return "se";
    case KernelFamily::kCressieHuang1:
      return "ch1";
    case KernelFamily::kCressieHuang3:
      return "ch3";
  }
  return "?";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "se" || name == "se_aniso") return KernelFamily::kSeAniso;
  if (name == "ch1" || name == "ch_ex1") return KernelFamily::kCressieHuang1;
  if (name == "ch3" || name == "ch_ex3") return KernelFamily::kCressieHuang3;
  throw InvalidInput("unknown kernel family '" + std::string(name) + "'");
}

double profile(KernelFamily family, double qs, double qt) {
  switch (family) {
    case KernelFamily::kSeAniso:
      return std::exp(-0.5 * (qs + qt));
    case KernelFamily::kCressieHuang1: {
      const double c = 1.0 + qt;
      return std::exp(-qs / c) / c;
    }
    case KernelFamily::kCressieHuang3: {
      const double c = 1.0 + qt;
      const double d = c * c + qs;
      return c / (d * std::sqrt(d));
    }
  }
  return 0.0;
}

ProfileEval profile_partials(KernelFamily family, double qs, double qt) {
  ProfileEval e;
  switch (family) {
    case KernelFamily::kSeAniso:
      e.value = std::exp(-0.5 * (qs + qt));
      e.d_spatial = -0.5 * e.value;
      e.d_temporal = -0.5 * e.value;
      break;
    case KernelFamily::kCressieHuang1: {
      const double c = 1.0 + qt;
      e.value = std::exp(-qs / c) / c;
      e.d_spatial = -e.value / c;
      e.d_temporal = e.value * (qs / (c * c) - 1.0 / c);
      break;
    }
    case KernelFamily::kCressieHuang3: {
      const double c = 1.0 + qt;
      const double d = c * c + qs;
      const double d32 = d * std::sqrt(d);
      const double d52 = d32 * d;
      e.value = c / d32;
      e.d_spatial = -1.5 * c / d52;
      e.d_temporal = 1.0 / d32 - 3.0 * c * c / d52;
      break;
    }
  }
  return e;
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

BaseKernelSpec BaseKernelSpec::se_aniso(double lx, double ly, double lt) {
  require_positive(lx, "l_x");
  require_positive(ly, "l_y");
  require_positive(lt, "l_t");
  BaseKernelSpec s;
  s.family_ = KernelFamily::kSeAniso;
  s.log_params_ = {std::log(lx), std::log(ly), std::log(lt)};
  return s;
}

BaseKernelSpec BaseKernelSpec::cressie_huang(KernelFamily family, double a, double b) {
  if (family == KernelFamily::kSeAniso) {
    throw InvalidInput("cressie_huang: family must be CH_EX1 or CH_EX3");
  }
  require_positive(a, "a");
  require_positive(b, "b");
  BaseKernelSpec s;
  s.family_ = family;
  s.log_params_ = {std::log(a), std::log(b), 0.0};
  return s;
}

BaseKernelSpec BaseKernelSpec::from_axis_lengths(KernelFamily family,
                                                 const std::array<double, 3>& lengths) {
  if (family == KernelFamily::kSeAniso) return se_aniso(lengths[0], lengths[1], lengths[2]);
  if (std::abs(lengths[0] - lengths[1]) > 1e-12 * std::abs(lengths[0])) {
    throw InvalidInput("Cressie-Huang kernels need equal spatial length scales");
  }
  return cressie_huang(family, 1.0 / lengths[2], 1.0 / lengths[0]);
}

BaseKernelSpec BaseKernelSpec::with_log_params(std::span<const double> log_params) const {
  if (log_params.size() != num_params()) {
    throw InvalidInput("base kernel expects " + std::to_string(num_params()) + " parameters");
  }
  BaseKernelSpec s = *this;
  for (std::size_t i = 0; i < log_params.size(); ++i) s.log_params_[i] = log_params[i];
  return s;
}

std::array<double, 3> BaseKernelSpec::axis_lengths() const {
  if (family_ == KernelFamily::kSeAniso) {
    return {std::exp(log_params_[0]), std::exp(log_params_[1]), std::exp(log_params_[2])};
  }
  const double ls = std::exp(-log_params_[1]);
  return {ls, ls, std::exp(-log_params_[0])};
}

GlobalHypers GlobalHypers::make(double sigma_f, double sigma_n, BaseKernelSpec base,
                                std::optional<double> latent_length) {
  require_positive(sigma_f, "sigma_f");
  if (!(sigma_n >= 0.0) || !std::isfinite(sigma_n)) {
    throw InvalidInput("sigma_n must be non-negative and finite");
  }
  GlobalHypers h;
  h.log_sigma_f = std::log(sigma_f);
  h.log_sigma_n = std::log(sigma_n);  // -inf encodes a noiseless model
  h.base = base;
  if (latent_length) {
    require_positive(*latent_length, "latent length l_l");
    h.log_latent_length = std::log(*latent_length);
  }
  return h;
}

double GlobalHypers::sigma_f() const { return std::exp(log_sigma_f); }
double GlobalHypers::sigma_n() const { return std::exp(log_sigma_n); }
double GlobalHypers::latent_length() const {
  if (!log_latent_length) throw InvalidInput("hyper-parameters carry no latent length scale");
  return std::exp(*log_latent_length);
}

StationaryKernel::StationaryKernel(KernelFamily family, double sigma_f,
                                   const std::array<double, 3>& axis_lengths)
    : family_(family), sigma_f2_(sigma_f * sigma_f) {
  for (std::size_t d = 0; d < 3; ++d) {
    require_positive(axis_lengths[d], "length scale");
    inv_len2_[d] = 1.0 / (axis_lengths[d] * axis_lengths[d]);
  }
}

StationaryKernel::StationaryKernel(const GlobalHypers& hypers)
    : StationaryKernel(hypers.base.family(), hypers.sigma_f(), hypers.base.axis_lengths()) {}

double StationaryKernel::operator()(const Point& p, const Point& q) const {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  const double dt = p.t - q.t;
  const double qs = dx * dx * inv_len2_[0] + dy * dy * inv_len2_[1];
  const double qt = dt * dt * inv_len2_[2];
  return sigma_f2_ * profile(family_, qs, qt);
}

double se_cov(const Point& p, const Point& q, const GlobalHypers& h) {
  if (h.base.family() != KernelFamily::kSeAniso) throw InvalidInput("se_cov: family is not SE_ANISO");
  if (!p.is_finite() || !q.is_finite()) throw InvalidInput("se_cov: non-finite input");
  return StationaryKernel(h)(p, q);
}

double ch_cov(const Point& p, const Point& q, const GlobalHypers& h) {
  if (h.base.family() == KernelFamily::kSeAniso) throw InvalidInput("ch_cov: family is not CH_EX1/CH_EX3");
  if (!p.is_finite() || !q.is_finite()) throw InvalidInput("ch_cov: non-finite input");
  return StationaryKernel(h)(p, q);
}

}  // namespace lisal
