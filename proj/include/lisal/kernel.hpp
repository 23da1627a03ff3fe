#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "lisal/types.hpp"

namespace lisal {

// Stationary base kernel families. kCressieHuang1 and kCressieHuang3 are the
// nonseparable space-time covariances
//   Ex.1: C(h,u) = s^2 (a^2u^2+1)^{-d/2} exp(-b^2|h|^2 / (a^2u^2+1))
//   Ex.3: C(h,u) = s^2 (a^2u^2+1) / ((a^2u^2+1)^2 + b^2|h|^2)^{(d+1)/2}
// with d = 2 spatial dimensions.
enum class KernelFamily { kSeAniso, kCressieHuang1, kCressieHuang3 };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

// Every family is written as s^2 * g(qs, qt) where qs and qt are the squared,
// scale-normalised spatial and temporal distances. g(0, 0) == 1.
struct ProfileEval {
  double value = 0.0;
  double d_spatial = 0.0;   // dg/dqs
  double d_temporal = 0.0;  // dg/dqt
};

double profile(KernelFamily family, double qs, double qt);
ProfileEval profile_partials(KernelFamily family, double qs, double qt);

// Parameters of the stationary base kernel, held as logarithms.
//   SE_ANISO: (log l_x, log l_y, log l_t)
//   CH_EX1/3: (log a, log b)
class BaseKernelSpec {
 public:
  BaseKernelSpec() = default;  // SE with unit lengths

  static BaseKernelSpec se_aniso(double lx, double ly, double lt);
  static BaseKernelSpec cressie_huang(KernelFamily family, double a, double b);
  // Base kernel whose per-axis length scales are (lx, ly, lt). For the
  // Cressie-Huang families lx and ly must agree (isotropic space).
  static BaseKernelSpec from_axis_lengths(KernelFamily family, const std::array<double, 3>& lengths);

  KernelFamily family() const { return family_; }
  std::size_t num_params() const { return family_ == KernelFamily::kSeAniso ? 3 : 2; }
  std::span<const double> log_params() const { return {log_params_.data(), num_params()}; }
  BaseKernelSpec with_log_params(std::span<const double> log_params) const;

  // (l_x, l_y, l_t) for SE; (1/b, 1/b, 1/a) for the Cressie-Huang families.
  std::array<double, 3> axis_lengths() const;

 private:
  KernelFamily family_ = KernelFamily::kSeAniso;
  std::array<double, 3> log_params_{};
};

// Global hyper-parameters of the observation GP. Positive quantities are kept
// as logarithms so every real vector is a valid parameterisation.
struct GlobalHypers {
  double log_sigma_f = 0.0;
  double log_sigma_n = -2.0;
  BaseKernelSpec base;
  std::optional<double> log_latent_length;  // LEIS only

  static GlobalHypers make(double sigma_f, double sigma_n, BaseKernelSpec base,
                           std::optional<double> latent_length = std::nullopt);

  double sigma_f() const;
  double sigma_n() const;
  double latent_length() const;
};

// Stationary kernel s^2 g(qs, qt) with qs = (dx/lx)^2 + (dy/ly)^2, qt = (dt/lt)^2.
class StationaryKernel {
 public:
  StationaryKernel(KernelFamily family, double sigma_f, const std::array<double, 3>& axis_lengths);
  explicit StationaryKernel(const GlobalHypers& hypers);

  double operator()(const Point& p, const Point& q) const;
  double variance() const { return sigma_f2_; }
  KernelFamily family() const { return family_; }

 private:
  KernelFamily family_;
  double sigma_f2_;
  std::array<double, 3> inv_len2_;
};

double se_cov(const Point& p, const Point& q, const GlobalHypers& h);
double ch_cov(const Point& p, const Point& q, const GlobalHypers& h);

}  // namespace lisal
