#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "lisal/kernel.hpp"
#include "lisal/latent_field.hpp"
#include "lisal/nonstationary.hpp"
#include "lisal/types.hpp"

namespace testing {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  }

  lisal::PointList points(std::size_t n, double t_max = 3.0) {
    lisal::PointList p;
    for (std::size_t i = 0; i < n; ++i) p.push_back({uniform(0, 1), uniform(0, 1), uniform(0, t_max)});
    return p;
  }
  Eigen::VectorXd vector(std::size_t n, double scale = 1.0) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = scale * normal();
    return v;
  }
  lisal::BaseKernelSpec base(lisal::KernelFamily f) {
    if (f == lisal::KernelFamily::kSeAniso) {
      return lisal::BaseKernelSpec::se_aniso(uniform(0.2, 1.0), uniform(0.2, 1.0), uniform(0.5, 3.0));
    }
    return lisal::BaseKernelSpec::cressie_huang(f, uniform(0.3, 2.0), uniform(1.0, 5.0));
  }
  lisal::GlobalHypers globals(lisal::KernelFamily f, bool leis, double noise_lo = 0.05) {
    std::optional<double> ll;
    if (leis) ll = uniform(0.3, 2.0);
    return lisal::GlobalHypers::make(uniform(0.5, 2.0), uniform(noise_lo, 0.5), base(f), ll);
  }
  lisal::LatentField field(const lisal::PointList& locations, double value_scale = 0.5) {
    lisal::LatentField f;
    f.locations = locations;
    f.values = vector(locations.size(), value_scale);
    for (auto& l : f.hypers.log_lengths) l = std::log(uniform(0.3, 2.0));
    f.hypers.log_jitter_sd = std::log(uniform(0.01, 0.3));
    return f;
  }
};

constexpr lisal::KernelFamily kFamilies[] = {lisal::KernelFamily::kSeAniso, lisal::KernelFamily::kCressieHuang1,
                                             lisal::KernelFamily::kCressieHuang3};

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
