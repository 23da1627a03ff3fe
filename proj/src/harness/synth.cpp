#include "lisal/harness/synth.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <string>

#include "lisal/gp.hpp"

namespace lisal::harness {

std::string_view to_string(LatentProfile p) {
  switch (p) {
    case LatentProfile::kConstant:
      return "constant";
    case LatentProfile::kStep:
      return "step";
    case LatentProfile::kSigmoid:
      return "sigmoid";
  }
  return "?";
}

LatentProfile parse_latent_profile(std::string_view name) {
  if (name == "constant") return LatentProfile::kConstant;
  if (name == "step") return LatentProfile::kStep;
  if (name == "sigmoid") return LatentProfile::kSigmoid;
  throw InvalidInput("unknown latent profile '" + std::string(name) + "'");
}

void SynthSpec::validate() const {
  if (nx < 1 || ny < 1 || nt < 1) throw InvalidInput("synth grid dimensions must be positive");
  if (nx * ny < 2) throw InvalidInput("synth grid needs at least two spatial locations");
  if (kind == ModelKind::kStationary && profile != LatentProfile::kConstant) {
    throw InvalidInput("stationary synth data needs the constant latent profile");
  }
  const double positive[] = {contrast, ramp_width, sigma_f, lx, ly, lt, latent_length};
  for (double v : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("synth parameters must be positive and finite");
  }
  if (!(noise_sd >= 0.0)) throw InvalidInput("synth noise sd must be non-negative");
  if (family != KernelFamily::kSeAniso && lx != ly) {
    throw InvalidInput("Cressie-Huang synth kernels need lx == ly");
  }
}

GlobalHypers SynthSpec::globals() const {
  std::optional<double> ll;
  if (kind == ModelKind::kLeis) ll = latent_length;
  return GlobalHypers::make(sigma_f, noise_sd, BaseKernelSpec::from_axis_lengths(family, {lx, ly, lt}), ll);
}

namespace {

double unit_profile(const SynthSpec& s, double x) {
  switch (s.profile) {
    case LatentProfile::kConstant:
      return 0.0;
    case LatentProfile::kStep:
      return x > 0.5 ? 1.0 : 0.0;
    case LatentProfile::kSigmoid:
      return 1.0 / (1.0 + std::exp(-(x - 0.5) / s.ramp_width));
  }
  return 0.0;
}

double grid_coord(std::size_t i, std::size_t n) {
  return n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

SynthData synth_generate(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const GlobalHypers globals = spec.globals();

  // Train points first, then test, so both splits come from one joint draw.
  PointList pts;
  std::vector<bool> is_train;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t t = 0; t < spec.nt; ++t) {
      for (std::size_t i = 0; i < spec.nx; ++i) {
        for (std::size_t j = 0; j < spec.ny; ++j) {
          if (((i + j) % 2 == 0) != (pass == 0)) continue;
          pts.push_back({grid_coord(i, spec.nx), grid_coord(j, spec.ny), static_cast<double>(t)});
          is_train.push_back(pass == 0);
        }
      }
    }
  }

  std::vector<double> latent(pts.size());
  LocalParams local;
  local.kind = spec.kind;
  const auto axes = globals.base.axis_lengths();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double u = unit_profile(spec, pts[i].x);
    if (spec.kind == ModelKind::kPclsk) {
      latent[i] = -std::log(spec.contrast) * u;
      local.log_scales.push_back({std::log(axes[0]) + latent[i], std::log(axes[1]) + latent[i], std::log(axes[2])});
    } else {
      latent[i] = spec.contrast * u;
      local.latent_coord.push_back(latent[i]);
    }
  }
  if (spec.kind == ModelKind::kStationary) local = LocalParams{};

  const Eigen::MatrixXd k = nonstationary_cov_matrix(spec.kind, globals, pts, local, pts, local);
  const CholeskyFactor chol = CholeskyFactor::compute(k);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd eps(static_cast<Eigen::Index>(pts.size()));
  for (auto& e : eps) e = normal(rng);
  const Eigen::VectorXd f = chol.llt().matrixL() * eps;

  SynthData out;
  PointList train_pts, test_pts;
  std::vector<double> train_vals, test_vals;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double fi = f[static_cast<Eigen::Index>(i)];
    if (is_train[i]) {
      train_pts.push_back(pts[i]);
      train_vals.push_back(fi + spec.noise_sd * normal(rng));
      out.train_latent.push_back(latent[i]);
    } else {
      test_pts.push_back(pts[i]);
      test_vals.push_back(fi);
      out.test_latent.push_back(latent[i]);
    }
  }
  out.data = Dataset{ObservationSet(std::move(train_pts), std::move(train_vals)),
                     ObservationSet(std::move(test_pts), std::move(test_vals))};
  return out;
}

void write_latent_csv(const std::filesystem::path& path, const SynthData& synth) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17) << "x,y,t,latent,split\n";
  const auto dump = [&out](const ObservationSet& s, const std::vector<double>& z, const char* split) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Point& p = s.points()[i];
      out << p.x << ',' << p.y << ',' << p.t << ',' << z[i] << ',' << split << '\n';
    }
  };
  dump(synth.data.train, synth.train_latent, "train");
  dump(synth.data.test, synth.test_latent, "test");
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lisal::harness
