#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "lisal/harness/dataset.hpp"
#include "lisal/kernel.hpp"
#include "lisal/nonstationary.hpp"

namespace lisal::harness {

enum class LatentProfile { kConstant, kStep, kSigmoid };
std::string_view to_string(LatentProfile p);
LatentProfile parse_latent_profile(std::string_view name);

// Regular nx * ny grid on [0,1]^2 repeated at t = 0..nt-1. Locations are
// split in a checkerboard: (i + j) even goes to train, odd to test.
//
// The true latent field depends on x only, through u(x) in [0, 1]: 0 for the
// constant profile, a jump at x = 0.5 for the step and a logistic ramp of
// width `ramp_width` for the sigmoid. LEIS uses latent coordinate
// contrast * u(x); PCLSK shrinks the spatial length scales by the factor
// `contrast` where u = 1, i.e. log offset -log(contrast) * u(x).
struct SynthSpec {
  std::size_t nx = 8;
  std::size_t ny = 8;
  std::size_t nt = 12;
  ModelKind kind = ModelKind::kLeis;
  LatentProfile profile = LatentProfile::kStep;
  double contrast = 3.0;
  double ramp_width = 0.05;
  KernelFamily family = KernelFamily::kSeAniso;
  double sigma_f = 1.0;
  double noise_sd = 0.05;
  double lx = 0.3;
  double ly = 0.3;
  double lt = 2.5;
  double latent_length = 1.0;  // LEIS only

  void validate() const;
  GlobalHypers globals() const;
};

struct SynthData {
  Dataset data;
  // True latent value at each train / test point (LEIS coordinate, or the
  // PCLSK log offset on the x axis).
  std::vector<double> train_latent;
  std::vector<double> test_latent;
};

// Train readings carry N(0, noise_sd^2) noise, test readings are the
// noise-free field.
SynthData synth_generate(const SynthSpec& spec, std::uint64_t seed);

void write_latent_csv(const std::filesystem::path& path, const SynthData& synth);

}  // namespace lisal::harness
