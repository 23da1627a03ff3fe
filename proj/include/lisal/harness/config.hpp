#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "lisal/harness/synth.hpp"
#include "lisal/lisal.hpp"

namespace lisal::harness {

struct ExperimentConfig {
  std::string dataset;  // CSV path; empty selects the synthetic generator
  SynthSpec synth;
  LisalConfig lisal;
  std::size_t k = 6;
  std::size_t history_window = 0;
  bool standardize = true;
  std::string out_dir = "out";
  std::uint64_t seed = 0;

  // Everything that can be checked before loading data.
  void validate() const;
};

// TOML subset: `key = value` lines, `[synth]` section, `#` comments. Unknown
// keys are rejected.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<stream>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace lisal::harness
