#pragma once

#include <filesystem>
#include <string>

#include "lisal/harness/dataset.hpp"
#include "lisal/nonstationary.hpp"

namespace lisal::harness {

struct ModelSnapshot {
  FittedNGP model;  // train reference is not serialised
  Standardizer standardizer;
};

std::string snapshot_to_string(const ModelSnapshot& snap);
ModelSnapshot snapshot_from_string(const std::string& text);
void save_snapshot(const std::filesystem::path& path, const ModelSnapshot& snap);
ModelSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace lisal::harness
