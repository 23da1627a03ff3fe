#include "lisal/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include <CLI11.hpp>

#include "lisal/harness/dataset.hpp"

namespace lisal::harness {

void ExperimentConfig::validate() const {
  if (k < 1) throw InvalidInput("k must be at least 1");
  if (lisal.m1 < 1 || lisal.m2 < 1) throw InvalidInput("m1 and m2 must be at least 1");
  if (lisal.restarts < 1) throw InvalidInput("restarts must be at least 1");
  if (lisal.kind == ModelKind::kStationary) throw InvalidInput("model must be pclsk or leis");
  if (out_dir.empty()) throw InvalidInput("out must not be empty");
  if (dataset.empty()) {
    synth.validate();
  } else if (!std::filesystem::exists(dataset)) {
    throw InvalidInput("dataset " + dataset + " does not exist");
  }
}

namespace {

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
    throw InvalidInput("config key " + key + ": '" + v + "' is not a non-negative integer");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
    throw InvalidInput("config key " + key + ": '" + v + "' is not a number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw InvalidInput("config key " + key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset", [](auto& c, auto&, auto& v) { c.dataset = v; }},
      {"out", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_integer<std::uint64_t>(k, v); }},
      {"model", [](auto& c, auto&, auto& v) { c.lisal.kind = parse_model_kind(v); }},
      {"kernel", [](auto& c, auto&, auto& v) { c.lisal.family = parse_kernel_family(v); }},
      {"m1", [](auto& c, auto& k, auto& v) { c.lisal.m1 = parse_integer<std::size_t>(k, v); }},
      {"m2", [](auto& c, auto& k, auto& v) { c.lisal.m2 = parse_integer<std::size_t>(k, v); }},
      {"c", [](auto& c, auto& k, auto& v) { c.lisal.c = parse_integer<std::size_t>(k, v); }},
      {"restarts", [](auto& c, auto& k, auto& v) { c.lisal.restarts = parse_integer<std::size_t>(k, v); }},
      {"perturbation_sd",
       [](auto& c, auto& k, auto& v) { c.lisal.perturbation_sd = parse_double(k, v); }},
      {"value_perturbation_sd",
       [](auto& c, auto& k, auto& v) { c.lisal.value_perturbation_sd = parse_double(k, v); }},
      {"k", [](auto& c, auto& k, auto& v) { c.k = parse_integer<std::size_t>(k, v); }},
      {"history_window",
       [](auto& c, auto& k, auto& v) { c.history_window = parse_integer<std::size_t>(k, v); }},
      {"standardize", [](auto& c, auto& k, auto& v) { c.standardize = parse_bool(k, v); }},
      {"synth.nx", [](auto& c, auto& k, auto& v) { c.synth.nx = parse_integer<std::size_t>(k, v); }},
      {"synth.ny", [](auto& c, auto& k, auto& v) { c.synth.ny = parse_integer<std::size_t>(k, v); }},
      {"synth.nt", [](auto& c, auto& k, auto& v) { c.synth.nt = parse_integer<std::size_t>(k, v); }},
      {"synth.kind", [](auto& c, auto&, auto& v) { c.synth.kind = parse_model_kind(v); }},
      {"synth.profile", [](auto& c, auto&, auto& v) { c.synth.profile = parse_latent_profile(v); }},
      {"synth.kernel", [](auto& c, auto&, auto& v) { c.synth.family = parse_kernel_family(v); }},
      {"synth.contrast", [](auto& c, auto& k, auto& v) { c.synth.contrast = parse_double(k, v); }},
      {"synth.ramp_width", [](auto& c, auto& k, auto& v) { c.synth.ramp_width = parse_double(k, v); }},
      {"synth.sigma_f", [](auto& c, auto& k, auto& v) { c.synth.sigma_f = parse_double(k, v); }},
      {"synth.noise_sd", [](auto& c, auto& k, auto& v) { c.synth.noise_sd = parse_double(k, v); }},
      {"synth.lx", [](auto& c, auto& k, auto& v) { c.synth.lx = parse_double(k, v); }},
      {"synth.ly", [](auto& c, auto& k, auto& v) { c.synth.ly = parse_double(k, v); }},
      {"synth.lt", [](auto& c, auto& k, auto& v) { c.synth.lt = parse_double(k, v); }},
      {"synth.latent_length", [](auto& c, auto& k, auto& v) { c.synth.latent_length = parse_double(k, v); }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw InvalidInput(source + ": " + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string key = item.fullname();
    const auto it = setters().find(key);
    if (it == setters().end()) throw InvalidInput(source + ": unknown config key '" + key + "'");
    if (item.inputs.size() != 1) throw InvalidInput(source + ": config key " + key + " needs one value");
    try {
      it->second(cfg, key, item.inputs.front());
    } catch (const InvalidInput& e) {
      throw InvalidInput(source + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

}  // namespace lisal::harness
