#include "lisal/harness/snapshot.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace lisal::harness {

using nlohmann::json;

namespace {

// JSON has no infinities; a noiseless model (log sigma_n = -inf) is null.
json log_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double log_from(const json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

std::string snapshot_to_string(const ModelSnapshot& snap) {
  const FittedNGP& m = snap.model;
  json g;
  g["log_sigma_f"] = m.globals.log_sigma_f;
  g["log_sigma_n"] = log_or_null(m.globals.log_sigma_n);
  g["family"] = std::string(to_string(m.globals.base.family()));
  const auto lp = m.globals.base.log_params();
  g["log_base"] = std::vector<double>(lp.begin(), lp.end());
  g["log_latent_length"] = m.globals.log_latent_length ? json(*m.globals.log_latent_length) : json(nullptr);

  json fields = json::array();
  for (const LatentField& f : m.latent) {
    json jf;
    jf["log_signal_sd"] = f.hypers.log_signal_sd;
    jf["log_lengths"] = f.hypers.log_lengths;
    jf["log_jitter_sd"] = f.hypers.log_jitter_sd;
    jf["frozen_prefix"] = f.frozen_prefix;
    json loc = json::array();
    for (const Point& p : f.locations) loc.push_back({p.x, p.y, p.t});
    jf["locations"] = loc;
    jf["values"] = std::vector<double>(f.values.data(), f.values.data() + f.values.size());
    fields.push_back(jf);
  }

  json j;
  j["kind"] = std::string(to_string(m.kind));
  j["globals"] = g;
  j["fields"] = fields;
  j["standardizer"] = {{"mean", snap.standardizer.mean}, {"sd", snap.standardizer.sd}};
  return j.dump(2) + "\n";
}

ModelSnapshot snapshot_from_string(const std::string& text) {
  ModelSnapshot snap;
  try {
    const json j = json::parse(text);
    FittedNGP& m = snap.model;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    const json& g = j.at("globals");
    const KernelFamily family = parse_kernel_family(g.at("family").get<std::string>());
    const auto log_base = g.at("log_base").get<std::vector<double>>();
    m.globals.base = BaseKernelSpec::from_axis_lengths(family, {1.0, 1.0, 1.0}).with_log_params(log_base);
    m.globals.log_sigma_f = g.at("log_sigma_f").get<double>();
    m.globals.log_sigma_n = log_from(g.at("log_sigma_n"));
    if (!g.at("log_latent_length").is_null()) m.globals.log_latent_length = g.at("log_latent_length").get<double>();

    for (const json& jf : j.at("fields")) {
      LatentField f;
      f.hypers.log_signal_sd = jf.at("log_signal_sd").get<double>();
      f.hypers.log_lengths = jf.at("log_lengths").get<std::array<double, 3>>();
      f.hypers.log_jitter_sd = jf.at("log_jitter_sd").get<double>();
      f.frozen_prefix = jf.at("frozen_prefix").get<std::size_t>();
      for (const json& p : jf.at("locations")) {
        const auto c = p.get<std::array<double, 3>>();
        f.locations.push_back({c[0], c[1], c[2]});
      }
      const auto v = jf.at("values").get<std::vector<double>>();
      f.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      m.latent.push_back(std::move(f));
    }
    snap.standardizer.mean = j.at("standardizer").at("mean").get<double>();
    snap.standardizer.sd = j.at("standardizer").at("sd").get<double>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("model snapshot: ") + e.what());
  }
  snap.model.validate();
  return snap;
}

void save_snapshot(const std::filesystem::path& path, const ModelSnapshot& snap) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << snapshot_to_string(snap);
  if (!out) throw IoError("failed writing " + path.string());
}

ModelSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return snapshot_from_string(buf.str());
}

}  // namespace lisal::harness
