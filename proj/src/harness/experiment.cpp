#include "lisal/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "lisal/harness/snapshot.hpp"

namespace lisal::harness {

using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIoError;
  if (dynamic_cast<const LisalStageError*>(&e)) return kNumericalError;
  if (dynamic_cast<const NumericalFailure*>(&e)) return kNumericalError;
  if (dynamic_cast<const OptimizationFailure*>(&e)) return kNumericalError;
  if (dynamic_cast<const InvalidInput*>(&e)) return kConfigError;
  return 1;
}

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
  ExperimentData d;
  if (cfg.dataset.empty()) {
    d.synth = synth_generate(cfg.synth, derive_seed(cfg.seed, 1000));
    d.raw = d.synth->data;
  } else {
    d.raw = load_csv(cfg.dataset);
  }
  if (d.raw.train.size() < 2) throw InvalidInput("dataset needs at least two training rows");
  if (d.raw.test.empty()) throw InvalidInput("dataset has no test rows");
  return d;
}

SimulationOptions simulation_options(const ExperimentConfig& cfg, const Standardizer& standardizer) {
  SimulationOptions o;
  o.k = cfg.k;
  o.history_window = cfg.history_window;
  o.standardizer = standardizer;
  return o;
}

double abs_pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double denom = std::sqrt(da.square().sum() * db.square().sum());
  if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::abs((da * db).sum() / denom);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ExperimentData data = load_experiment_data(cfg);
  ExperimentReport report;
  report.n_train = data.raw.train.size();
  report.n_test = data.raw.test.size();
  report.standardizer = cfg.standardize ? Standardizer::fit(data.raw.train.values()) : Standardizer{};

  LisalConfig lcfg = cfg.lisal;
  lcfg.seed = cfg.seed;
  report.fit = lisal_fit(report.standardizer.apply(data.raw.train), lcfg);

  const auto start = std::chrono::steady_clock::now();
  const SimulationOptions opts = simulation_options(cfg, report.standardizer);
  report.stationary =
      simulate_sensing(stationary_model(report.fit.trace.stationary), data.raw.train, data.raw.test, opts);
  for (const LisalIteration& it : report.fit.trace.iterations) {
    IterationReport ir;
    ir.iteration = it.iteration;
    ir.latent_locations = it.model.latent.front().size();
    ir.objective = it.objective;
    ir.sim = simulate_sensing(it.model, data.raw.train, data.raw.test, opts);
    if (data.synth) {
      const Eigen::VectorXd learned = latent_predict_mean(it.model.latent.front(), data.raw.train.points());
      const Eigen::Map<const Eigen::VectorXd> truth(data.synth->train_latent.data(),
                                                    static_cast<Eigen::Index>(data.synth->train_latent.size()));
      const double r = abs_pearson(learned, truth);
      if (std::isfinite(r)) ir.recovery = r;
    }
    report.iterations.push_back(std::move(ir));
  }
  report.simulate_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

json config_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = c.dataset;
  j["model"] = std::string(to_string(c.lisal.kind));
  j["kernel"] = std::string(to_string(c.lisal.family));
  j["m1"] = c.lisal.m1;
  j["m2"] = c.lisal.m2;
  j["c"] = c.lisal.c;
  j["restarts"] = c.lisal.restarts;
  j["perturbation_sd"] = c.lisal.perturbation_sd;
  j["value_perturbation_sd"] = c.lisal.value_perturbation_sd;
  j["k"] = c.k;
  j["history_window"] = c.history_window;
  j["standardize"] = c.standardize;
  j["seed"] = c.seed;
  if (c.dataset.empty()) {
    const SynthSpec& s = c.synth;
    j["synth"] = {{"nx", s.nx},
                  {"ny", s.ny},
                  {"nt", s.nt},
                  {"kind", std::string(to_string(s.kind))},
                  {"profile", std::string(to_string(s.profile))},
                  {"kernel", std::string(to_string(s.family))},
                  {"contrast", s.contrast},
                  {"ramp_width", s.ramp_width},
                  {"sigma_f", s.sigma_f},
                  {"noise_sd", s.noise_sd},
                  {"lx", s.lx},
                  {"ly", s.ly},
                  {"lt", s.lt},
                  {"latent_length", s.latent_length}};
  }
  return j;
}

json sim_json(const SimulationReport& s) {
  return {{"mean_rmse", s.mean_rmse},
          {"timesteps", s.timesteps},
          {"rmse", s.rmse},
          {"picks", s.picks},
          {"clamped_variances", s.clamped_variances}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void write_simulation(const std::filesystem::path& dir, const SimulationReport& sim) {
  ensure_dir(dir);
  write_text(dir / "simulation.json", sim_json(sim).dump(2) + "\n");
  std::ostringstream csv;
  csv << std::setprecision(17) << "t,rmse\n";
  for (std::size_t i = 0; i < sim.rmse.size(); ++i) csv << sim.timesteps[i] << ',' << sim.rmse[i] << '\n';
  write_text(dir / "rmse.csv", csv.str());
}

void write_reports(const ExperimentConfig& cfg, const ExperimentReport& r) {
  const std::filesystem::path dir(cfg.out_dir);
  ensure_dir(dir);
  const LisalTrace& trace = r.fit.trace;

  json iters = json::array();
  for (const IterationReport& it : r.iterations) {
    json j = sim_json(it.sim);
    j["iteration"] = it.iteration;
    j["latent_locations"] = it.latent_locations;
    j["objective"] = it.objective;
    j["selected"] = trace.iterations[it.iteration].selected;
    j["recovery"] = it.recovery ? json(*it.recovery) : json(nullptr);
    iters.push_back(j);
  }
  const double final_rmse = r.iterations.back().sim.mean_rmse;
  json report;
  report["config"] = config_json(cfg);
  report["n_train"] = r.n_train;
  report["n_test"] = r.n_test;
  report["standardizer"] = {{"mean", r.standardizer.mean}, {"sd", r.standardizer.sd}};
  json stat = sim_json(r.stationary);
  stat["objective"] = trace.stationary_objective;
  report["stationary"] = stat;
  report["iterations"] = iters;
  report["final"] = {{"mean_rmse", final_rmse},
                     {"offline_mean_rmse", r.iterations.front().sim.mean_rmse},
                     {"stationary_mean_rmse", r.stationary.mean_rmse},
                     {"improvement_over_stationary", 1.0 - final_rmse / r.stationary.mean_rmse}};
  write_text(dir / "report.json", report.dump(2) + "\n");

  std::ostringstream csv;
  csv << std::setprecision(17) << "model,iteration,t,rmse\n";
  for (std::size_t i = 0; i < r.stationary.rmse.size(); ++i) {
    csv << "stationary,," << r.stationary.timesteps[i] << ',' << r.stationary.rmse[i] << '\n';
  }
  for (const IterationReport& it : r.iterations) {
    for (std::size_t i = 0; i < it.sim.rmse.size(); ++i) {
      csv << to_string(cfg.lisal.kind) << ',' << it.iteration << ',' << it.sim.timesteps[i] << ','
          << it.sim.rmse[i] << '\n';
    }
  }
  write_text(dir / "rmse.csv", csv.str());

  json timings;
  timings["stationary_fit_seconds"] = trace.stationary_seconds;
  json per_iter = json::array();
  for (const LisalIteration& it : trace.iterations) per_iter.push_back(it.seconds);
  timings["iteration_seconds"] = per_iter;
  timings["simulate_seconds"] = r.simulate_seconds;
  write_text(dir / "timings.json", timings.dump(2) + "\n");

  save_snapshot(dir / "model.json", ModelSnapshot{r.fit.model, r.standardizer});
}

}  // namespace lisal::harness
