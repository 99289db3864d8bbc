#include "popkit/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "popkit/diagnostics.hpp"
#include "popkit/gibbs.hpp"
#include "popkit/io.hpp"
#include "popkit/simulate.hpp"

namespace popkit::cli {

namespace {

namespace fs = std::filesystem;

int thread_cap_from_env() {
  const char* env = std::getenv("POPKIT_THREADS");
  if (!env) return 0;
  const int v = std::atoi(env);
  return v > 0 ? v : 0;
}

std::vector<double> band_grid(const PatientRecord& pat) {
  const double lo = pat.times.front();
  const double hi = pat.times.back();
  if (lo == hi) return {lo};
  std::vector<double> grid(50);
  for (int j = 0; j < 50; ++j) grid[j] = lo + (hi - lo) * j / 49.0;
  return grid;
}

nlohmann::json config_json(const SamplerConfig& cfg, const Priors& priors) {
  const auto kernel_name = [](KernelKind k) {
    switch (k) {
      case KernelKind::metropolis: return "metropolis";
      case KernelKind::mala: return "mala";
      case KernelKind::ess: return "ess";
    }
    return "metropolis";
  };
  return nlohmann::json{{"iterations", cfg.n_iterations},
                        {"burn_in", cfg.burn_in},
                        {"thin", cfg.thin},
                        {"seed", cfg.seed},
                        {"theta_kernel", kernel_name(cfg.theta_kernel.kind)},
                        {"theta_step", cfg.theta_kernel.step},
                        {"adapt", cfg.theta_kernel.adapt_during_burnin},
                        {"zeta_kernel", kernel_name(cfg.zeta_kernel)},
                        {"rho2", priors.zeta_prior_variance},
                        {"parallel", cfg.parallel_patients}};
}

}  // namespace

int cmd_fit(const std::string& data_path, const std::string& config_path,
            const std::string& out_dir) {
  try {
    const io::IngestReport ingest = io::read_dataset_csv(data_path);
    for (const auto& w : ingest.warnings) std::cerr << "popkit: warning: " << w << '\n';

    io::RunConfig run = io::parse_run_config(config_path);
    run.sampler.max_threads = thread_cap_from_env();

    fs::create_directories(out_dir);
    const PosteriorDraws draws = run_chain(ingest.dataset, run.priors, run.sampler);

    io::write_draws_csv((fs::path(out_dir) / "draws.csv").string(), draws);
    const auto summaries = summarize(draws);
    io::write_summary_csv((fs::path(out_dir) / "summary.csv").string(), summaries);
    for (int i = 0; i < ingest.dataset.n_patients(); ++i) {
      const PatientRecord& pat = ingest.dataset.patients[i];
      const auto grid = band_grid(pat);
      const PredictiveBand band = predictive_band(draws, i, grid, pat.dose);
      io::write_band_csv((fs::path(out_dir) / ("bands_patient_" + pat.id + ".csv")).string(),
                         band);
    }

    // Confounding diagnostic: shared zeta against the population log-volume.
    std::vector<double> zeta_series, alpha2_series;
    for (const auto& s : draws.draws) {
      zeta_series.push_back(s.zeta);
      alpha2_series.push_back(s.alpha[1]);
    }
    const double zeta_alpha2_corr = correlation(zeta_series, alpha2_series);
    if (std::abs(zeta_alpha2_corr) > 0.95)
      std::cerr << "popkit: warning: |corr(zeta, alpha2)| = " << std::abs(zeta_alpha2_corr)
                << " > 0.95; bioavailability and volume are nearly confounded\n";

    nlohmann::json manifest{
        {"seed", run.sampler.seed},
        {"config", config_json(run.sampler, run.priors)},
        {"data_file", data_path},
        {"n_patients", ingest.dataset.n_patients()},
        {"n_observations", ingest.dataset.total_observations()},
        {"dropped_rows", ingest.dropped_rows},
        {"n_draws", draws.draws.size()},
        {"acceptance",
         {{"theta1", draws.acceptance.theta[0].rate()},
          {"theta2", draws.acceptance.theta[1].rate()},
          {"theta3", draws.acceptance.theta[2].rate()},
          {"zeta", draws.acceptance.zeta.rate()},
          {"zeta_ess_mean_shrinks", draws.acceptance.zeta_ess_mean_shrinks()},
          {"ridge", draws.acceptance.ridge.rate()}}},
        {"zeta_alpha2_correlation", zeta_alpha2_corr},
        {"warnings", ingest.warnings}};
    std::ofstream mf(fs::path(out_dir) / "run_manifest.json");
    mf << manifest.dump(2) << '\n';
    return kExitOk;
  } catch (const DegenerateConditionalError& e) {
    std::cerr << "popkit: error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "popkit: error: " << e.what() << '\n';
    return kExitBadInput;
  }
}

int cmd_simulate(const std::string& truth_config_path, const std::string& out_dir) {
  try {
    const io::SimulateConfig cfg = io::parse_truth_config(truth_config_path);
    const SimulatedData sim = simulate_dataset(cfg.truth, cfg.n_patients, cfg.seed);
    fs::create_directories(out_dir);
    io::write_dataset_csv((fs::path(out_dir) / "data.csv").string(), sim.dataset);
    io::write_truth_csv((fs::path(out_dir) / "truth.csv").string(), cfg.truth, sim);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "popkit: error: " << e.what() << '\n';
    return kExitBadInput;
  }
}

int cmd_diagnose(const std::string& draws_path, const std::string& out_dir,
                 const std::string& data_path) {
  try {
    const PosteriorDraws draws = io::read_draws_csv(draws_path);
    const auto summaries = summarize(draws);  // rejects < 10 draws
    fs::create_directories(out_dir);
    io::write_summary_csv((fs::path(out_dir) / "summary.csv").string(), summaries);

    if (!data_path.empty()) {
      const io::IngestReport ingest = io::read_dataset_csv(data_path);
      if (ingest.dataset.n_patients() != static_cast<int>(draws.patient_ids.size()))
        throw io::ParseError("dataset and draws disagree on the number of patients");
      for (int i = 0; i < ingest.dataset.n_patients(); ++i) {
        const PatientRecord& pat = ingest.dataset.patients[i];
        if (pat.id != draws.patient_ids[i])
          throw io::ParseError("dataset and draws disagree on patient ids");
        const auto grid = band_grid(pat);
        const PredictiveBand band = predictive_band(draws, i, grid, pat.dose);
        io::write_band_csv((fs::path(out_dir) / ("bands_patient_" + pat.id + ".csv")).string(),
                           band);
      }
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "popkit: error: " << e.what() << '\n';
    return kExitBadInput;
  }
}

}  // namespace popkit::cli
