#include <string>

#include <CLI11.hpp>

#include "popkit/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"popkit: Bayesian population pharmacokinetics for the one-compartment model"};
  app.require_subcommand(1);

  std::string data_path, config_path, out_dir, truth_path, draws_path, band_data_path;

  auto* fit = app.add_subcommand("fit", "Fit the model to a concentration-time dataset");
  fit->add_option("data", data_path, "Dataset CSV (patient_id,dose_mg,time_hr,conc)")
      ->required();
  fit->add_option("config", config_path, "Run configuration (key=value)")->required();
  fit->add_option("out", out_dir, "Output directory")->required();

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("truth", truth_path, "Truth configuration (key=value)")->required();
  sim->add_option("out", out_dir, "Output directory")->required();

  auto* diag = app.add_subcommand("diagnose", "Recompute summaries from saved draws");
  diag->add_option("draws", draws_path, "draws.csv produced by fit")->required();
  diag->add_option("out", out_dir, "Output directory")->required();
  diag->add_option("--data", band_data_path,
                   "Original dataset CSV; enables predictive band output");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) return popkit::cli::cmd_fit(data_path, config_path, out_dir);
  if (sim->parsed()) return popkit::cli::cmd_simulate(truth_path, out_dir);
  return popkit::cli::cmd_diagnose(draws_path, out_dir, band_data_path);
}
