#ifndef POPKIT_IO_HPP
#define POPKIT_IO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "popkit/diagnostics.hpp"
#include "popkit/gibbs.hpp"
#include "popkit/model.hpp"
#include "popkit/simulate.hpp"

namespace popkit::io {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

/**
 * Dataset CSV ingestion. Schema: header `patient_id,dose_mg,time_hr,conc`
 * with natural-scale concentrations; log transforms are applied on read.
 * Rows with time <= 0 or conc <= 0 are dropped with a per-row warning; a
 * patient whose rows are all dropped is a ParseError.
 */
struct IngestReport {
  Dataset dataset;
  int dropped_rows = 0;
  std::vector<std::string> warnings;
};
IngestReport read_dataset_csv(const std::string& path);

/// Writes the same schema, printing concentrations as exp(log_conc).
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Flat key=value run configuration (keys: iterations, burn_in, thin, seed,
/// theta_kernel, theta_step, zeta_kernel, rho2, parallel, adapt). Unknown
/// keys are a ParseError. Missing keys keep their defaults.
struct RunConfig {
  SamplerConfig sampler;
  Priors priors;
};
RunConfig parse_run_config(const std::string& path);

/// Flat key=value truth configuration for the simulator (keys: n_patients,
/// seed, dose, times, cl, v, ka, f, omega2_1..3, sigma2). Defaults to the
/// reference scenario.
struct SimulateConfig {
  TruthSpec truth = reference_truth();
  int n_patients = 12;
  std::uint64_t seed = 1;
};
SimulateConfig parse_truth_config(const std::string& path);

void write_draws_csv(const std::string& path, const PosteriorDraws& draws);
/// Rebuilds draws (states + patient ids) from a draws.csv; throws ParseError
/// on any schema mismatch.
PosteriorDraws read_draws_csv(const std::string& path);

void write_summary_csv(const std::string& path, const std::vector<ParameterSummary>& summaries);
void write_band_csv(const std::string& path, const PredictiveBand& band);
void write_truth_csv(const std::string& path, const TruthSpec& truth,
                     const SimulatedData& sim);

}  // namespace popkit::io

#endif  // POPKIT_IO_HPP
