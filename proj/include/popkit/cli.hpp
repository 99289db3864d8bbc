#ifndef POPKIT_CLI_HPP
#define POPKIT_CLI_HPP

#include <string>

namespace popkit::cli {

// Exit codes shared by the subcommands: 0 success, 2 malformed input,
// 3 degenerate-conditional abort.
constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitDegenerate = 3;

/**
 * Fits the model to a dataset CSV using a run configuration file and writes
 * draws.csv, summary.csv, bands_patient_<id>.csv and run_manifest.json into
 * out_dir. Patient-level parallelism is capped by the POPKIT_THREADS
 * environment variable (0 or unset = auto).
 */
int cmd_fit(const std::string& data_path, const std::string& config_path,
            const std::string& out_dir);

/// Simulates a dataset from a truth configuration file; writes data.csv and
/// truth.csv into out_dir.
int cmd_simulate(const std::string& truth_config_path, const std::string& out_dir);

/**
 * Recomputes summary.csv from an existing draws.csv without refitting.
 * Predictive bands additionally need doses and a time range, so they are
 * rebuilt only when the original dataset is supplied via data_path.
 */
int cmd_diagnose(const std::string& draws_path, const std::string& out_dir,
                 const std::string& data_path = "");

}  // namespace popkit::cli

#endif  // POPKIT_CLI_HPP
