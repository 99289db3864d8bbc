#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "popkit/cli.hpp"
#include "popkit/io.hpp"
#include "popkit/pk_math.hpp"
#include "popkit/rng.hpp"
#include "popkit/simulate.hpp"

using namespace popkit;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("popkit_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_SUITE("io_cli") {

TEST_CASE("doubles print in shortest round-trip form") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(320.0) == "320");
  CHECK(io::parse_double(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);

  RngStream rng(701);
  for (int rep = 0; rep < 10000; ++rep) {
    double x = std::exp(40.0 * (rng.uniform() - 0.5)) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    CHECK(io::parse_double(io::format_double(x)) == x);
  }
  CHECK_THROWS_AS(io::parse_double("12,5"), io::ParseError);
  CHECK_THROWS_AS(io::parse_double(""), io::ParseError);
}

TEST_CASE("dataset csv round trip is a fixed point") {
  const fs::path dir = fresh_dir("dataset_roundtrip");
  const SimulatedData sim = simulate_dataset(reference_truth(), 5, 31);
  io::write_dataset_csv((dir / "a.csv").string(), sim.dataset);
  const io::IngestReport report = io::read_dataset_csv((dir / "a.csv").string());
  CHECK(report.dropped_rows == 0);
  io::write_dataset_csv((dir / "b.csv").string(), report.dataset);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
}

TEST_CASE("ingestion drops unusable rows and reports structural problems") {
  const fs::path dir = fresh_dir("ingest");

  spit(dir / "ok.csv",
       "patient_id,dose_mg,time_hr,conc\n"
       "A,100,0,5.0\n"      // t = 0: dropped
       "A,100,1.0,5.0\n"
       "A,100,2.0,-1.0\n"   // conc <= 0: dropped
       "A,100,3.0,2.5\n"
       "B,200,1.0,4.0\n"
       "B,200,2.0,3.0\n");
  const io::IngestReport r = io::read_dataset_csv((dir / "ok.csv").string());
  CHECK(r.dropped_rows == 2);
  CHECK(r.warnings.size() == 2);
  CHECK(r.dataset.n_patients() == 2);
  CHECK(r.dataset.patients[0].n_obs() == 2);
  CHECK(r.dataset.patients[0].log_conc[0] == doctest::Approx(std::log(5.0)));

  spit(dir / "all_dropped.csv",
       "patient_id,dose_mg,time_hr,conc\nA,100,0,5.0\nB,200,1.0,4.0\n");
  CHECK_THROWS_AS(io::read_dataset_csv((dir / "all_dropped.csv").string()), io::ParseError);

  spit(dir / "bad_header.csv", "id,dose,time,conc\nA,100,1,5\n");
  CHECK_THROWS_AS(io::read_dataset_csv((dir / "bad_header.csv").string()), io::ParseError);

  spit(dir / "dose_conflict.csv",
       "patient_id,dose_mg,time_hr,conc\nA,100,1.0,5.0\nA,150,2.0,4.0\n");
  CHECK_THROWS_AS(io::read_dataset_csv((dir / "dose_conflict.csv").string()), io::ParseError);

  spit(dir / "dup_time.csv",
       "patient_id,dose_mg,time_hr,conc\nA,100,1.0,5.0\nA,100,1.0,4.0\n");
  CHECK_THROWS_AS(io::read_dataset_csv((dir / "dup_time.csv").string()), io::ParseError);

  spit(dir / "bad_number.csv", "patient_id,dose_mg,time_hr,conc\nA,100,abc,5.0\n");
  CHECK_THROWS_AS(io::read_dataset_csv((dir / "bad_number.csv").string()), io::ParseError);
}

TEST_CASE("run configuration parsing") {
  const fs::path dir = fresh_dir("runcfg");

  spit(dir / "empty.cfg", "# all defaults\n");
  const io::RunConfig defaults = io::parse_run_config((dir / "empty.cfg").string());
  CHECK(defaults.sampler.n_iterations == 10000);
  CHECK(defaults.sampler.burn_in == 5000);
  CHECK(defaults.sampler.thin == 1);
  CHECK(defaults.sampler.zeta_kernel == KernelKind::ess);
  CHECK(defaults.priors.zeta_prior_variance == 10.0);

  spit(dir / "full.cfg",
       "iterations = 2000\nburn_in = 500\nthin = 4\nseed = 99\n"
       "theta_kernel = mala\ntheta_step = 0.05\nzeta_kernel = metropolis\n"
       "rho2 = 4.0\nparallel = true\nadapt = false\n");
  const io::RunConfig full = io::parse_run_config((dir / "full.cfg").string());
  CHECK(full.sampler.n_iterations == 2000);
  CHECK(full.sampler.burn_in == 500);
  CHECK(full.sampler.thin == 4);
  CHECK(full.sampler.seed == 99);
  CHECK(full.sampler.theta_kernel.kind == KernelKind::mala);
  CHECK(full.sampler.theta_kernel.step == 0.05);
  CHECK(full.sampler.theta_kernel.target_acceptance == 0.57);
  CHECK(full.sampler.theta_kernel.adapt_during_burnin == false);
  CHECK(full.sampler.zeta_kernel == KernelKind::metropolis);
  CHECK(full.priors.zeta_prior_variance == 4.0);
  CHECK(full.sampler.parallel_patients == true);

  spit(dir / "unknown.cfg", "iterations = 100\nbogus_key = 1\n");
  CHECK_THROWS_AS(io::parse_run_config((dir / "unknown.cfg").string()), io::ParseError);
  spit(dir / "bad.cfg", "iterations = ten\n");
  CHECK_THROWS_AS(io::parse_run_config((dir / "bad.cfg").string()), io::ParseError);
  spit(dir / "invalid.cfg", "iterations = 100\nburn_in = 100\n");
  CHECK_THROWS_AS(io::parse_run_config((dir / "invalid.cfg").string()), io::ParseError);
}

TEST_CASE("truth configuration parsing defaults to the reference scenario") {
  const fs::path dir = fresh_dir("truthcfg");
  spit(dir / "empty.cfg", "");
  const io::SimulateConfig cfg = io::parse_truth_config((dir / "empty.cfg").string());
  CHECK(cfg.n_patients == 12);
  CHECK(cfg.truth.doses == std::vector<double>{320.0});
  CHECK(cfg.truth.design_times[0].size() == 10);

  spit(dir / "custom.cfg",
       "n_patients = 6\nseed = 4\ndose = 250\ntimes = 0.5, 1, 2, 4\n"
       "cl = 3.0\nv = 30\nka = 1.2\nf = 0.7\nomega2_1 = 0.02\nsigma2 = 0.005\n");
  const io::SimulateConfig custom = io::parse_truth_config((dir / "custom.cfg").string());
  CHECK(custom.n_patients == 6);
  CHECK(custom.truth.design_times[0] == std::vector<double>{0.5, 1.0, 2.0, 4.0});
  CHECK(custom.truth.alpha[0] == doctest::Approx(std::log(3.0)));
  CHECK(custom.truth.zeta == doctest::Approx(std::log(0.7 / 0.3)));

  spit(dir / "bad_f.cfg", "f = 1.0\n");
  CHECK_THROWS_AS(io::parse_truth_config((dir / "bad_f.cfg").string()), io::ParseError);
}

TEST_CASE("draws csv round trip preserves every value bitwise") {
  const fs::path dir = fresh_dir("drawsroundtrip");
  const SimulatedData sim = simulate_dataset(reference_truth(), 3, 21);
  SamplerConfig cfg;
  cfg.n_iterations = 60;
  cfg.burn_in = 20;
  cfg.thin = 2;
  cfg.seed = 13;
  const PosteriorDraws draws = run_chain(sim.dataset, Priors{}, cfg);
  REQUIRE(draws.draws.size() == 20);

  io::write_draws_csv((dir / "draws.csv").string(), draws);
  const PosteriorDraws back = io::read_draws_csv((dir / "draws.csv").string());
  REQUIRE(back.draws.size() == draws.draws.size());
  REQUIRE(back.patient_ids == draws.patient_ids);
  for (std::size_t s = 0; s < draws.draws.size(); ++s) {
    for (int i = 0; i < 3; ++i)
      for (int l = 0; l < 3; ++l)
        CHECK(back.draws[s].theta[i][l] == draws.draws[s].theta[i][l]);
    CHECK(back.draws[s].zeta == draws.draws[s].zeta);
    CHECK(back.draws[s].sigma2 == draws.draws[s].sigma2);
    for (int l = 0; l < 3; ++l) {
      CHECK(back.draws[s].alpha[l] == draws.draws[s].alpha[l]);
      CHECK(back.draws[s].omega2[l] == draws.draws[s].omega2[l]);
    }
  }
}

TEST_CASE("cmd_simulate writes the reference study deterministically") {
  const fs::path dir = fresh_dir("cmdsim");
  spit(dir / "truth.cfg", "seed = 11\n");
  CHECK(cli::cmd_simulate((dir / "truth.cfg").string(), (dir / "out1").string()) == 0);
  CHECK(cli::cmd_simulate((dir / "truth.cfg").string(), (dir / "out2").string()) == 0);

  const std::string data = slurp(dir / "out1" / "data.csv");
  CHECK(data == slurp(dir / "out2" / "data.csv"));
  CHECK(slurp(dir / "out1" / "truth.csv") == slurp(dir / "out2" / "truth.csv"));

  // header + 12 patients x 10 times
  int lines = 0;
  for (char c : data)
    if (c == '\n') ++lines;
  CHECK(lines == 121);

  spit(dir / "bad.cfg", "nonsense = 1\n");
  CHECK(cli::cmd_simulate((dir / "bad.cfg").string(), (dir / "out3").string()) == 2);
}

TEST_CASE("noise-free simulation writes concentrations that reproduce the curve") {
  const fs::path dir = fresh_dir("cmdsim_exact");
  spit(dir / "truth.cfg", "sigma2 = 0\nomega2_1 = 0\nomega2_2 = 0\nomega2_3 = 0\nseed = 2\n");
  REQUIRE(cli::cmd_simulate((dir / "truth.cfg").string(), (dir / "out").string()) == 0);

  const io::IngestReport r = io::read_dataset_csv((dir / "out" / "data.csv").string());
  const TruthSpec truth = reference_truth();
  const ModelParams p{truth.alpha[0], truth.alpha[1], truth.alpha[2], truth.zeta};
  for (const auto& pat : r.dataset.patients)
    for (std::size_t j = 0; j < pat.n_obs(); ++j) {
      const double f = log_mean(p, pat.dose, pat.times[j]);
      CHECK(std::abs(pat.log_conc[j] - f) < 1e-12);
    }
}

TEST_CASE("cmd_fit end to end: outputs, determinism, ingestion rules") {
  const fs::path dir = fresh_dir("cmdfit");
  spit(dir / "truth.cfg", "n_patients = 4\nseed = 17\n");
  REQUIRE(cli::cmd_simulate((dir / "truth.cfg").string(), (dir / "sim").string()) == 0);

  spit(dir / "run.cfg", "iterations = 300\nburn_in = 100\nthin = 2\nseed = 23\n");
  CHECK(cli::cmd_fit((dir / "sim" / "data.csv").string(), (dir / "run.cfg").string(),
                     (dir / "fit1").string()) == 0);
  CHECK(cli::cmd_fit((dir / "sim" / "data.csv").string(), (dir / "run.cfg").string(),
                     (dir / "fit2").string()) == 0);

  const std::string draws1 = slurp(dir / "fit1" / "draws.csv");
  CHECK(draws1 == slurp(dir / "fit2" / "draws.csv"));

  int lines = 0;
  for (char c : draws1)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + (300 - 100) / 2);

  CHECK(fs::exists(dir / "fit1" / "summary.csv"));
  CHECK(fs::exists(dir / "fit1" / "bands_patient_P01.csv"));
  CHECK(fs::exists(dir / "fit1" / "bands_patient_P04.csv"));

  const std::string manifest = slurp(dir / "fit1" / "run_manifest.json");
  CHECK(manifest.find("\"seed\": 23") != std::string::npos);
  CHECK(manifest.find("\"theta1\"") != std::string::npos);
  CHECK(manifest.find("zeta_alpha2_correlation") != std::string::npos);
  CHECK(manifest.find("\"dropped_rows\": 0") != std::string::npos);

  // a t = 0 row is dropped with a warning but the fit still succeeds
  std::string data = slurp(dir / "sim" / "data.csv");
  data += "P01,320,0,5.0\n";
  spit(dir / "with_t0.csv", data);
  CHECK(cli::cmd_fit((dir / "with_t0.csv").string(), (dir / "run.cfg").string(),
                     (dir / "fit3").string()) == 0);

  // a patient whose every row is unusable is malformed input
  spit(dir / "empty_patient.csv", slurp(dir / "sim" / "data.csv") + "P99,100,0,5.0\n");
  CHECK(cli::cmd_fit((dir / "empty_patient.csv").string(), (dir / "run.cfg").string(),
                     (dir / "fit4").string()) == 2);

  CHECK(cli::cmd_fit((dir / "missing.csv").string(), (dir / "run.cfg").string(),
                     (dir / "fit5").string()) == 2);
  spit(dir / "bad_run.cfg", "iterations = -5\n");
  CHECK(cli::cmd_fit((dir / "sim" / "data.csv").string(), (dir / "bad_run.cfg").string(),
                     (dir / "fit6").string()) == 2);
}

TEST_CASE("cmd_diagnose reproduces the fit summary without refitting") {
  const fs::path dir = fresh_dir("cmddiag");
  spit(dir / "truth.cfg", "n_patients = 4\nseed = 19\n");
  REQUIRE(cli::cmd_simulate((dir / "truth.cfg").string(), (dir / "sim").string()) == 0);
  spit(dir / "run.cfg", "iterations = 200\nburn_in = 100\nseed = 29\n");
  REQUIRE(cli::cmd_fit((dir / "sim" / "data.csv").string(), (dir / "run.cfg").string(),
                       (dir / "fit").string()) == 0);

  CHECK(cli::cmd_diagnose((dir / "fit" / "draws.csv").string(), (dir / "diag").string()) == 0);
  CHECK(slurp(dir / "fit" / "summary.csv") == slurp(dir / "diag" / "summary.csv"));

  // ESS column populated for every row
  std::istringstream summary(slurp(dir / "diag" / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  CHECK(line.find(",ess,") != std::string::npos);
  int rows = 0;
  while (std::getline(summary, line)) {
    ++rows;
    int commas = 0;
    for (char ch : line)
      if (ch == ',') ++commas;
    CHECK(commas == 11);
  }
  CHECK(rows == 8);

  // bands require the dataset
  CHECK(!fs::exists(dir / "diag" / "bands_patient_P01.csv"));
  CHECK(cli::cmd_diagnose((dir / "fit" / "draws.csv").string(), (dir / "diag2").string(),
                          (dir / "sim" / "data.csv").string()) == 0);
  CHECK(fs::exists(dir / "diag2" / "bands_patient_P01.csv"));

  // truncated draws file: fewer than 10 rows is an error
  {
    std::istringstream full(slurp(dir / "fit" / "draws.csv"));
    std::ostringstream head;
    for (int i = 0; i < 6 && std::getline(full, line); ++i) head << line << '\n';
    spit(dir / "short.csv", head.str());
  }
  CHECK(cli::cmd_diagnose((dir / "short.csv").string(), (dir / "diag3").string()) == 2);

  // schema mismatch
  spit(dir / "bad_schema.csv", "iteration,foo,bar\n1,2,3\n");
  CHECK(cli::cmd_diagnose((dir / "bad_schema.csv").string(), (dir / "diag4").string()) == 2);
}

}  // TEST_SUITE
