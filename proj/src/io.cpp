#include "popkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace popkit::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  return out;
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  std::int64_t v = 0;
  const auto* begin = text.data();
  const auto* end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("invalid integer for " + what + ": '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto* begin = text.data();
  const auto* end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("invalid unsigned integer for " + what + ": '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ParseError("invalid boolean for " + what + ": '" + text + "'");
}

KernelKind parse_kernel(const std::string& text, const std::string& what) {
  if (text == "metropolis") return KernelKind::metropolis;
  if (text == "mala") return KernelKind::mala;
  if (text == "ess") return KernelKind::ess;
  throw ParseError("invalid kernel for " + what + ": '" + text + "'");
}

// key=value lines; blanks and '#' comments allowed
std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in = open_input(path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError(path + ":" + std::to_string(line_no) + ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw ParseError(path + ":" + std::to_string(line_no) + ": duplicate key " + key);
  }
  return kv;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto* begin = text.data();
  const auto* end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("invalid number: '" + text + "'");
  return v;
}

IngestReport read_dataset_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  const auto header = split(line, ',');
  const std::vector<std::string> expected{"patient_id", "dose_mg", "time_hr", "conc"};
  if (header != expected)
    throw ParseError(path + ": header must be 'patient_id,dose_mg,time_hr,conc'");

  struct Raw {
    double dose;
    std::vector<std::pair<double, double>> points;  // (time, log conc)
  };
  std::vector<std::string> order;
  std::map<std::string, Raw> by_patient;
  IngestReport report;

  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4)
      throw ParseError(path + ": row " + std::to_string(row) + ": expected 4 fields");
    const std::string& id = fields[0];
    if (id.empty()) throw ParseError(path + ": row " + std::to_string(row) + ": empty patient id");
    double dose, t, conc;
    try {
      dose = parse_double(fields[1]);
      t = parse_double(fields[2]);
      conc = parse_double(fields[3]);
    } catch (const ParseError& e) {
      throw ParseError(path + ": row " + std::to_string(row) + ": " + e.what());
    }
    if (!(dose > 0.0))
      throw ParseError(path + ": row " + std::to_string(row) + ": dose must be positive");

    auto [it, inserted] = by_patient.try_emplace(id, Raw{dose, {}});
    if (inserted) order.push_back(id);
    if (it->second.dose != dose)
      throw ParseError(path + ": row " + std::to_string(row) + ": dose differs from earlier rows of patient " + id);

    if (!(t > 0.0) || !(conc > 0.0)) {
      ++report.dropped_rows;
      report.warnings.push_back("row " + std::to_string(row) + ": dropped (patient " + id +
                                ", non-positive time or concentration)");
      continue;
    }
    it->second.points.emplace_back(t, std::log(conc));
  }

  for (const auto& id : order) {
    Raw& raw = by_patient[id];
    if (raw.points.empty())
      throw ParseError(path + ": all observations of patient " + id + " were dropped");
    std::sort(raw.points.begin(), raw.points.end());
    PatientRecord pat;
    pat.id = id;
    pat.dose = raw.dose;
    for (std::size_t j = 0; j < raw.points.size(); ++j) {
      if (j > 0 && raw.points[j].first == raw.points[j - 1].first)
        throw ParseError(path + ": patient " + id + ": duplicate time " +
                         format_double(raw.points[j].first));
      pat.times.push_back(raw.points[j].first);
      pat.log_conc.push_back(raw.points[j].second);
    }
    report.dataset.patients.push_back(std::move(pat));
  }
  if (report.dataset.patients.empty()) throw ParseError(path + ": no usable observations");
  report.dataset.validate();
  return report;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out = open_output(path);
  out << "patient_id,dose_mg,time_hr,conc\n";
  for (const auto& pat : data.patients)
    for (std::size_t j = 0; j < pat.n_obs(); ++j)
      out << pat.id << ',' << format_double(pat.dose) << ',' << format_double(pat.times[j])
          << ',' << format_double(std::exp(pat.log_conc[j])) << '\n';
}

RunConfig parse_run_config(const std::string& path) {
  RunConfig cfg;
  for (const auto& [key, value] : read_key_values(path)) {
    if (key == "iterations")
      cfg.sampler.n_iterations = static_cast<int>(parse_int(value, key));
    else if (key == "burn_in")
      cfg.sampler.burn_in = static_cast<int>(parse_int(value, key));
    else if (key == "thin")
      cfg.sampler.thin = static_cast<int>(parse_int(value, key));
    else if (key == "seed")
      cfg.sampler.seed = parse_u64(value, key);
    else if (key == "theta_kernel")
      cfg.sampler.theta_kernel.kind = parse_kernel(value, key);
    else if (key == "theta_step")
      cfg.sampler.theta_kernel.step = parse_double(value);
    else if (key == "zeta_kernel")
      cfg.sampler.zeta_kernel = parse_kernel(value, key);
    else if (key == "rho2")
      cfg.priors.zeta_prior_variance = parse_double(value);
    else if (key == "parallel")
      cfg.sampler.parallel_patients = parse_bool(value, key);
    else if (key == "adapt")
      cfg.sampler.theta_kernel.adapt_during_burnin = parse_bool(value, key);
    else
      throw ParseError(path + ": unknown key '" + key + "'");
  }
  if (cfg.sampler.theta_kernel.kind == KernelKind::mala)
    cfg.sampler.theta_kernel.target_acceptance = 0.57;
  try {
    cfg.sampler.validate();
    cfg.priors.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
  return cfg;
}

SimulateConfig parse_truth_config(const std::string& path) {
  SimulateConfig cfg;
  for (const auto& [key, value] : read_key_values(path)) {
    if (key == "n_patients")
      cfg.n_patients = static_cast<int>(parse_int(value, key));
    else if (key == "seed")
      cfg.seed = parse_u64(value, key);
    else if (key == "dose")
      cfg.truth.doses = {parse_double(value)};
    else if (key == "times") {
      cfg.truth.design_times = {{}};
      for (const auto& tok : split(value, ',')) cfg.truth.design_times[0].push_back(parse_double(tok));
    } else if (key == "cl") {
      const double v = parse_double(value);
      if (!(v > 0.0)) throw ParseError(path + ": cl must be positive");
      cfg.truth.alpha[0] = std::log(v);
    } else if (key == "v") {
      const double v = parse_double(value);
      if (!(v > 0.0)) throw ParseError(path + ": v must be positive");
      cfg.truth.alpha[1] = std::log(v);
    } else if (key == "ka") {
      const double v = parse_double(value);
      if (!(v > 0.0)) throw ParseError(path + ": ka must be positive");
      cfg.truth.alpha[2] = std::log(v);
    } else if (key == "f") {
      const double v = parse_double(value);
      if (!(v > 0.0 && v < 1.0)) throw ParseError(path + ": f must lie strictly inside (0,1)");
      cfg.truth.zeta = std::log(v) - std::log1p(-v);
    } else if (key == "omega2_1")
      cfg.truth.omega2[0] = parse_double(value);
    else if (key == "omega2_2")
      cfg.truth.omega2[1] = parse_double(value);
    else if (key == "omega2_3")
      cfg.truth.omega2[2] = parse_double(value);
    else if (key == "sigma2")
      cfg.truth.sigma2 = parse_double(value);
    else
      throw ParseError(path + ": unknown key '" + key + "'");
  }
  try {
    cfg.truth.validate(cfg.n_patients);
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
  return cfg;
}

void write_draws_csv(const std::string& path, const PosteriorDraws& draws) {
  std::ofstream out = open_output(path);
  out << "iteration";
  for (int l = 1; l <= 3; ++l)
    for (const auto& id : draws.patient_ids) out << ",theta" << l << '_' << id;
  out << ",zeta,sigma2,alpha1,alpha2,alpha3,omega2_1,omega2_2,omega2_3\n";

  const int burn_in = draws.config.burn_in;
  const int thin = draws.config.thin;
  for (std::size_t s = 0; s < draws.draws.size(); ++s) {
    const ChainState& st = draws.draws[s];
    out << burn_in + static_cast<int>(s + 1) * thin;
    for (int l = 0; l < 3; ++l)
      for (const auto& row : st.theta) out << ',' << format_double(row[l]);
    out << ',' << format_double(st.zeta) << ',' << format_double(st.sigma2);
    for (double a : st.alpha) out << ',' << format_double(a);
    for (double w : st.omega2) out << ',' << format_double(w);
    out << '\n';
  }
}

PosteriorDraws read_draws_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  const auto header = split(line, ',');
  if (header.empty() || header[0] != "iteration")
    throw ParseError(path + ": first column must be 'iteration'");

  std::vector<std::string> ids;
  std::size_t col = 1;
  while (col < header.size() && header[col].rfind("theta1_", 0) == 0)
    ids.push_back(header[col++].substr(7));
  const std::size_t n = ids.size();
  if (n == 0) throw ParseError(path + ": no theta1_* columns");
  for (int l = 2; l <= 3; ++l)
    for (std::size_t i = 0; i < n; ++i, ++col)
      if (col >= header.size() ||
          header[col] != "theta" + std::to_string(l) + "_" + ids[i])
        throw ParseError(path + ": theta" + std::to_string(l) + " columns out of order");
  const std::vector<std::string> tail{"zeta",     "sigma2",   "alpha1",  "alpha2",
                                      "alpha3",   "omega2_1", "omega2_2", "omega2_3"};
  for (const auto& name : tail)
    if (col >= header.size() || header[col++] != name)
      throw ParseError(path + ": missing column " + name);
  if (col != header.size()) throw ParseError(path + ": unexpected trailing columns");

  PosteriorDraws draws;
  draws.patient_ids = ids;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size())
      throw ParseError(path + ": row " + std::to_string(row) + ": wrong field count");
    ChainState st;
    st.theta.resize(n);
    std::size_t f = 1;
    try {
      for (int l = 0; l < 3; ++l)
        for (std::size_t i = 0; i < n; ++i) st.theta[i][l] = parse_double(fields[f++]);
      st.zeta = parse_double(fields[f++]);
      st.sigma2 = parse_double(fields[f++]);
      for (int l = 0; l < 3; ++l) st.alpha[l] = parse_double(fields[f++]);
      for (int l = 0; l < 3; ++l) st.omega2[l] = parse_double(fields[f++]);
    } catch (const ParseError& e) {
      throw ParseError(path + ": row " + std::to_string(row) + ": " + e.what());
    }
    draws.draws.push_back(std::move(st));
  }
  return draws;
}

void write_summary_csv(const std::string& path, const std::vector<ParameterSummary>& summaries) {
  std::ofstream out = open_output(path);
  out << "name,mean,sd,q2.5,q50,q97.5,ess,natural_name,natural_mean,natural_q2.5,"
         "natural_q50,natural_q97.5\n";
  for (const auto& s : summaries) {
    out << s.name << ',' << format_double(s.mean) << ',' << format_double(s.sd) << ','
        << format_double(s.q025) << ',' << format_double(s.q500) << ',' << format_double(s.q975)
        << ',' << format_double(s.effective_sample_size);
    if (s.natural_scale) {
      const auto& nat = *s.natural_scale;
      out << ',' << nat.name << ',' << format_double(nat.mean) << ',' << format_double(nat.q025)
          << ',' << format_double(nat.q500) << ',' << format_double(nat.q975);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
}

void write_band_csv(const std::string& path, const PredictiveBand& band) {
  std::ofstream out = open_output(path);
  out << "time_hr,q2.5,q50,q97.5\n";
  for (std::size_t j = 0; j < band.time.size(); ++j)
    out << format_double(band.time[j]) << ',' << format_double(band.lower[j]) << ','
        << format_double(band.median[j]) << ',' << format_double(band.upper[j]) << '\n';
}

void write_truth_csv(const std::string& path, const TruthSpec& truth, const SimulatedData& sim) {
  std::ofstream out = open_output(path);
  out << "name,value\n";
  for (int l = 0; l < 3; ++l)
    out << "alpha" << l + 1 << ',' << format_double(truth.alpha[l]) << '\n';
  for (int l = 0; l < 3; ++l)
    out << "omega2_" << l + 1 << ',' << format_double(truth.omega2[l]) << '\n';
  out << "zeta," << format_double(truth.zeta) << '\n';
  out << "sigma2," << format_double(truth.sigma2) << '\n';
  for (std::size_t i = 0; i < sim.theta.size(); ++i)
    for (int l = 0; l < 3; ++l)
      out << "theta" << l + 1 << '_' << sim.dataset.patients[i].id << ','
          << format_double(sim.theta[i][l]) << '\n';
}

}  // namespace popkit::io
