#include "popkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "popkit/pk_math.hpp"

namespace popkit {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

std::vector<double> autocorrelations(std::span<const double> chain, int max_lag) {
  const std::size_t n = chain.size();
  if (n < 2) return {1.0};
  double mean = 0.0;
  for (double v : chain) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : chain) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);

  std::vector<double> rho{1.0};
  if (c0 == 0.0) return rho;
  for (int k = 1; k <= max_lag && k < static_cast<int>(n); ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) ck += (chain[t] - mean) * (chain[t + k] - mean);
    ck /= static_cast<double>(n);
    rho.push_back(ck / c0);
  }
  return rho;
}

namespace {

struct EssResult {
  double ess;
  std::vector<double> rho_used;  // lags 0..L
};

EssResult ess_with_truncation(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n == 0) return {0.0, {1.0}};
  if (n == 1) return {1.0, {1.0}};

  double mean = 0.0;
  for (double v : chain) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : chain) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (c0 == 0.0) return {1.0, {1.0}};  // constant chain

  const int max_lag = static_cast<int>(n / 4);
  std::vector<double> rho{1.0};
  double sum = 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) ck += (chain[t] - mean) * (chain[t + k] - mean);
    ck /= static_cast<double>(n);
    const double r = ck / c0;
    if (r <= 0.05) break;
    if (!std::isnan(prev) && prev + r < 0.0) {
      sum -= prev;
      rho.pop_back();
      break;
    }
    rho.push_back(r);
    sum += r;
    prev = r;
  }
  double ess = static_cast<double>(n) / (1.0 + 2.0 * sum);
  ess = std::clamp(ess, 1.0, static_cast<double>(n));
  return {ess, rho};
}

std::vector<double> extract(const PosteriorDraws& draws,
                            const std::function<double(const ChainState&)>& get) {
  std::vector<double> v;
  v.reserve(draws.draws.size());
  for (const auto& s : draws.draws) v.push_back(get(s));
  return v;
}

ParameterSummary summarize_series(const std::string& name, const std::vector<double>& series) {
  ParameterSummary s;
  s.name = name;
  const double n = static_cast<double>(series.size());
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= (n > 1.0 ? n - 1.0 : 1.0);
  s.mean = mean;
  s.sd = std::sqrt(var);
  s.q025 = quantile(series, 0.025);
  s.q500 = quantile(series, 0.5);
  s.q975 = quantile(series, 0.975);
  const EssResult e = ess_with_truncation(series);
  s.effective_sample_size = e.ess;
  s.autocorrelation = e.rho_used;
  return s;
}

NaturalSummary natural_from(const std::string& name, const ParameterSummary& model_scale,
                            const std::vector<double>& series,
                            const std::function<double(double)>& transform) {
  double mean = 0.0;
  for (double v : series) mean += transform(v);
  mean /= static_cast<double>(series.size());
  return NaturalSummary{name, mean, transform(model_scale.q025), transform(model_scale.q500),
                        transform(model_scale.q975)};
}

}  // namespace

double effective_sample_size(std::span<const double> chain) {
  return ess_with_truncation(chain).ess;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("correlation needs two equal-length series of size >= 2");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("rhat needs >= 2 chains");
  std::size_t len = chains.front().size();
  for (const auto& c : chains) len = std::min(len, c.size());
  if (len < 2) throw std::invalid_argument("rhat needs chains of length >= 2");

  const double m = static_cast<double>(chains.size());
  const double n = static_cast<double>(len);
  std::vector<double> means;
  double grand = 0.0;
  double within = 0.0;
  for (const auto& c : chains) {
    double mu = 0.0;
    for (std::size_t t = 0; t < len; ++t) mu += c[t];
    mu /= n;
    means.push_back(mu);
    grand += mu;
    double v = 0.0;
    for (std::size_t t = 0; t < len; ++t) v += (c[t] - mu) * (c[t] - mu);
    within += v / (n - 1.0);
  }
  grand /= m;
  within /= m;
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= n / (m - 1.0);
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

std::vector<ParameterSummary> summarize(const PosteriorDraws& draws) {
  if (draws.draws.size() < 10)
    throw std::invalid_argument("summarize requires >= 10 draws");

  std::vector<ParameterSummary> out;
  const auto exp_t = [](double x) { return std::exp(x); };
  const auto logistic_t = [](double x) { return logistic(x); };

  const char* natural_names[3] = {"CL_pop", "V_pop", "ka_pop"};
  for (int l = 0; l < 3; ++l) {
    const auto series = extract(draws, [l](const ChainState& s) { return s.alpha[l]; });
    ParameterSummary s = summarize_series("alpha" + std::to_string(l + 1), series);
    s.natural_scale = natural_from(natural_names[l], s, series, exp_t);
    out.push_back(std::move(s));
  }
  for (int l = 0; l < 3; ++l) {
    const auto series = extract(draws, [l](const ChainState& s) { return s.omega2[l]; });
    out.push_back(summarize_series("omega2_" + std::to_string(l + 1), series));
  }
  {
    const auto series = extract(draws, [](const ChainState& s) { return s.sigma2; });
    out.push_back(summarize_series("sigma2", series));
  }
  {
    const auto series = extract(draws, [](const ChainState& s) { return s.zeta; });
    ParameterSummary s = summarize_series("zeta", series);
    s.natural_scale = natural_from("F", s, series, logistic_t);
    out.push_back(std::move(s));
  }
  return out;
}

PredictiveBand predictive_band(const PosteriorDraws& draws, int patient_index,
                               std::span<const double> time_grid, double dose) {
  if (draws.draws.empty()) throw std::invalid_argument("predictive_band requires >= 1 draw");
  if (!(dose > 0.0)) throw std::invalid_argument("predictive_band requires dose > 0");
  const int n_pat = draws.draws.front().n_patients();
  if (patient_index < -1 || patient_index >= n_pat)
    throw std::invalid_argument("patient index out of range");

  PredictiveBand band;
  band.time.assign(time_grid.begin(), time_grid.end());
  band.lower.reserve(time_grid.size());
  band.median.reserve(time_grid.size());
  band.upper.reserve(time_grid.size());

  std::vector<double> conc(draws.draws.size());
  for (double t : time_grid) {
    for (std::size_t s = 0; s < draws.draws.size(); ++s) {
      const ChainState& st = draws.draws[s];
      const ModelParams p =
          patient_index >= 0
              ? ModelParams{st.theta[patient_index][0], st.theta[patient_index][1],
                            st.theta[patient_index][2], st.zeta}
              : ModelParams{st.alpha[0], st.alpha[1], st.alpha[2], st.zeta};
      conc[s] = std::exp(log_mean(p, dose, t));
    }
    band.lower.push_back(quantile(conc, 0.025));
    band.median.push_back(quantile(conc, 0.5));
    band.upper.push_back(quantile(conc, 0.975));
  }
  return band;
}

}  // namespace popkit
