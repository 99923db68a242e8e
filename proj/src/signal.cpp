#include "csqpe/signal.hpp"

#include "csqpe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace csqpe {

void RuntimeLedger::record(double abs_time, std::int64_t shots) {
  t_total += static_cast<double>(shots) * abs_time;
  t_max = std::max(t_max, abs_time);
  ++n_distinct_times;
}

RuntimeLedger& RuntimeLedger::merge(const RuntimeLedger& other) {
  t_total += other.t_total;
  t_max = std::max(t_max, other.t_max);
  n_distinct_times += other.n_distinct_times;
  return *this;
}

void TimeSeries::write(std::ostream& out) const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# tau=%.17g\n", tau);
  out << buf;
  for (const auto& [t, v] : values) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%lld\n", static_cast<long long>(t), v.real(),
                  v.imag(), static_cast<long long>(shots_per_point));
    out << buf;
  }
}

TimeSeries TimeSeries::read(std::istream& in) {
  TimeSeries ts;
  std::string line;
  bool have_shots = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("tau=");
      if (pos != std::string::npos) ts.tau = std::stod(line.substr(pos + 4));
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    long long t = 0, shots = 0;
    std::string re, im;
    if (!(row >> t >> re >> im >> shots)) throw ConfigError("malformed time series row: " + line);
    ts.values[t] = cplx(std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr));
    if (have_shots && shots != ts.shots_per_point)
      throw ConfigError("time series rows disagree on shot count");
    ts.shots_per_point = shots;
    have_shots = true;
  }
  return ts;
}

cplx exact_signal_at(const Spectrum& spectrum, double time) {
  cplx sum(0.0, 0.0);
  for (std::size_t l = 0; l < spectrum.size(); ++l) {
    const double p = spectrum.overlaps[l];
    if (p == 0.0) continue;
    const double phase = -spectrum.energies[l] * time;
    sum += p * cplx(std::cos(phase), std::sin(phase));
  }
  return sum;
}

namespace {

// Mean of m draws of a +/-1 variable with mean `expectation`.
double mean_outcome(double expectation, std::int64_t m, Rng& rng) {
  const double p_plus = std::clamp(0.5 * (1.0 + expectation), 0.0, 1.0);
  std::binomial_distribution<std::int64_t> binom(m, p_plus);
  const std::int64_t plus = binom(rng);
  return static_cast<double>(2 * plus - m) / static_cast<double>(m);
}

}  // namespace

cplx hadamard_sample_at(const Spectrum& spectrum, double time, std::int64_t m_h, Rng& rng) {
  if (m_h < 1) throw ContractError("shots per point must be positive");
  const cplx exact = exact_signal_at(spectrum, time);
  const double re = mean_outcome(exact.real(), m_h, rng);
  const double im = mean_outcome(exact.imag(), m_h, rng);
  return {re, im};
}

std::int64_t shots_for_tolerance(std::size_t points, double sigma_h, double delta) {
  if (!(sigma_h > 0.0)) throw ConfigError("sigma_h must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (points == 0) throw ConfigError("sample set is empty");
  const double m = std::log(2.0 * static_cast<double>(points) / delta) / (sigma_h * sigma_h);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(m)));
}

std::int64_t ShotPolicy::shots(std::size_t points) const {
  if (m_h_override) {
    if (*m_h_override < 1) throw ConfigError("m_h override must be positive");
    return *m_h_override;
  }
  return shots_for_tolerance(points, sigma_h, delta);
}

Acquisition acquire(const SampleSet& samples, double tau, const Spectrum& spectrum,
                    const ShotPolicy& policy, const Rng& rng) {
  if (samples.empty()) throw ConfigError("cannot acquire on an empty sample set");
  const std::int64_t shots = policy.shots(samples.size());
  Acquisition out;
  out.series.tau = tau;
  out.series.shots_per_point = shots;
  for (std::int64_t t : samples.indices) {
    Rng point_rng = rng.split({static_cast<std::uint64_t>(t)});
    const cplx v = policy.noiseless ? exact_signal(spectrum, tau, t)
                                    : hadamard_sample(spectrum, tau, t, shots, point_rng);
    out.series.values.emplace(t, v);
    out.ledger.record(std::abs(static_cast<double>(t)) * tau, shots);
  }
  return out;
}

ContinuousAcquisition acquire_at(std::span<const double> times, const Spectrum& spectrum,
                                 std::int64_t shots, bool noiseless, const Rng& rng) {
  ContinuousAcquisition out;
  out.times.assign(times.begin(), times.end());
  out.values.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    Rng point_rng = rng.split({static_cast<std::uint64_t>(i)});
    cplx v = noiseless ? exact_signal_at(spectrum, std::abs(t))
                       : hadamard_sample_at(spectrum, std::abs(t), shots, point_rng);
    if (t < 0.0) v = std::conj(v);
    out.values.push_back(v);
    out.ledger.record(std::abs(t), shots);
  }
  return out;
}

}  // namespace csqpe
