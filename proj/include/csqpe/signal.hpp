#pragma once

#include "csqpe/hamiltonians.hpp"
#include "csqpe/rng.hpp"
#include "csqpe/sample_set.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>

namespace csqpe {

using cplx = std::complex<double>;

// Evolution-time accounting for one or more acquisitions.
//   t_total = sum over points of shots * |t| * tau
//   t_max   = max |t| * tau
// Merging adds totals and point counts (each acquisition is a separate batch
// of experiments) and keeps the larger t_max.
struct RuntimeLedger {
  double t_total = 0.0;
  double t_max = 0.0;
  std::int64_t n_distinct_times = 0;

  void record(double abs_time, std::int64_t shots);
  RuntimeLedger& merge(const RuntimeLedger& other);
};

// Sampled signal values keyed by integer time index.
struct TimeSeries {
  std::map<std::int64_t, cplx> values;
  double tau = 1.0;
  std::int64_t shots_per_point = 1;

  std::size_t size() const { return values.size(); }

  // Text table, one `t,re,im,shots` row per point after a `# tau=` line.
  // Values are written with 17 significant digits and read back exactly.
  void write(std::ostream& out) const;
  static TimeSeries read(std::istream& in);
};

// sum_l p_l exp(-i E_l time).
cplx exact_signal_at(const Spectrum& spectrum, double time);

// Signal at integer step t with unit step tau.
inline cplx exact_signal(const Spectrum& spectrum, double tau, std::int64_t t) {
  return exact_signal_at(spectrum, tau * static_cast<double>(t));
}

// Mean of m_h real-part and m_h imaginary-part Hadamard outcomes, where
// Pr[h = +1] = (1 + Re y0)/2 (resp. Im y0).
cplx hadamard_sample_at(const Spectrum& spectrum, double time, std::int64_t m_h, Rng& rng);

inline cplx hadamard_sample(const Spectrum& spectrum, double tau, std::int64_t t,
                            std::int64_t m_h, Rng& rng) {
  return hadamard_sample_at(spectrum, tau * static_cast<double>(t), m_h, rng);
}

// Shots per point so that both parts stay within sigma_h at all `points`
// with probability 1 - delta: ceil(ln(2 * points / delta) / sigma_h^2).
std::int64_t shots_for_tolerance(std::size_t points, double sigma_h, double delta);

struct ShotPolicy {
  double sigma_h = 0.1;
  double delta = 0.01;
  std::optional<std::int64_t> m_h_override;
  // Return exact values instead of simulated outcomes (ledger unchanged).
  bool noiseless = false;

  std::int64_t shots(std::size_t points) const;
};

struct Acquisition {
  TimeSeries series;
  RuntimeLedger ledger;
};

// Hadamard-test acquisition at every index in `samples`. Point t draws from
// rng.split({t}), so the result does not depend on evaluation order.
Acquisition acquire(const SampleSet& samples, double tau, const Spectrum& spectrum,
                    const ShotPolicy& policy, const Rng& rng);

// Acquisition at arbitrary real times (baseline estimators). Point i draws
// from rng.split({i}); negative times use y(-t) = conj(y(t)).
struct ContinuousAcquisition {
  std::vector<double> times;
  std::vector<cplx> values;
  RuntimeLedger ledger;
};

ContinuousAcquisition acquire_at(std::span<const double> times, const Spectrum& spectrum,
                                 std::int64_t shots, bool noiseless, const Rng& rng);

}  // namespace csqpe
