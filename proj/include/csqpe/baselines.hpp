#pragma once

#include "csqpe/hamiltonians.hpp"
#include "csqpe/rng.hpp"
#include "csqpe/signal.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace csqpe {

// Measured values at arbitrary real times with a given shot count per point.
using ContinuousSource =
    std::function<ContinuousAcquisition(std::span<const double> times, std::int64_t shots,
                                        const Rng&)>;

ContinuousSource continuous_spectrum_source(Spectrum spectrum, bool noiseless = false);

enum class BaselineAlgorithm { ml_qcels, mm_qcels, qmegs };

std::string to_string(BaselineAlgorithm algorithm);
// Throws ConfigError on an unknown name.
BaselineAlgorithm parse_baseline(const std::string& name);

// Hierarchical single-mode fit. Level j samples n * tau_j for n = 1..n0 with
// tau_j = t_max / (n0 * 2^(levels-1-j)), so the last level reaches t_max.
struct MlQcelsParams {
  int n0 = 8;
  std::int64_t shots = 50;
  int levels = 10;
  double t_max = 100.0;
  // Grid points per level before local refinement.
  int grid = 128;
};

// Multi-mode fit of K exponentials. Level j draws n_t times uniformly from
// [0, gamma * T_j] with T_j = t_max / 2^(levels-1-j).
struct MmQcelsParams {
  int k = 2;
  int n_t = 30;
  double gamma = 1.0;
  std::int64_t shots = 100;
  int levels = 10;
  double t_max = 100.0;
  int starts = 8;
};

// Gaussian-filtered peak search: n_samples times from a normal law with
// standard deviation t_max / alpha, truncated to |t| <= t_max; K rounds of
// matched-filter argmax on a frequency grid of spacing dx, each followed by
// excluding |f - f_found| < exclusion (default 5 / t_max).
struct QmegsParams {
  int k = 10;
  double dx = 1e-4;
  double alpha = 5.0;
  int n_samples = 22;
  std::int64_t shots = 100;
  double t_max = 100.0;
  double exclusion = 0.0;
};

struct BaselineResult {
  // Energies found, with amplitudes when the method fits them (empty otherwise).
  std::vector<double> energies;
  std::vector<std::complex<double>> amplitudes;
  // Estimate of the dominant eigenvalue, used for benchmarking.
  double estimate = 0.0;
  RuntimeLedger ledger;
  std::vector<std::string> warnings;
};

BaselineResult ml_qcels(const ContinuousSource& source, const MlQcelsParams& p, const Rng& rng);
// Energies sorted ascending; estimate is the energy of the largest |r_k|.
BaselineResult mm_qcels(const ContinuousSource& source, const MmQcelsParams& p, const Rng& rng);
// Energies in the order found; estimate is the first.
BaselineResult qmegs(const ContinuousSource& source, const QmegsParams& p, const Rng& rng);

// Parameters used for the benchmark at budget t_n.
MlQcelsParams ml_qcels_defaults(std::int64_t t_n);
MmQcelsParams mm_qcels_defaults(std::int64_t t_n);
QmegsParams qmegs_defaults(std::int64_t t_n);

// Matched-filter profile |sum_i y_i e^{i E t_i}|^2 / m^2.
double matched_filter(std::span<const double> times, std::span<const std::complex<double>> values,
                      double energy);

}  // namespace csqpe
