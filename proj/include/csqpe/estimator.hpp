#pragma once

#include "csqpe/hamiltonians.hpp"
#include "csqpe/rng.hpp"
#include "csqpe/sample_set.hpp"
#include "csqpe/signal.hpp"
#include "csqpe/solver.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace csqpe {

// Produces measured values on a sample set. The default source runs the
// Hadamard-test simulation against a spectrum.
using SignalSource =
    std::function<Acquisition(const SampleSet&, double tau, const ShotPolicy&, const Rng&)>;

SignalSource spectrum_source(Spectrum spectrum);

// Hold-out residual E = sum_{t in y2} |(F_nu s)_t - y2_t|^2; passes iff
// E < |y2| * sigma_test^2. The operator length is s.size().
bool test_another_sampling(double nu, const Eigen::VectorXd& s, const TimeSeries& y2,
                           double sigma_test);
double holdout_residual(double nu, const Eigen::VectorXd& s, const TimeSeries& y2);

// Constants of the recovery guarantee, valid for 0 < eta < sqrt(2) - 1.
double recovery_c1(double eta);
double recovery_c2(double eta);
// C3 = 2 C1 + pi C2 + (2 pi / log N) sqrt(S / 3), natural log.
double recovery_c3(double eta, int s_sparsity, double n);

// c sqrt(3/2) [ (C3^2 + 8 pi^2 S / (3 log^2 N))^{1/2} + C0 ] sigma with c = 1.1.
double auto_sigma_test(double sigma, int s_sparsity, double n, double c0, double eta);

struct SigmaTest {
  enum class Mode { off, automatic, value };
  Mode mode = Mode::off;
  double value = 0.0;

  static SigmaTest off() { return {}; }
  static SigmaTest automatic() { return {Mode::automatic, 0.0}; }
  static SigmaTest fixed(double v) { return {Mode::value, v}; }
};

enum class KRule { threshold, argmax };

struct EstimatorConfig {
  std::int64_t n = 0;
  int s_sparsity = 1;
  double r = 1.0;
  double tau = 1.0;
  double sigma_h = 0.1;
  double sigma = 0.0;
  SigmaTest sigma_test;
  double delta = 0.01;
  int j_trials = 1;
  double p_min = 0.0;
  std::optional<std::int64_t> m_h_override;
  KRule k_rule = KRule::threshold;
  double eta = 0.2;
  double c0 = 1.0;
  bool nonnegative = false;
  // Use exact signal values; the ledger still counts the configured shots.
  bool noiseless = false;
  // 0 selects default_thread_count().
  std::size_t threads = 0;
  SolverOptions solver;

  // Throws ConfigError on out-of-range fields.
  void validate() const;
  ShotPolicy shot_policy() const;
};

struct TrialRecord {
  double nu = 0.0;
  double l1 = 0.0;
  BpdnStatus solver_status = BpdnStatus::optimal;
  int iterations = 0;
  double holdout = 0.0;
  bool passed = true;
  double ell = 0.0;
};

enum class EstimateStatus { ok, empty_k, all_failed };

std::string to_string(EstimateStatus status);

struct EstimateReport {
  EstimateStatus status = EstimateStatus::ok;
  int j_star = 0;
  double nu_star = 0.0;
  Eigen::VectorXd s_star;
  std::vector<std::int64_t> k_set;
  std::optional<double> e_star;
  double sigma_test = 0.0;
  std::vector<TrialRecord> trial_log;
  RuntimeLedger ledger;
  std::size_t t1_size = 0;
  std::size_t t2_size = 0;
  std::vector<std::string> warnings;
};

// Grid-shift sweep with compressed-sensing solves and hold-out selection.
// All randomness flows from `rng` via fixed substreams.
EstimateReport run_cs_qpe(const EstimatorConfig& cfg, const SignalSource& source,
                          const Rng& rng);

// Selection step alone, for already computed sweep results: returns j*
// (smallest index on ties) from the trial log.
int select_trial(const std::vector<TrialRecord>& log);

// K from a solution vector under the configured rule.
std::vector<std::int64_t> select_support(const Eigen::VectorXd& s, KRule rule, double p_min);

}  // namespace csqpe
