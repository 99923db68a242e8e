#include "csqpe/estimator.hpp"

#include "csqpe/errors.hpp"
#include "csqpe/fourier.hpp"
#include "csqpe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace csqpe {

namespace {

constexpr double kPi = std::numbers::pi;

// Substream keys, fixed so that reports are reproducible.
enum : std::uint64_t { kFirstSet = 1, kFirstSignal = 2, kSecondSet = 3, kSecondSignal = 4 };

SampleSet rows_of(const TimeSeries& series, std::int64_t n) {
  SampleSet rows;
  rows.n = n;
  rows.ratio = static_cast<double>(series.size()) / static_cast<double>(n);
  rows.indices.reserve(series.size());
  for (const auto& [t, value] : series.values) rows.indices.push_back(t);
  return rows;
}

Eigen::VectorXcd values_of(const TimeSeries& series) {
  Eigen::VectorXcd y(static_cast<Eigen::Index>(series.size()));
  Eigen::Index i = 0;
  for (const auto& [t, value] : series.values) y(i++) = value;
  return y;
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < std::numbers::sqrt2 - 1.0))
    throw ConfigError("eta must lie in (0, sqrt(2) - 1)");
}

}  // namespace

SignalSource spectrum_source(Spectrum spectrum) {
  spectrum.validate();
  return [spectrum = std::move(spectrum)](const SampleSet& samples, double tau,
                                          const ShotPolicy& policy, const Rng& rng) {
    return acquire(samples, tau, spectrum, policy, rng);
  };
}

double holdout_residual(double nu, const Eigen::VectorXd& s, const TimeSeries& y2) {
  if (y2.size() == 0) throw ContractError("hold-out sample set is empty");
  const auto n = static_cast<std::int64_t>(s.size());
  const ShiftedFourierOp op(n, nu, rows_of(y2, n));
  return (op.apply(s) - values_of(y2)).squaredNorm();
}

bool test_another_sampling(double nu, const Eigen::VectorXd& s, const TimeSeries& y2,
                           double sigma_test) {
  const double e = holdout_residual(nu, s, y2);
  return !(e >= static_cast<double>(y2.size()) * sigma_test * sigma_test);
}

double recovery_c1(double eta) {
  check_eta(eta);
  return (2.0 + 2.0 * (std::numbers::sqrt2 - 1.0) * eta) /
         (1.0 - (std::numbers::sqrt2 + 1.0) * eta);
}

double recovery_c2(double eta) {
  check_eta(eta);
  return 4.0 * std::sqrt(1.0 + eta) / (1.0 - (std::numbers::sqrt2 + 1.0) * eta);
}

double recovery_c3(double eta, int s_sparsity, double n) {
  if (s_sparsity < 1) throw ConfigError("sparsity must be at least 1");
  if (!(n > 1.0)) throw ConfigError("signal length must exceed 1");
  return 2.0 * recovery_c1(eta) + kPi * recovery_c2(eta) +
         (2.0 * kPi / std::log(n)) * std::sqrt(s_sparsity / 3.0);
}

double auto_sigma_test(double sigma, int s_sparsity, double n, double c0, double eta) {
  if (sigma < 0.0) throw ConfigError("sigma must be non-negative");
  const double c3 = recovery_c3(eta, s_sparsity, n);
  const double log_n = std::log(n);
  const double inner = c3 * c3 + 8.0 * kPi * kPi * s_sparsity / (3.0 * log_n * log_n);
  return 1.1 * std::sqrt(1.5) * (std::sqrt(inner) + c0) * sigma;
}

std::string to_string(EstimateStatus status) {
  switch (status) {
    case EstimateStatus::ok: return "ok";
    case EstimateStatus::empty_k: return "empty_k";
    case EstimateStatus::all_failed: return "all_failed";
  }
  return "unknown";
}

void EstimatorConfig::validate() const {
  if (n < 2) throw ConfigError("n must be at least 2");
  if (s_sparsity < 1) throw ConfigError("s_sparsity must be at least 1");
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("r must lie in (0, 1]");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (j_trials < 1) throw ConfigError("j_trials must be at least 1");
  if (!(p_min >= 0.0)) throw ConfigError("p_min must be non-negative");
  if (!m_h_override) {
    if (!(sigma_h > 0.0)) throw ConfigError("sigma_h must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  } else if (*m_h_override < 1) {
    throw ConfigError("m_h must be at least 1");
  }
  if (sigma_test.mode == SigmaTest::Mode::value && !(sigma_test.value >= 0.0))
    throw ConfigError("sigma_test must be non-negative");
  if (sigma_test.mode == SigmaTest::Mode::automatic) check_eta(eta);
  if (!(c0 >= 0.0)) throw ConfigError("c0 must be non-negative");
}

ShotPolicy EstimatorConfig::shot_policy() const {
  ShotPolicy policy;
  policy.sigma_h = sigma_h;
  policy.delta = delta;
  policy.m_h_override = m_h_override;
  policy.noiseless = noiseless;
  return policy;
}

int select_trial(const std::vector<TrialRecord>& log) {
  if (log.empty()) throw ContractError("empty trial log");
  int best = 0;
  for (std::size_t j = 1; j < log.size(); ++j) {
    if (log[j].ell < log[static_cast<std::size_t>(best)].ell) best = static_cast<int>(j);
  }
  return best;
}

std::vector<std::int64_t> select_support(const Eigen::VectorXd& s, KRule rule, double p_min) {
  std::vector<std::int64_t> k;
  if (s.size() == 0) return k;
  if (rule == KRule::argmax) {
    Eigen::Index best = 0;
    s.maxCoeff(&best);
    k.push_back(best);
    return k;
  }
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) >= p_min) k.push_back(i);
  }
  return k;
}

EstimateReport run_cs_qpe(const EstimatorConfig& cfg, const SignalSource& source,
                          const Rng& rng) {
  cfg.validate();
  const std::int64_t n = cfg.n;
  const double nd = static_cast<double>(n);
  EstimateReport report;

  if (4.0 * kPi * std::sqrt(static_cast<double>(cfg.s_sparsity)) >= std::sqrt(3.0) * std::log(nd))
    report.warnings.push_back("4 pi sqrt(S) >= sqrt(3) log N: recovery guarantee does not apply");

  switch (cfg.sigma_test.mode) {
    case SigmaTest::Mode::off: report.sigma_test = 0.0; break;
    case SigmaTest::Mode::value: report.sigma_test = cfg.sigma_test.value; break;
    case SigmaTest::Mode::automatic:
      report.sigma_test = auto_sigma_test(cfg.sigma, cfg.s_sparsity, nd, cfg.c0, cfg.eta);
      break;
  }

  const ShotPolicy policy = cfg.shot_policy();
  int retries = 0;
  const SampleSet t1 = draw_sample_set(n, cfg.r, rng.split({kFirstSet}), &retries);
  if (retries > 0)
    report.warnings.push_back("first sample set redrawn " + std::to_string(retries) + " time(s)");
  const Acquisition first = source(t1, cfg.tau, policy, rng.split({kFirstSignal}));
  if (first.series.size() != t1.size()) throw ContractError("signal source returned wrong size");
  const Eigen::VectorXcd y = values_of(first.series);
  const double radius = std::sqrt(static_cast<double>(t1.size())) * cfg.sigma;

  const auto j_count = static_cast<std::size_t>(cfg.j_trials);
  std::vector<Eigen::VectorXd> solutions(j_count);
  report.trial_log.resize(j_count);
  parallel_for(j_count, cfg.threads, [&](std::size_t j) {
    TrialRecord& rec = report.trial_log[j];
    rec.nu = -0.5 + static_cast<double>(j) / cfg.j_trials;
    BpdnProblem problem{ShiftedFourierOp(n, rec.nu, t1), y, radius, cfg.nonnegative};
    const BpdnSolution sol = solve_bpdn(problem, cfg.solver);
    rec.solver_status = sol.status;
    rec.iterations = sol.iterations;
    solutions[j] = sol.status == BpdnStatus::infeasible ? Eigen::VectorXd::Ones(n) : sol.s;
    rec.l1 = solutions[j].lpNorm<1>();
  });

  const SampleSet t2 = draw_sample_set(n, cfg.r, rng.split({kSecondSet}), &retries);
  if (retries > 0)
    report.warnings.push_back("second sample set redrawn " + std::to_string(retries) + " time(s)");
  const Acquisition second = source(t2, cfg.tau, policy, rng.split({kSecondSignal}));
  if (second.series.size() != t2.size()) throw ContractError("signal source returned wrong size");

  for (std::size_t j = 0; j < j_count; ++j) {
    TrialRecord& rec = report.trial_log[j];
    rec.holdout = holdout_residual(rec.nu, solutions[j], second.series);
    rec.passed = cfg.sigma_test.mode == SigmaTest::Mode::off ||
                 test_another_sampling(rec.nu, solutions[j], second.series, report.sigma_test);
    rec.ell = rec.passed ? rec.l1 : nd + 1.0;
  }

  report.t1_size = t1.size();
  report.t2_size = t2.size();
  report.ledger = first.ledger;
  report.ledger.merge(second.ledger);

  report.j_star = select_trial(report.trial_log);
  const auto js = static_cast<std::size_t>(report.j_star);
  report.nu_star = report.trial_log[js].nu;
  report.s_star = solutions[js];
  if (std::none_of(report.trial_log.begin(), report.trial_log.end(),
                   [](const TrialRecord& r) { return r.passed; })) {
    report.status = EstimateStatus::all_failed;
    return report;
  }
  report.k_set = select_support(report.s_star, cfg.k_rule, cfg.p_min);
  if (report.k_set.empty()) {
    report.status = EstimateStatus::empty_k;
    return report;
  }
  report.e_star = 2.0 * kPi * (static_cast<double>(report.k_set.front()) + report.nu_star) /
                  (nd * cfg.tau);
  return report;
}

}  // namespace csqpe
