#pragma once

#include "csqpe/rng.hpp"
#include "csqpe/sample_set.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace csqpe {

// Outcome of one verification suite. worst_margin is the smallest slack
// (bound minus observed) over all checks; negative means a violation.
struct LemmaReport {
  std::string lemma_id;
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double worst_margin = 0.0;
  // Largest observed ratio for asymptotic claims that carry no explicit constant.
  std::optional<double> fitted_constant;
  // Additional named quantities (e.g. counts for informational checks).
  std::map<std::string, double> details;
};

// Random near-grid family: S frequencies (n_f + nu_f)/N with distinct, gapped
// bins and nu_f = u + uniform(-w, w); weights are positive and sum to 1.
// w is halved until sigma_off < p_min / (10 S).
struct NearGridInstance {
  std::int64_t n = 0;
  double u = 0.0;
  std::vector<std::int64_t> bins;
  std::vector<double> nus;
  std::vector<double> weights;
};

NearGridInstance draw_near_grid(std::int64_t n, int s_sparsity, double width, Rng& rng);

// |p_f (nu_f - u_opt)| against sigma_off = ||F_u x_off||_inf, reported as a
// fitted constant (max ratio). Degenerate instances with sigma_off ~ 0 must
// have a left side below 1e-9.
LemmaReport check_lemma1(std::int64_t trials, const Rng& rng, std::int64_t n = 128,
                         int s_sparsity = 3, std::size_t threads = 0);
LemmaReport check_lemma1_instance(const NearGridInstance& inst);

// x_on on the dominant bins against p_f, and off them against 0, in units of
// S sigma_off (fitted constant).
LemmaReport check_lemma2(std::int64_t trials, const Rng& rng, std::int64_t n = 128,
                         int s_sparsity = 3, std::size_t threads = 0);
LemmaReport check_lemma2_instance(const NearGridInstance& inst);

// Dirichlet kernel: orthogonality for l = 0..5 (exact to 1e-12), the squared
// defect bound with constant pi^2/3, and the decay bound on |n + nu| <= N/2.
// details["stated_constant_violations"] counts failures of the pi/3 variant.
LemmaReport check_dirichlet(const std::vector<std::int64_t>& ns, int samples, const Rng& rng);

// Closed form of ||s_nu||^2 (to 1e-12) and the four vector bounds on a dense
// nu grid, for each N >= 100.
LemmaReport check_lemma9(const std::vector<std::int64_t>& ns, int grid);

// For random on-grid x with ||x||_1 <= 1 decomposed at random nu:
// C[x]|nu| <= ||x_I|| <= 2pi/sqrt3 |nu|, ||x_R - x|| <= 2pi/sqrt3 |nu| and
// sum_{n not in supp x} |x_R,n| <= pi^2 |nu| log N.
LemmaReport check_lemma5(const std::vector<std::int64_t>& ns, std::int64_t trials, const Rng& rng);

// Max over `trials` random S-sparse complex x of | ||F_T x||^2 / (|T| ||x||^2) - 1 |.
double empirical_rip(const SampleSet& rows, int s_sparsity, std::int64_t trials, Rng& rng);
double empirical_rip(std::int64_t n, double r, int s_sparsity, std::int64_t trials, const Rng& rng);

// Solver error against C1 sigma_M + C2 ||x_res||_1 / sqrt(S) with C1, C2 at the
// measured eta of the drawn sample set (instances with eta >= sqrt2 - 1 are
// skipped and counted in details["skipped"]). Instances cycle through
// noiseless, noisy and compressible-tail truths.
LemmaReport check_recovery_bound(std::int64_t instances, const Rng& rng, std::size_t threads = 0);

// Sampling L indices with replacement from [N] for flat vectors b = F s / ||F s||_inf
// (s sparse): the frequency of either Hoeffding tail event must not exceed
// 2 exp(-L/2).
LemmaReport check_hoeffding(int l, std::int64_t trials, const Rng& rng, std::int64_t n = 256);

// Suite names accepted by run_suite: lemma1, lemma2, lemma5, lemma9,
// dirichlet, rip, recovery, hoeffding.
std::vector<std::string> suite_names();
std::vector<LemmaReport> run_suite(const std::string& name, const Rng& rng, std::size_t threads = 0);

}  // namespace csqpe
