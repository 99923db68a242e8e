// One line per acceptance criterion; exit status is the number of failures.
#include "csqpe/bench.hpp"
#include "csqpe/estimator.hpp"
#include "csqpe/oracle.hpp"
#include "csqpe/parallel.hpp"
#include "csqpe/signal.hpp"
#include "csqpe/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace csqpe;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t worker_count() {
  const std::size_t env = default_thread_count();
  if (env > 1) return env;
  return std::max(1u, std::thread::hardware_concurrency());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EstimatorConfig noiseless_config(std::int64_t n, double r, int j) {
  EstimatorConfig c;
  c.n = n;
  c.r = r;
  c.j_trials = j;
  c.noiseless = true;
  c.sigma = 1e-8;
  c.m_h_override = 1;
  c.threads = 1;
  return c;
}

Outcome on_grid_recovery() {
  constexpr std::int64_t n = 256;
  constexpr int runs = 100;
  const double tol = 1e-6 * 2 * kPi / n;
  std::vector<int> good(runs, 0);
  std::vector<double> secs(runs, 0.0);
  parallel_for(runs, worker_count(), [&](std::size_t i) {
    Rng g = Rng(101).split({i});
    const auto a = static_cast<std::int64_t>(g.uniform() * n);
    std::int64_t b = a;
    while (std::abs(b - a) < 2 || std::abs(b - a) > n - 2) b = static_cast<std::int64_t>(g.uniform() * n);
    const double p = g.uniform(0.3, 0.7);
    Spectrum sp;
    const std::int64_t lo = std::min(a, b), hi = std::max(a, b);
    sp.energies = {2 * kPi * lo / n, 2 * kPi * hi / n};
    sp.overlaps = {p, 1 - p};
    EstimatorConfig c = noiseless_config(n, 0.15, 2);
    c.s_sparsity = 2;
    c.k_rule = KRule::threshold;
    c.p_min = 0.1;
    const auto t0 = std::chrono::steady_clock::now();
    const EstimateReport r = run_cs_qpe(c, spectrum_source(sp), g.split({1}));
    secs[i] = seconds_since(t0);
    if (r.k_set.size() != 2) return;
    double worst = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      const double e = 2 * kPi * (static_cast<double>(r.k_set[k]) + r.nu_star) / n;
      worst = std::max(worst, std::abs(e - sp.energies[k]));
    }
    good[i] = worst <= tol && secs[i] < 5.0;
  });
  const int hits = std::count(good.begin(), good.end(), 1);
  const double slowest = *std::max_element(secs.begin(), secs.end());
  return {hits >= 95, fmt("%d/100 exact within 1e-6*2pi/N, slowest run %.2f s", hits, slowest)};
}

Outcome grid_shift_accuracy() {
  constexpr std::int64_t n = 256;
  constexpr int j = 100;
  const double offsets[] = {-0.25, -0.1, 0.1, 0.25, 0.4};
  constexpr int runs = 50;
  std::vector<double> dnu(runs), df(runs);
  parallel_for(runs, worker_count(), [&](std::size_t i) {
    Rng g = Rng(202).split({i});
    const double nu0 = offsets[i % 5];
    const auto n0 = 10 + static_cast<std::int64_t>(g.uniform() * (n - 20));
    const double f = (static_cast<double>(n0) + nu0) / n;
    Spectrum sp;
    sp.energies = {2 * kPi * f};
    sp.overlaps = {1.0};
    EstimatorConfig c = noiseless_config(n, 0.15, j);
    c.k_rule = KRule::argmax;
    const EstimateReport r = run_cs_qpe(c, spectrum_source(sp), g.split({1}));
    if (!r.e_star) {
      dnu[i] = df[i] = 1.0;
      return;
    }
    dnu[i] = std::abs(r.nu_star - nu0);
    df[i] = std::abs(*r.e_star / (2 * kPi) - f);
  });
  const double nu_tol = 1.0 / j + 1e-3, f_tol = 2.0 / (n * j);
  int ok = 0;
  for (int i = 0; i < runs; ++i) ok += dnu[i] <= nu_tol && df[i] <= f_tol;
  return {ok == runs, fmt("%d/%d runs (worst |dnu| %.4g <= %.4g, worst |df| %.3g <= %.3g)", ok, runs,
                          *std::max_element(dnu.begin(), dnu.end()), nu_tol,
                          *std::max_element(df.begin(), df.end()), f_tol)};
}

Outcome heisenberg_trend() {
  SweepSpec s;
  s.models = {"tfi8"};
  s.alphas = {0.125};
  s.algorithms = {"cs_qpe"};
  s.trials_per_cell = 20;
  s.seed = 303;
  s.threads = worker_count();
  const auto t0 = std::chrono::steady_clock::now();
  const auto cells = run_sweep(s);
  const double secs = seconds_since(t0);
  const double slope = heisenberg_slope(cells);
  std::string medians;
  for (const auto& c : cells) medians += fmt(" %.3g", c.median_abs_error);
  return {slope >= -1.4 && slope <= -0.6 && secs <= 1800.0,
          fmt("slope %.3f in [-1.4, -0.6], medians%s, %.0f s", slope, medians.c_str(), secs)};
}

Outcome sample_sparsity() {
  SweepSpec s;
  s.t_grid = {537};
  s.models = {"tfi8"};
  s.alphas = {0.125};
  s.algorithms = {"cs_qpe", "ml_qcels"};
  s.trials_per_cell = 20;
  s.seed = 404;
  s.threads = worker_count();
  const auto rows = sample_count_profile(s);
  const double cs = rows.at(0).mean_distinct_times, ml = rows.at(1).mean_distinct_times;
  return {cs <= 40.0 && ml == 200.0 && ml / cs >= 4.0,
          fmt("cs_qpe %.2f distinct times, ml_qcels %.0f, ratio %.2f", cs, ml, ml / cs)};
}

Outcome dirichlet_suite() {
  const LemmaReport r = check_dirichlet({16, 100, 257}, 1000, Rng(505));
  return {r.violations == 0, fmt("%lld violations over %lld checks", static_cast<long long>(r.violations),
                                 static_cast<long long>(r.trials))};
}

Outcome lemma9_suite() {
  const LemmaReport r = check_lemma9({100, 256}, 20000);
  const double closed = r.details.count("closed_form_violations") ? r.details.at("closed_form_violations") : -1;
  const double bounds = r.details.count("bound_violations") ? r.details.at("bound_violations") : -1;
  const double alt = r.details.count("max_error_one_over_n_form") ? r.details.at("max_error_one_over_n_form") : -1;
  return {r.violations == 0,
          fmt("closed-form (1-2/N) violations %.0f, bound violations %.0f; (1-1/N) form max error %.2g",
              closed, bounds, alt)};
}

Outcome solver_cross_check() {
  constexpr int count = 200;
  std::vector<double> rel(count), excess(count);
  parallel_for(count, worker_count(), [&](std::size_t i) {
    Rng g = Rng(707).split({i});
    const std::int64_t sizes[] = {64, 128, 192, 256};
    const std::int64_t n = sizes[i % 4];
    const SampleSet rows = draw_sample_set(n, g.uniform(0.15, 0.4), g.split({0}));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const int sparsity = 1 + static_cast<int>(i % 5);
    for (int k = 0; k < sparsity; ++k) x(static_cast<Eigen::Index>(g.uniform() * n)) = g.uniform(-1.0, 1.0);
    const ShiftedFourierOp op(n, g.uniform(-0.5, 0.5), rows);
    Eigen::VectorXcd y = op.apply(x);
    std::normal_distribution<double> gauss;
    const double noise = 0.02;
    for (Eigen::Index k = 0; k < y.size(); ++k) y(k) += noise * std::complex<double>(gauss(g), gauss(g));
    const BpdnProblem p{op, y, std::sqrt(static_cast<double>(rows.size())) * noise * 1.5, false};
    const BpdnSolution a = solve_bpdn(p);
    const BpdnSolution b = reference_solve_bpdn(p, 1e-8);
    rel[i] = std::abs(a.objective - b.objective) / std::max(1e-12, std::abs(b.objective));
    excess[i] = a.residual_norm / (p.radius * (1 + 1e-6));
  });
  int ok = 0;
  for (int i = 0; i < count; ++i) ok += rel[i] <= 1e-4 && excess[i] <= 1.0;
  return {ok == count, fmt("%d/%d agree; worst relative gap %.2g, worst residual/radius %.8f", ok, count,
                           *std::max_element(rel.begin(), rel.end()),
                           *std::max_element(excess.begin(), excess.end()))};
}

Outcome rip_draws() {
  const LemmaReport r = run_suite("rip", Rng(808), worker_count()).at(0);
  const double frac = r.details.at("fraction_below_threshold");
  return {frac >= 0.95, fmt("%.3f of 200 draws below sqrt(2)-1 (median eta %.3f, max %.3f)", frac,
                            r.details.at("median_eta"), r.details.at("max_eta"))};
}

Outcome hadamard_channel() {
  constexpr int cases = 100;
  constexpr std::int64_t m_h = 10000;
  Rng g(909);
  int ok = 0;
  for (int c = 0; c < cases; ++c) {
    Rng cg = g.split({static_cast<std::uint64_t>(c)});
    Spectrum sp;
    const int levels = 1 + static_cast<int>(cg.uniform() * 6);
    double total = 0.0;
    for (int l = 0; l < levels; ++l) {
      sp.energies.push_back(cg.uniform(-kPi, kPi));
      sp.overlaps.push_back(cg.uniform(0.05, 1.0));
      total += sp.overlaps.back();
    }
    std::sort(sp.energies.begin(), sp.energies.end());
    for (auto& p : sp.overlaps) p /= total;
    const double t = cg.uniform(0.0, 500.0);
    Rng shots = cg.split({1});
    const cplx est = hadamard_sample_at(sp, t, m_h, shots);
    ok += std::abs(est - exact_signal_at(sp, t)) <= 5.0 / std::sqrt(static_cast<double>(m_h));
  }

  Spectrum sp;
  sp.energies = {-1.1, 0.3, 2.0};
  sp.overlaps = {0.5, 0.3, 0.2};
  const double t = 3.7;
  const cplx exact = exact_signal_at(sp, t);
  constexpr int draws = 10000;
  double sr = 0, si = 0, qr = 0, qi = 0;
  Rng bg = g.split({1000});
  for (int i = 0; i < draws; ++i) {
    const cplx h = hadamard_sample_at(sp, t, 1, bg);
    sr += h.real();
    si += h.imag();
    qr += h.real() * h.real();
    qi += h.imag() * h.imag();
  }
  const double mr = sr / draws, mi = si / draws;
  const double se_r = std::sqrt((qr / draws - mr * mr) / draws), se_i = std::sqrt((qi / draws - mi * mi) / draws);
  const double zr = (mr - exact.real()) / se_r, zi = (mi - exact.imag()) / se_i;
  return {ok >= 99 && std::abs(zr) <= 4 && std::abs(zi) <= 4,
          fmt("%d/100 within 5/sqrt(M_H); unit-shot bias z = %.2f (re), %.2f (im)", ok, zr, zi)};
}

Outcome bench_determinism() {
  SweepSpec s;
  s.t_grid = {140, 196};
  s.models = {"tfi8", "fh4"};
  s.alphas = {0.25};
  s.algorithms = {"cs_qpe", "ml_qcels", "mm_qcels", "qmegs"};
  s.trials_per_cell = 2;
  s.seed = 1010;
  auto csv = [&](std::size_t threads) {
    s.threads = threads;
    std::ostringstream out;
    write_csv(out, run_sweep(s));
    return out.str();
  };
  const std::string a = csv(1), b = csv(1), c = csv(std::max<std::size_t>(4, worker_count()));
  return {a == b && a == c, fmt("repeat %s, threads 1 vs %zu %s (%zu bytes)", a == b ? "identical" : "DIFFERENT",
                                std::max<std::size_t>(4, worker_count()), a == c ? "identical" : "DIFFERENT",
                                a.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"exact on-grid recovery", on_grid_recovery},
      {"grid-shift accuracy", grid_shift_accuracy},
      {"error scaling with evolution time", heisenberg_trend},
      {"sample sparsity", sample_sparsity},
      {"Dirichlet suite", dirichlet_suite},
      {"norm of the off-grid vector", lemma9_suite},
      {"solver cross-validation", solver_cross_check},
      {"empirical RIP", rip_draws},
      {"Hadamard channel", hadamard_channel},
      {"bench determinism", bench_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
