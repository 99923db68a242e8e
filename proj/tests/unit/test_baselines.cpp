#include "csqpe/baselines.hpp"
#include "csqpe/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace csqpe;

namespace {

Spectrum levels(std::vector<double> e, std::vector<double> p) {
  Spectrum sp;
  sp.energies = std::move(e);
  sp.overlaps = std::move(p);
  return sp;
}

}  // namespace

TEST_CASE("ml-qcels") {
  const double e = 1.2345;
  MlQcelsParams p;
  p.levels = 10;
  const BaselineResult r = ml_qcels(continuous_spectrum_source(levels({e}, {1.0}), true), p, Rng(1));
  CHECK(std::abs(r.estimate - e) <= 1e-6);
  CHECK(r.ledger.t_max == doctest::Approx(p.t_max));

  const MlQcelsParams defaults = ml_qcels_defaults(537);
  CHECK(defaults.n0 == 8);
  CHECK(defaults.shots == 50);
  CHECK(defaults.levels == static_cast<int>(std::floor(4 * std::log(537.0))));
  const BaselineResult run = ml_qcels(continuous_spectrum_source(levels({0.9, 1.4}, {0.8, 0.2})), defaults, Rng(2));
  CHECK(run.ledger.n_distinct_times == 8 * defaults.levels);
  CHECK(std::abs(run.estimate - 0.9) < 0.01);

  // A second level pulls the single-mode fit away from E0.
  MlQcelsParams small;
  small.levels = 4;
  small.t_max = 8.0;
  const double single_err = std::abs(ml_qcels(continuous_spectrum_source(levels({0.9}, {1.0}), true), small, Rng(3)).estimate - 0.9);
  const double mixed_err = std::abs(ml_qcels(continuous_spectrum_source(levels({0.9, 1.5}, {0.6, 0.4}), true), small, Rng(3)).estimate - 0.9);
  CHECK(mixed_err > single_err);
  CHECK(mixed_err < 0.3);
}

TEST_CASE("mm-qcels") {
  MmQcelsParams one;
  one.k = 1;
  const BaselineResult r = mm_qcels(continuous_spectrum_source(levels({2.1}, {1.0}), true), one, Rng(4));
  REQUIRE(r.energies.size() == 1);
  CHECK(std::abs(r.energies[0] - 2.1) <= 1e-6);
  CHECK(std::abs(std::abs(r.amplitudes[0]) - 1.0) <= 1e-6);

  MmQcelsParams two;
  two.k = 2;
  const BaselineResult t = mm_qcels(continuous_spectrum_source(levels({1.0, 2.0}, {0.6, 0.4}), true), two, Rng(5));
  REQUIRE(t.energies.size() == 2);
  CHECK(t.energies[0] <= t.energies[1]);
  CHECK(std::abs(t.energies[0] - 1.0) <= 1e-4);
  CHECK(std::abs(t.energies[1] - 2.0) <= 1e-4);
  CHECK(std::abs(t.estimate - 1.0) <= 1e-4);

  const MmQcelsParams defaults = mm_qcels_defaults(140);
  CHECK(defaults.k == 2);
  CHECK(defaults.n_t == 30);
  CHECK(defaults.gamma == 1.0);
  CHECK(defaults.shots == 100);
  const BaselineResult run = mm_qcels(continuous_spectrum_source(levels({0.9, 1.4}, {0.8, 0.2})), defaults, Rng(6));
  CHECK(std::abs(run.estimate - 0.9) < 0.05);
}

TEST_CASE("qmegs") {
  QmegsParams dense;
  dense.n_samples = 400;
  dense.k = 1;
  const double e = 2 * std::numbers::pi * 0.31234;
  const BaselineResult r = qmegs(continuous_spectrum_source(levels({e}, {1.0}), true), dense, Rng(7));
  CHECK(std::abs(r.estimate / (2 * std::numbers::pi) - 0.31234) <= dense.dx);

  const QmegsParams defaults = qmegs_defaults(537);
  CHECK(defaults.k == 10);
  CHECK(defaults.dx == 1e-4);
  CHECK(defaults.alpha == 5.0);
  CHECK(defaults.n_samples == 10 + 2 * static_cast<int>(std::floor(std::log(2 * 537.0))));

  QmegsParams pair = dense;
  pair.k = 2;
  const double f1 = 0.15, f2 = 0.4;
  const BaselineResult two = qmegs(
      continuous_spectrum_source(levels({2 * std::numbers::pi * f1, 2 * std::numbers::pi * f2}, {0.55, 0.45}), true), pair, Rng(8));
  REQUIRE(two.energies.size() == 2);
  std::vector<double> found{two.energies[0] / (2 * std::numbers::pi), two.energies[1] / (2 * std::numbers::pi)};
  std::sort(found.begin(), found.end());
  CHECK(std::abs(found[0] - f1) <= 10 * pair.dx);
  CHECK(std::abs(found[1] - f2) <= 10 * pair.dx);
}

TEST_CASE("generous budgets on one exact frequency") {
  const double e = 2 * std::numbers::pi * 0.2;
  const ContinuousSource src = continuous_spectrum_source(levels({e}, {1.0}), true);
  CHECK(std::abs(ml_qcels(src, MlQcelsParams{}, Rng(1)).estimate - e) <= 1e-4);
  MmQcelsParams mm;
  mm.k = 1;
  CHECK(std::abs(mm_qcels(src, mm, Rng(1)).estimate - e) <= 1e-4);
  QmegsParams q;
  q.n_samples = 200;
  CHECK(std::abs(qmegs(src, q, Rng(1)).estimate - e) <= 1e-4 * 2 * std::numbers::pi);
}

TEST_CASE("determinism, ledger accounting and names") {
  const ContinuousSource src = continuous_spectrum_source(levels({0.9, 1.4}, {0.7, 0.3}));
  const QmegsParams q = qmegs_defaults(196);
  const BaselineResult a = qmegs(src, q, Rng(9)), b = qmegs(src, q, Rng(9));
  CHECK(a.energies == b.energies);
  CHECK(a.ledger.t_total == b.ledger.t_total);

  const std::vector<double> times{0.5, -2.0, 3.0};
  const ContinuousAcquisition acq = src(times, 10, Rng(1));
  CHECK(acq.ledger.t_total == doctest::Approx(10 * (0.5 + 2.0 + 3.0)));
  CHECK(acq.ledger.t_max == 3.0);

  CHECK(parse_baseline("mm_qcels") == BaselineAlgorithm::mm_qcels);
  CHECK(to_string(BaselineAlgorithm::qmegs) == "qmegs");
  CHECK_THROWS_AS(parse_baseline("music"), ConfigError);

  const std::vector<std::complex<double>> vals{std::polar(1.0, -0.7 * 1.0), std::polar(1.0, -0.7 * 2.0)};
  const std::vector<double> ts{1.0, 2.0};
  CHECK(matched_filter(ts, vals, 0.7) == doctest::Approx(1.0));
  CHECK(matched_filter(ts, vals, 0.7 + std::numbers::pi) < 1e-20);
}
