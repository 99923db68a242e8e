#include "csqpe/errors.hpp"
#include "csqpe/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace csqpe;

TEST_CASE("near-grid family respects its construction") {
  Rng rng(3);
  const NearGridInstance inst = draw_near_grid(128, 3, 0.05, rng);
  REQUIRE(inst.bins.size() == 3);
  double total = 0.0;
  for (std::size_t f = 0; f < 3; ++f) {
    total += inst.weights[f];
    CHECK(std::abs(inst.nus[f] - inst.u) <= 0.05);
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("lemma 1 and lemma 2 degenerate instances") {
  NearGridInstance same;
  same.n = 64;
  same.u = 0.2;
  same.bins = {5, 20, 41};
  same.nus = {0.2, 0.2, 0.2};
  same.weights = {0.5, 0.3, 0.2};
  const LemmaReport l1 = check_lemma1_instance(same);
  CHECK(l1.violations == 0);
  CHECK(l1.worst_margin >= 0.0);
  CHECK(check_lemma2_instance(same).violations == 0);

  NearGridInstance one;
  one.n = 64;
  one.u = 0.3;
  one.bins = {17};
  one.nus = {0.3};
  one.weights = {1.0};
  CHECK(check_lemma1_instance(one).violations == 0);
  CHECK(check_lemma2_instance(one).violations == 0);
}

TEST_CASE("lemma 1 and lemma 2 fitted constants on the random family") {
  const LemmaReport a = check_lemma1(40, Rng(42));
  CHECK(a.violations == 0);
  REQUIRE(a.fitted_constant);
  CHECK(*a.fitted_constant <= 20.0);
  const LemmaReport b = check_lemma2(40, Rng(42));
  CHECK(b.violations == 0);
  REQUIRE(b.fitted_constant);
  CHECK(*b.fitted_constant <= 20.0);
}

TEST_CASE("dirichlet suite") {
  const LemmaReport r = check_dirichlet({16, 100, 257}, 1000, Rng(42));
  CHECK(r.trials > 0);
  CHECK(r.violations == 0);
}

TEST_CASE("lemma 9 suite") {
  const LemmaReport r = check_lemma9({100, 256}, 2000);
  // The direct sums follow (1 - 1/N) sin^2(pi nu) to rounding.
  CHECK(r.details.at("max_error_one_over_n_form") < 1e-12);
  CHECK(r.violations == 0);
  CHECK_THROWS_AS(check_lemma9({64}, 10), ConfigError);
}

TEST_CASE("lemma 5 suite") {
  const LemmaReport r = check_lemma5({100, 256}, 500, Rng(42));
  CHECK(r.violations == 0);
  CHECK(r.trials > 0);
}

TEST_CASE("empirical restricted isometry") {
  CHECK(empirical_rip(128, 1.0, 3, 200, Rng(1)) <= 1e-10);
  CHECK(empirical_rip(128, 0.2, 1, 200, Rng(1)) <= 1e-12);
  int good = 0;
  for (int i = 0; i < 40; ++i) good += empirical_rip(256, 0.15, 2, 1000, Rng(500 + i)) < std::sqrt(2.0) - 1.0;
  CHECK(good >= 38);
}

TEST_CASE("recovery bound") {
  const LemmaReport r = check_recovery_bound(21, Rng(42));
  CHECK(r.violations == 0);
  CHECK(r.trials > 0);
}

TEST_CASE("hoeffding tails") {
  CHECK(check_hoeffding(8, 10000, Rng(42)).violations == 0);
  CHECK(check_hoeffding(16, 10000, Rng(42)).violations == 0);
}

TEST_CASE("suite registry") {
  CHECK(suite_names().size() == 8);
  CHECK_THROWS_AS(run_suite("lemma7", Rng(1)), ConfigError);
  const auto reports = run_suite("lemma5", Rng(1));
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].lemma_id == "lemma5");
}
