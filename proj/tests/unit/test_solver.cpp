#include "csqpe/errors.hpp"
#include "csqpe/rng.hpp"
#include "csqpe/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace csqpe;

namespace {

struct Instance {
  BpdnProblem problem;
  Eigen::VectorXd truth;
};

Instance random_instance(std::int64_t n, double r, int sparsity, double noise, Rng rng) {
  const SampleSet rows = draw_sample_set(n, r, rng.split({0}));
  Rng g = rng.split({1});
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < sparsity; ++i) x(static_cast<Eigen::Index>(g.uniform() * n)) = g.uniform(-1.0, 1.0);
  const double nu = g.uniform(-0.5, 0.5);
  const ShiftedFourierOp op(n, nu, rows);
  Eigen::VectorXcd y = op.apply(x);
  std::normal_distribution<double> gauss;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise * std::complex<double>(gauss(g), gauss(g));
  const double radius = std::sqrt(static_cast<double>(rows.size())) * noise * 1.5;
  return {BpdnProblem{op, y, radius, false}, x};
}

}  // namespace

TEST_CASE("zero is returned when it is feasible") {
  const std::int64_t n = 32;
  SampleSet rows = SampleSet::full(n);
  Eigen::VectorXcd y = Eigen::VectorXcd::Constant(n, std::complex<double>(0.01, -0.01));
  const BpdnProblem p{ShiftedFourierOp(n, 0.1, rows), y, y.norm() * 1.01, false};
  const BpdnSolution a = solve_bpdn(p);
  const BpdnSolution b = reference_solve_bpdn(p);
  CHECK(a.status == BpdnStatus::optimal);
  CHECK(a.objective == 0.0);
  CHECK(a.s.cwiseAbs().maxCoeff() == 0.0);
  CHECK(b.objective == doctest::Approx(0.0));
}

TEST_CASE("noiseless one-sparse recovery at a tiny radius") {
  const std::int64_t n = 128;
  const SampleSet rows = draw_sample_set(n, 0.25, Rng(12));
  REQUIRE(rows.size() >= 20);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(41) = 0.8;
  const ShiftedFourierOp op(n, 0.0, rows);
  const BpdnProblem p{op, op.apply(x), 1e-9, false};
  const BpdnSolution a = solve_bpdn(p);
  const BpdnSolution b = reference_solve_bpdn(p, 1e-9);
  CHECK(a.status == BpdnStatus::optimal);
  CHECK((a.s - x).norm() <= 1e-6);
  CHECK(std::abs(a.objective - b.objective) <= 1e-5 * a.objective);
}

TEST_CASE("equality-constrained full-data case returns the truth") {
  const std::int64_t n = 48;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(3) = 0.5;
  x(17) = -0.25;
  x(40) = 0.1;
  const ShiftedFourierOp op(n, 0.0, SampleSet::full(n));
  const BpdnProblem p{op, op.apply(x), 0.0, false};
  const BpdnSolution a = solve_bpdn(p);
  CHECK((a.s - x).norm() < 1e-8);
  const BpdnSolution b = reference_solve_bpdn(p, 1e-9);
  CHECK(std::abs(a.objective - b.objective) <= 1e-5 * a.objective);
}

TEST_CASE("cross-solver agreement, feasibility and certificates on random instances") {
  int optimal = 0;
  for (int i = 0; i < 50; ++i) {
    const Instance inst = random_instance(64, 0.3, 1 + i % 4, 0.02, Rng(500 + static_cast<std::uint64_t>(i)));
    const BpdnSolution a = solve_bpdn(inst.problem);
    const BpdnSolution b = reference_solve_bpdn(inst.problem);
    if (a.status == BpdnStatus::infeasible) continue;
    CHECK(std::abs(a.objective - b.objective) <= 1e-4 * (1.0 + a.objective));
    CHECK(a.residual_norm <= inst.problem.radius * (1.0 + 1e-6));
    if (a.status == BpdnStatus::optimal) {
      ++optimal;
      CHECK(a.gap <= 1e-5 * (1.0 + a.objective));
    }
  }
  CHECK(optimal >= 45);
}

TEST_CASE("structurally infeasible systems are detected") {
  const std::int64_t n = 8;
  Eigen::VectorXcd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = std::complex<double>(0.3 * i, 1.0 - 0.2 * i * i);
  const BpdnProblem p{ShiftedFourierOp(n, 0.0, SampleSet::full(n)), y, 1e-3, false};
  CHECK(structurally_infeasible(stack(p)));
  CHECK(solve_bpdn(p).status == BpdnStatus::infeasible);
}

TEST_CASE("nonnegative variant and determinism") {
  const Instance inst = random_instance(64, 0.4, 2, 0.01, Rng(77));
  BpdnProblem p = inst.problem;
  p.nonnegative = true;
  const BpdnSolution a = solve_bpdn(p), b = solve_bpdn(p);
  CHECK(a.s.minCoeff() >= 0.0);
  CHECK(a.s == b.s);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("invalid inputs") {
  const Instance inst = random_instance(32, 0.5, 1, 0.01, Rng(3));
  SolverOptions bad;
  bad.penalty = 0.0;
  CHECK_THROWS_AS(solve_bpdn(inst.problem, bad), ConfigError);
  BpdnProblem neg = inst.problem;
  neg.radius = -1.0;
  CHECK_THROWS_AS(solve_bpdn(neg), ContractError);
}
