#include "csqpe/errors.hpp"
#include "csqpe/fourier.hpp"
#include "csqpe/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace csqpe;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd random_complex(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

Eigen::VectorXcd tone(std::int64_t n, double f_bins) {
  Eigen::VectorXcd y(n);
  for (std::int64_t t = 0; t < n; ++t) y(t) = std::polar(1.0, -2.0 * kPi * f_bins * static_cast<double>(t) / static_cast<double>(n));
  return y;
}

}  // namespace

TEST_CASE("dirichlet kernel") {
  CHECK(dirichlet(16, 0.0) == 1.0);
  for (const int k : {1, 2, 7, 15, -3}) CHECK(std::abs(dirichlet(16, k)) < 1e-15);
  CHECK(std::abs(dirichlet(16, 16.0)) == doctest::Approx(1.0));
  for (const int l : {0, 1, 5}) {
    double sum = 0.0;
    for (int n = 0; n < 16; ++n) sum += dirichlet(16, n + 0.3) * dirichlet(16, n + 0.3 + l);
    CHECK(std::abs(sum - (l == 0 ? 1.0 : 0.0)) < 1e-12);
  }
  for (double v = -40.0; v < 40.0; v += 0.37) CHECK(std::abs(dirichlet(16, v)) <= 1.0 + 1e-15);
}

TEST_CASE("shifted Fourier products") {
  const std::int64_t n = 24;
  Rng rng(3);

  Eigen::VectorXd spike = Eigen::VectorXd::Zero(n);
  spike(5) = 1.0;
  const Eigen::VectorXcd col = ShiftedFourierOp(n, 0.0).apply(spike);
  for (std::int64_t t = 0; t < n; ++t) CHECK(std::abs(col(t) - std::polar(1.0, -2 * kPi * 5.0 * t / n)) < 1e-12);

  const Eigen::VectorXcd s = random_complex(n, rng);
  Eigen::VectorXcd naive(n);
  for (std::int64_t t = 0; t < n; ++t) {
    naive(t) = 0.0;
    for (std::int64_t k = 0; k < n; ++k) naive(t) += s(k) * std::polar(1.0, -2 * kPi * double(k * t) / n);
  }
  CHECK((ShiftedFourierOp(n, 0.0).apply(s) - naive).norm() < 1e-10 * naive.norm());

  const double nu = -0.37;
  const Eigen::VectorXcd shifted = ShiftedFourierOp(n, nu).apply(s);
  for (std::int64_t t = 0; t < n; ++t) CHECK(std::abs(shifted(t) - std::polar(1.0, -2 * kPi * nu * t / n) * naive(t)) < 1e-10);

  CHECK_THROWS_AS(ShiftedFourierOp(n, 0.0).apply(Eigen::VectorXd(Eigen::VectorXd::Zero(n + 1))), ContractError);
}

TEST_CASE("Parseval, adjoint consistency and fast versus direct paths") {
  Rng rng(17);
  for (const std::int64_t n : {16, 37, 128}) {
    for (const double nu : {-0.5, -0.21, 0.0, 0.33}) {
      const ShiftedFourierOp op(n, nu);
      const Eigen::VectorXcd v = random_complex(n, rng), w = random_complex(n, rng);
      const Eigen::VectorXcd fv = op.apply(v);
      CHECK(fv.squaredNorm() == doctest::Approx(n * v.squaredNorm()).epsilon(1e-9));
      CHECK(std::abs(w.dot(fv) - op.adjoint(w).dot(v)) < 1e-10 * fv.norm() * w.norm());
      CHECK((fv - op.apply_direct(v)).norm() < 1e-10 * fv.norm());
      CHECK((op.adjoint(w) - op.adjoint_direct(w)).norm() < 1e-10 * w.norm() * std::sqrt(double(n)));
      const Eigen::MatrixXcd d = op.dense();
      CHECK((d.adjoint() * d - double(n) * Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SampleSet rows;
  rows.n = 40;
  rows.indices = {0, 3, 17, 39};
  const ShiftedFourierOp sub(40, 0.2, rows);
  const Eigen::VectorXcd v = random_complex(40, rng);
  const Eigen::VectorXcd full = ShiftedFourierOp(40, 0.2).apply(v);
  const Eigen::VectorXcd part = sub.apply(v);
  REQUIRE(part.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(part(i) - full(rows.indices[i])) < 1e-10);
}

TEST_CASE("grid decomposition") {
  const std::int64_t n = 32;
  Rng rng(8);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(3) = 0.7;
  x(20) = -0.2;
  const Eigen::VectorXcd y = ShiftedFourierOp(n, 0.15).apply(x);
  const GridDecomposition d = grid_decompose(y, 0.15);
  CHECK((d.x_re - x).norm() < 1e-10);
  CHECK(d.x_im.norm() < 1e-10);

  const Eigen::VectorXcd off = tone(n, 6.3);
  CHECK(grid_decompose(off, 0.3).x_im.norm() < 1e-10);
  const GridDecomposition at0 = grid_decompose(off, 0.0);
  CHECK((at0.reconstruct() - off).norm() < 1e-10 * off.norm());

  // Single tone n0 + nu0 seen from nu = 0: x_k = exp(i pi_N v) D_N(v), v = k - n0 - nu0.
  const std::int64_t m = 16;
  const double nu0 = 0.3;
  const int n0 = 4;
  const GridDecomposition dec = grid_decompose(tone(m, n0 + nu0), 0.0);
  const double pi_n = kPi * (1.0 - 1.0 / m);
  for (std::int64_t k = 0; k < m; ++k) {
    const double v = static_cast<double>(k - n0) - nu0;
    CHECK(dec.x_im(k) == doctest::Approx(std::sin(pi_n * v) * dirichlet(m, v)).epsilon(1e-10));
    CHECK(dec.x_re(k) == doctest::Approx(std::cos(pi_n * v) * dirichlet(m, v)).epsilon(1e-10));
  }
}

TEST_CASE("optimal grid shift") {
  const std::int64_t n = 64;
  CHECK(optimal_grid_shift(tone(n, 9.25)).u == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(std::abs(optimal_grid_shift(tone(n, 9.0)).u) < 1e-8);

  Rng rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    const double u = rng.uniform(-0.4, 0.4);
    const Eigen::VectorXcd y = 0.7 * tone(n, 5 + u + rng.uniform(-0.02, 0.02)) +
                               0.3 * tone(n, 30 + u + rng.uniform(-0.02, 0.02));
    double best = 0.0, best_g = 1e300;
    for (int i = 0; i <= 100000; ++i) {
      const double nu = -0.5 + i / 100000.0;
      const double g = grid_decompose(y, nu).x_im.norm();
      if (g < best_g) {
        best_g = g;
        best = nu;
      }
    }
    const GridShift gs = optimal_grid_shift(y);
    CHECK(gs.u == doctest::Approx(best).epsilon(2e-5));
    CHECK(gs.off_grid_norm <= best_g + 1e-12);
  }
  CHECK_THROWS_AS(optimal_grid_shift(tone(n, 1.0), 4), ContractError);
}

TEST_CASE("cx bound") {
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(100);
  spike(0) = 1.0;
  CHECK(cx_bound(spike) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(cx_bound(Eigen::VectorXd::Constant(100, 0.01)) == 0.0);
  CHECK(cx_bound(Eigen::VectorXd::Zero(100)) == 0.0);
}

TEST_CASE("c and s vectors") {
  const CsVectors zero = cs_vectors(100, 0.0);
  CHECK(zero.c(0) == doctest::Approx(1.0));
  CHECK(zero.c.tail(99).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(zero.s.cwiseAbs().maxCoeff() < 1e-15);

  const double nu = 0.1;
  const CsVectors v = cs_vectors(100, nu);
  CHECK(v.s.norm() >= 2 * nu);
  CHECK(v.s.norm() <= 2 * kPi * nu / std::sqrt(3.0));
  // Fails: the sum reduces to (1 - 1/N) sin^2(pi nu), not (1 - 2/N) sin^2(pi nu).
  const double sp = std::sin(kPi * nu);
  CHECK(std::abs(v.s.squaredNorm() - (1.0 - 2.0 / 100) * sp * sp) < 1e-12);
}
