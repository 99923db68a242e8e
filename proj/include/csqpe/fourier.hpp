#pragma once

#include "csqpe/sample_set.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>

namespace csqpe {

// sin(pi x) and cos(pi x) with argument reduction mod 2.
double sinpi(double x);
double cospi(double x);

// Normalized Dirichlet kernel: 1 at v = 0, else sin(pi v) / (N sin(pi v / N)).
// At nonzero multiples of N the removable singularity is filled by its limit.
double dirichlet(std::int64_t n, double v);

// Shifted Fourier operator (F_nu)_{tk} = exp(-i 2 pi (k + nu) t / N), with
// t, k in {0..N-1}. When `rows` is set the operator is restricted to those
// time indices. Full-row products go through an FFT; restricted ones are
// evaluated directly.
class ShiftedFourierOp {
 public:
  ShiftedFourierOp(std::int64_t n, double nu, std::optional<SampleSet> rows = std::nullopt);

  std::int64_t n() const { return n_; }
  double nu() const { return nu_; }
  const std::optional<SampleSet>& rows() const { return rows_; }
  std::int64_t row_count() const;
  // Time index of output row i.
  std::int64_t row_time(std::int64_t i) const;

  // Single entry exp(-i 2 pi (k + nu) t / N), phase reduced mod N exactly.
  std::complex<double> entry(std::int64_t t, std::int64_t k) const;

  Eigen::VectorXcd apply(const Eigen::VectorXd& s) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& s) const;
  Eigen::VectorXcd adjoint(const Eigen::VectorXcd& w) const;

  // Same products by the O(rows * N) direct sum, regardless of row set.
  Eigen::VectorXcd apply_direct(const Eigen::VectorXcd& s) const;
  Eigen::VectorXcd adjoint_direct(const Eigen::VectorXcd& w) const;

  // Dense row_count x N matrix.
  Eigen::MatrixXcd dense() const;

 private:
  std::int64_t n_;
  double nu_;
  std::optional<SampleSet> rows_;
};

// y = F_nu (x_re + i x_im) with x = F_nu^H y / N.
struct GridDecomposition {
  double nu = 0.0;
  Eigen::VectorXd x_re;
  Eigen::VectorXd x_im;

  Eigen::VectorXcd reconstruct() const;
};

GridDecomposition grid_decompose(const Eigen::VectorXcd& y, double nu);

struct GridShift {
  double u = 0.0;
  GridDecomposition decomposition;
  // ||x_im(u)||_2
  double off_grid_norm = 0.0;
};

// Minimizes ||x_im(nu)||_2 over [-1/2, 1/2]: coarse scan on grid_points + 1
// evenly spaced shifts, then golden-section search on the bracket around the
// best scan point.
GridShift optimal_grid_shift(const Eigen::VectorXcd& y, int grid_points = 512,
                             double refine_tol = 1e-10);

// C[x] = sqrt(max(0, (4 + 2 pi^2/N)||x||_2^2 - 2 pi^2 ||x||_1^2 / N)).
double cx_bound(const Eigen::VectorXd& x);

// c_k = cos(pi_N (k+nu)) D_N(k+nu), s_k = sin(pi_N (k+nu)) D_N(k+nu),
// pi_N = pi (1 - 1/N).
struct CsVectors {
  Eigen::VectorXd c;
  Eigen::VectorXd s;
};

CsVectors cs_vectors(std::int64_t n, double nu);

}  // namespace csqpe
