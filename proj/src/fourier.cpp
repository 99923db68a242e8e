#include "csqpe/fourier.hpp"

#include "csqpe/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace csqpe {

using cplx = std::complex<double>;

double sinpi(double x) {
  const double r = std::fmod(x, 2.0);
  if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
  return std::sin(std::numbers::pi * r);
}

double cospi(double x) {
  const double r = std::fmod(std::abs(x), 2.0);
  if (r == 0.5 || r == 1.5) return 0.0;
  return std::cos(std::numbers::pi * r);
}

double dirichlet(std::int64_t n, double v) {
  if (v == 0.0) return 1.0;
  const double nd = static_cast<double>(n);
  const double denom = sinpi(v / nd);
  if (denom == 0.0) return cospi(v) / cospi(v / nd);
  return sinpi(v) / (nd * denom);
}

ShiftedFourierOp::ShiftedFourierOp(std::int64_t n, double nu, std::optional<SampleSet> rows)
    : n_(n), nu_(nu), rows_(std::move(rows)) {
  if (n_ < 1) throw ContractError("Fourier operator length must be positive");
  if (rows_) {
    if (rows_->n != n_) throw ContractError("sample set length does not match operator");
    rows_->validate();
  }
}

std::int64_t ShiftedFourierOp::row_count() const {
  return rows_ ? static_cast<std::int64_t>(rows_->size()) : n_;
}

std::int64_t ShiftedFourierOp::row_time(std::int64_t i) const {
  return rows_ ? rows_->indices[static_cast<std::size_t>(i)] : i;
}

cplx ShiftedFourierOp::entry(std::int64_t t, std::int64_t k) const {
  const double nd = static_cast<double>(n_);
  const double integer_part = static_cast<double>((k * t) % n_);
  const double shift_part = std::fmod(nu_ * static_cast<double>(t), nd);
  const double x = -2.0 * (integer_part + shift_part) / nd;
  return {cospi(x), sinpi(x)};
}

Eigen::VectorXcd ShiftedFourierOp::apply(const Eigen::VectorXd& s) const {
  return apply(Eigen::VectorXcd(s.cast<cplx>()));
}

Eigen::VectorXcd ShiftedFourierOp::apply(const Eigen::VectorXcd& s) const {
  if (s.size() != n_) throw ContractError("input length does not match operator length");
  if (rows_) return apply_direct(s);
  Eigen::FFT<double> fft;
  std::vector<cplx> in(s.data(), s.data() + s.size()), out;
  fft.fwd(out, in);
  Eigen::VectorXcd result(n_);
  for (std::int64_t t = 0; t < n_; ++t) {
    const double x = -2.0 * std::fmod(nu_ * static_cast<double>(t), static_cast<double>(n_)) /
                     static_cast<double>(n_);
    result(t) = cplx(cospi(x), sinpi(x)) * out[static_cast<std::size_t>(t)];
  }
  return result;
}

Eigen::VectorXcd ShiftedFourierOp::adjoint(const Eigen::VectorXcd& w) const {
  if (w.size() != row_count()) throw ContractError("input length does not match row count");
  if (rows_) return adjoint_direct(w);
  std::vector<cplx> in(static_cast<std::size_t>(n_)), out;
  for (std::int64_t t = 0; t < n_; ++t) {
    const double x = 2.0 * std::fmod(nu_ * static_cast<double>(t), static_cast<double>(n_)) /
                     static_cast<double>(n_);
    in[static_cast<std::size_t>(t)] = cplx(cospi(x), sinpi(x)) * w(t);
  }
  Eigen::FFT<double> fft;
  fft.inv(out, in);
  Eigen::VectorXcd result(n_);
  for (std::int64_t k = 0; k < n_; ++k)
    result(k) = out[static_cast<std::size_t>(k)] * static_cast<double>(n_);
  return result;
}

Eigen::VectorXcd ShiftedFourierOp::apply_direct(const Eigen::VectorXcd& s) const {
  if (s.size() != n_) throw ContractError("input length does not match operator length");
  const std::int64_t m = row_count();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(m);
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t t = row_time(i);
    cplx acc(0.0, 0.0);
    for (std::int64_t k = 0; k < n_; ++k) acc += entry(t, k) * s(k);
    out(i) = acc;
  }
  return out;
}

Eigen::VectorXcd ShiftedFourierOp::adjoint_direct(const Eigen::VectorXcd& w) const {
  if (w.size() != row_count()) throw ContractError("input length does not match row count");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n_);
  for (std::int64_t i = 0; i < row_count(); ++i) {
    const std::int64_t t = row_time(i);
    for (std::int64_t k = 0; k < n_; ++k) out(k) += std::conj(entry(t, k)) * w(i);
  }
  return out;
}

Eigen::MatrixXcd ShiftedFourierOp::dense() const {
  const std::int64_t m = row_count();
  Eigen::MatrixXcd a(m, n_);
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t t = row_time(i);
    for (std::int64_t k = 0; k < n_; ++k) a(i, k) = entry(t, k);
  }
  return a;
}

Eigen::VectorXcd GridDecomposition::reconstruct() const {
  Eigen::VectorXcd x(x_re.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = cplx(x_re(k), x_im(k));
  return ShiftedFourierOp(x.size(), nu).apply(x);
}

GridDecomposition grid_decompose(const Eigen::VectorXcd& y, double nu) {
  if (y.size() < 2) throw ContractError("grid decomposition needs at least two samples");
  const ShiftedFourierOp op(y.size(), nu);
  const Eigen::VectorXcd x = op.adjoint(y) / static_cast<double>(y.size());
  return GridDecomposition{nu, x.real(), x.imag()};
}

GridShift optimal_grid_shift(const Eigen::VectorXcd& y, int grid_points, double refine_tol) {
  if (grid_points < 8) throw ContractError("grid_points must be at least 8");
  auto cost = [&](double nu) { return grid_decompose(y, nu).x_im.norm(); };

  const double step = 1.0 / grid_points;
  int best = 0;
  double best_cost = cost(-0.5);
  for (int i = 1; i <= grid_points; ++i) {
    const double c = cost(-0.5 + i * step);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }

  double lo = std::max(-0.5, -0.5 + (best - 1) * step);
  double hi = std::min(0.5, -0.5 + (best + 1) * step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = cost(a), fb = cost(b);
  while (hi - lo > refine_tol) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = cost(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = cost(b);
    }
  }
  double u = 0.5 * (lo + hi);
  double u_cost = cost(u);
  // The scan point itself may beat the refined interior (e.g. at an endpoint).
  const double scan_u = -0.5 + best * step;
  if (best_cost < u_cost) {
    u = scan_u;
    u_cost = best_cost;
  }
  GridShift out;
  out.u = u;
  out.decomposition = grid_decompose(y, u);
  out.off_grid_norm = u_cost;
  return out;
}

double cx_bound(const Eigen::VectorXd& x) {
  if (x.size() == 0) return 0.0;
  const double n = static_cast<double>(x.size());
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double l2sq = x.squaredNorm();
  const double l1 = x.lpNorm<1>();
  const double bracket = (4.0 + 2.0 * pi2 / n) * l2sq - 2.0 * pi2 * l1 * l1 / n;
  return std::sqrt(std::max(0.0, bracket));
}

CsVectors cs_vectors(std::int64_t n, double nu) {
  if (n < 2) throw ContractError("cs_vectors needs n >= 2");
  const double nd = static_cast<double>(n);
  const double pn = 1.0 - 1.0 / nd;  // pi_N / pi
  CsVectors out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (std::int64_t k = 0; k < n; ++k) {
    const double v = static_cast<double>(k) + nu;
    const double d = dirichlet(n, v);
    out.c(k) = cospi(pn * v) * d;
    out.s(k) = sinpi(pn * v) * d;
  }
  return out;
}

}  // namespace csqpe
