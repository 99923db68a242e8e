#include "csqpe/hamiltonians.hpp"

#include "csqpe/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace csqpe {

namespace {

using cplx = std::complex<double>;

bool is_power_of_two(Eigen::Index n) {
  return n > 0 && std::has_single_bit(static_cast<std::uint64_t>(n));
}

// Parity of the occupied modes strictly below `mode`.
double jw_sign(std::uint32_t state, int mode) {
  const std::uint32_t below = state & ((1u << mode) - 1u);
  return (std::popcount(below) & 1) ? -1.0 : 1.0;
}

// Adds coeff * c+_p c_q to `h`.
void add_hopping(Eigen::MatrixXcd& h, int p, int q, double coeff) {
  const auto dim = static_cast<std::uint32_t>(h.rows());
  for (std::uint32_t state = 0; state < dim; ++state) {
    if (!(state & (1u << q))) continue;
    double sign = jw_sign(state, q);
    std::uint32_t mid = state ^ (1u << q);
    if (mid & (1u << p)) continue;
    sign *= jw_sign(mid, p);
    const std::uint32_t out = mid | (1u << p);
    h(out, state) += coeff * sign;
  }
}

bool lex_less(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
  }
  return false;
}

}  // namespace

DenseHamiltonian::DenseHamiltonian(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw ConfigError("Hamiltonian matrix must be square");
  if (!is_power_of_two(matrix_.rows()))
    throw ConfigError("Hamiltonian dimension must be a power of two, got " +
                      std::to_string(matrix_.rows()));
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw ConfigError("Hamiltonian matrix is not Hermitian");
}

Eigensystem diagonalize(const DenseHamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  Eigensystem out{solver.eigenvalues(), solver.eigenvectors()};

  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
    auto col = out.vectors.col(c);
    const double big = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      const double mag = std::abs(col(i));
      if (mag > 1e-12 * big) {
        col *= std::conj(col(i)) / mag;
        col(i) = cplx(std::abs(col(i)), 0.0);
        break;
      }
    }
  }

  // Degenerate groups: fix a deterministic order and a common eigenvalue.
  const Eigen::Index n = out.values.size();
  const double tol = 1e-12 * std::max(1.0, out.values.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && out.values(end) - out.values(end - 1) <= tol) ++end;
    if (end - start > 1) {
      std::vector<Eigen::Index> order(end - start);
      std::iota(order.begin(), order.end(), start);
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return lex_less(out.vectors.col(a), out.vectors.col(b));
      });
      Eigen::MatrixXcd block(out.vectors.rows(), end - start);
      for (std::size_t k = 0; k < order.size(); ++k) block.col(k) = out.vectors.col(order[k]);
      out.vectors.middleCols(start, end - start) = block;
      const double mean = out.values.segment(start, end - start).mean();
      out.values.segment(start, end - start).setConstant(mean);
    }
    start = end;
  }
  return out;
}

double spectral_norm(const DenseHamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void Spectrum::validate(double tol) const {
  if (energies.size() != overlaps.size())
    throw ConfigError("spectrum energies and overlaps differ in length");
  if (energies.empty()) throw ConfigError("spectrum is empty");
  for (std::size_t i = 1; i < energies.size(); ++i) {
    if (energies[i] < energies[i - 1]) throw ConfigError("spectrum energies must be ascending");
  }
  double total = 0.0;
  for (double p : overlaps) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("overlap outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > tol) throw ConfigError("overlaps do not sum to 1");
}

Spectrum Spectrum::merged() const {
  Spectrum out;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (overlaps[i] == 0.0) continue;
    if (!out.energies.empty() && out.energies.back() == energies[i]) {
      out.overlaps.back() += overlaps[i];
    } else {
      out.energies.push_back(energies[i]);
      out.overlaps.push_back(overlaps[i]);
    }
  }
  return out;
}

double Spectrum::ground_energy() const {
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (overlaps[i] > 0.0) return energies[i];
  }
  throw ContractError("spectrum has no weighted level");
}

DenseHamiltonian build_tfi(int sites) {
  if (sites < 2 || sites > 12)
    throw ConfigError("TFI sites must be in [2, 12], got " + std::to_string(sites));
  const std::uint32_t dim = 1u << sites;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::uint32_t state = 0; state < dim; ++state) {
    double diag = 0.0;
    for (int j = 0; j < sites; ++j) {
      const int k = (j + 1) % sites;
      const double zj = (state >> j) & 1u ? -1.0 : 1.0;
      const double zk = (state >> k) & 1u ? -1.0 : 1.0;
      diag -= zj * zk;
    }
    h(state, state) = diag;
    for (int j = 0; j < sites; ++j) h(state ^ (1u << j), state) += -4.0;
  }
  return DenseHamiltonian(std::move(h));
}

DenseHamiltonian build_fermi_hubbard(int sites, double interaction) {
  if (sites < 1 || sites > 5)
    throw ConfigError("Fermi-Hubbard sites must be in [1, 5], got " + std::to_string(sites));
  const int modes = 2 * sites;
  const std::uint32_t dim = 1u << modes;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  auto mode = [](int site, int spin) { return 2 * site + spin; };

  for (int j = 0; j + 1 < sites; ++j) {
    for (int spin = 0; spin < 2; ++spin) {
      add_hopping(h, mode(j, spin), mode(j + 1, spin), -1.0);
      add_hopping(h, mode(j + 1, spin), mode(j, spin), -1.0);
    }
  }
  for (std::uint32_t state = 0; state < dim; ++state) {
    double diag = 0.0;
    for (int j = 0; j < sites; ++j) {
      const double up = (state >> mode(j, 0)) & 1u;
      const double dn = (state >> mode(j, 1)) & 1u;
      diag += interaction * (up - 0.5) * (dn - 0.5);
    }
    h(state, state) += diag;
  }
  return DenseHamiltonian(std::move(h));
}

NormalizedHamiltonian normalize_and_shift(const DenseHamiltonian& h) {
  const double norm = spectral_norm(h);
  if (norm == 0.0) throw ContractError("cannot normalize a zero Hamiltonian");
  const double scale = std::numbers::pi / (4.0 * norm);
  const double shift = std::numbers::pi / 2.0;
  Eigen::MatrixXcd m = scale * h.matrix();
  m.diagonal().array() += shift;
  // Re-symmetrize so rounding cannot break the Hermitian check.
  Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
  return NormalizedHamiltonian{DenseHamiltonian(std::move(sym)), scale, shift};
}

Spectrum spectrum_for_alpha(const Eigen::VectorXd& sorted_energies, double alpha, int levels) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  if (levels < 1 || levels > sorted_energies.size())
    throw ConfigError("levels must be in [1, dim], got " + std::to_string(levels));
  Spectrum out;
  out.energies.assign(sorted_energies.data(), sorted_energies.data() + sorted_energies.size());
  out.overlaps.assign(out.energies.size(), 0.0);
  const double norm = (1.0 - alpha) / (1.0 - std::pow(alpha, levels));
  for (int l = 0; l < levels; ++l) out.overlaps[l] = norm * std::pow(alpha, l);
  return out;
}

Spectrum spectrum_for_alpha(const DenseHamiltonian& h, double alpha, int levels) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix(), Eigen::EigenvaluesOnly);
  return spectrum_for_alpha(solver.eigenvalues(), alpha, levels);
}

DenseHamiltonian load_matrix_file(const std::string& path) {
  const bool binary = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw ConfigError("cannot open matrix file: " + path);

  if (binary) {
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t entries = bytes.size() / (2 * sizeof(double));
    const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(entries))));
    if (bytes.size() % (2 * sizeof(double)) != 0 || static_cast<std::size_t>(dim * dim) != entries)
      throw ConfigError("binary matrix file size is not a square complex matrix: " + path);
    Eigen::MatrixXcd m(dim, dim);
    const char* p = bytes.data();
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        double re, im;
        std::memcpy(&re, p, sizeof(double));
        std::memcpy(&im, p + sizeof(double), sizeof(double));
        p += 2 * sizeof(double);
        m(r, c) = cplx(re, im);
      }
    }
    return DenseHamiltonian(std::move(m));
  }

  long long dim = 0;
  if (!(in >> dim) || dim <= 0) throw ConfigError("matrix text file must start with a dimension");
  Eigen::MatrixXcd m(dim, dim);
  for (long long r = 0; r < dim; ++r) {
    for (long long c = 0; c < dim; ++c) {
      double re, im;
      if (!(in >> re >> im)) throw ConfigError("matrix text file truncated: " + path);
      m(r, c) = cplx(re, im);
    }
  }
  return DenseHamiltonian(std::move(m));
}

DenseHamiltonian build_named_model(const std::string& name) {
  if (name == "tfi8") return build_tfi(8);
  if (name == "fh4") return build_fermi_hubbard(4, 10.0);
  throw ConfigError("unknown model: " + name);
}

}  // namespace csqpe
