#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace csqpe {

// Dense Hermitian operator on 2^modes basis states.
class DenseHamiltonian {
 public:
  // Throws ConfigError unless `matrix` is square, power-of-two sized and
  // Hermitian within 1e-12 (relative to its largest entry).
  explicit DenseHamiltonian(Eigen::MatrixXcd matrix);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  Eigen::MatrixXcd matrix_;
};

// Ascending eigenvalues with eigenvectors as columns. Each eigenvector's first
// nonzero component is real and positive; exactly degenerate eigenvalues are
// ordered lexicographically by their (real part) eigenvector entries.
struct Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

Eigensystem diagonalize(const DenseHamiltonian& h);

// Largest |eigenvalue|.
double spectral_norm(const DenseHamiltonian& h);

// Energies (ascending) paired with initial-state overlap probabilities.
struct Spectrum {
  std::vector<double> energies;
  std::vector<double> overlaps;

  std::size_t size() const { return energies.size(); }

  // Throws ConfigError if lengths differ, energies descend, an overlap is
  // outside [0,1], or the overlaps do not sum to 1 within `tol`.
  void validate(double tol = 1e-10) const;

  // Levels with identical energy collapsed into one entry with summed weight;
  // zero-weight levels dropped.
  Spectrum merged() const;

  // Lowest energy carrying nonzero weight.
  double ground_energy() const;
};

// -sum_j Z_j Z_{j+1} (periodic) - 4 sum_j X_j.  2 <= sites <= 12.
DenseHamiltonian build_tfi(int sites);

// Open-chain Fermi-Hubbard model, 2*sites modes in site-major / spin-minor
// order under a Jordan-Wigner encoding:
//   sum_{j,s} (-c+_{j,s} c_{j+1,s} + h.c.) + U sum_j (n_{j,up}-1/2)(n_{j,dn}-1/2)
// 1 <= sites <= 5.
DenseHamiltonian build_fermi_hubbard(int sites, double interaction);

// Affine map of the spectrum onto [pi/4, 3pi/4]: pi*H/(4*||H||_2) + pi/2.
struct NormalizedHamiltonian {
  DenseHamiltonian hamiltonian;
  double scale;  // pi / (4 ||H||_2)
  double shift;  // pi / 2

  double to_original(double energy) const { return (energy - shift) / scale; }
};

NormalizedHamiltonian normalize_and_shift(const DenseHamiltonian& h);

// Geometric initial-state family: p_l = (1-a) a^l / (1 - a^levels) on the
// lowest `levels` eigenstates, 0 above. Expects a normalized Hamiltonian.
Spectrum spectrum_for_alpha(const DenseHamiltonian& h, double alpha, int levels);
Spectrum spectrum_for_alpha(const Eigen::VectorXd& sorted_energies, double alpha,
                            int levels);

// Row-major complex matrix file. Files ending in ".bin" hold raw
// little-endian (re, im) double pairs, dim inferred from the size; any other
// file is text: the dimension followed by 2*dim^2 numbers.
DenseHamiltonian load_matrix_file(const std::string& path);

// Named benchmark models: "tfi8" and "fh4" (U = 10).
DenseHamiltonian build_named_model(const std::string& name);

}  // namespace csqpe
