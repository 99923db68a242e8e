#pragma once

#include "csqpe/fourier.hpp"

#include <Eigen/Dense>

#include <string>

namespace csqpe {

//   minimize ||s||_1 over real s  subject to  ||A s - y||_2 <= radius
// where A = F_{nu,T} and y lives on the rows of T. The complex constraint is
// handled as the real system [Re A; Im A] s ~ [Re y; Im y].
struct BpdnProblem {
  ShiftedFourierOp op;
  Eigen::VectorXcd y;
  double radius = 0.0;
  // Restrict s >= 0 (off by default; the signed problem is the standard one).
  bool nonnegative = false;

  void validate() const;
};

enum class BpdnStatus { optimal, infeasible, max_iter };

std::string to_string(BpdnStatus status);

struct BpdnSolution {
  Eigen::VectorXd s;
  double objective = 0.0;      // ||s||_1
  double residual_norm = 0.0;  // ||A s - y||_2
  BpdnStatus status = BpdnStatus::max_iter;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // Lower bound on the optimal objective from a scaled dual vector, and the
  // resulting duality gap (objective - dual_bound).
  double dual_bound = 0.0;
  double gap = 0.0;
};

struct SolverOptions {
  int max_iter = 5000;
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  double penalty = 1.0;
};

// Real stacked form of a problem: rows [Re A; Im A], rhs [Re y; Im y].
struct StackedSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double radius = 0.0;
  bool nonnegative = false;
};

StackedSystem stack(const BpdnProblem& p);

// Infeasibility test: the least-squares residual exceeds the radius by more
// than 1e-9.
bool structurally_infeasible(const StackedSystem& sys);

// Dual lower bound -lambda.b - radius ||lambda|| after scaling lambda into
// the dual feasible set {||A^T lambda||_inf <= 1} (one-sided when s >= 0).
double dual_bound(const StackedSystem& sys, const Eigen::VectorXd& lambda);

// Operator-splitting solver. Splits s = w (l1 term) and A s - y = z (ball
// term); the s-update reuses one factorization of I + A^T A (via the smaller
// of the two Gram matrices), z is projected onto the ball, w is
// soft-thresholded, and the penalty follows residual balancing. The returned
// iterate is pulled onto the feasible set before reporting.
BpdnSolution solve_bpdn(const BpdnProblem& p, const SolverOptions& opts = {});
BpdnSolution solve_bpdn(const StackedSystem& sys, const SolverOptions& opts = {});

// Independent cross-check: diagonally preconditioned primal-dual hybrid
// gradient iteration run until the duality gap falls below `tol`*(1+obj).
BpdnSolution reference_solve_bpdn(const BpdnProblem& p, double tol = 1e-7);
BpdnSolution reference_solve_bpdn(const StackedSystem& sys, double tol = 1e-7,
                                  int max_iter = 2000000);

}  // namespace csqpe
