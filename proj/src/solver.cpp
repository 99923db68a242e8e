#include "csqpe/solver.hpp"

#include "csqpe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace csqpe {

namespace {

// Slack for "on the ball" comparisons; an exact zero radius cannot be met in
// floating point.
double feasibility_slack(const StackedSystem& sys) {
  return sys.radius * 1e-6 + 1e-10 * std::max(1.0, sys.b.norm());
}

Eigen::VectorXd project_ball(const Eigen::VectorXd& v, double radius) {
  const double n = v.norm();
  if (n <= radius) return v;
  if (n == 0.0) return v;
  return v * (radius / n);
}

Eigen::VectorXd shrink(const Eigen::VectorXd& v, double kappa, bool nonnegative) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v(i);
    double r = x > kappa ? x - kappa : (x < -kappa ? x + kappa : 0.0);
    if (nonnegative && r < 0.0) r = 0.0;
    out(i) = r;
  }
  return out;
}

// Moves `s` along the segment towards the feasible point `anchor` just far
// enough to satisfy the ball constraint.
Eigen::VectorXd pull_feasible(const StackedSystem& sys, const Eigen::VectorXd& s,
                              const Eigen::VectorXd& anchor) {
  const Eigen::VectorXd r0 = sys.a * s - sys.b;
  const double target = sys.radius;
  if (r0.norm() <= target) return s;
  const Eigen::VectorXd r1 = sys.a * anchor - sys.b;
  if (r1.norm() > target) return anchor;
  const Eigen::VectorXd d = r1 - r0;
  const double qa = d.squaredNorm();
  const double qb = 2.0 * r0.dot(d);
  const double qc = r0.squaredNorm() - target * target;
  const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
  double theta = (-qb - std::sqrt(disc)) / (2.0 * qa);
  theta = std::clamp(theta, 0.0, 1.0);
  Eigen::VectorXd out = (1.0 - theta) * s + theta * anchor;
  // Guard the last ulp.
  if ((sys.a * out - sys.b).norm() > target) {
    theta = std::min(1.0, theta * (1.0 + 1e-12) + 1e-15);
    out = (1.0 - theta) * s + theta * anchor;
  }
  return out;
}

// Feasible point near `s`: s plus the minimum-norm correction of its residual.
// Nonnegativity is kept by clipping the correction where needed.
Eigen::VectorXd feasible_anchor(const StackedSystem& sys,
                                const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>& cod,
                                const Eigen::VectorXd& s) {
  Eigen::VectorXd anchor = s + cod.solve(Eigen::VectorXd(sys.b - sys.a * s));
  if (sys.nonnegative) anchor = anchor.cwiseMax(0.0);
  return anchor;
}

void finalize(const StackedSystem& sys, BpdnSolution& sol, const Eigen::VectorXd& lambda) {
  sol.objective = sol.s.lpNorm<1>();
  sol.residual_norm = (sys.a * sol.s - sys.b).norm();
  sol.dual_bound = dual_bound(sys, lambda);
  sol.gap = sol.objective - sol.dual_bound;
}

// Exact optimum on a fixed support S with signs g, when the ball is active:
//   G s_S = A_S^T b - g / mu,  G = A_S^T A_S,  ||A_S s_S - b|| = radius.
// Accepted only if the signs are reproduced and lambda = mu (A s - b) is dual
// feasible, which certifies optimality.
struct Polished {
  Eigen::VectorXd s;
  Eigen::VectorXd lambda;
  // max |A^T lambda| (one-sided when s >= 0); <= 1 certifies optimality.
  double dual_violation = 0.0;
};

std::optional<Polished> polish_on(const StackedSystem& sys, const Eigen::VectorXd& guess,
                                   double cutoff) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index k = 0; k < guess.size(); ++k) {
    if (std::abs(guess(k)) > cutoff) support.push_back(k);
  }
  const auto k_count = static_cast<Eigen::Index>(support.size());
  if (k_count == 0 || k_count > sys.a.rows()) return std::nullopt;

  Eigen::MatrixXd a_s(sys.a.rows(), k_count);
  Eigen::VectorXd g(k_count);
  for (Eigen::Index j = 0; j < k_count; ++j) {
    a_s.col(j) = sys.a.col(support[j]);
    g(j) = guess(support[j]) > 0.0 ? 1.0 : -1.0;
  }
  const Eigen::MatrixXd gram = a_s.transpose() * a_s;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Eigen::VectorXd d = ldlt.vectorD();
  if (d.minCoeff() <= 1e-10 * d.maxCoeff()) return std::nullopt;

  const Eigen::VectorXd ls = ldlt.solve(a_s.transpose() * sys.b);
  const Eigen::VectorXd q = ldlt.solve(g);
  const double perp_sq = (sys.b - a_s * ls).squaredNorm();
  const double dir_sq = (a_s * q).squaredNorm();
  const double room = sys.radius * sys.radius - perp_sq;
  if (!(room > 0.0) || !(dir_sq > 0.0)) return std::nullopt;
  const double inv_mu = std::sqrt(room / dir_sq);

  const Eigen::VectorXd s_s = ls - inv_mu * q;
  for (Eigen::Index j = 0; j < k_count; ++j) {
    if (s_s(j) * g(j) <= 0.0) return std::nullopt;
  }
  Polished out;
  out.s = Eigen::VectorXd::Zero(sys.a.cols());
  for (Eigen::Index j = 0; j < k_count; ++j) out.s(support[j]) = s_s(j);
  // lambda = mu (A s - b), expanded so the tiny-radius case does not divide a
  // rounding-level residual by a tiny multiplier.
  out.lambda = -(sys.b - a_s * ls) / inv_mu - a_s * q;

  const Eigen::VectorXd at = sys.a.transpose() * out.lambda;
  out.dual_violation = sys.nonnegative ? (-at).maxCoeff() : at.cwiseAbs().maxCoeff();
  return out;
}

// Tries the exact support of the iterate, then supports with tiny entries
// dropped. Returns the first certified candidate, else the sign-consistent one
// with the smallest dual violation.
std::optional<Polished> polish(const StackedSystem& sys, const Eigen::VectorXd& guess) {
  const double peak = guess.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return std::nullopt;
  std::optional<Polished> best;
  for (const double rel : {0.0, 1e-8, 1e-6, 1e-4, 1e-2}) {
    auto p = polish_on(sys, guess, rel * peak);
    if (!p) continue;
    if (p->dual_violation <= 1.0 + 1e-9) return p;
    if (!best || p->dual_violation < best->dual_violation) best = std::move(p);
  }
  return best;
}

BpdnSolution zero_solution(const StackedSystem& sys) {
  BpdnSolution sol;
  sol.s = Eigen::VectorXd::Zero(sys.a.cols());
  sol.status = BpdnStatus::optimal;
  sol.objective = 0.0;
  sol.residual_norm = sys.b.norm();
  sol.dual_bound = 0.0;
  sol.gap = 0.0;
  return sol;
}

BpdnSolution infeasible_solution(const StackedSystem& sys) {
  BpdnSolution sol;
  sol.s = Eigen::VectorXd::Zero(sys.a.cols());
  sol.status = BpdnStatus::infeasible;
  sol.residual_norm = sys.b.norm();
  sol.objective = 0.0;
  sol.dual_bound = std::numeric_limits<double>::infinity();
  sol.gap = 0.0;
  return sol;
}

}  // namespace

void BpdnProblem::validate() const {
  if (!(radius >= 0.0)) throw ContractError("BPDN radius must be non-negative");
  if (y.size() != op.row_count()) throw ContractError("BPDN data length does not match rows");
  if (op.row_count() < 1) throw ContractError("BPDN needs at least one sample");
}

std::string to_string(BpdnStatus status) {
  switch (status) {
    case BpdnStatus::optimal: return "optimal";
    case BpdnStatus::infeasible: return "infeasible";
    case BpdnStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

StackedSystem stack(const BpdnProblem& p) {
  p.validate();
  const Eigen::MatrixXcd a = p.op.dense();
  const Eigen::Index m = a.rows();
  StackedSystem sys;
  sys.a.resize(2 * m, a.cols());
  sys.a.topRows(m) = a.real();
  sys.a.bottomRows(m) = a.imag();
  sys.b.resize(2 * m);
  sys.b.head(m) = p.y.real();
  sys.b.tail(m) = p.y.imag();
  sys.radius = p.radius;
  sys.nonnegative = p.nonnegative;
  return sys;
}

bool structurally_infeasible(const StackedSystem& sys) {
  const Eigen::VectorXd ls = sys.a.completeOrthogonalDecomposition().solve(sys.b);
  return (sys.a * ls - sys.b).norm() > sys.radius + 1e-9;
}

double dual_bound(const StackedSystem& sys, const Eigen::VectorXd& lambda) {
  if (lambda.size() != sys.b.size() || lambda.squaredNorm() == 0.0) return 0.0;
  const Eigen::VectorXd at = sys.a.transpose() * lambda;
  double scale = sys.nonnegative ? std::max(0.0, (-at).maxCoeff()) : at.cwiseAbs().maxCoeff();
  scale = std::max(1.0, scale);
  const Eigen::VectorXd l = lambda / scale;
  return -l.dot(sys.b) - sys.radius * l.norm();
}

BpdnSolution solve_bpdn(const BpdnProblem& p, const SolverOptions& opts) {
  return solve_bpdn(stack(p), opts);
}

BpdnSolution solve_bpdn(const StackedSystem& sys, const SolverOptions& opts) {
  if (opts.max_iter < 1 || !(opts.abs_tol > 0) || !(opts.rel_tol > 0) || !(opts.penalty > 0))
    throw ConfigError("solver options must be positive");
  if (sys.b.norm() <= sys.radius) return zero_solution(sys);

  const Eigen::MatrixXd& a = sys.a;
  const Eigen::VectorXd& b = sys.b;
  const Eigen::Index n = a.cols();
  const Eigen::Index m = a.rows();

  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  {
    const Eigen::VectorXd ls = cod.solve(b);
    if ((a * ls - b).norm() > sys.radius + 1e-9 && !sys.nonnegative) return infeasible_solution(sys);
  }

  // (I + A^T A)^{-1} q = q - A^T (I + A A^T)^{-1} A q when m < n.
  const bool small_gram = m < n;
  Eigen::LLT<Eigen::MatrixXd> gram;
  if (small_gram) {
    gram.compute(Eigen::MatrixXd::Identity(m, m) + a * a.transpose());
  } else {
    gram.compute(Eigen::MatrixXd::Identity(n, n) + a.transpose() * a);
  }
  auto solve_s = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
    if (small_gram) return q - a.transpose() * gram.solve(a * q);
    return gram.solve(q);
  };

  double rho = opts.penalty;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = project_ball(-b, sys.radius);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m);

  BpdnSolution sol;
  sol.status = BpdnStatus::max_iter;
  const double sqrt_p = std::sqrt(static_cast<double>(n + m));
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    s = solve_s(w - u + a.transpose() * (z + b - v));
    const Eigen::VectorXd as = a * s;

    const Eigen::VectorXd w_old = w;
    const Eigen::VectorXd z_old = z;
    w = shrink(s + u, 1.0 / rho, sys.nonnegative);
    z = project_ball(as - b + v, sys.radius);

    const Eigen::VectorXd r1 = s - w;
    const Eigen::VectorXd r2 = as - b - z;
    u += r1;
    v += r2;

    const double primal = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
    const double dual = rho * ((w - w_old) + a.transpose() * (z - z_old)).norm();
    const double eps_pri =
        sqrt_p * opts.abs_tol +
        opts.rel_tol * std::max({std::sqrt(s.squaredNorm() + as.squaredNorm()),
                                 std::sqrt(w.squaredNorm() + z.squaredNorm()), b.norm()});
    const double eps_dual = sqrt_n * opts.abs_tol + opts.rel_tol * rho * (u + a.transpose() * v).norm();
    sol.primal_residual = primal;
    sol.dual_residual = dual;
    if (primal <= eps_pri && dual <= eps_dual) {
      sol.status = BpdnStatus::optimal;
      ++it;
      break;
    }
    if ((it + 1) % 10 == 0 && it >= 19) {
      if (auto exact = polish(sys, w); exact && exact->dual_violation <= 1.0 + 1e-9) {
        sol.iterations = it + 1;
        sol.status = BpdnStatus::optimal;
        sol.s = std::move(exact->s);
        finalize(sys, sol, exact->lambda);
        return sol;
      }
    }
    if ((it + 1) % 10 == 0) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u /= 2.0;
        v /= 2.0;
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u *= 2.0;
        v *= 2.0;
      }
    }
  }
  sol.iterations = it;

  sol.s = pull_feasible(sys, w, feasible_anchor(sys, cod, w));
  const Eigen::VectorXd lambda = rho * v;
  finalize(sys, sol, lambda);
  // A sign-consistent polished point is feasible by construction; keep it when
  // its objective is lower, and report the better of the two dual bounds.
  if (auto exact = polish(sys, w)) {
    const double bound = std::max(sol.dual_bound, dual_bound(sys, exact->lambda));
    if (exact->s.lpNorm<1>() <= sol.objective) {
      const BpdnStatus status = sol.status;
      sol.s = std::move(exact->s);
      finalize(sys, sol, exact->lambda);
      sol.status = status;
    }
    sol.dual_bound = bound;
    sol.gap = sol.objective - bound;
  }
  if (sol.status == BpdnStatus::optimal && sol.residual_norm > sys.radius + feasibility_slack(sys))
    sol.status = BpdnStatus::max_iter;
  return sol;
}

BpdnSolution reference_solve_bpdn(const BpdnProblem& p, double tol) {
  return reference_solve_bpdn(stack(p), tol);
}

BpdnSolution reference_solve_bpdn(const StackedSystem& sys, double tol, int max_iter) {
  if (sys.b.norm() <= sys.radius) return zero_solution(sys);
  const Eigen::MatrixXd& a = sys.a;
  const Eigen::VectorXd& b = sys.b;
  const Eigen::Index n = a.cols();
  const Eigen::Index m = a.rows();

  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  {
    const Eigen::VectorXd ls = cod.solve(b);
    if ((a * ls - b).norm() > sys.radius + 1e-9 && !sys.nonnegative) return infeasible_solution(sys);
  }

  // Pock-Chambolle diagonal steps (alpha = 1): tau_k = 1 / sum_i |A_ik|; a
  // single dual step sigma = 1 / max_i sum_k |A_ik| keeps the ball prox exact.
  const Eigen::MatrixXd abs_a = a.cwiseAbs();
  const Eigen::VectorXd tau = abs_a.colwise().sum().transpose().cwiseMax(1e-12).cwiseInverse();
  const double sigma = 1.0 / std::max(1e-12, abs_a.rowwise().sum().maxCoeff());

  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd at_lambda = Eigen::VectorXd::Zero(n);

  BpdnSolution sol;
  sol.status = BpdnStatus::max_iter;
  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::VectorXd s_new(n);
    {
      const Eigen::VectorXd v = s - tau.cwiseProduct(at_lambda);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double x = v(k);
        const double kap = tau(k);
        double r = x > kap ? x - kap : (x < -kap ? x + kap : 0.0);
        if (sys.nonnegative && r < 0.0) r = 0.0;
        s_new(k) = r;
      }
    }
    const Eigen::VectorXd bar = 2.0 * s_new - s;
    s = std::move(s_new);
    // prox of sigma g*, g = indicator of {q : ||q - b|| <= radius}.
    const Eigen::VectorXd q = lambda + sigma * (a * bar);
    const Eigen::VectorXd center = q / sigma - b;
    lambda = q - sigma * (b + project_ball(center, sys.radius));
    at_lambda = a.transpose() * lambda;

    if ((it + 1) % 50 == 0) {
      const double obj = s.lpNorm<1>();
      const double viol = std::max(0.0, (a * s - b).norm() - sys.radius);
      const double lower = dual_bound(sys, lambda);
      sol.primal_residual = viol;
      sol.dual_residual = obj - lower;
      if (viol <= tol * (1.0 + b.norm()) && obj - lower <= tol * (1.0 + obj)) {
        sol.status = BpdnStatus::optimal;
        ++it;
        break;
      }
    }
  }
  sol.iterations = it;
  sol.s = pull_feasible(sys, s, feasible_anchor(sys, cod, s));
  finalize(sys, sol, lambda);
  if (sol.status == BpdnStatus::optimal && sol.residual_norm > sys.radius + feasibility_slack(sys))
    sol.status = BpdnStatus::max_iter;
  return sol;
}

}  // namespace csqpe
