#include "csqpe/baselines.hpp"

#include "csqpe/errors.hpp"

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

namespace csqpe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Objective1d = std::function<double(double)>;
using ObjectiveNd = std::function<double(const Eigen::VectorXd&)>;

double call_1d(double x, void* params) { return (*static_cast<Objective1d*>(params))(x); }

double call_nd(const gsl_vector* v, void* params) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) x(static_cast<Eigen::Index>(i)) = gsl_vector_get(v, i);
  return (*static_cast<ObjectiveNd*>(params))(x);
}

struct GslErrorsOff {
  gsl_error_handler_t* previous = gsl_set_error_handler_off();
  ~GslErrorsOff() { gsl_set_error_handler(previous); }
};

// Brent's method on [lo, hi] around an interior point with f(x0) below both ends.
double brent_minimize(Objective1d f, double lo, double x0, double hi) {
  const GslErrorsOff guard;
  std::unique_ptr<gsl_min_fminimizer, decltype(&gsl_min_fminimizer_free)> solver(
      gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent), gsl_min_fminimizer_free);
  gsl_function fn{&call_1d, &f};
  if (gsl_min_fminimizer_set(solver.get(), &fn, x0, lo, hi) != GSL_SUCCESS) return x0;
  for (int it = 0; it < 200; ++it) {
    if (gsl_min_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    const double a = gsl_min_fminimizer_x_lower(solver.get());
    const double b = gsl_min_fminimizer_x_upper(solver.get());
    if (gsl_min_test_interval(a, b, 1e-14, 0.0) == GSL_SUCCESS) break;
  }
  return gsl_min_fminimizer_x_minimum(solver.get());
}

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
};

SimplexResult nelder_mead(ObjectiveNd f, const Eigen::VectorXd& x0, double step, int max_iter) {
  const GslErrorsOff guard;
  const auto n = static_cast<std::size_t>(x0.size());
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
      gsl_multimin_fminimizer_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> steps(gsl_vector_alloc(n),
                                                                gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, x0(static_cast<Eigen::Index>(i)));
  gsl_vector_set_all(steps.get(), step);
  gsl_multimin_function fn{&call_nd, n, &f};
  gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), steps.get());

  SimplexResult out;
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(solver.get());
    if (gsl_multimin_test_size(size, 1e-11) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(solver.get());
  out.x.resize(x0.size());
  for (std::size_t i = 0; i < n; ++i) out.x(static_cast<Eigen::Index>(i)) = gsl_vector_get(best, i);
  out.value = gsl_multimin_fminimizer_minimum(solver.get());
  return out;
}

// Least-squares amplitudes for fixed energies: min_r ||V r - y||, V_tk = e^{-i E_k t}.
struct ModeFit {
  Eigen::VectorXcd r;
  double cost = 0.0;
};

ModeFit fit_modes(std::span<const double> times, const Eigen::VectorXcd& y,
                  const Eigen::VectorXd& energies) {
  const auto m = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXcd v(m, energies.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < energies.size(); ++k)
      v(i, k) = std::polar(1.0, -energies(k) * times[static_cast<std::size_t>(i)]);
  }
  ModeFit fit;
  fit.r = v.colPivHouseholderQr().solve(y);
  fit.cost = (v * fit.r - y).squaredNorm() / static_cast<double>(m);
  return fit;
}

Eigen::VectorXcd to_vector(const std::vector<cplx>& values) {
  Eigen::VectorXcd y(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) y(static_cast<Eigen::Index>(i)) = values[i];
  return y;
}

// Greedy start: take the matched-filter peak, fit, subtract, repeat.
Eigen::VectorXd greedy_peaks(std::span<const double> times, const Eigen::VectorXcd& y, int k,
                             double span) {
  const int grid = std::clamp(static_cast<int>(std::ceil(8.0 * span)), 64, 1 << 14);
  Eigen::VectorXd found(k);
  Eigen::VectorXcd residual = y;
  std::vector<cplx> values(static_cast<std::size_t>(y.size()));
  for (int m = 0; m < k; ++m) {
    for (Eigen::Index i = 0; i < y.size(); ++i) values[static_cast<std::size_t>(i)] = residual(i);
    double best = -1.0, best_e = 0.0;
    for (int g = 0; g < grid; ++g) {
      const double e = kTwoPi * (g + 0.5) / grid;
      const double v = matched_filter(times, values, e);
      if (v > best) {
        best = v;
        best_e = e;
      }
    }
    found(m) = best_e;
    residual = y - [&] {
      const Eigen::VectorXd head = found.head(m + 1);
      const auto mm = static_cast<Eigen::Index>(times.size());
      Eigen::MatrixXcd v(mm, m + 1);
      for (Eigen::Index i = 0; i < mm; ++i)
        for (Eigen::Index c = 0; c <= m; ++c)
          v(i, c) = std::polar(1.0, -head(c) * times[static_cast<std::size_t>(i)]);
      return Eigen::VectorXcd(v * v.colPivHouseholderQr().solve(y));
    }();
  }
  return found;
}

std::int64_t floor_4ln(std::int64_t t_n) {
  return static_cast<std::int64_t>(std::floor(4.0 * std::log(static_cast<double>(t_n))));
}

}  // namespace

ContinuousSource continuous_spectrum_source(Spectrum spectrum, bool noiseless) {
  spectrum.validate();
  return [spectrum = std::move(spectrum), noiseless](std::span<const double> times,
                                                     std::int64_t shots, const Rng& rng) {
    return acquire_at(times, spectrum, shots, noiseless, rng);
  };
}

std::string to_string(BaselineAlgorithm algorithm) {
  switch (algorithm) {
    case BaselineAlgorithm::ml_qcels: return "ml_qcels";
    case BaselineAlgorithm::mm_qcels: return "mm_qcels";
    case BaselineAlgorithm::qmegs: return "qmegs";
  }
  return "unknown";
}

BaselineAlgorithm parse_baseline(const std::string& name) {
  if (name == "ml_qcels") return BaselineAlgorithm::ml_qcels;
  if (name == "mm_qcels") return BaselineAlgorithm::mm_qcels;
  if (name == "qmegs") return BaselineAlgorithm::qmegs;
  throw ConfigError("unknown baseline algorithm: " + name);
}

double matched_filter(std::span<const double> times, std::span<const cplx> values,
                      double energy) {
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) acc += values[i] * std::polar(1.0, energy * times[i]);
  const double m = static_cast<double>(times.size());
  return std::norm(acc) / (m * m);
}

BaselineResult ml_qcels(const ContinuousSource& source, const MlQcelsParams& p, const Rng& rng) {
  if (p.n0 < 1 || p.shots < 1 || p.levels < 1 || p.grid < 3 || !(p.t_max > 0.0))
    throw ConfigError("ML-QCELS parameters must be positive (grid >= 3)");
  BaselineResult out;
  double e_hat = std::numbers::pi;
  cplx r_hat(0.0, 0.0);
  for (int j = 0; j < p.levels; ++j) {
    const double tau_j = p.t_max / (p.n0 * std::ldexp(1.0, p.levels - 1 - j));
    std::vector<double> times(static_cast<std::size_t>(p.n0));
    for (int n = 0; n < p.n0; ++n) times[static_cast<std::size_t>(n)] = (n + 1) * tau_j;
    const ContinuousAcquisition data = source(times, p.shots, rng.split({static_cast<std::uint64_t>(j)}));
    out.ledger.merge(data.ledger);

    // L(r, E) minimized over r in closed form leaves -|r(E)|^2 up to a constant.
    Objective1d cost = [&](double e) { return -matched_filter(times, data.values, e); };
    double lo = 0.0, hi = kTwoPi;
    if (j > 0) {
      const double half = std::numbers::pi / tau_j;
      lo = std::max(0.0, e_hat - half);
      hi = std::min(kTwoPi, e_hat + half);
    }
    if (!(hi - lo > 1e-14 * (1.0 + std::abs(e_hat)))) {
      out.warnings.push_back("ML-QCELS bracket collapsed at level " + std::to_string(j));
      break;
    }
    const double step = (hi - lo) / (p.grid - 1);
    int best = 0;
    double best_cost = cost(lo);
    for (int i = 1; i < p.grid; ++i) {
      const double c = cost(lo + i * step);
      if (c < best_cost) {
        best_cost = c;
        best = i;
      }
    }
    e_hat = lo + best * step;
    if (best > 0 && best < p.grid - 1) {
      const double refined = brent_minimize(cost, e_hat - step, e_hat, e_hat + step);
      if (cost(refined) <= best_cost) e_hat = refined;
    }
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) acc += data.values[i] * std::polar(1.0, e_hat * times[i]);
    r_hat = acc / static_cast<double>(times.size());
  }
  out.energies = {e_hat};
  out.amplitudes = {r_hat};
  out.estimate = e_hat;
  return out;
}

BaselineResult mm_qcels(const ContinuousSource& source, const MmQcelsParams& p, const Rng& rng) {
  if (p.k < 1 || p.n_t < p.k || p.shots < 1 || p.levels < 1 || p.starts < 1 ||
      !(p.gamma > 0.0) || !(p.t_max > 0.0))
    throw ConfigError("MM-QCELS parameters must be positive with n_t >= k");
  BaselineResult out;
  Eigen::VectorXd energies(p.k);
  for (int k = 0; k < p.k; ++k) energies(k) = kTwoPi * (k + 0.5) / p.k;
  ModeFit fit;
  bool warned = false;

  for (int j = 0; j < p.levels; ++j) {
    const double t_j = p.t_max / std::ldexp(1.0, p.levels - 1 - j);
    Rng time_rng = rng.split({static_cast<std::uint64_t>(j), 0});
    std::vector<double> times(static_cast<std::size_t>(p.n_t));
    for (double& t : times) t = time_rng.uniform(0.0, p.gamma * t_j);
    const ContinuousAcquisition data =
        source(times, p.shots, rng.split({static_cast<std::uint64_t>(j), 1}));
    out.ledger.merge(data.ledger);
    const Eigen::VectorXcd y = to_vector(data.values);

    ObjectiveNd cost = [&](const Eigen::VectorXd& e) { return fit_modes(times, y, e).cost; };
    const double width = std::min(std::numbers::pi, std::numbers::pi / (p.gamma * t_j));
    Rng start_rng = rng.split({static_cast<std::uint64_t>(j), 2});
    SimplexResult best;
    best.value = std::numeric_limits<double>::infinity();
    bool best_converged = true;
    for (int s = 0; s < p.starts; ++s) {
      Eigen::VectorXd x0 = energies;
      if (s == 1) {
        x0 = greedy_peaks(times, y, p.k, p.gamma * t_j);
      } else if (s > 1) {
        for (Eigen::Index k = 0; k < x0.size(); ++k)
          x0(k) = std::clamp(x0(k) + start_rng.uniform(-width, width), 0.0, kTwoPi);
      }
      SimplexResult r = nelder_mead(cost, x0, 0.5 * width, 4000);
      if (r.value < best.value) {
        best_converged = r.converged;
        best = std::move(r);
      }
    }
    if (!best_converged && !warned) {
      out.warnings.push_back("MM-QCELS simplex did not converge; best iterate kept");
      warned = true;
    }
    energies = best.x;
    fit = fit_modes(times, y, energies);
  }

  std::vector<int> order(static_cast<std::size_t>(p.k));
  for (int k = 0; k < p.k; ++k) order[static_cast<std::size_t>(k)] = k;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return energies(a) < energies(b); });
  double biggest = -1.0;
  for (int k : order) {
    out.energies.push_back(energies(k));
    out.amplitudes.push_back(fit.r(k));
    if (std::abs(fit.r(k)) > biggest) {
      biggest = std::abs(fit.r(k));
      out.estimate = energies(k);
    }
  }
  return out;
}

BaselineResult qmegs(const ContinuousSource& source, const QmegsParams& p, const Rng& rng) {
  if (p.k < 1 || !(p.dx > 0.0) || !(p.alpha > 0.0) || p.n_samples < 1 || p.shots < 1 ||
      !(p.t_max > 0.0) || p.exclusion < 0.0)
    throw ConfigError("QMEGS parameters must be positive");
  BaselineResult out;
  Rng time_rng = rng.split({0});
  std::normal_distribution<double> normal(0.0, p.t_max / p.alpha);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(p.n_samples));
  while (static_cast<int>(times.size()) < p.n_samples) {
    const double t = normal(time_rng);
    if (std::abs(t) <= p.t_max) times.push_back(t);
  }
  const ContinuousAcquisition data = source(times, p.shots, rng.split({1}));
  out.ledger = data.ledger;

  const auto grid = static_cast<std::size_t>(std::ceil(1.0 / p.dx));
  std::vector<double> profile(grid);
  for (std::size_t i = 0; i < grid; ++i)
    profile[i] = matched_filter(times, data.values, kTwoPi * p.dx * static_cast<double>(i));
  std::vector<bool> excluded(grid, false);
  const double window = p.exclusion > 0.0 ? p.exclusion : 5.0 / p.t_max;

  for (int round = 0; round < p.k; ++round) {
    std::size_t best = grid;
    for (std::size_t i = 0; i < grid; ++i) {
      if (!excluded[i] && (best == grid || profile[i] > profile[best])) best = i;
    }
    if (best == grid) break;
    const double f = p.dx * static_cast<double>(best);
    out.energies.push_back(kTwoPi * f);
    for (std::size_t i = 0; i < grid; ++i) {
      double d = std::abs(p.dx * static_cast<double>(i) - f);
      d = std::min(d, 1.0 - d);
      if (d < window) excluded[i] = true;
    }
  }
  out.estimate = out.energies.front();
  return out;
}

MlQcelsParams ml_qcels_defaults(std::int64_t t_n) {
  MlQcelsParams p;
  p.levels = static_cast<int>(floor_4ln(t_n));
  p.t_max = static_cast<double>(t_n);
  return p;
}

MmQcelsParams mm_qcels_defaults(std::int64_t t_n) {
  MmQcelsParams p;
  p.levels = static_cast<int>(floor_4ln(t_n));
  p.t_max = static_cast<double>(t_n);
  return p;
}

QmegsParams qmegs_defaults(std::int64_t t_n) {
  QmegsParams p;
  p.n_samples = 10 + 2 * static_cast<int>(std::floor(std::log(2.0 * static_cast<double>(t_n))));
  p.t_max = static_cast<double>(t_n);
  return p;
}

}  // namespace csqpe
