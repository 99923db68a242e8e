#include "csqpe/bench.hpp"

#include "csqpe/baselines.hpp"
#include "csqpe/errors.hpp"
#include "csqpe/estimator.hpp"
#include "csqpe/hamiltonians.hpp"
#include "csqpe/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

namespace csqpe {

namespace {

constexpr double kFailureError = std::numbers::pi;

const std::set<std::string> kAlgorithms{"cs_qpe", "ml_qcels", "mm_qcels", "qmegs"};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct PreparedModel {
  double scale = 1.0;
  Eigen::VectorXd energies;
};

struct Task {
  std::size_t cell;
  int trial;
};

EstimatorConfig cs_qpe_config(std::int64_t n) {
  const double nd = static_cast<double>(n);
  EstimatorConfig c;
  c.n = n;
  c.s_sparsity = 1;
  c.r = std::min(1.0, 2.3 * std::log(nd) / nd);
  c.tau = 1.0;
  c.sigma = 0.2 * std::sqrt(2.3 * std::log(nd));
  c.j_trials = 100;
  c.m_h_override = 100;
  c.k_rule = KRule::argmax;
  c.sigma_test = SigmaTest::off();
  c.threads = 1;
  return c;
}

TrialResult run_trial(const std::string& algorithm, std::int64_t n, const Spectrum& spectrum,
                      std::uint64_t seed) {
  TrialResult out;
  out.seed = seed;
  const Rng rng(seed);
  RuntimeLedger ledger;
  if (algorithm == "cs_qpe") {
    const EstimateReport rep = run_cs_qpe(cs_qpe_config(n), spectrum_source(spectrum), rng);
    out.status = to_string(rep.status);
    out.estimate = rep.e_star;
    ledger = rep.ledger;
  } else {
    const ContinuousSource source = continuous_spectrum_source(spectrum);
    BaselineResult res;
    switch (parse_baseline(algorithm)) {
      case BaselineAlgorithm::ml_qcels: res = ml_qcels(source, ml_qcels_defaults(n), rng); break;
      case BaselineAlgorithm::mm_qcels: res = mm_qcels(source, mm_qcels_defaults(n), rng); break;
      case BaselineAlgorithm::qmegs: res = qmegs(source, qmegs_defaults(n), rng); break;
    }
    out.status = "ok";
    out.estimate = res.estimate;
    ledger = res.ledger;
  }
  out.t_total = ledger.t_total;
  out.t_max = ledger.t_max;
  out.n_samples = ledger.n_distinct_times;
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

std::int64_t budget_step(int n) {
  if (n < 0 || n > 20) throw ConfigError("budget step index out of range");
  std::int64_t num = 100, den = 1;
  for (int i = 0; i < n; ++i) {
    num *= 7;
    den *= 5;
  }
  return num / den;
}

SweepSpec::SweepSpec() {
  for (int n = 1; n <= 5; ++n) t_grid.push_back(budget_step(n));
}

void SweepSpec::validate() const {
  if (t_grid.empty() || alphas.empty() || models.empty() || algorithms.empty())
    throw ConfigError("sweep lists must be nonempty");
  if (trials_per_cell < 1) throw ConfigError("trials_per_cell must be at least 1");
  if (levels < 1) throw ConfigError("levels must be at least 1");
  for (const auto t : t_grid)
    if (t < 2) throw ConfigError("t_grid entries must be at least 2");
  for (const double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  for (const auto& m : models)
    if (m != "tfi8" && m != "fh4") throw ConfigError("unknown model: " + m);
  for (const auto& a : algorithms)
    if (!kAlgorithms.count(a)) throw ConfigError("unknown algorithm: " + a);
}

std::string cell_key(const std::string& model, double alpha, const std::string& algorithm,
                     std::int64_t n) {
  return model + "/" + num(alpha) + "/" + algorithm + "/" + std::to_string(n);
}

std::uint64_t trial_seed(std::uint64_t seed, const std::string& key, int trial) {
  return Rng(seed).split({fnv1a(key), static_cast<std::uint64_t>(trial)}).next_seed();
}

std::vector<CellResult> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::map<std::string, PreparedModel> models;
  for (const auto& m : spec.models) {
    if (models.count(m)) continue;
    const NormalizedHamiltonian nh = normalize_and_shift(build_named_model(m));
    models[m] = {nh.scale, diagonalize(nh.hamiltonian).values};
  }

  std::vector<CellResult> cells;
  std::vector<Spectrum> spectra;
  for (const auto& m : spec.models) {
    for (const double a : spec.alphas) {
      const Spectrum sp = spectrum_for_alpha(models[m].energies, a, spec.levels);
      for (const auto& alg : spec.algorithms) {
        for (const auto n : spec.t_grid) {
          CellResult c;
          c.model = m;
          c.alpha = a;
          c.algorithm = alg;
          c.n = n;
          c.e0 = sp.ground_energy();
          c.trials.resize(static_cast<std::size_t>(spec.trials_per_cell));
          cells.push_back(std::move(c));
          spectra.push_back(sp);
        }
      }
    }
  }

  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int t = 0; t < spec.trials_per_cell; ++t) tasks.push_back({c, t});

  parallel_for(tasks.size(), spec.threads, [&](std::size_t i) {
    CellResult& cell = cells[tasks[i].cell];
    const std::uint64_t seed =
        trial_seed(spec.seed, cell_key(cell.model, cell.alpha, cell.algorithm, cell.n),
                   tasks[i].trial);
    TrialResult r;
    try {
      r = run_trial(cell.algorithm, cell.n, spectra[tasks[i].cell], seed);
    } catch (const std::exception& e) {
      r.seed = seed;
      r.status = std::string("error: ") + e.what();
    }
    r.failed = !r.estimate.has_value();
    r.error = r.failed ? kFailureError : std::abs(*r.estimate - cell.e0);
    r.error_original = r.error / models.at(cell.model).scale;
    cell.trials[static_cast<std::size_t>(tasks[i].trial)] = r;
  });

  for (auto& cell : cells) {
    std::vector<double> err, err_orig;
    double t_total = 0.0, samples = 0.0;
    for (const auto& t : cell.trials) {
      err.push_back(t.error);
      err_orig.push_back(t.error_original);
      t_total += t.t_total;
      samples += static_cast<double>(t.n_samples);
      cell.t_max = std::max(cell.t_max, t.t_max);
      cell.failure_count += t.failed ? 1 : 0;
    }
    const double k = static_cast<double>(cell.trials.size());
    for (std::size_t i = 0; i < err.size(); ++i) {
      cell.mean_abs_error += err[i] / k;
      cell.mean_abs_error_original += err_orig[i] / k;
    }
    cell.median_abs_error = median(err);
    cell.median_abs_error_original = median(err_orig);
    cell.mean_t_total = t_total / k;
    cell.mean_n_samples = samples / k;
  }
  return cells;
}

std::vector<SampleProfileRow> sample_count_profile(const std::vector<CellResult>& cells) {
  std::vector<SampleProfileRow> rows;
  for (const auto& c : cells)
    rows.push_back({c.model, c.alpha, c.algorithm, c.n, c.mean_n_samples, c.mean_t_total, c.t_max});
  return rows;
}

std::vector<SampleProfileRow> sample_count_profile(const SweepSpec& spec) {
  return sample_count_profile(run_sweep(spec));
}

double heisenberg_slope(const std::vector<CellResult>& series) {
  if (series.size() < 2) throw ContractError("slope needs at least two cells");
  std::vector<double> x, y;
  for (const auto& c : series) {
    if (!(c.median_abs_error > 0.0) || !(c.t_max > 0.0))
      throw ContractError("slope needs positive errors and times");
    x.push_back(std::log(c.t_max));
    y.push_back(std::log(c.median_abs_error));
  }
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / k;
    my += y[i] / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ContractError("slope needs distinct T_max values");
  return sxy / sxx;
}

void write_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "model,alpha,algorithm,N,trials,mean_err,median_err,fail,mean_t_total,t_max,mean_samples\n";
  for (const auto& c : cells) {
    out << c.model << ',' << num(c.alpha) << ',' << c.algorithm << ',' << c.n << ','
        << c.trials.size() << ',' << num(c.mean_abs_error) << ',' << num(c.median_abs_error)
        << ',' << c.failure_count << ',' << num(c.mean_t_total) << ',' << num(c.t_max) << ','
        << num(c.mean_n_samples) << '\n';
  }
}

void write_json(std::ostream& out, const SweepSpec& spec, const std::vector<CellResult>& cells) {
  using nlohmann::json;
  json doc;
  doc["spec"] = {{"t_grid", spec.t_grid},       {"alphas", spec.alphas},
                 {"models", spec.models},       {"algorithms", spec.algorithms},
                 {"trials_per_cell", spec.trials_per_cell},
                 {"seed", spec.seed},           {"levels", spec.levels}};
  json arr = json::array();
  for (const auto& c : cells) {
    json trials = json::array();
    for (const auto& t : c.trials) {
      trials.push_back({{"seed", t.seed},
                        {"estimate", t.estimate ? json(*t.estimate) : json(nullptr)},
                        {"error", t.error},
                        {"error_original", t.error_original},
                        {"failed", t.failed},
                        {"status", t.status},
                        {"t_total", t.t_total},
                        {"t_max", t.t_max},
                        {"n_samples", t.n_samples}});
    }
    arr.push_back({{"model", c.model},
                   {"alpha", c.alpha},
                   {"algorithm", c.algorithm},
                   {"N", c.n},
                   {"e0", c.e0},
                   {"mean_err", c.mean_abs_error},
                   {"median_err", c.median_abs_error},
                   {"mean_err_original", c.mean_abs_error_original},
                   {"median_err_original", c.median_abs_error_original},
                   {"fail", c.failure_count},
                   {"mean_t_total", c.mean_t_total},
                   {"t_max", c.t_max},
                   {"mean_samples", c.mean_n_samples},
                   {"trials", trials}});
  }
  doc["cells"] = arr;
  out << doc.dump(2) << '\n';
}

void write_outputs(const std::string& dir, const SweepSpec& spec,
                   const std::vector<CellResult>& cells) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(root / "results.csv");
    write_csv(f, cells);
  }
  {
    auto f = open(root / "results.json");
    write_json(f, spec, cells);
  }
  std::map<std::string, std::vector<const CellResult*>> series;
  for (const auto& c : cells)
    series["plot_" + c.model + "_a" + num(c.alpha) + "_" + c.algorithm + ".dat"].push_back(&c);
  for (const auto& [name, list] : series) {
    auto f = open(root / name);
    f << "# N t_max mean_t_total mean_err median_err mean_err_original median_err_original "
         "mean_samples\n";
    for (const auto* c : list) {
      f << c->n << ' ' << num(c->t_max) << ' ' << num(c->mean_t_total) << ' '
        << num(c->mean_abs_error) << ' ' << num(c->median_abs_error) << ' '
        << num(c->mean_abs_error_original) << ' ' << num(c->median_abs_error_original) << ' '
        << num(c->mean_n_samples) << '\n';
    }
  }
}

}  // namespace csqpe
