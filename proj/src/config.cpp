#include "csqpe/config.hpp"

#include "csqpe/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace csqpe {

namespace {

// Reads keys from one JSON object and rejects whatever was not consumed.
class Section {
 public:
  Section(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return false;
    try {
      out = j_.at(key).template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
    return true;
  }

  template <typename T>
  void require(const std::string& key, T& out) {
    if (!get(key, out)) throw ConfigError(where_ + ": missing required key '" + key + "'");
  }

  const Json& child(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

SigmaTest parse_sigma_test(const Json& v) {
  if (v.is_number()) return SigmaTest::fixed(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "off") return SigmaTest::off();
    if (s == "auto") return SigmaTest::automatic();
  }
  throw ConfigError("estimator.sigma_test: expected a number, \"auto\" or \"off\"");
}

KRule parse_k_rule(const std::string& s) {
  if (s == "threshold") return KRule::threshold;
  if (s == "argmax") return KRule::argmax;
  throw ConfigError("estimator.k_rule: expected \"threshold\" or \"argmax\"");
}

SolverOptions parse_solver(const Json& j) {
  Section sec(j, "solver");
  SolverOptions o;
  sec.get("max_iter", o.max_iter);
  sec.get("abs_tol", o.abs_tol);
  sec.get("rel_tol", o.rel_tol);
  sec.get("penalty", o.penalty);
  sec.finish();
  if (o.max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
  if (!(o.abs_tol > 0.0 && o.rel_tol > 0.0 && o.penalty > 0.0))
    throw ConfigError("solver tolerances and penalty must be positive");
  return o;
}

EstimatorConfig parse_estimator(const Json& j) {
  Section sec(j, "estimator");
  EstimatorConfig c;
  sec.require("n", c.n);
  sec.get("s_sparsity", c.s_sparsity);
  sec.get("r", c.r);
  sec.get("tau", c.tau);
  sec.get("sigma_h", c.sigma_h);
  sec.get("sigma", c.sigma);
  if (sec.has("sigma_test")) c.sigma_test = parse_sigma_test(sec.child("sigma_test"));
  sec.get("delta", c.delta);
  sec.get("j_trials", c.j_trials);
  sec.get("p_min", c.p_min);
  std::int64_t m_h = 0;
  if (sec.get("m_h", m_h)) c.m_h_override = m_h;
  std::string rule;
  if (sec.get("k_rule", rule)) c.k_rule = parse_k_rule(rule);
  sec.get("eta", c.eta);
  sec.get("c0", c.c0);
  sec.get("nonnegative", c.nonnegative);
  sec.get("noiseless", c.noiseless);
  sec.finish();
  c.validate();
  return c;
}

BaselineSection parse_baseline_section(const Json& j, BaselineAlgorithm alg) {
  Section sec(j, "baseline");
  BaselineSection b;
  sec.require("t_max", b.t_max);
  if (!(b.t_max > 0.0)) throw ConfigError("baseline.t_max must be positive");
  sec.get("noiseless", b.noiseless);
  const auto t_n = static_cast<std::int64_t>(std::llround(b.t_max));
  switch (alg) {
    case BaselineAlgorithm::ml_qcels:
      b.ml = ml_qcels_defaults(std::max<std::int64_t>(t_n, 2));
      b.ml.t_max = b.t_max;
      sec.get("n0", b.ml.n0);
      sec.get("shots", b.ml.shots);
      sec.get("levels", b.ml.levels);
      sec.get("grid", b.ml.grid);
      if (b.ml.n0 < 1 || b.ml.shots < 1 || b.ml.levels < 1 || b.ml.grid < 2)
        throw ConfigError("baseline: ml_qcels parameters out of range");
      break;
    case BaselineAlgorithm::mm_qcels:
      b.mm = mm_qcels_defaults(std::max<std::int64_t>(t_n, 2));
      b.mm.t_max = b.t_max;
      sec.get("k", b.mm.k);
      sec.get("n_t", b.mm.n_t);
      sec.get("gamma", b.mm.gamma);
      sec.get("shots", b.mm.shots);
      sec.get("levels", b.mm.levels);
      sec.get("starts", b.mm.starts);
      if (b.mm.k < 1 || b.mm.n_t < 1 || !(b.mm.gamma > 0.0) || b.mm.shots < 1 ||
          b.mm.levels < 1 || b.mm.starts < 1)
        throw ConfigError("baseline: mm_qcels parameters out of range");
      break;
    case BaselineAlgorithm::qmegs:
      b.qmegs = qmegs_defaults(std::max<std::int64_t>(t_n, 1));
      b.qmegs.t_max = b.t_max;
      sec.get("k", b.qmegs.k);
      sec.get("dx", b.qmegs.dx);
      sec.get("alpha", b.qmegs.alpha);
      sec.get("n_samples", b.qmegs.n_samples);
      sec.get("shots", b.qmegs.shots);
      sec.get("exclusion", b.qmegs.exclusion);
      if (b.qmegs.k < 1 || !(b.qmegs.dx > 0.0) || !(b.qmegs.alpha > 0.0) ||
          b.qmegs.n_samples < 1 || b.qmegs.shots < 1 || b.qmegs.exclusion < 0.0)
        throw ConfigError("baseline: qmegs parameters out of range");
      break;
  }
  sec.finish();
  return b;
}

SweepSpec parse_bench(const Json& j, std::string where) {
  Section sec(j, std::move(where));
  SweepSpec s;
  sec.get("t_grid", s.t_grid);
  sec.get("alphas", s.alphas);
  sec.get("models", s.models);
  sec.get("algorithms", s.algorithms);
  sec.get("trials_per_cell", s.trials_per_cell);
  sec.get("seed", s.seed);
  sec.get("levels", s.levels);
  sec.finish();
  s.validate();
  return s;
}

}  // namespace

ModelInstance build_model(const ModelSpec& spec) {
  if (spec.name != "custom" && !spec.matrix_file.empty())
    throw ConfigError("matrix_file is only valid with model \"custom\"");
  if (spec.name == "custom" && spec.matrix_file.empty())
    throw ConfigError("model \"custom\" needs matrix_file");
  const NormalizedHamiltonian nh = normalize_and_shift(
      spec.name == "custom" ? load_matrix_file(spec.matrix_file) : build_named_model(spec.name));
  if (spec.levels < 1 || spec.levels > nh.hamiltonian.dim())
    throw ConfigError("levels must lie in [1, dim]");
  ModelInstance m;
  m.spectrum = spectrum_for_alpha(diagonalize(nh.hamiltonian).values, spec.alpha, spec.levels);
  m.scale = nh.scale;
  m.shift = nh.shift;
  m.e0 = m.spectrum.ground_energy();
  return m;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunConfig parse_run_config(const Json& doc) {
  Section sec(doc, "config");
  RunConfig c;
  sec.get("seed", c.seed);
  sec.get("model", c.model.name);
  sec.get("alpha", c.model.alpha);
  sec.get("levels", c.model.levels);
  sec.get("matrix_file", c.model.matrix_file);
  if (c.model.name != "tfi8" && c.model.name != "fh4" && c.model.name != "custom")
    throw ConfigError("unknown model: " + c.model.name);
  if (!(c.model.alpha > 0.0 && c.model.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  sec.get("algorithm", c.algorithm);
  if (c.algorithm != "cs_qpe") parse_baseline(c.algorithm);

  SolverOptions solver;
  if (sec.has("solver")) solver = parse_solver(sec.child("solver"));
  if (sec.has("estimator")) {
    c.estimator = parse_estimator(sec.child("estimator"));
    c.estimator->solver = solver;
  }
  if (sec.has("baseline")) {
    if (c.algorithm == "cs_qpe")
      throw ConfigError("baseline section requires a baseline \"algorithm\"");
    c.baseline = parse_baseline_section(sec.child("baseline"), parse_baseline(c.algorithm));
  }
  if (sec.has("bench")) c.bench = parse_bench(sec.child("bench"), "bench");
  sec.finish();
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(load_json_file(path)); }

SweepSpec parse_sweep_spec(const Json& doc) {
  if (doc.is_object() && doc.contains("bench")) {
    RunConfig c = parse_run_config(doc);
    if (!doc.at("bench").contains("seed")) c.bench->seed = c.seed;
    return *c.bench;
  }
  return parse_bench(doc, "spec");
}

SweepSpec load_sweep_spec(const std::string& path) { return parse_sweep_spec(load_json_file(path)); }

Json to_json(const RuntimeLedger& ledger) {
  return {{"t_total", ledger.t_total},
          {"t_max", ledger.t_max},
          {"n_distinct_times", ledger.n_distinct_times}};
}

Json to_json(const EstimateReport& r) {
  Json trials = Json::array();
  for (const auto& t : r.trial_log) {
    trials.push_back({{"nu", t.nu},
                      {"l1", t.l1},
                      {"solver_status", to_string(t.solver_status)},
                      {"iterations", t.iterations},
                      {"holdout", t.holdout},
                      {"passed", t.passed},
                      {"ell", t.ell}});
  }
  Json s = Json::array();
  for (Eigen::Index i = 0; i < r.s_star.size(); ++i) s.push_back(r.s_star(i));
  return {{"status", to_string(r.status)},
          {"j_star", r.j_star},
          {"nu_star", r.nu_star},
          {"k_set", r.k_set},
          {"e_star", r.e_star ? Json(*r.e_star) : Json(nullptr)},
          {"sigma_test", r.sigma_test},
          {"t1_size", r.t1_size},
          {"t2_size", r.t2_size},
          {"ledger", to_json(r.ledger)},
          {"warnings", r.warnings},
          {"trial_log", trials},
          {"s_star", s}};
}

Json to_json(const BaselineResult& r) {
  Json amps = Json::array();
  for (const auto& a : r.amplitudes) amps.push_back({a.real(), a.imag()});
  return {{"estimate", r.estimate},
          {"energies", r.energies},
          {"amplitudes", amps},
          {"ledger", to_json(r.ledger)},
          {"warnings", r.warnings}};
}

Json to_json(const LemmaReport& r) {
  Json details = Json::object();
  for (const auto& [k, v] : r.details) details[k] = v;
  return {{"lemma_id", r.lemma_id},
          {"trials", r.trials},
          {"violations", r.violations},
          {"worst_margin", std::isfinite(r.worst_margin) ? Json(r.worst_margin) : Json(nullptr)},
          {"fitted_constant", r.fitted_constant ? Json(*r.fitted_constant) : Json(nullptr)},
          {"details", details}};
}

}  // namespace csqpe
