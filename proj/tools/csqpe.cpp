#include "csqpe/bench.hpp"
#include "csqpe/config.hpp"
#include "csqpe/errors.hpp"
#include "csqpe/oracle.hpp"
#include "csqpe/signal.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace csqpe;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string suite = "all";
  std::optional<std::string> model;
  std::optional<double> alpha;
  std::string times = "0..64";
  std::optional<std::int64_t> mh;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

RunConfig load_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.model) c.model.name = *o.model;
  if (o.alpha) c.model.alpha = *o.alpha;
  return c;
}

int cmd_estimate(const Options& o) {
  if (o.config.empty()) throw ConfigError("estimate needs --config");
  RunConfig c = load_config(o);
  if (c.algorithm != "cs_qpe") throw ConfigError("estimate runs cs_qpe; use `baseline` for " + c.algorithm);
  if (!c.estimator) throw ConfigError("config: missing required section 'estimator'");
  c.estimator->threads = o.threads;
  const ModelInstance m = build_model(c.model);
  const EstimateReport rep = run_cs_qpe(*c.estimator, spectrum_source(m.spectrum), Rng(c.seed));
  Json doc = {{"algorithm", "cs_qpe"}, {"model", c.model.name}, {"alpha", c.model.alpha},
              {"seed", c.seed}, {"e0", m.e0}};
  doc["e_star_original"] = rep.e_star ? Json(m.to_original(*rep.e_star)) : Json(nullptr);
  doc["abs_error"] = rep.e_star ? Json(std::abs(*rep.e_star - m.e0)) : Json(nullptr);
  doc["report"] = to_json(rep);
  emit(doc.dump(2) + "\n", o.out);
  return 0;
}

int cmd_baseline(const Options& o) {
  if (o.config.empty()) throw ConfigError("baseline needs --config");
  const RunConfig c = load_config(o);
  if (c.algorithm == "cs_qpe") throw ConfigError("baseline needs \"algorithm\": ml_qcels, mm_qcels or qmegs");
  if (!c.baseline) throw ConfigError("config: missing required section 'baseline'");
  const ModelInstance m = build_model(c.model);
  const ContinuousSource source = continuous_spectrum_source(m.spectrum, c.baseline->noiseless);
  const Rng rng(c.seed);
  BaselineResult res;
  switch (parse_baseline(c.algorithm)) {
    case BaselineAlgorithm::ml_qcels: res = ml_qcels(source, c.baseline->ml, rng); break;
    case BaselineAlgorithm::mm_qcels: res = mm_qcels(source, c.baseline->mm, rng); break;
    case BaselineAlgorithm::qmegs: res = qmegs(source, c.baseline->qmegs, rng); break;
  }
  Json doc = {{"algorithm", c.algorithm}, {"model", c.model.name}, {"alpha", c.model.alpha},
              {"seed", c.seed}, {"e0", m.e0},
              {"estimate_original", m.to_original(res.estimate)},
              {"abs_error", std::abs(res.estimate - m.e0)}};
  doc["report"] = to_json(res);
  emit(doc.dump(2) + "\n", o.out);
  return 0;
}

int cmd_bench(const Options& o) {
  if (o.config.empty()) throw ConfigError("bench needs --spec");
  SweepSpec spec = load_sweep_spec(o.config);
  if (o.seed) spec.seed = *o.seed;
  spec.threads = o.threads;
  const auto cells = run_sweep(spec);
  if (o.out.empty()) {
    write_csv(std::cout, cells);
  } else {
    write_outputs(o.out, spec, cells);
  }
  return 0;
}

int cmd_verify(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(42);
  Json arr = Json::array();
  for (const auto& r : run_suite(o.suite, Rng(seed), o.threads)) arr.push_back(to_json(r));
  emit(arr.dump(2) + "\n", o.out);
  return 0;
}

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw ConfigError("--times expects a..b");
  try {
    std::size_t used = 0;
    const std::string a = s.substr(0, dots), b = s.substr(dots + 2);
    const std::int64_t lo = std::stoll(a, &used);
    if (used != a.size()) throw ConfigError("--times expects a..b");
    const std::int64_t hi = std::stoll(b, &used);
    if (used != b.size()) throw ConfigError("--times expects a..b");
    if (lo < 0 || hi <= lo) throw ConfigError("--times needs 0 <= a < b");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("--times expects integers a..b");
  }
}

int cmd_signal(const Options& o) {
  const RunConfig c = load_config(o);
  const auto [lo, hi] = parse_range(o.times);
  SampleSet rows;
  rows.n = hi;
  rows.ratio = 1.0;
  for (std::int64_t t = lo; t < hi; ++t) rows.indices.push_back(t);
  ShotPolicy policy;
  double tau = 1.0;
  if (c.estimator) {
    policy = c.estimator->shot_policy();
    tau = c.estimator->tau;
  }
  if (o.mh) {
    if (*o.mh < 1) throw ConfigError("--mh must be at least 1");
    policy.m_h_override = *o.mh;
  }
  const ModelInstance m = build_model(c.model);
  const Acquisition acq = acquire(rows, tau, m.spectrum, policy, Rng(c.seed));
  std::ostringstream text;
  acq.series.write(text);
  emit(text.str(), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed-sensing quantum phase estimation toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed (overrides the config seed)");
    sub->add_option("--threads", o.threads,
                    "Worker threads (default: $CSQPE_THREADS, else 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Write output here instead of stdout");
  };

  auto* estimate = app.add_subcommand("estimate", "Run the compressed-sensing estimator once");
  estimate->add_option("--config", o.config, "Run config (JSON)")->check(CLI::ExistingFile);
  estimate->add_option("--model", o.model, "Override the config model");
  estimate->add_option("--alpha", o.alpha, "Override the initial-state alpha");
  add_common(estimate);

  auto* baseline = app.add_subcommand("baseline", "Run one baseline estimator");
  baseline->add_option("--config", o.config, "Run config (JSON)")->check(CLI::ExistingFile);
  baseline->add_option("--model", o.model, "Override the config model");
  baseline->add_option("--alpha", o.alpha, "Override the initial-state alpha");
  add_common(baseline);

  auto* bench = app.add_subcommand("bench", "Parameter sweep; writes results.csv/json to --out");
  bench->add_option("--spec,--config", o.config, "Sweep spec (JSON)")->check(CLI::ExistingFile);
  add_common(bench);

  auto* verify = app.add_subcommand("verify", "Run numeric verification suites");
  verify->add_option("--suite", o.suite, "Suite name or 'all'");
  add_common(verify);

  auto* signal = app.add_subcommand("signal", "Dump a simulated time series");
  signal->add_option("--config", o.config, "Run config (JSON) for model and shots")
      ->check(CLI::ExistingFile);
  signal->add_option("--model", o.model, "tfi8, fh4 or custom");
  signal->add_option("--alpha", o.alpha, "Initial-state alpha");
  signal->add_option("--times", o.times, "Half-open index range a..b");
  signal->add_option("--mh", o.mh, "Hadamard-test shots per point");
  add_common(signal);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*estimate) return cmd_estimate(o);
    if (*baseline) return cmd_baseline(o);
    if (*bench) return cmd_bench(o);
    if (*verify) return cmd_verify(o);
    if (*signal) return cmd_signal(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
