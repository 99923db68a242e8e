#pragma once

#include "csqpe/baselines.hpp"
#include "csqpe/bench.hpp"
#include "csqpe/estimator.hpp"
#include "csqpe/hamiltonians.hpp"
#include "csqpe/oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace csqpe {

using Json = nlohmann::ordered_json;

// "tfi8", "fh4" or "custom" (dense matrix loaded from matrix_file).
struct ModelSpec {
  std::string name = "tfi8";
  double alpha = 0.125;
  int levels = 10;
  std::string matrix_file;
};

struct ModelInstance {
  Spectrum spectrum;
  double scale = 1.0;
  double shift = 0.0;
  double e0 = 0.0;

  double to_original(double energy) const { return (energy - shift) / scale; }
};

// Normalized, shifted model with the alpha-family initial state.
ModelInstance build_model(const ModelSpec& spec);

struct BaselineSection {
  double t_max = 100.0;
  bool noiseless = false;
  MlQcelsParams ml;
  MmQcelsParams mm;
  QmegsParams qmegs;
};

// One JSON document:
//   {"seed", "model", "alpha", "levels", "matrix_file", "algorithm",
//    "estimator": {...}, "solver": {...}, "baseline": {...}, "bench": {...}}
// Unknown keys anywhere raise ConfigError.
struct RunConfig {
  std::uint64_t seed = 0;
  ModelSpec model;
  std::string algorithm = "cs_qpe";
  std::optional<EstimatorConfig> estimator;
  std::optional<BaselineSection> baseline;
  std::optional<SweepSpec> bench;
};

RunConfig parse_run_config(const Json& doc);
RunConfig load_run_config(const std::string& path);

// Accepts either a bare sweep document or a run config with a "bench" section.
SweepSpec parse_sweep_spec(const Json& doc);
SweepSpec load_sweep_spec(const std::string& path);

Json load_json_file(const std::string& path);

Json to_json(const RuntimeLedger& ledger);
Json to_json(const EstimateReport& report);
Json to_json(const BaselineResult& result);
Json to_json(const LemmaReport& report);

}  // namespace csqpe
