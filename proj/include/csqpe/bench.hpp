#pragma once

#include "csqpe/rng.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace csqpe {

// floor(100 * 1.4^n), exact in integers.
std::int64_t budget_step(int n);

struct SweepSpec {
  std::vector<std::int64_t> t_grid;
  std::vector<double> alphas{0.125, 0.25, 0.5};
  std::vector<std::string> models{"tfi8", "fh4"};
  // cs_qpe, ml_qcels, mm_qcels, qmegs
  std::vector<std::string> algorithms{"cs_qpe"};
  int trials_per_cell = 20;
  std::uint64_t seed = 0;
  // Initial-state family size.
  int levels = 10;
  // 0 selects default_thread_count().
  std::size_t threads = 0;

  SweepSpec();
  // Throws ConfigError before any work is done.
  void validate() const;
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::optional<double> estimate;
  // |E* - E0| in normalized units and in the original Hamiltonian's units.
  double error = 0.0;
  double error_original = 0.0;
  bool failed = false;
  std::string status;
  double t_total = 0.0;
  double t_max = 0.0;
  std::int64_t n_samples = 0;
};

struct CellResult {
  std::string model;
  double alpha = 0.0;
  std::string algorithm;
  std::int64_t n = 0;
  double e0 = 0.0;
  double mean_abs_error = 0.0;
  double median_abs_error = 0.0;
  double mean_abs_error_original = 0.0;
  double median_abs_error_original = 0.0;
  std::int64_t failure_count = 0;
  double mean_t_total = 0.0;
  // Largest T_max over the cell's trials.
  double t_max = 0.0;
  double mean_n_samples = 0.0;
  std::vector<TrialResult> trials;
};

// Cells ordered model, alpha, algorithm, N (spec order). Failed trials count
// with error pi (the largest phase distance).
std::vector<CellResult> run_sweep(const SweepSpec& spec);

// Seed of one trial: a hash of the spec seed, the cell key and the index.
std::uint64_t trial_seed(std::uint64_t seed, const std::string& cell_key, int trial);
std::string cell_key(const std::string& model, double alpha, const std::string& algorithm,
                     std::int64_t n);

struct SampleProfileRow {
  std::string model;
  double alpha = 0.0;
  std::string algorithm;
  std::int64_t n = 0;
  double mean_distinct_times = 0.0;
  double mean_t_total = 0.0;
  double t_max = 0.0;
};

std::vector<SampleProfileRow> sample_count_profile(const SweepSpec& spec);
std::vector<SampleProfileRow> sample_count_profile(const std::vector<CellResult>& cells);

// Least-squares slope of log(median error) against log(T_max) over the cells
// of one (model, alpha, algorithm) series.
double heisenberg_slope(const std::vector<CellResult>& series);

void write_csv(std::ostream& out, const std::vector<CellResult>& cells);
void write_json(std::ostream& out, const SweepSpec& spec, const std::vector<CellResult>& cells);
// results.csv, results.json and one plot-data file per series.
void write_outputs(const std::string& dir, const SweepSpec& spec,
                   const std::vector<CellResult>& cells);

}  // namespace csqpe
