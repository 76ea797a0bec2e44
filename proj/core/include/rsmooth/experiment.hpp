#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsmooth/solver.hpp"

namespace rsmooth {

/// A sweep over (n, r, lambda, seed) cells and a list of algorithms.
struct ExperimentConfig {
  std::string problem = "spca";  ///< "spca" or "cm"
  Index m = 5000;
  std::vector<Index> n{200};
  std::vector<Index> r{5};
  std::vector<double> lambda{0.4};
  std::vector<Algorithm> algorithms{Algorithm::Rsg};
  std::optional<double> tol;  ///< default 1e-8 n r per cell
  Index max_iters = 1000;
  Index rsub_max_iters = 10'000;
  std::vector<std::uint64_t> seeds{1};
  Index batches = 100;
  StepMode step_mode = StepMode::Practical;
  std::optional<double> step_scale;
  std::optional<double> mu0;
  std::optional<double> reference_objective;
  double cm_length = 50.0;
  int jobs = 1;
  std::filesystem::path out = "rsmooth-out";
  bool timing = true;  ///< write wall time into the per-run CSVs

  /// Throws ConfigurationError naming the offending field.
  void validate() const;
};

/// Parses a JSON object; unknown keys and wrongly typed values raise
/// ConfigurationError naming the field. Missing keys keep their defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& cfg);

struct RunSummary {
  Index n = 0;
  Index r = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Rsg;
  double objective = 0.0;  ///< phi at the last iterate
  double milliseconds = 0.0;
  Index iterations = 0;
  StopReason stop_reason = StopReason::MaxIters;
  std::string csv;  ///< path relative to the output directory
  std::string instance_hash;
  nlohmann::json summary;
};

struct TableRow {
  Index n = 0;
  Index r = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::vector<const RunSummary*> runs;  ///< in config algorithm order
  std::size_t best = 0;                 ///< index into runs of the fastest run
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunSummary> runs;  ///< ordered by cell, then algorithm
  std::vector<TableRow> table;
  std::vector<double> win_percentages;  ///< per algorithm, sums to 100
};

/// Runs every (cell, algorithm) pair and writes runs/*.csv, table.md,
/// table.csv, manifest.json and instances/ under cfg.out.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Re-runs a saved experiment from the instances stored in `from`, writing to
/// `out`. With `override_cfg`, that configuration replaces the recorded one;
/// its seeds must match the stored instances (IntegrityError otherwise).
ExperimentResult replay_experiment(const std::filesystem::path& from,
                                   const std::filesystem::path& out,
                                   std::optional<ExperimentConfig> override_cfg = std::nullopt);

/// Reads and validates the configuration recorded in `dir`/manifest.json.
ExperimentConfig load_manifest_config(const std::filesystem::path& dir);

}  // namespace rsmooth
