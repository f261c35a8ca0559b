#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "addgp/data.hpp"
#include "addgp/metrics.hpp"
#include "addgp/models.hpp"
#include "addgp/online.hpp"

namespace addgp {

struct SyntheticSpec {
  std::size_t rows = 0;
  std::size_t features = 0;
};

struct ExperimentConfig {
  std::filesystem::path data;
  std::optional<SyntheticSpec> synthetic;
  LoadOptions load{};
  std::vector<ModelKind> models{ModelKind::kNN, ModelKind::kGP, ModelKind::kNAM, ModelKind::kAGP};
  OnlineConfig online{};
  double test_fraction = 0.2;
  double initial_fraction = 0.2;
  bool standardize = false;
  std::vector<double> window_grid{0.2, 0.5, 1.0};
  std::vector<double> al_grid{0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t repeat_seeds = 1;
  ModelSettings settings{};
  std::filesystem::path out = "results";
  bool verbose = false;

  void validate() const;
};

/// Loads (or generates) the data and splits it with a generator seeded by
/// `seed`; standardization uses initial-window statistics only.
StreamSplit prepare_split(const ExperimentConfig& config, std::uint64_t seed);

struct ImportanceSummary {
  std::vector<std::size_t> top_contributor;       // one pick per test point
  std::vector<std::size_t> top_variance_feature;  // one pick per test point
  std::vector<double> contributor_histogram;      // percentages
  std::vector<double> variance_histogram;
};

struct ModelOutcome {
  ModelKind kind = ModelKind::kGP;
  std::vector<StepRecord> steps;
  std::vector<double> test_probabilities;
  RocResult roc;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::optional<ImportanceSummary> importance;
};

/// Runs one model through the online loop on `split` and scores the final fit
/// on the test set.
ModelOutcome run_model(ModelKind kind, const StreamSplit& split, const ExperimentConfig& config,
                       std::uint64_t seed);

/// Writes results.json and the per-model CSV files into config.out and
/// returns the document.
nlohmann::json cmd_run(const ExperimentConfig& config);

/// One cmd_run per window proportion (subdirectories window_<value>) plus a
/// sweep_window.json / sweep_window.csv table of F1 per model.
nlohmann::json cmd_sweep_window(const ExperimentConfig& config);

/// Same over config.al_grid (subdirectories al_<value>, sweep_al.*).
nlohmann::json cmd_sweep_al(const ExperimentConfig& config);

/// Copy of a results document with every "timings" member removed.
nlohmann::json without_timings(const nlohmann::json& doc);

}  // namespace addgp
