#pragma once

// Run orchestration behind the CLI subcommands. Each run writes into its own
// output directory and records a manifest.json that can reproduce it.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latpinn/lattice.hpp"
#include "latpinn/metrics.hpp"
#include "latpinn/pinn.hpp"

namespace latpinn::commands {

inline constexpr const char* kPinnName = "PINN";
inline constexpr const char* kBaselineName = "LinearRegression";

/// "builtin" selects the embedded table; anything else is a CSV path.
std::vector<lattice::LatticeSample> load_dataset(const std::string& source);

struct TrainOptions {
  std::string dataset = "builtin";
  lattice::SplitConfig split;
  lattice::PinnConfig pinn;
  std::filesystem::path out = "runs/train";
};

struct TrainOutcome {
  metrics::MetricsReport test;
  metrics::MetricsReport all;
  nlohmann::json manifest;
};

/// Writes checkpoint.json, history.csv, metrics.json and manifest.json.
TrainOutcome run_train(const TrainOptions& opts);

/// Rebuilds the options recorded by run_train. Fails if the dataset no longer
/// matches the recorded fingerprint.
TrainOptions train_options_from_manifest(const nlohmann::json& manifest);

struct CompareOptions {
  std::string dataset = "builtin";
  lattice::SplitConfig split;
  lattice::PinnConfig pinn;
  std::size_t seeds = 1;              // consecutive seeds starting at split.seed
  std::vector<double> lambdas;        // empty: just pinn.lambda
  std::size_t surface_resolution = 50;
  std::size_t bins = 20;
  std::filesystem::path out = "runs/compare";
};

struct PairedRun {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  metrics::MetricsReport pinn_test, baseline_test, pinn_all, baseline_all;
  metrics::Comparison comparison;
};

struct CompareOutcome {
  std::vector<PairedRun> runs;
  nlohmann::json aggregate;  // medians per lambda
};

CompareOutcome run_compare(const CompareOptions& opts);

struct PdeOptions {
  pinn::PdeRunConfig run;
  std::filesystem::path out = "runs/pde";
};

/// Writes history.csv, field.csv, report.json, checkpoint.json and manifest.json.
pinn::PdeRunResult run_pde(const PdeOptions& opts);

/// Writes the builtin table as CSV (header plus 50 rows).
void run_export_dataset(const std::filesystem::path& path);

struct GradcheckOptions {
  std::size_t networks = 100;
  std::size_t params_per_network = 40;
  std::size_t batch = 8;
  double step = 1e-5;
  std::uint64_t seed = 7;
};

struct GradcheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

/// Compares reverse-mode gradients of the lattice training loss on random
/// 2-64-64-32-1 networks with central differences, skipping coordinates whose
/// perturbation flips a ReLU.
GradcheckReport run_gradcheck(const GradcheckOptions& opts);

double median(std::vector<double> values);

}  // namespace latpinn::commands
