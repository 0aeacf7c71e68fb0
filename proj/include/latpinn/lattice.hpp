#pragma once

// Displacement regression for multi-material lattice beams: the 50-sample
// simulation table, preprocessing, the PINN pipeline and the least-squares
// baseline it is compared against.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latpinn/net.hpp"
#include "latpinn/optimize.hpp"
#include "latpinn/pinn.hpp"

namespace latpinn::lattice {

/// Malformed dataset input. Messages carry the 1-based line number.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LatticeSample {
  std::string alloy;
  double strength_mpa = 0.0;
  double load = 0.0;  // paper units (N or N/m); treated as a unitless feature
  double displacement_mm = 0.0;

  bool operator==(const LatticeSample&) const = default;
};

/// The 50 simulated samples, alloy order as tabulated, ascending load.
const std::vector<LatticeSample>& builtin_dataset();

/// Header: alloy,strength_mpa,load,displacement_mm
void write_csv(std::ostream& out, std::span<const LatticeSample> rows);
void write_csv(const std::filesystem::path& path, std::span<const LatticeSample> rows);
std::vector<LatticeSample> read_csv(std::istream& in);
std::vector<LatticeSample> load_csv(const std::filesystem::path& path);

/// SHA-256 of the canonical CSV rendering.
std::string dataset_fingerprint(std::span<const LatticeSample> rows);

// ---------------------------------------------------------------------------

class StandardScaler {
 public:
  StandardScaler() = default;
  StandardScaler(std::vector<double> means, std::vector<double> stds);

  /// Column-wise mean and population std. A zero-variance column gets std 1
  /// so transforms stay finite.
  static StandardScaler fit(std::span<const std::vector<double>> rows);

  std::vector<double> transform(std::span<const double> v) const;
  std::vector<double> inverse_transform(std::span<const double> v) const;
  double transform(std::size_t feature, double v) const { return (v - means_[feature]) / stds_[feature]; }
  double inverse(std::size_t feature, double v) const { return v * stds_[feature] + means_[feature]; }

  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }
  std::size_t size() const { return means_.size(); }

  nlohmann::json to_json() const;
  static StandardScaler from_json(const nlohmann::json& j);

 private:
  std::vector<double> means_;
  std::vector<double> stds_;
};

// ---------------------------------------------------------------------------

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
};

struct Split {
  std::vector<LatticeSample> train;
  std::vector<LatticeSample> test;
  std::vector<std::size_t> train_indices;  // into the source dataset
  std::vector<std::size_t> test_indices;
  std::string fingerprint;  // identifies the partition
};

/// Seeded uniform shuffle; ceil(fraction * N) rows go to train.
Split split(std::span<const LatticeSample> data, const SplitConfig& cfg);

std::string split_fingerprint(std::span<const std::size_t> train_indices,
                              std::span<const std::size_t> test_indices);

// ---------------------------------------------------------------------------

enum class ScalerPolicy { standardize, none };
std::string to_string(ScalerPolicy p);
ScalerPolicy scaler_policy_from_string(const std::string& s);

struct PinnConfig {
  double lambda = 0.1;
  double lr = 1e-3;
  long epochs = 1000;
  std::uint64_t seed = 42;
  ScalerPolicy scaler = ScalerPolicy::standardize;
  pinn::PhysicsForm physics_form = pinn::PhysicsForm::prediction;
  std::vector<std::size_t> hidden = {64, 64, 32};
  double physics_eps = pinn::kPhysicsEps;

  nlohmann::json to_json() const;
  static PinnConfig from_json(const nlohmann::json& j);
};

/// Trained network plus the frozen preprocessing needed to predict in mm.
struct PinnModel {
  net::DenseNetwork network;
  StandardScaler inputs;   // (strength, load)
  StandardScaler target;   // displacement
  pinn::PhysicsStats physics;
  PinnConfig config;

  double predict(double strength_mpa, double load) const;
  std::vector<double> predict(std::span<const LatticeSample> rows) const;

  nlohmann::json to_json() const;
  static PinnModel from_json(const nlohmann::json& j);
};

struct PinnTrainingResult {
  PinnModel model;
  std::vector<optimize::LossBreakdown> history;
};

/// Objective over a fixed training set in the (optionally standardized) space
/// the network sees; exposed so gradient checks exercise the exact training
/// loss.
optimize::Objective make_lattice_objective(const net::DenseNetwork& shape,
                                           std::vector<std::array<double, 2>> features,
                                           std::vector<double> targets,
                                           std::vector<double> physics_normalized, double lambda,
                                           pinn::PhysicsForm form);

PinnTrainingResult train_pinn(std::span<const LatticeSample> train, const PinnConfig& config);

// ---------------------------------------------------------------------------

/// displacement = w_strength * strength + w_load * load + intercept
struct LinearModel {
  double w_strength = 0.0;
  double w_load = 0.0;
  double intercept = 0.0;

  double predict(double strength_mpa, double load) const {
    return w_strength * strength_mpa + w_load * load + intercept;
  }
  std::vector<double> predict(std::span<const LatticeSample> rows) const;
  nlohmann::json to_json() const;
};

/// Ordinary least squares with intercept via the (centred) normal equations.
/// Throws std::invalid_argument for fewer than 3 rows or collinear features.
LinearModel train_baseline(std::span<const LatticeSample> train);

// ---------------------------------------------------------------------------

struct SurfaceGrid {
  std::vector<double> strengths;  // rows
  std::vector<double> loads;      // columns
  std::vector<double> values;     // row-major: values[i * loads.size() + j]

  double at(std::size_t i, std::size_t j) const { return values[i * loads.size() + j]; }
};

using DisplacementFn = std::function<double(double strength_mpa, double load)>;

/// resolution x resolution grid over the closed ranges.
SurfaceGrid predict_surface(const DisplacementFn& model, std::pair<double, double> strength_range,
                            std::pair<double, double> load_range, std::size_t resolution);
inline constexpr std::pair<double, double> kStrengthRange{250.0, 1034.0};
inline constexpr std::pair<double, double> kLoadRange{1000.0, 10000.0};

void write_surface_csv(std::ostream& out, const SurfaceGrid& grid);

}  // namespace latpinn::lattice
