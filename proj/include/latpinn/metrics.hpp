#pragma once

// Regression metrics and model comparison.
//
// Residuals are predicted - actual throughout (positive = over-prediction).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace latpinn::metrics {

/// Thrown by r2 when the actual values have no variance.
class ZeroVarianceError : public std::invalid_argument {
 public:
  ZeroVarianceError() : std::invalid_argument("r2: actual values have zero total variance") {}
};

/// 1 - SS_res / SS_tot. Needs >= 2 values, not all identical.
double r2(std::span<const double> actual, std::span<const double> predicted);
double mse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);
std::vector<double> residuals(std::span<const double> actual, std::span<const double> predicted);

struct MetricsReport {
  std::string model;
  std::uint64_t seed = 0;
  std::string split_fingerprint;
  std::string scope = "test";  // "test" or "all"
  double r2 = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  std::size_t n = 0;
  std::vector<double> actual;
  std::vector<double> predicted;
  std::vector<double> residuals;

  nlohmann::json to_json() const;  // {model, seed, split_fingerprint, scope, r2, mse, mae, n}
};

MetricsReport evaluate(std::string model, std::span<const double> actual,
                       std::span<const double> predicted, std::uint64_t seed = 0,
                       std::string split_fingerprint = {}, std::string scope = "test");

/// actual_mm,predicted_mm,residual_mm,abs_error_mm
void write_residuals_csv(std::ostream& out, const MetricsReport& report);

struct Histogram {
  std::vector<double> edges;      // bins + 1 entries
  std::vector<double> densities;  // count / (n * width)
  std::vector<std::size_t> counts;
};

/// Equal-width bins spanning [min, max] of the residuals. When every residual
/// is identical the result is one bin [v - 0.5, v + 0.5] with density 1.
Histogram error_histogram(std::span<const double> residuals, std::size_t bins = 20);
void write_histogram_csv(std::ostream& out, const Histogram& h);

struct Comparison {
  std::string model_a;
  std::string model_b;
  double r2_a, r2_b, mse_a, mse_b, mae_a, mae_b;
  double delta_r2, delta_mse, delta_mae;  // a - b
  std::string verdict;                    // winning model name, "mixed" or "tie"

  nlohmann::json to_json() const;
};

/// The winner must have higher r2 and lower mse and mae; identical metrics are
/// a "tie"; anything else is "mixed". Throws std::invalid_argument when the
/// reports were computed on different splits.
Comparison compare(const MetricsReport& a, const MetricsReport& b);

}  // namespace latpinn::metrics
