#include "latpinn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "latpinn/format.hpp"

namespace latpinn::metrics {

namespace {

void check_pair(std::span<const double> a, std::span<const double> p, const char* name) {
  if (a.empty()) throw std::invalid_argument(std::string(name) + ": empty input");
  if (a.size() != p.size()) throw std::invalid_argument(std::string(name) + ": length mismatch");
}

}  // namespace

double r2(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "r2");
  if (actual.size() < 2) throw std::invalid_argument("r2: need at least 2 values");
  double mean = 0.0;
  for (double y : actual) mean += y;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  if (ss_tot == 0.0) throw ZeroVarianceError();
  return 1.0 - ss_res / ss_tot;
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double r = predicted[i] - actual[i];
    s += r * r;
  }
  return s / static_cast<double>(actual.size());
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) s += std::abs(predicted[i] - actual[i]);
  return s / static_cast<double>(actual.size());
}

std::vector<double> residuals(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "residuals");
  std::vector<double> r(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) r[i] = predicted[i] - actual[i];
  return r;
}

nlohmann::json MetricsReport::to_json() const {
  return {{"model", model}, {"seed", seed}, {"split_fingerprint", split_fingerprint},
          {"scope", scope}, {"r2", r2},     {"mse", mse},
          {"mae", mae},     {"n", n}};
}

MetricsReport evaluate(std::string model, std::span<const double> actual,
                       std::span<const double> predicted, std::uint64_t seed,
                       std::string split_fingerprint, std::string scope) {
  MetricsReport rep;
  rep.model = std::move(model);
  rep.seed = seed;
  rep.split_fingerprint = std::move(split_fingerprint);
  rep.scope = std::move(scope);
  rep.r2 = r2(actual, predicted);
  rep.mse = mse(actual, predicted);
  rep.mae = mae(actual, predicted);
  rep.n = actual.size();
  rep.actual.assign(actual.begin(), actual.end());
  rep.predicted.assign(predicted.begin(), predicted.end());
  rep.residuals = residuals(actual, predicted);
  return rep;
}

void write_residuals_csv(std::ostream& out, const MetricsReport& report) {
  out << "actual_mm,predicted_mm,residual_mm,abs_error_mm\n";
  for (std::size_t i = 0; i < report.n; ++i) {
    out << fmt_double(report.actual[i]) << ',' << fmt_double(report.predicted[i]) << ','
        << fmt_double(report.residuals[i]) << ',' << fmt_double(std::abs(report.residuals[i])) << '\n';
  }
}

Histogram error_histogram(std::span<const double> residuals, std::size_t bins) {
  if (residuals.empty()) throw std::invalid_argument("error_histogram: no residuals");
  if (bins < 1) throw std::invalid_argument("error_histogram: bins must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(residuals.begin(), residuals.end());
  const double lo = *lo_it, hi = *hi_it;
  Histogram h;
  if (!(hi > lo)) {
    h.edges = {lo - 0.5, lo + 0.5};
    h.counts = {residuals.size()};
    h.densities = {1.0};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = lo + width * static_cast<double>(k);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double r : residuals) {
    auto k = static_cast<std::size_t>((r - lo) / width);
    if (k >= bins) k = bins - 1;  // r == hi
    ++h.counts[k];
  }
  const double n = static_cast<double>(residuals.size());
  h.densities.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    h.densities[k] = static_cast<double>(h.counts[k]) / (n * (h.edges[k + 1] - h.edges[k]));
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_lo,bin_hi,count,density\n";
  for (std::size_t k = 0; k < h.densities.size(); ++k) {
    out << fmt_double(h.edges[k]) << ',' << fmt_double(h.edges[k + 1]) << ',' << h.counts[k] << ','
        << fmt_double(h.densities[k]) << '\n';
  }
}

nlohmann::json Comparison::to_json() const {
  return {{"models", {model_a, model_b}},
          {model_a, {{"r2", r2_a}, {"mse", mse_a}, {"mae", mae_a}}},
          {model_b, {{"r2", r2_b}, {"mse", mse_b}, {"mae", mae_b}}},
          {"delta", {{"r2", delta_r2}, {"mse", delta_mse}, {"mae", delta_mae}}},
          {"verdict", verdict}};
}

Comparison compare(const MetricsReport& a, const MetricsReport& b) {
  if (a.split_fingerprint != b.split_fingerprint) {
    throw std::invalid_argument("compare: reports come from different splits (" +
                                a.split_fingerprint + " vs " + b.split_fingerprint + ")");
  }
  Comparison c{a.model, b.model, a.r2, b.r2, a.mse, b.mse, a.mae, b.mae,
               a.r2 - b.r2, a.mse - b.mse, a.mae - b.mae, "mixed"};
  if (a.r2 == b.r2 && a.mse == b.mse && a.mae == b.mae) {
    c.verdict = "tie";
  } else if (a.r2 > b.r2 && a.mse < b.mse && a.mae < b.mae) {
    c.verdict = a.model;
  } else if (b.r2 > a.r2 && b.mse < a.mse && b.mae < a.mae) {
    c.verdict = b.model;
  }
  return c;
}

}  // namespace latpinn::metrics
