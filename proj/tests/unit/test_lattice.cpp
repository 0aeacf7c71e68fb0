#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "latpinn/lattice.hpp"
#include "latpinn/metrics.hpp"
#include "support/oracles.hpp"

using namespace latpinn;
using namespace latpinn::lattice;

namespace {

std::vector<LatticeSample> synthetic(std::size_t n, std::uint64_t seed, double ws, double wl, double b) {
  Rng rng(seed);
  std::vector<LatticeSample> rows;
  for (std::size_t i = 0; i < n; ++i) {
    LatticeSample s{"synthetic", rng.uniform(200, 1100), rng.uniform(500, 12000), 0.0};
    s.displacement_mm = ws * s.strength_mpa + wl * s.load + b;
    rows.push_back(s);
  }
  return rows;
}

std::string read_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_csv(in);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("builtin dataset values") {
  const auto& d = builtin_dataset();
  REQUIRE(d.size() == 50);
  CHECK(d.front() == LatticeSample{"Structural Steel", 250, 1000, 0.003518});
  CHECK(d[19] == LatticeSample{"AA6061", 276, 10000, 0.1014});
  CHECK(d.back() == LatticeSample{"Inconel718", 1034, 10000, 0.034893});
  for (const auto& r : d) {
    CHECK(r.displacement_mm > 0.0);
    CHECK(std::fmod(r.load, 1000.0) == 0.0);
  }
}

TEST_CASE("displacement is proportional to load within each alloy") {
  const auto& d = builtin_dataset();
  for (std::size_t a = 0; a < 5; ++a) {
    const double base = d[a * 10].displacement_mm;
    for (int k = 2; k <= 10; ++k) {
      CHECK(std::abs(d[a * 10 + k - 1].displacement_mm - k * base) / (k * base) < 0.005);
    }
  }
}

TEST_CASE("CSV round trip and fingerprint") {
  std::ostringstream os;
  write_csv(os, builtin_dataset());
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 51);
  CHECK(text.rfind("alloy,strength_mpa,load,displacement_mm\nStructural Steel,250,1000,0.003518\n", 0) == 0);
  std::istringstream in(text);
  CHECK(read_csv(in) == builtin_dataset());
  CHECK(dataset_fingerprint(builtin_dataset()).size() == 64);

  const auto path = std::filesystem::temp_directory_path() / "latpinn_roundtrip.csv";
  write_csv(path, builtin_dataset());
  CHECK(load_csv(path) == builtin_dataset());
  std::filesystem::remove(path);
}

TEST_CASE("CSV errors name the problem and the line") {
  CHECK(read_error("").find("header") != std::string::npos);
  const std::string header = "alloy,strength_mpa,load,displacement_mm\n";
  auto neg = read_error(header + "X,250,1000,0.1\nX,250,2000,-1\n");
  CHECK(neg.find("line 3") != std::string::npos);
  CHECK(neg.find("displacement") != std::string::npos);
  CHECK(read_error(header + "X,250,1000\n").find("line 2") != std::string::npos);
  CHECK_FALSE(read_error(header + "X,abc,1000,0.1\n").empty());
  CHECK_FALSE(read_error(header + "X,nan,1000,0.1\n").empty());
  CHECK_FALSE(read_error(header + "X,-5,1000,0.1\n").empty());
  CHECK_THROWS_AS(load_csv("/nonexistent/latpinn.csv"), DataError);
}

TEST_CASE("scaler") {
  std::vector<std::vector<double>> rows{{1, 10}, {2, 10}, {3, 10}};
  auto s = StandardScaler::fit(rows);
  CHECK(s.means()[0] == doctest::Approx(2.0));
  CHECK(s.stds()[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(s.stds()[1] == 1.0);  // zero-variance column
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> v{rng.normal(0, 100), rng.normal(0, 100)};
    auto back = s.inverse_transform(s.transform(v));
    CHECK(std::abs(back[0] - v[0]) <= 1e-12 * std::max(1.0, std::abs(v[0])));
    CHECK(std::abs(back[1] - v[1]) <= 1e-12 * std::max(1.0, std::abs(v[1])));
  }
  auto j = StandardScaler::from_json(s.to_json());
  CHECK(j.means() == s.means());
  CHECK(j.stds() == s.stds());
}

TEST_CASE("split") {
  const auto& d = builtin_dataset();
  auto a = split(d, {0.8, 42});
  auto b = split(d, {0.8, 42});
  auto c = split(d, {0.8, 7});
  CHECK(a.train.size() == 40);
  CHECK(a.test.size() == 10);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.fingerprint == b.fingerprint);
  CHECK(a.fingerprint != c.fingerprint);
  std::vector<std::size_t> all = a.train_indices;
  all.insert(all.end(), a.test_indices.begin(), a.test_indices.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(all[i] == i);
  for (std::size_t k = 0; k < a.test.size(); ++k) CHECK(a.test[k] == d[a.test_indices[k]]);
  CHECK_THROWS_AS(split(d, {0.0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(split(d, {1.0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(split(d, {1.5, 1}), std::invalid_argument);
}

TEST_CASE("baseline recovers exact linear data") {
  auto rows = synthetic(30, 3, 2.0, 3.0, 1.0);
  auto m = train_baseline(rows);
  CHECK(m.w_strength == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(m.w_load == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(m.intercept == doctest::Approx(1.0).epsilon(1e-8));
  std::vector<double> y;
  for (const auto& r : rows) y.push_back(r.displacement_mm);
  CHECK(metrics::r2(y, m.predict(rows)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("baseline matches an independent solve") {
  const auto& d = builtin_dataset();
  std::vector<double> s, l, y;
  for (const auto& r : d) {
    s.push_back(r.strength_mpa);
    l.push_back(r.load);
    y.push_back(r.displacement_mm);
  }
  auto m = train_baseline(d);
  auto ref = oracle::ols_cramer(s, l, y);
  CHECK(oracle::rel_err(m.w_strength, ref[0], 0.0) < 1e-10);
  CHECK(oracle::rel_err(m.w_load, ref[1], 0.0) < 1e-10);
  CHECK(oracle::rel_err(m.intercept, ref[2], 0.0) < 1e-10);

  // Residuals are orthogonal to the standardized features and the ones column.
  double ms = 0, ml = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    ms += s[i];
    ml += l[i];
  }
  ms /= d.size();
  ml /= d.size();
  double vs = 0, vl = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    vs += (s[i] - ms) * (s[i] - ms);
    vl += (l[i] - ml) * (l[i] - ml);
  }
  vs = std::sqrt(vs / d.size());
  vl = std::sqrt(vl / d.size());
  double ds = 0, dl = 0, d1 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = y[i] - m.predict(s[i], l[i]);
    ds += r * (s[i] - ms) / vs;
    dl += r * (l[i] - ml) / vl;
    d1 += r;
  }
  CHECK(std::abs(ds) < 1e-8);
  CHECK(std::abs(dl) < 1e-8);
  CHECK(std::abs(d1) < 1e-8);
}

TEST_CASE("baseline degenerate inputs") {
  auto rows = synthetic(12, 4, 0.0, 0.0, 0.25);
  auto m = train_baseline(rows);
  CHECK(std::abs(m.w_strength) < 1e-15);
  CHECK(std::abs(m.w_load) < 1e-15);
  CHECK(m.intercept == doctest::Approx(0.25));
  std::vector<double> y(rows.size(), 0.25);
  CHECK(metrics::mse(y, m.predict(rows)) < 1e-30);
  CHECK_THROWS_AS(metrics::r2(y, m.predict(rows)), metrics::ZeroVarianceError);

  // One alloy: strength is constant, so the features are collinear with the intercept.
  std::vector<LatticeSample> steel(builtin_dataset().begin(), builtin_dataset().begin() + 10);
  CHECK_THROWS_AS(train_baseline(steel), std::invalid_argument);
  CHECK_THROWS_AS(train_baseline(std::span(steel).first(2)), std::invalid_argument);
}

TEST_CASE("prediction surfaces") {
  auto m = train_baseline(builtin_dataset());
  DisplacementFn fn = [&](double s, double l) { return m.predict(s, l); };
  auto g = predict_surface(fn, kStrengthRange, kLoadRange, 7);
  CHECK(g.values.size() == 49);
  CHECK(g.strengths.front() == 250.0);
  CHECK(g.strengths.back() == 1034.0);
  CHECK(g.loads.back() == 10000.0);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 1; j + 1 < 7; ++j) {
      CHECK(std::abs(g.at(i, j + 1) - 2 * g.at(i, j) + g.at(i, j - 1)) < 1e-10);
      CHECK(std::abs(g.at(j + 1, i) - 2 * g.at(j, i) + g.at(j - 1, i)) < 1e-10);
    }
  }
  CHECK(m.predict(1034, 1000) <= m.predict(250, 10000));
  CHECK(g.at(6, 0) <= g.at(0, 6));
  CHECK_THROWS_AS(predict_surface(fn, kStrengthRange, kLoadRange, 1), std::invalid_argument);
  CHECK_THROWS_AS(predict_surface(fn, {5, 5}, kLoadRange, 3), std::invalid_argument);
}

TEST_CASE("PINN training pipeline") {
  PinnConfig cfg;
  cfg.epochs = 5;
  auto sp = split(builtin_dataset(), {0.8, 42});
  auto res = train_pinn(sp.train, cfg);
  CHECK(res.history.size() == 5);
  for (const auto& h : res.history) {
    CHECK(std::isfinite(h.total));
    CHECK(h.total == doctest::Approx(h.data + 0.1 * h.physics).epsilon(1e-12));
  }
  auto again = train_pinn(sp.train, cfg);
  CHECK(again.model.network.get_params() == res.model.network.get_params());

  auto restored = PinnModel::from_json(nlohmann::json::parse(res.model.to_json().dump()));
  for (const auto& r : sp.test) CHECK(restored.predict(r.strength_mpa, r.load) == res.model.predict(r.strength_mpa, r.load));

  cfg.lambda = -1;
  CHECK_THROWS_AS(train_pinn(sp.train, cfg), std::invalid_argument);
}

TEST_CASE("PINN without physics beats the mean predictor") {
  PinnConfig cfg;
  cfg.lambda = 0.0;
  auto sp = split(builtin_dataset(), {0.8, 42});
  auto res = train_pinn(sp.train, cfg);
  std::vector<double> y;
  for (const auto& r : sp.test) y.push_back(r.displacement_mm);
  CHECK(metrics::r2(y, res.model.predict(sp.test)) > 0.0);
}

TEST_CASE("PINN fits a single alloy") {
  std::vector<LatticeSample> rows(builtin_dataset().begin() + 20, builtin_dataset().begin() + 30);
  PinnConfig cfg;
  auto res = train_pinn(rows, cfg);
  std::vector<double> y;
  for (const auto& r : rows) y.push_back(r.displacement_mm);
  CHECK(metrics::r2(y, res.model.predict(rows)) > 0.99);
}
