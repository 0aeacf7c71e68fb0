// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Optional argv[1] is a scratch directory for run artifacts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "latpinn/commands.hpp"
#include "latpinn/format.hpp"
#include "latpinn/lattice.hpp"
#include "latpinn/metrics.hpp"
#include "latpinn/pinn.hpp"
#include "support/oracles.hpp"

using namespace latpinn;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

fs::path g_scratch;

// Forward pass written directly from the documented parameter layout; also
// records which hidden ReLUs are active.
double naive_relu_forward(const std::vector<std::size_t>& sizes, std::span<const double> p,
                          std::array<double, 2> x_in, std::vector<std::uint8_t>* pattern) {
  std::vector<double> x(x_in.begin(), x_in.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    std::vector<double> y(out);
    const bool hidden = l + 2 < sizes.size();
    for (std::size_t o = 0; o < out; ++o) {
      double z = p[off + in * out + o];
      for (std::size_t i = 0; i < in; ++i) z += p[off + o * in + i] * x[i];
      if (hidden) {
        if (pattern) pattern->push_back(z > 0.0);
        z = z > 0.0 ? z : 0.0;
      }
      y[o] = z;
    }
    off += in * out + out;
    x.swap(y);
  }
  return x[0];
}

// 1. Reverse-mode gradients of the lattice loss vs central differences.
Outcome gradient_fidelity() {
  Rng rng(2024);
  const double h = 1e-5;
  const std::size_t batch = 8, coords = 30;
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (int n = 0; n < 100; ++n) {
    auto net = net::DenseNetwork::build(net::default_lattice_spec(rng.next()));
    auto params = net.get_params();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      for (std::size_t k = 0; k < net.layer_sizes()[l + 1]; ++k) params[net.bias_offset(l) + k] = rng.uniform(-0.1, 0.1);
    }
    std::vector<std::array<double, 2>> xs(batch);
    std::vector<double> ys(batch), ps(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      xs[i] = {rng.normal(), rng.normal()};
      ys[i] = rng.normal();
      ps[i] = rng.normal();
    }
    const double lambda = rng.uniform(0.0, 1.0);
    auto objective = lattice::make_lattice_objective(net, xs, ys, ps, lambda, pinn::PhysicsForm::prediction);
    const auto grad = objective(params).gradient;

    auto loss = [&](std::span<const double> theta, std::vector<std::uint8_t>* pattern) {
      double d = 0.0, ph = 0.0;
      for (std::size_t i = 0; i < batch; ++i) {
        const double y = naive_relu_forward(net.layer_sizes(), theta, xs[i], pattern);
        d += (y - ys[i]) * (y - ys[i]);
        ph += (y - ps[i]) * (y - ps[i]);
      }
      return d / batch + lambda * ph / batch;
    };
    std::vector<std::uint8_t> base;
    loss(params, &base);
    for (std::size_t s = 0; s < coords; ++s) {
      const std::size_t k = rng.below(params.size());
      auto plus = params, minus = params;
      plus[k] += h;
      minus[k] -= h;
      std::vector<std::uint8_t> pp, pm;
      const double lp = loss(plus, &pp);
      const double lm = loss(minus, &pm);
      if (pp != base || pm != base) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, oracle::rel_err(grad[k], (lp - lm) / (2.0 * h), 1e-6));
      ++checked;
    }
  }
  return {worst < 1e-4 && checked > 2000,
          "max rel err " + sci(worst) + " over " + std::to_string(checked) + " coordinates (" +
              std::to_string(skipped) + " kink crossings skipped)"};
}

// 2. Second derivatives vs finite differences of first derivatives.
Outcome second_derivative_fidelity() {
  Rng rng(77);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    auto expr = oracle::Expression::random(rng, 1, 4);
    const double x = rng.uniform(-1.0, 1.0);
    using D2 = ad::Dual<ad::Dual<double>>;
    const double d2 = ad::second_derivative([&](D2 v) { return expr(std::vector<D2>{v}); }, x);
    auto d1 = [&](double v) {
      return ad::gradient([&](std::span<const ad::Var> p) { return expr(std::vector<ad::Var>{p[0]}); },
                          std::vector<double>{v})[0];
    };
    worst = std::max(worst, oracle::rel_err(d2, oracle::central_difference(d1, x, h), 1e-3));
  }
  for (int k = 0; k < 20; ++k) {
    net::NetworkSpec spec;
    spec.hidden_dims = {8, 8};
    spec.hidden_activation = net::Activation::tanh;
    spec.seed = rng.next();
    auto n = net::DenseNetwork::build(spec);
    auto u = pinn::field_of<double>(n, n.params());
    const double x = rng.uniform(), t = rng.uniform();
    auto ux = [&](double xv) {
      using D = ad::Dual<double>;
      return u(D(xv, 1.0), D(t, 0.0)).d;
    };
    auto ut = [&](double tv) {
      using D = ad::Dual<double>;
      return u(D(x, 0.0), D(tv, 1.0)).d;
    };
    const auto sx = pinn::derivatives_in_x<double>(u, x, t);
    const auto st = pinn::derivatives_in_t<double>(u, x, t);
    worst = std::max(worst, oracle::rel_err(sx.d2u, oracle::central_difference(ux, x, h), 1e-3));
    worst = std::max(worst, oracle::rel_err(st.d2u, oracle::central_difference(ut, t, h), 1e-3));
  }
  return {worst < 1e-3, "max rel err " + sci(worst) + " over 50 expressions and 20 networks"};
}

// 3. Closed-form fields through the training residual machinery.
Outcome analytic_residuals() {
  const double alpha = 0.1, c = 1.0;
  auto heat = [&](const auto& x, const auto& t) {
    using ad::exp, ad::sin;
    return sin(pi * x) * exp(-pi * pi * alpha * t);
  };
  auto wave = [&](const auto& x, const auto& t) {
    using ad::cos, ad::sin;
    return sin(pi * x) * cos(pi * c * t);
  };
  auto hp = pinn::sample_collocation(pinn::heat_problem(alpha), 1000, 1);
  auto wp = pinn::sample_collocation(pinn::wave_problem(c), 1000, 2);
  double worst_heat = 0.0, worst_wave = 0.0;
  ad::Tape tape;
  for (auto [x, t] : hp.points) {
    tape.clear();
    ad::Var xv = tape.variable(x), tv = tape.variable(t);
    worst_heat = std::max(worst_heat, std::abs(pinn::heat_residual<ad::Var>(heat, xv, tv, alpha).value()));
    worst_heat = std::max(worst_heat, std::abs(pinn::heat_residual<double>(heat, x, t, alpha)));
  }
  for (auto [x, t] : wp.points) {
    tape.clear();
    ad::Var xv = tape.variable(x), tv = tape.variable(t);
    worst_wave = std::max(worst_wave, std::abs(pinn::wave_residual<ad::Var>(wave, xv, tv, c).value()));
    worst_wave = std::max(worst_wave, std::abs(pinn::wave_residual<double>(wave, x, t, c)));
  }
  return {worst_heat < 1e-8 && worst_wave < 1e-8,
          "max |residual| heat " + sci(worst_heat) + ", wave " + sci(worst_wave) + " at 1000 points each"};
}

// 4. PDE demos reach the analytic field.
Outcome pde_training() {
  std::ostringstream detail;
  bool ok = true;
  for (auto problem : {pinn::heat_problem(0.1), pinn::wave_problem(1.0)}) {
    pinn::PdeRunConfig cfg;
    cfg.problem = problem;
    const auto t0 = std::chrono::steady_clock::now();
    auto res = pinn::train_pde(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double limit = problem.kind == pinn::PdeKind::heat ? 0.05 : 0.10;
    ok = ok && res.relative_l2 < limit && secs < 300.0 && cfg.epochs >= 1000 && cfg.epochs <= 3000;
    detail << pinn::to_string(problem.kind) << " rel L2 " << sci(res.relative_l2) << " (limit " << limit
           << ", " << cfg.epochs << " epochs, " << sci(secs) << " s); ";
  }
  return {ok, detail.str()};
}

// 5. Builtin table vs an independent transcription, plus proportionality.
Outcome dataset_integrity() {
  const auto& d = lattice::builtin_dataset();
  const auto ref = oracle::transcribed_table();
  std::size_t mismatches = 0;
  if (d.size() != ref.size()) return {false, "row count " + std::to_string(d.size())};
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].alloy != ref[i].alloy || d[i].strength_mpa != ref[i].strength ||
        d[i].load != ref[i].load || d[i].displacement_mm != ref[i].displacement) {
      ++mismatches;
    }
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < 5; ++a) {
    const double base = d[a * 10].displacement_mm;
    for (int k = 2; k <= 10; ++k) {
      worst = std::max(worst, std::abs(d[a * 10 + k - 1].displacement_mm - k * base) / (k * base));
    }
  }
  return {mismatches == 0 && worst < 0.005,
          std::to_string(mismatches) + " mismatches in 50 rows; worst proportionality deviation " + sci(worst)};
}

// 6. OLS baseline vs an independent normal-equation solve.
Outcome baseline_oracle() {
  const auto& d = lattice::builtin_dataset();
  std::vector<double> s, l, y;
  for (const auto& r : d) {
    s.push_back(r.strength_mpa);
    l.push_back(r.load);
    y.push_back(r.displacement_mm);
  }
  const auto m = lattice::train_baseline(d);
  const auto ref = oracle::ols_cramer(s, l, y);
  const double err = std::max({oracle::rel_err(m.w_strength, ref[0], 0.0), oracle::rel_err(m.w_load, ref[1], 0.0),
                               oracle::rel_err(m.intercept, ref[2], 0.0)});

  Rng rng(5);
  std::vector<lattice::LatticeSample> synth;
  std::vector<double> ys;
  for (int i = 0; i < 40; ++i) {
    lattice::LatticeSample r{"synthetic", rng.uniform(250, 1034), rng.uniform(1000, 10000), 0.0};
    r.displacement_mm = 2e-5 * r.strength_mpa + 3e-6 * r.load + 0.01;
    synth.push_back(r);
    ys.push_back(r.displacement_mm);
  }
  const auto ms = lattice::train_baseline(synth);
  const double r2 = metrics::r2(ys, ms.predict(synth));
  return {err < 1e-10 && std::abs(r2 - 1.0) < 1e-12,
          "max rel coefficient err " + sci(err) + "; synthetic R2 = " + fmt_double(r2)};
}

// 7. 20-seed sweep against the linear baseline.
Outcome headline_comparison() {
  commands::CompareOptions opts;
  opts.seeds = 20;
  opts.out = g_scratch / "compare_sweep";
  fs::remove_all(opts.out);
  const auto res = commands::run_compare(opts);
  std::vector<double> pinn_r2, lr_r2, pinn_mae, lr_mae;
  for (const auto& r : res.runs) {
    pinn_r2.push_back(r.pinn_test.r2);
    lr_r2.push_back(r.baseline_test.r2);
    pinn_mae.push_back(r.pinn_test.mae);
    lr_mae.push_back(r.baseline_test.mae);
  }
  const double mp = commands::median(pinn_r2), ml = commands::median(lr_r2);
  const double ap = commands::median(pinn_mae), al = commands::median(lr_mae);
  const bool a = ml >= 0.30 && ml <= 0.85;
  const bool b = mp > ml && ap < al;

  // Six metrics on the default seed.
  const auto cmp = nlohmann::json::parse(read_file(opts.out / "seed_42" / "comparison.json"));
  bool c = res.runs.size() == 20 && res.runs.front().seed == 42;
  for (const char* m : {commands::kPinnName, commands::kBaselineName}) {
    for (const char* k : {"r2", "mse", "mae"}) c = c && cmp.contains(m) && cmp[m][k].is_number();
  }
  return {a && b && c, std::string("(a) LR median R2 ") + sci(ml) + (a ? " in" : " NOT in") +
                           " [0.30, 0.85]; (b) PINN median R2 " + sci(mp) + ", MAE " + sci(ap) +
                           " vs LR MAE " + sci(al) + "; (c) seed 42 report " + (c ? "complete" : "incomplete")};
}

// 8. Identical manifests give identical metrics.
Outcome determinism() {
  commands::TrainOptions first;
  first.out = g_scratch / "determinism_a";
  auto r1 = commands::run_train(first);
  auto second = commands::train_options_from_manifest(r1.manifest);
  second.out = g_scratch / "determinism_b";
  commands::run_train(second);
  const std::string a = read_file(first.out / "metrics.json");
  const std::string b = read_file(second.out / "metrics.json");
  return {a == b && !a.empty(), a == b ? "metrics.json byte-identical (sha256 " + sha256_hex(a).substr(0, 16) + ")"
                                       : "metrics.json differs"};
}

// 9. Metric examples and the power-mean inequality.
Outcome metrics_checks() {
  using namespace metrics;
  int failures = 0;
  auto expect = [&](bool ok) { failures += ok ? 0 : 1; };
  std::vector<double> a{1, 2, 3};
  expect(r2(a, a) == 1.0);
  expect(r2(a, std::vector<double>{2, 2, 2}) == 0.0);
  expect(r2(a, std::vector<double>{1, 2, 4}) == 0.5);
  expect(mse(a, a) == 0.0);
  expect(mae(a, a) == 0.0);
  std::vector<double> z{0.2, 0.4};
  expect(std::abs(mse(z, std::vector<double>{0.21, 0.41}) - 1e-4) < 1e-15);
  expect(std::abs(mae(std::vector<double>{0, 0}, std::vector<double>{0.01, -0.01}) - 0.01) < 1e-18);
  auto h = error_histogram(std::vector<double>{0.3});
  expect(h.densities.size() == 1 && h.edges[0] <= 0.3 && h.edges[1] >= 0.3);
  MetricsReport A;
  A.model = "A";
  A.r2 = 0.5;
  A.mse = 0.1;
  A.mae = 0.2;
  expect(compare(A, A).verdict == "tie");
  MetricsReport P = A, L = A;
  P.model = "PINN";
  P.r2 = 0.7923;
  P.mse = 0.00017417;
  P.mae = 0.00767965;
  L.model = "LinearRegression";
  L.r2 = 0.5686;
  L.mse = 0.00036187;
  L.mae = 0.01624120;
  expect(compare(P, L).verdict == "PINN");
  MetricsReport B = A;
  B.model = "B";
  B.r2 = 0.4;
  B.mae = 0.1;
  expect(compare(A, B).verdict == "mixed");
  try {
    r2(std::vector<double>{1, 1}, std::vector<double>{1, 2});
    ++failures;
  } catch (const ZeroVarianceError&) {
  }

  Rng rng(9);
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<double> x(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal(0, 10);
      p[i] = rng.normal(0, 10);
    }
    const double m = mae(x, p);
    if (m * m > mse(x, p) * (1 + 1e-12)) ++violations;
  }
  return {failures == 0 && violations == 0,
          std::to_string(failures) + " example failures; " + std::to_string(violations) +
              " mae^2 > mse violations in 1000 random vectors"};
}

}  // namespace

int main(int argc, char** argv) {
  g_scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "latpinn_acceptance";
  fs::create_directories(g_scratch);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"second-derivative fidelity", second_derivative_fidelity},
      {"analytic PDE residuals", analytic_residuals},
      {"PDE demo training", pde_training},
      {"dataset integrity", dataset_integrity},
      {"baseline oracle", baseline_oracle},
      {"headline comparison", headline_comparison},
      {"determinism", determinism},
      {"metrics checks", metrics_checks},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += out.pass ? 0 : 1;
    std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion " << i + 1 << " " << criteria[i].first << ": "
              << out.detail << " [" << sci(secs) << " s]" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
