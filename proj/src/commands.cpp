#include "latpinn/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "latpinn/format.hpp"
#include "latpinn/random.hpp"

namespace latpinn::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

/// Collects artifacts written into one run directory together with hashes.
class RunDir {
 public:
  explicit RunDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& contents) {
    write_file(dir_ / name, contents);
    hashes_[name] = sha256_hex(contents);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  const json& hashes() const { return hashes_; }
  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
  json hashes_ = json::object();
};

json adam_json(double lr) {
  const optimize::AdamConfig a{lr};
  return {{"name", "adam"}, {"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

json dataset_json(const std::string& source, std::span<const lattice::LatticeSample> rows) {
  return {{"source", source}, {"rows", rows.size()}, {"fingerprint", lattice::dataset_fingerprint(rows)}};
}

json split_json(const lattice::SplitConfig& cfg, const lattice::Split& s) {
  return {{"train_fraction", cfg.train_fraction},
          {"seed", cfg.seed},
          {"fingerprint", s.fingerprint},
          {"train_indices", s.train_indices},
          {"test_indices", s.test_indices}};
}

std::vector<double> actual_of(std::span<const lattice::LatticeSample> rows) {
  std::vector<double> y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.displacement_mm);
  return y;
}

std::string history_csv(std::span<const optimize::LossBreakdown> history) {
  std::ostringstream os;
  optimize::write_history_csv(os, history);
  return os.str();
}

std::string residuals_csv(const metrics::MetricsReport& rep) {
  std::ostringstream os;
  metrics::write_residuals_csv(os, rep);
  return os.str();
}

std::string histogram_csv(const metrics::MetricsReport& rep, std::size_t bins) {
  std::ostringstream os;
  metrics::write_histogram_csv(os, metrics::error_histogram(rep.residuals, bins));
  return os.str();
}

std::string surface_csv(const lattice::DisplacementFn& fn, std::size_t resolution) {
  std::ostringstream os;
  lattice::write_surface_csv(os, lattice::predict_surface(fn, lattice::kStrengthRange,
                                                          lattice::kLoadRange, resolution));
  return os.str();
}

json metrics_pair(const metrics::MetricsReport& test, const metrics::MetricsReport& all) {
  return {{"test", test.to_json()}, {"all", all.to_json()}};
}

}  // namespace

std::vector<lattice::LatticeSample> load_dataset(const std::string& source) {
  if (source == "builtin") return lattice::builtin_dataset();
  return lattice::load_csv(source);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---------------------------------------------------------------------------

TrainOutcome run_train(const TrainOptions& opts) {
  const auto data = load_dataset(opts.dataset);
  const auto split = lattice::split(data, opts.split);
  auto trained = lattice::train_pinn(split.train, opts.pinn);
  const auto& model = trained.model;

  const auto y_test = actual_of(split.test);
  const auto y_all = actual_of(data);
  TrainOutcome outcome;
  outcome.test = metrics::evaluate(kPinnName, y_test, model.predict(split.test), opts.pinn.seed,
                                   split.fingerprint, "test");
  outcome.all = metrics::evaluate(kPinnName, y_all, model.predict(data), opts.pinn.seed,
                                  split.fingerprint, "all");

  RunDir dir(opts.out);
  dir.write_json("checkpoint.json", model.to_json());
  dir.write("history.csv", history_csv(trained.history));
  dir.write_json("metrics.json", metrics_pair(outcome.test, outcome.all));

  outcome.manifest = {{"format_version", kManifestVersion},
                      {"command", "train"},
                      {"dataset", dataset_json(opts.dataset, data)},
                      {"split", split_json(opts.split, split)},
                      {"training", opts.pinn.to_json()},
                      {"optimizer", adam_json(opts.pinn.lr)},
                      {"artifacts", dir.hashes()}};
  dir.write_json("manifest.json", outcome.manifest);
  return outcome;
}

TrainOptions train_options_from_manifest(const json& manifest) {
  if (manifest.value("command", "") != "train") {
    throw std::invalid_argument("manifest was not written by the train command");
  }
  const int version = manifest.value("format_version", 0);
  if (version != kManifestVersion) {
    throw std::invalid_argument("unsupported manifest format_version " + std::to_string(version));
  }
  TrainOptions opts;
  const auto& ds = manifest.at("dataset");
  opts.dataset = ds.at("source").get<std::string>();
  const auto data = load_dataset(opts.dataset);
  const std::string expected = ds.at("fingerprint").get<std::string>();
  if (lattice::dataset_fingerprint(data) != expected) {
    throw lattice::DataError("dataset '" + opts.dataset + "' does not match the manifest fingerprint " +
                             expected);
  }
  const auto& sp = manifest.at("split");
  opts.split.train_fraction = sp.at("train_fraction").get<double>();
  opts.split.seed = sp.at("seed").get<std::uint64_t>();
  if (lattice::split(data, opts.split).fingerprint != sp.at("fingerprint").get<std::string>()) {
    throw std::invalid_argument("manifest split membership cannot be reproduced");
  }
  opts.pinn = lattice::PinnConfig::from_json(manifest.at("training"));
  return opts;
}

// ---------------------------------------------------------------------------

namespace {

PairedRun run_pair(std::span<const lattice::LatticeSample> data, const CompareOptions& opts,
                   std::uint64_t seed, double lambda, const fs::path& out) {
  lattice::SplitConfig scfg = opts.split;
  scfg.seed = seed;
  lattice::PinnConfig pcfg = opts.pinn;
  pcfg.seed = seed;
  pcfg.lambda = lambda;

  const auto split = lattice::split(data, scfg);
  auto trained = lattice::train_pinn(split.train, pcfg);
  const auto& pinn_model = trained.model;
  const auto baseline = lattice::train_baseline(split.train);

  const auto y_test = actual_of(split.test);
  const auto y_all = actual_of(data);
  const auto pinn_test_pred = pinn_model.predict(split.test);
  const auto pinn_all_pred = pinn_model.predict(data);
  const auto lr_test_pred = baseline.predict(split.test);
  const auto lr_all_pred = baseline.predict(data);

  PairedRun run;
  run.seed = seed;
  run.lambda = lambda;
  run.pinn_test = metrics::evaluate(kPinnName, y_test, pinn_test_pred, seed, split.fingerprint, "test");
  run.baseline_test =
      metrics::evaluate(kBaselineName, y_test, lr_test_pred, seed, split.fingerprint, "test");
  run.pinn_all = metrics::evaluate(kPinnName, y_all, pinn_all_pred, seed, split.fingerprint, "all");
  run.baseline_all = metrics::evaluate(kBaselineName, y_all, lr_all_pred, seed, split.fingerprint, "all");
  run.comparison = metrics::compare(run.pinn_test, run.baseline_test);

  RunDir dir(out);
  dir.write_json("metrics.json", {{kPinnName, metrics_pair(run.pinn_test, run.pinn_all)},
                                  {kBaselineName, metrics_pair(run.baseline_test, run.baseline_all)}});
  json comparison = run.comparison.to_json();
  comparison["scope"] = "test";
  comparison["all_rows"] = metrics::compare(run.pinn_all, run.baseline_all).to_json();
  dir.write_json("comparison.json", comparison);

  std::vector<bool> in_test(data.size(), false);
  for (auto i : split.test_indices) in_test[i] = true;
  std::ostringstream avp;
  avp << "index,alloy,strength_mpa,load,split,actual_mm,pinn_mm,linear_mm\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    avp << i << ',' << data[i].alloy << ',' << fmt_double(data[i].strength_mpa) << ','
        << fmt_double(data[i].load) << ',' << (in_test[i] ? "test" : "train") << ','
        << fmt_double(y_all[i]) << ',' << fmt_double(pinn_all_pred[i]) << ','
        << fmt_double(lr_all_pred[i]) << '\n';
  }
  dir.write("actual_vs_predicted.csv", avp.str());
  dir.write("residuals_pinn.csv", residuals_csv(run.pinn_test));
  dir.write("residuals_linear.csv", residuals_csv(run.baseline_test));
  dir.write("histogram_pinn.csv", histogram_csv(run.pinn_test, opts.bins));
  dir.write("histogram_linear.csv", histogram_csv(run.baseline_test, opts.bins));
  dir.write("surface_pinn.csv",
            surface_csv([&](double s, double l) { return pinn_model.predict(s, l); }, opts.surface_resolution));
  dir.write("surface_linear.csv",
            surface_csv([&](double s, double l) { return baseline.predict(s, l); }, opts.surface_resolution));
  dir.write("history_pinn.csv", history_csv(trained.history));
  dir.write_json("checkpoint_pinn.json", pinn_model.to_json());
  dir.write_json("baseline.json", baseline.to_json());

  dir.write_json("manifest.json", {{"format_version", kManifestVersion},
                                   {"command", "compare"},
                                   {"dataset", dataset_json(opts.dataset, data)},
                                   {"split", split_json(scfg, split)},
                                   {"training", pcfg.to_json()},
                                   {"optimizer", adam_json(pcfg.lr)},
                                   {"artifacts", dir.hashes()}});
  return run;
}

json medians_json(std::span<const PairedRun> runs, bool pinn) {
  std::vector<double> r2, mse, mae;
  for (const auto& r : runs) {
    const auto& rep = pinn ? r.pinn_test : r.baseline_test;
    r2.push_back(rep.r2);
    mse.push_back(rep.mse);
    mae.push_back(rep.mae);
  }
  return {{"r2", median(r2)}, {"mse", median(mse)}, {"mae", median(mae)}};
}

}  // namespace

CompareOutcome run_compare(const CompareOptions& opts) {
  if (opts.seeds < 1) throw std::invalid_argument("compare: --seeds must be >= 1");
  if (opts.surface_resolution < 2) throw std::invalid_argument("compare: surface resolution must be >= 2");
  std::vector<double> lambdas = opts.lambdas;
  if (lambdas.empty()) lambdas.push_back(opts.pinn.lambda);
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw std::invalid_argument("compare: lambda values must be >= 0");
  }
  const auto data = load_dataset(opts.dataset);

  CompareOutcome outcome;
  json per_lambda = json::array();
  for (double lambda : lambdas) {
    fs::path base = lambdas.size() > 1 ? opts.out / ("lambda_" + fmt_double(lambda)) : opts.out;
    std::vector<PairedRun> runs;
    for (std::size_t k = 0; k < opts.seeds; ++k) {
      const std::uint64_t seed = opts.split.seed + k;
      const fs::path dir = opts.seeds > 1 ? base / ("seed_" + std::to_string(seed)) : base;
      runs.push_back(run_pair(data, opts, seed, lambda, dir));
    }
    json verdicts = json::object();
    json seeds = json::array();
    for (const auto& r : runs) {
      verdicts[r.comparison.verdict] = verdicts.value(r.comparison.verdict, 0) + 1;
      seeds.push_back(r.seed);
    }
    per_lambda.push_back({{"lambda", lambda},
                          {"seeds", seeds},
                          {"median_test", {{kPinnName, medians_json(runs, true)},
                                           {kBaselineName, medians_json(runs, false)}}},
                          {"verdicts", verdicts}});
    outcome.runs.insert(outcome.runs.end(), runs.begin(), runs.end());
  }
  outcome.aggregate = {{"runs", outcome.runs.size()}, {"by_lambda", per_lambda}};
  if (outcome.runs.size() > 1) {
    fs::create_directories(opts.out);
    write_file(opts.out / "aggregate.json", outcome.aggregate.dump(2) + "\n");
  }
  return outcome;
}

// ---------------------------------------------------------------------------

pinn::PdeRunResult run_pde(const PdeOptions& opts) {
  const auto& cfg = opts.run;
  auto result = pinn::train_pde(cfg);

  RunDir dir(opts.out);
  dir.write("history.csv", history_csv(result.history));
  std::ostringstream field;
  field << "x,t,predicted,exact\n";
  const auto& g = result.grid;
  for (std::size_t it = 0; it < g.ts.size(); ++it) {
    for (std::size_t ix = 0; ix < g.xs.size(); ++ix) {
      const std::size_t k = it * g.xs.size() + ix;
      field << fmt_double(g.xs[ix]) << ',' << fmt_double(g.ts[it]) << ',' << fmt_double(g.predicted[k])
            << ',' << fmt_double(g.exact[k]) << '\n';
    }
  }
  dir.write("field.csv", field.str());
  const auto& p = cfg.problem;
  const json problem = {{"kind", pinn::to_string(p.kind)},
                        {"coefficient", p.coefficient},
                        {"x_max", p.x_max},
                        {"t_max", p.t_max},
                        {"initial", pinn::to_string(p.initial)},
                        {"velocity", pinn::to_string(p.velocity)}};
  dir.write_json("report.json", {{"problem", problem},
                                 {"relative_l2", result.relative_l2},
                                 {"grid", cfg.grid},
                                 {"epochs", cfg.epochs},
                                 {"final_loss", result.history.back().total}});
  dir.write_json("checkpoint.json", result.network.to_json());
  dir.write_json("manifest.json", {{"format_version", kManifestVersion},
                                   {"command", "pde"},
                                   {"problem", problem},
                                   {"samples", {{"data", cfg.n_data},
                                                {"collocation", cfg.n_collocation},
                                                {"initial", cfg.n_initial},
                                                {"boundary", cfg.n_boundary}}},
                                   {"epochs", cfg.epochs},
                                   {"seed", cfg.seed},
                                   {"hidden", cfg.hidden},
                                   {"activation", "tanh"},
                                   {"grid", cfg.grid},
                                   {"optimizer", adam_json(cfg.lr)},
                                   {"artifacts", dir.hashes()}});
  return result;
}

void run_export_dataset(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  lattice::write_csv(path, lattice::builtin_dataset());
}

// ---------------------------------------------------------------------------

GradcheckReport run_gradcheck(const GradcheckOptions& opts) {
  if (opts.networks < 1 || opts.batch < 1) throw std::invalid_argument("gradcheck: empty workload");
  GradcheckReport report;
  Rng rng(opts.seed);
  const double h = opts.step;
  for (std::size_t n = 0; n < opts.networks; ++n) {
    auto net = net::DenseNetwork::build(net::default_lattice_spec(rng.next()));
    std::vector<double> params = net.get_params();
    // Non-zero biases so their gradients are exercised too.
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      for (std::size_t k = 0; k < net.layer_sizes()[l + 1]; ++k) {
        params[net.bias_offset(l) + k] = rng.uniform(-0.1, 0.1);
      }
    }
    std::vector<std::array<double, 2>> xs(opts.batch);
    std::vector<double> ys(opts.batch), ps(opts.batch);
    for (std::size_t i = 0; i < opts.batch; ++i) {
      xs[i] = {rng.normal(), rng.normal()};
      ys[i] = rng.normal();
      ps[i] = rng.normal();
    }
    const double lambda = rng.uniform(0.0, 1.0);
    const auto form = n % 2 == 0 ? pinn::PhysicsForm::prediction : pinn::PhysicsForm::observed;
    auto objective = lattice::make_lattice_objective(net, xs, ys, ps, lambda, form);
    const auto grad = objective(params).gradient;

    auto loss_at = [&](std::span<const double> theta) {
      std::vector<double> preds;
      for (const auto& x : xs) preds.push_back(net.forward<double, double>(x, theta));
      return pinn::lattice_loss_terms<double>(preds, ys, ps, lambda, form).total;
    };
    auto patterns = [&](std::span<const double> theta) {
      std::vector<std::uint8_t> all;
      for (const auto& x : xs) {
        auto p = net.activation_pattern(x, theta);
        all.insert(all.end(), p.begin(), p.end());
      }
      return all;
    };
    const auto base_pattern = patterns(params);

    for (std::size_t s = 0; s < opts.params_per_network; ++s) {
      const std::size_t k = rng.below(params.size());
      std::vector<double> plus = params, minus = params;
      plus[k] += h;
      minus[k] -= h;
      if (patterns(plus) != base_pattern || patterns(minus) != base_pattern) {
        ++report.skipped_kinks;
        continue;
      }
      const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad[k]), 1e-6});
      report.max_relative_error = std::max(report.max_relative_error, std::abs(fd - grad[k]) / scale);
      ++report.checked;
    }
  }
  return report;
}

}  // namespace latpinn::commands
