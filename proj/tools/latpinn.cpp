// latpinn command-line entry point.
//
// Exit codes: 0 success, 1 usage or data error, 2 numerical failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "latpinn/commands.hpp"
#include "latpinn/format.hpp"

namespace {

using namespace latpinn;

void add_pinn_options(CLI::App* cmd, lattice::PinnConfig& pinn, lattice::SplitConfig& split,
                      std::string& dataset, std::string& physics_form, std::string& scaler) {
  cmd->add_option("--dataset", dataset, "CSV path or 'builtin'")->capture_default_str();
  cmd->add_option("--seed", pinn.seed, "Split and initialization seed")->capture_default_str();
  cmd->add_option("--lambda", pinn.lambda, "Physics penalty weight")->capture_default_str();
  cmd->add_option("--lr", pinn.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--epochs", pinn.epochs, "Full-batch epochs")->capture_default_str();
  cmd->add_option("--train-fraction", split.train_fraction, "Training share of the rows")
      ->capture_default_str();
  cmd->add_option("--hidden", pinn.hidden, "Hidden layer widths")->capture_default_str()->delimiter(',');
  cmd->add_option("--physics-eps", pinn.physics_eps, "Epsilon in load/(strength+eps)")->capture_default_str();
  cmd->add_option("--physics-form", physics_form, "prediction|observed")->capture_default_str();
  cmd->add_option("--scaler", scaler, "standardize|none")->capture_default_str();
}

void finish_pinn(lattice::PinnConfig& pinn, lattice::SplitConfig& split, const std::string& physics_form,
                 const std::string& scaler) {
  pinn.physics_form = pinn::physics_form_from_string(physics_form);
  pinn.scaler = lattice::scaler_policy_from_string(scaler);
  split.seed = pinn.seed;
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw std::invalid_argument("--train-fraction must lie in (0, 1)");
  }
}

/// Fills options not given on the command line from a flat key = value file.
void apply_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  const auto items = CLI::ConfigINI().from_file(path);
  for (const auto& item : items) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == cmd->get_name())) {
      throw std::invalid_argument("config key '" + item.fullname() + "' does not belong to '" +
                                  cmd->get_name() + "'");
    }
    if (item.name == "++" || item.name == "--") continue;  // section markers
    CLI::Option* opt = nullptr;
    try {
      opt = cmd->get_option("--" + item.name);
    } catch (const CLI::OptionNotFound&) {
      throw std::invalid_argument("unknown config key '" + item.name + "' for '" + cmd->get_name() + "'");
    }
    if (item.name == "config" || opt->count() > 0) continue;
    for (const auto& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

void print_report(const metrics::MetricsReport& r) {
  std::cout << r.model << " [" << r.scope << ", n=" << r.n << "] r2=" << fmt_double(r.r2)
            << " mse=" << fmt_double(r.mse) << " mae=" << fmt_double(r.mae) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed neural networks for lattice beam displacement"};
  app.require_subcommand(1);

  // train
  commands::TrainOptions train;
  std::string train_form = "prediction", train_scaler = "standardize", train_out = "runs/train";
  std::string from_manifest;
  auto* train_cmd = app.add_subcommand("train", "Train the lattice PINN and write run artifacts");
  std::string train_config;
  train_cmd->add_option("--config", train_config, "Flat key = value config file");
  add_pinn_options(train_cmd, train.pinn, train.split, train.dataset, train_form, train_scaler);
  train_cmd->add_option("--out", train_out, "Output directory")->capture_default_str();
  train_cmd->add_option("--from-manifest", from_manifest, "Re-run the configuration in a manifest.json");

  // compare
  commands::CompareOptions cmp;
  std::string cmp_form = "prediction", cmp_scaler = "standardize", cmp_out = "runs/compare";
  auto* cmp_cmd = app.add_subcommand("compare", "Train PINN and linear baseline on the same split");
  std::string cmp_config;
  cmp_cmd->add_option("--config", cmp_config, "Flat key = value config file");
  add_pinn_options(cmp_cmd, cmp.pinn, cmp.split, cmp.dataset, cmp_form, cmp_scaler);
  cmp_cmd->add_option("--seeds", cmp.seeds, "Number of consecutive seeds to sweep")->capture_default_str();
  cmp_cmd->add_option("--lambdas", cmp.lambdas, "Lambda values to sweep (comma separated)")->delimiter(',');
  cmp_cmd->add_option("--surface-resolution", cmp.surface_resolution, "Surface grid points per axis")
      ->capture_default_str();
  cmp_cmd->add_option("--bins", cmp.bins, "Error histogram bins")->capture_default_str();
  cmp_cmd->add_option("--out", cmp_out, "Output directory")->capture_default_str();

  // pde
  commands::PdeOptions pde;
  std::string pde_kind = "heat", pde_out = "runs/pde";
  double coefficient = -1.0;
  auto& run = pde.run;
  auto* pde_cmd = app.add_subcommand("pde", "Train a PINN on the heat or wave equation");
  std::string pde_config;
  pde_cmd->add_option("--config", pde_config, "Flat key = value config file");
  pde_cmd->add_option("--kind", pde_kind, "heat|wave")->capture_default_str()->check(CLI::IsMember({"heat", "wave"}));
  pde_cmd->add_option("--coefficient", coefficient, "alpha (heat, default 0.1) or c (wave, default 1)");
  pde_cmd->add_option("--data", run.n_data, "Heat data points")->capture_default_str();
  pde_cmd->add_option("--collocation", run.n_collocation, "Collocation points")->capture_default_str();
  pde_cmd->add_option("--initial", run.n_initial, "Initial-condition points")->capture_default_str();
  pde_cmd->add_option("--boundary", run.n_boundary, "Boundary points per edge")->capture_default_str();
  pde_cmd->add_option("--epochs", run.epochs, "Full-batch epochs")->capture_default_str();
  pde_cmd->add_option("--lr", run.lr, "Adam learning rate")->capture_default_str();
  pde_cmd->add_option("--seed", run.seed, "Seed for sampling and initialization")->capture_default_str();
  pde_cmd->add_option("--hidden", run.hidden, "Hidden layer widths")->capture_default_str()->delimiter(',');
  pde_cmd->add_option("--grid", run.grid, "Evaluation grid points per axis")->capture_default_str();
  pde_cmd->add_option("--out", pde_out, "Output directory")->capture_default_str();

  // export-dataset
  std::string export_path = "lattice_dataset.csv";
  auto* export_cmd = app.add_subcommand("export-dataset", "Write the builtin dataset as CSV");
  export_cmd->add_option("path", export_path, "Destination CSV")->capture_default_str();

  // gradcheck
  commands::GradcheckOptions gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare autodiff gradients with finite differences");
  gc_cmd->add_option("--networks", gc.networks, "Random networks to check")->capture_default_str();
  gc_cmd->add_option("--params", gc.params_per_network, "Sampled parameters per network")->capture_default_str();
  gc_cmd->add_option("--step", gc.step, "Central difference step")->capture_default_str();
  gc_cmd->add_option("--seed", gc.seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    apply_config(train_cmd, train_config);
    apply_config(cmp_cmd, cmp_config);
    apply_config(pde_cmd, pde_config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*train_cmd) {
      if (!from_manifest.empty()) {
        train = commands::train_options_from_manifest(nlohmann::json::parse(read_file(from_manifest)));
      } else {
        finish_pinn(train.pinn, train.split, train_form, train_scaler);
      }
      train.out = train_out;
      auto res = commands::run_train(train);
      print_report(res.test);
      print_report(res.all);
      std::cout << "artifacts written to " << train.out.string() << '\n';
    } else if (*cmp_cmd) {
      finish_pinn(cmp.pinn, cmp.split, cmp_form, cmp_scaler);
      cmp.out = cmp_out;
      auto res = commands::run_compare(cmp);
      if (res.runs.size() == 1) {
        const auto& r = res.runs.front();
        print_report(r.pinn_test);
        print_report(r.baseline_test);
        std::cout << "verdict: " << r.comparison.verdict << '\n';
      } else {
        std::cout << res.aggregate.dump(2) << '\n';
      }
      std::cout << "artifacts written to " << cmp.out.string() << '\n';
    } else if (*pde_cmd) {
      const auto kind = pinn::pde_kind_from_string(pde_kind);
      if (kind == pinn::PdeKind::heat) {
        run.problem = pinn::heat_problem(coefficient > 0.0 ? coefficient : 0.1);
      } else {
        run.problem = pinn::wave_problem(coefficient > 0.0 ? coefficient : 1.0);
      }
      if (pde_cmd->count("--coefficient") > 0 && !(coefficient > 0.0)) {
        throw std::invalid_argument("--coefficient must be > 0");
      }
      pde.out = pde_out;
      auto res = commands::run_pde(pde);
      std::cout << pde_kind << " relative_l2=" << fmt_double(res.relative_l2) << '\n';
      std::cout << "artifacts written to " << pde.out.string() << '\n';
    } else if (*export_cmd) {
      commands::run_export_dataset(export_path);
      std::cout << "wrote " << export_path << '\n';
    } else if (*gc_cmd) {
      auto rep = commands::run_gradcheck(gc);
      std::cout << "checked=" << rep.checked << " skipped_kinks=" << rep.skipped_kinks
                << " max_relative_error=" << fmt_double(rep.max_relative_error) << '\n';
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what();
    if (e.epoch() >= 0) std::cerr << " (epoch " << e.epoch() << ")";
    std::cerr << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
