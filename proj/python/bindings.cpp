#include <numbers>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "latpinn/autodiff.hpp"
#include "latpinn/commands.hpp"
#include "latpinn/lattice.hpp"
#include "latpinn/metrics.hpp"
#include "latpinn/pinn.hpp"

namespace py = pybind11;
using namespace latpinn;

namespace {

py::object to_python(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null:
      return py::none();
    case nlohmann::json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float:
      return py::float_(j.get<double>());
    case nlohmann::json::value_t::string:
      return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_python(v));
      return out;
    }
    case nlohmann::json::value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it) out[py::str(it.key())] = to_python(it.value());
      return out;
    }
    default:
      return py::none();
  }
}

py::dict sample_dict(const lattice::LatticeSample& s) {
  py::dict d;
  d["alloy"] = s.alloy;
  d["strength_mpa"] = s.strength_mpa;
  d["load"] = s.load;
  d["displacement_mm"] = s.displacement_mm;
  return d;
}

lattice::PinnConfig pinn_config(double lambda, double lr, long epochs, std::uint64_t seed,
                                const std::string& physics_form) {
  lattice::PinnConfig c;
  c.lambda = lambda;
  c.lr = lr;
  c.epochs = epochs;
  c.seed = seed;
  c.physics_form = pinn::physics_form_from_string(physics_form);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Physics-informed neural networks for lattice beam displacement";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<lattice::DataError>(m, "DataError", PyExc_ValueError);

  m.def("builtin_dataset", [] {
    py::list rows;
    for (const auto& s : lattice::builtin_dataset()) rows.append(sample_dict(s));
    return rows;
  });
  m.def("load_dataset", [](const std::string& source) {
    py::list rows;
    for (const auto& s : commands::load_dataset(source)) rows.append(sample_dict(s));
    return rows;
  }, py::arg("source"));
  m.def("export_dataset", &commands::run_export_dataset, py::arg("path"));

  m.def("split_indices", [](std::size_t n_rows, double train_fraction, std::uint64_t seed) {
    std::vector<lattice::LatticeSample> rows(n_rows);
    auto s = lattice::split(rows, {train_fraction, seed});
    return py::make_tuple(s.train_indices, s.test_indices, s.fingerprint);
  }, py::arg("n_rows"), py::arg("train_fraction") = 0.8, py::arg("seed") = 42);

  m.def("fit_baseline", [](const std::string& dataset) {
    auto m = lattice::train_baseline(commands::load_dataset(dataset));
    return py::make_tuple(m.w_strength, m.w_load, m.intercept);
  }, py::arg("dataset") = "builtin");

  m.def("r2", [](const std::vector<double>& a, const std::vector<double>& p) { return metrics::r2(a, p); },
        py::arg("actual"), py::arg("predicted"));
  m.def("mse", [](const std::vector<double>& a, const std::vector<double>& p) { return metrics::mse(a, p); },
        py::arg("actual"), py::arg("predicted"));
  m.def("mae", [](const std::vector<double>& a, const std::vector<double>& p) { return metrics::mae(a, p); },
        py::arg("actual"), py::arg("predicted"));
  m.def("error_histogram", [](const std::vector<double>& residuals, std::size_t bins) {
    auto h = metrics::error_histogram(residuals, bins);
    return py::make_tuple(h.edges, h.densities, h.counts);
  }, py::arg("residuals"), py::arg("bins") = 20);

  m.def("analytic_residual", [](const std::string& kind, double coefficient, double x, double t) {
    const double pi = std::numbers::pi;
    if (pinn::pde_kind_from_string(kind) == pinn::PdeKind::heat) {
      auto u = [&](const auto& xs, const auto& ts) {
        using std::exp, std::sin, ad::exp, ad::sin;
        return sin(pi * xs) * exp(-pi * pi * coefficient * ts);
      };
      return pinn::heat_residual<double>(u, x, t, coefficient);
    }
    auto u = [&](const auto& xs, const auto& ts) {
      using std::cos, std::sin, ad::cos, ad::sin;
      return sin(pi * xs) * cos(pi * coefficient * ts);
    };
    return pinn::wave_residual<double>(u, x, t, coefficient);
  }, py::arg("kind"), py::arg("coefficient"), py::arg("x"), py::arg("t"));

  m.def("train", [](const std::string& out, double lambda, double lr, long epochs, std::uint64_t seed,
                    double train_fraction, const std::string& dataset, const std::string& physics_form) {
    commands::TrainOptions o;
    o.dataset = dataset;
    o.split = {train_fraction, seed};
    o.pinn = pinn_config(lambda, lr, epochs, seed, physics_form);
    o.out = out;
    py::gil_scoped_release release;
    auto res = commands::run_train(o);
    py::gil_scoped_acquire acquire;
    py::dict d;
    d["test"] = to_python(res.test.to_json());
    d["all"] = to_python(res.all.to_json());
    d["manifest"] = to_python(res.manifest);
    return d;
  }, py::arg("out"), py::arg("lambda_") = 0.1, py::arg("lr") = 1e-3, py::arg("epochs") = 1000,
     py::arg("seed") = 42, py::arg("train_fraction") = 0.8, py::arg("dataset") = "builtin",
     py::arg("physics_form") = "prediction");

  m.def("compare", [](const std::string& out, std::size_t seeds, std::vector<double> lambdas,
                      double lr, long epochs, std::uint64_t seed, const std::string& dataset) {
    commands::CompareOptions o;
    o.dataset = dataset;
    o.split.seed = seed;
    o.pinn.seed = seed;
    o.pinn.lr = lr;
    o.pinn.epochs = epochs;
    o.seeds = seeds;
    o.lambdas = std::move(lambdas);
    o.out = out;
    py::gil_scoped_release release;
    auto res = commands::run_compare(o);
    py::gil_scoped_acquire acquire;
    py::list runs;
    for (const auto& r : res.runs) {
      py::dict d;
      d["seed"] = r.seed;
      d["lambda"] = r.lambda;
      d["comparison"] = to_python(r.comparison.to_json());
      runs.append(d);
    }
    py::dict d;
    d["runs"] = runs;
    d["aggregate"] = to_python(res.aggregate);
    return d;
  }, py::arg("out"), py::arg("seeds") = 1, py::arg("lambdas") = std::vector<double>{},
     py::arg("lr") = 1e-3, py::arg("epochs") = 1000, py::arg("seed") = 42, py::arg("dataset") = "builtin");

  m.def("pde", [](const std::string& out, const std::string& kind, double coefficient, long epochs,
                  double lr, std::size_t collocation, std::uint64_t seed) {
    commands::PdeOptions o;
    const auto k = pinn::pde_kind_from_string(kind);
    const double coef = coefficient > 0.0 ? coefficient : (k == pinn::PdeKind::heat ? 0.1 : 1.0);
    o.run.problem = k == pinn::PdeKind::heat ? pinn::heat_problem(coef) : pinn::wave_problem(coef);
    o.run.epochs = epochs;
    o.run.lr = lr;
    o.run.n_collocation = collocation;
    o.run.seed = seed;
    o.out = out;
    py::gil_scoped_release release;
    auto res = commands::run_pde(o);
    py::gil_scoped_acquire acquire;
    py::dict d;
    d["relative_l2"] = res.relative_l2;
    d["epochs"] = res.history.size();
    d["final_loss"] = res.history.back().total;
    return d;
  }, py::arg("out"), py::arg("kind") = "heat", py::arg("coefficient") = 0.0, py::arg("epochs") = 1500,
     py::arg("lr") = 5e-3, py::arg("collocation") = 1000, py::arg("seed") = 42);

  m.def("gradcheck", [](std::size_t networks, std::size_t params, std::uint64_t seed) {
    commands::GradcheckOptions o;
    o.networks = networks;
    o.params_per_network = params;
    o.seed = seed;
    py::gil_scoped_release release;
    auto rep = commands::run_gradcheck(o);
    py::gil_scoped_acquire acquire;
    py::dict d;
    d["max_relative_error"] = rep.max_relative_error;
    d["checked"] = rep.checked;
    d["skipped_kinks"] = rep.skipped_kinks;
    return d;
  }, py::arg("networks") = 100, py::arg("params") = 40, py::arg("seed") = 7);
}
