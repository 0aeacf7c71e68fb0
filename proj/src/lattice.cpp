#include "latpinn/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "latpinn/format.hpp"
#include "latpinn/random.hpp"

namespace latpinn::lattice {

namespace {

constexpr const char* kHeader = "alloy,strength_mpa,load,displacement_mm";

std::vector<LatticeSample> make_builtin() {
  struct Alloy {
    const char* name;
    double strength;
    std::array<double, 10> displacement;  // loads 1000 .. 10000
  };
  static const Alloy alloys[] = {
      {"Structural Steel", 250,
       {0.003518, 0.0070361, 0.010554, 0.014072, 0.01759, 0.021108, 0.024626, 0.028144, 0.031662,
        0.03518}},
      {"AA6061", 276,
       {0.01014, 0.02028, 0.030419, 0.040559, 0.050699, 0.060839, 0.070978, 0.081118, 0.091258,
        0.1014}},
      {"AA7075", 503,
       {0.0098541, 0.019708, 0.029562, 0.039417, 0.049271, 0.059125, 0.068979, 0.078833, 0.088687,
        0.098541}},
      {"Ti6Al4V", 880,
       {0.0066571, 0.013314, 0.019971, 0.026628, 0.033286, 0.039943, 0.0466, 0.053257, 0.059914,
        0.066571}},
      {"Inconel718", 1034,
       {0.0034893, 0.0069786, 0.010468, 0.013957, 0.017446, 0.020936, 0.024425, 0.027914, 0.031404,
        0.034893}},
  };
  std::vector<LatticeSample> rows;
  for (const auto& a : alloys) {
    for (std::size_t k = 0; k < 10; ++k) {
      rows.push_back({a.name, a.strength, 1000.0 * static_cast<double>(k + 1), a.displacement[k]});
    }
  }
  return rows;
}

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& field, const char* column, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line) + ": column " + column + ": '" + field +
                    "' is not a finite number");
  }
  return v;
}

}  // namespace

const std::vector<LatticeSample>& builtin_dataset() {
  static const std::vector<LatticeSample> rows = make_builtin();
  return rows;
}

void write_csv(std::ostream& out, std::span<const LatticeSample> rows) {
  out << kHeader << '\n';
  for (const auto& r : rows) {
    out << r.alloy << ',' << fmt_double(r.strength_mpa) << ',' << fmt_double(r.load) << ','
        << fmt_double(r.displacement_mm) << '\n';
  }
}

void write_csv(const std::filesystem::path& path, std::span<const LatticeSample> rows) {
  std::ostringstream ss;
  write_csv(ss, rows);
  write_file(path, ss.str());
}

std::vector<LatticeSample> read_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw DataError(std::string("missing header '") + kHeader + "' (empty input)");
  if (trim(line) != kHeader) {
    throw DataError("line " + std::to_string(lineno) + ": expected header '" + kHeader + "', got '" +
                    trim(line) + "'");
  }

  std::vector<LatticeSample> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split_fields(line);
    if (f.size() != 4) {
      throw DataError("line " + std::to_string(lineno) + ": expected 4 fields, got " +
                      std::to_string(f.size()));
    }
    if (f[0].empty()) throw DataError("line " + std::to_string(lineno) + ": empty alloy name");
    LatticeSample s;
    s.alloy = f[0];
    s.strength_mpa = parse_number(f[1], "strength_mpa", lineno);
    s.load = parse_number(f[2], "load", lineno);
    s.displacement_mm = parse_number(f[3], "displacement_mm", lineno);
    if (s.strength_mpa < 0.0 || s.load < 0.0) {
      throw DataError("line " + std::to_string(lineno) + ": strength and load must be >= 0");
    }
    if (!(s.displacement_mm > 0.0)) {
      throw DataError("line " + std::to_string(lineno) + ": displacement_mm must be > 0, got " + f[3]);
    }
    rows.push_back(std::move(s));
  }
  return rows;
}

std::vector<LatticeSample> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return read_csv(in);
}

std::string dataset_fingerprint(std::span<const LatticeSample> rows) {
  std::ostringstream ss;
  write_csv(ss, rows);
  return sha256_hex(ss.str());
}

// ---------------------------------------------------------------------------

StandardScaler::StandardScaler(std::vector<double> means, std::vector<double> stds)
    : means_(std::move(means)), stds_(std::move(stds)) {
  if (means_.size() != stds_.size()) throw std::invalid_argument("scaler: size mismatch");
  for (double s : stds_) {
    if (!(s > 0.0)) throw std::invalid_argument("scaler: standard deviations must be > 0");
  }
}

StandardScaler StandardScaler::fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw std::invalid_argument("scaler: cannot fit on zero rows");
  const std::size_t d = rows.front().size();
  const double n = static_cast<double>(rows.size());
  std::vector<double> means(d, 0.0), stds(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) throw std::invalid_argument("scaler: ragged rows");
    for (std::size_t k = 0; k < d; ++k) means[k] += r[k];
  }
  for (auto& m : means) m /= n;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) stds[k] += (r[k] - means[k]) * (r[k] - means[k]);
  }
  for (auto& s : stds) {
    s = std::sqrt(s / n);
    if (!(s > 0.0)) s = 1.0;
  }
  return StandardScaler(std::move(means), std::move(stds));
}

std::vector<double> StandardScaler::transform(std::span<const double> v) const {
  if (v.size() != size()) throw std::invalid_argument("scaler: wrong vector length");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = transform(k, v[k]);
  return out;
}

std::vector<double> StandardScaler::inverse_transform(std::span<const double> v) const {
  if (v.size() != size()) throw std::invalid_argument("scaler: wrong vector length");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = inverse(k, v[k]);
  return out;
}

nlohmann::json StandardScaler::to_json() const { return {{"means", means_}, {"stds", stds_}}; }

StandardScaler StandardScaler::from_json(const nlohmann::json& j) {
  return StandardScaler(j.at("means").get<std::vector<double>>(), j.at("stds").get<std::vector<double>>());
}

// ---------------------------------------------------------------------------

std::string split_fingerprint(std::span<const std::size_t> train_indices,
                              std::span<const std::size_t> test_indices) {
  std::string s = "train:";
  for (auto i : train_indices) s += std::to_string(i) + ',';
  s += ";test:";
  for (auto i : test_indices) s += std::to_string(i) + ',';
  return sha256_hex(s).substr(0, 16);
}

Split split(std::span<const LatticeSample> data, const SplitConfig& cfg) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("split: need at least 2 rows");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw std::invalid_argument("split: train fraction must lie in (0, 1)");
  }
  // Guard against 0.8 * 50 landing a hair above 40.
  const auto n_train =
      static_cast<std::size_t>(std::ceil(cfg.train_fraction * static_cast<double>(n) - 1e-9));
  if (n_train == 0 || n_train >= n) {
    throw std::invalid_argument("split: fraction leaves an empty train or test set");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }

  Split s;
  s.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train_indices.begin(), s.train_indices.end());
  std::sort(s.test_indices.begin(), s.test_indices.end());
  for (auto i : s.train_indices) s.train.push_back(data[i]);
  for (auto i : s.test_indices) s.test.push_back(data[i]);
  s.fingerprint = split_fingerprint(s.train_indices, s.test_indices);
  return s;
}

// ---------------------------------------------------------------------------

std::string to_string(ScalerPolicy p) { return p == ScalerPolicy::standardize ? "standardize" : "none"; }

ScalerPolicy scaler_policy_from_string(const std::string& s) {
  if (s == "standardize") return ScalerPolicy::standardize;
  if (s == "none") return ScalerPolicy::none;
  throw std::invalid_argument("unknown scaler policy '" + s + "' (expected standardize|none)");
}

nlohmann::json PinnConfig::to_json() const {
  return {{"lambda", lambda},
          {"lr", lr},
          {"epochs", epochs},
          {"seed", seed},
          {"scaler", to_string(scaler)},
          {"physics_form", pinn::to_string(physics_form)},
          {"hidden", hidden},
          {"physics_eps", physics_eps},
          {"adam", {{"beta1", 0.9}, {"beta2", 0.999}, {"eps", 1e-8}}}};
}

PinnConfig PinnConfig::from_json(const nlohmann::json& j) {
  PinnConfig c;
  c.lambda = j.value("lambda", c.lambda);
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.scaler = scaler_policy_from_string(j.value("scaler", to_string(c.scaler)));
  c.physics_form = pinn::physics_form_from_string(j.value("physics_form", pinn::to_string(c.physics_form)));
  c.hidden = j.value("hidden", c.hidden);
  c.physics_eps = j.value("physics_eps", c.physics_eps);
  return c;
}

double PinnModel::predict(double strength_mpa, double load) const {
  const std::array<double, 2> x{inputs.transform(0, strength_mpa), inputs.transform(1, load)};
  return target.inverse(0, network.forward(x));
}

std::vector<double> PinnModel::predict(std::span<const LatticeSample> rows) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(r.strength_mpa, r.load));
  return out;
}

nlohmann::json PinnModel::to_json() const {
  nlohmann::json j = network.to_json();
  j["preprocessing"] = {{"inputs", inputs.to_json()},
                        {"target", target.to_json()},
                        {"physics", {{"mean", physics.mean}, {"stddev", physics.stddev}, {"eps", physics.eps}}}};
  j["training"] = config.to_json();
  return j;
}

PinnModel PinnModel::from_json(const nlohmann::json& j) {
  const auto& pre = j.at("preprocessing");
  const auto& ph = pre.at("physics");
  return PinnModel{net::DenseNetwork::from_json(j),
                   StandardScaler::from_json(pre.at("inputs")),
                   StandardScaler::from_json(pre.at("target")),
                   pinn::PhysicsStats{ph.at("mean").get<double>(), ph.at("stddev").get<double>(),
                                      ph.at("eps").get<double>()},
                   j.contains("training") ? PinnConfig::from_json(j["training"]) : PinnConfig{}};
}

optimize::Objective make_lattice_objective(const net::DenseNetwork& shape,
                                           std::vector<std::array<double, 2>> features,
                                           std::vector<double> targets,
                                           std::vector<double> physics_normalized, double lambda,
                                           pinn::PhysicsForm form) {
  if (features.empty()) throw std::invalid_argument("lattice objective: empty training set");
  if (targets.size() != features.size() || physics_normalized.size() != features.size()) {
    throw std::invalid_argument("lattice objective: length mismatch");
  }
  auto tape_buf = std::make_shared<ad::Tape>();
  auto adj_buf = std::make_shared<std::vector<double>>();
  return [shape, features = std::move(features), targets = std::move(targets),
          pn = std::move(physics_normalized), lambda, form, tape_buf,
          adj_buf](std::span<const double> params) {
    ad::Tape& tape = *tape_buf;
    tape.clear();
    auto pv = tape.variables(params);
    std::span<const ad::Var> pspan(pv);
    std::vector<ad::Var> preds;
    preds.reserve(features.size());
    for (const auto& f : features) {
      const std::array<ad::Var, 2> in{tape.variable(f[0]), tape.variable(f[1])};
      preds.push_back(shape.forward<ad::Var, ad::Var>(in, pspan));
    }
    auto terms = pinn::lattice_loss_terms<ad::Var>(preds, targets, pn, lambda, form);
    optimize::LossBreakdown b;
    b.data = terms.data.value();
    b.physics = terms.physics.value();
    b.total = terms.total.value();
    b.lambda = lambda;
    tape.adjoints(terms.total, *adj_buf);
    std::vector<double> grad(pv.size());
    for (std::size_t k = 0; k < pv.size(); ++k) grad[k] = (*adj_buf)[pv[k].index];
    return optimize::LossEvaluation{b, std::move(grad)};
  };
}

PinnTrainingResult train_pinn(std::span<const LatticeSample> train, const PinnConfig& config) {
  if (train.empty()) throw std::invalid_argument("train_pinn: empty training set");
  if (!(config.lambda >= 0.0)) throw std::invalid_argument("train_pinn: lambda must be >= 0");

  std::vector<std::vector<double>> xs, ys;
  std::vector<double> p;
  for (const auto& r : train) {
    xs.push_back({r.strength_mpa, r.load});
    ys.push_back({r.displacement_mm});
    p.push_back(pinn::physics_term(r.strength_mpa, r.load, config.physics_eps));
  }
  StandardScaler in_scaler({0.0, 0.0}, {1.0, 1.0});
  StandardScaler out_scaler({0.0}, {1.0});
  if (config.scaler == ScalerPolicy::standardize) {
    in_scaler = StandardScaler::fit(xs);
    out_scaler = StandardScaler::fit(ys);
  }
  // Frozen over the whole training split.
  const pinn::PhysicsStats stats = pinn::physics_stats(p, config.physics_eps);

  std::vector<std::array<double, 2>> features;
  std::vector<double> targets, pn;
  for (std::size_t i = 0; i < train.size(); ++i) {
    features.push_back({in_scaler.transform(0, xs[i][0]), in_scaler.transform(1, xs[i][1])});
    targets.push_back(out_scaler.transform(0, ys[i][0]));
    pn.push_back(stats.normalize(p[i]));
  }

  net::NetworkSpec spec;
  spec.input_dim = 2;
  spec.hidden_dims = config.hidden;
  spec.seed = config.seed;
  spec.hidden_activation = net::Activation::relu;
  net::DenseNetwork network = net::DenseNetwork::build(spec);

  auto objective = make_lattice_objective(network, std::move(features), std::move(targets),
                                          std::move(pn), config.lambda, config.physics_form);
  optimize::AdamState adam(network.parameter_count(), optimize::AdamConfig{config.lr});
  std::vector<double> params = network.get_params();
  auto history = optimize::train_loop(params, objective, config.epochs, adam);
  network.set_params(params);

  return PinnTrainingResult{PinnModel{std::move(network), std::move(in_scaler), std::move(out_scaler), stats, config},
                            std::move(history)};
}

// ---------------------------------------------------------------------------

std::vector<double> LinearModel::predict(std::span<const LatticeSample> rows) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(r.strength_mpa, r.load));
  return out;
}

nlohmann::json LinearModel::to_json() const {
  return {{"w_strength", w_strength}, {"w_load", w_load}, {"intercept", intercept}};
}

LinearModel train_baseline(std::span<const LatticeSample> train) {
  if (train.size() < 3) throw std::invalid_argument("train_baseline: need at least 3 rows");
  const double n = static_cast<double>(train.size());
  double ms = 0.0, ml = 0.0, my = 0.0;
  for (const auto& r : train) {
    ms += r.strength_mpa;
    ml += r.load;
    my += r.displacement_mm;
  }
  ms /= n;
  ml /= n;
  my /= n;
  double sss = 0.0, sll = 0.0, ssl = 0.0, ssy = 0.0, sly = 0.0;
  for (const auto& r : train) {
    const double ds = r.strength_mpa - ms;
    const double dl = r.load - ml;
    const double dy = r.displacement_mm - my;
    sss += ds * ds;
    sll += dl * dl;
    ssl += ds * dl;
    ssy += ds * dy;
    sly += dl * dy;
  }
  const double det = sss * sll - ssl * ssl;
  if (!(sss > 0.0) || !(sll > 0.0) || !(det > 1e-12 * sss * sll)) {
    throw std::invalid_argument(
        "train_baseline: singular normal matrix (strength and load are constant or collinear)");
  }
  LinearModel m;
  m.w_strength = (sll * ssy - ssl * sly) / det;
  m.w_load = (sss * sly - ssl * ssy) / det;
  m.intercept = my - m.w_strength * ms - m.w_load * ml;
  return m;
}

// ---------------------------------------------------------------------------

SurfaceGrid predict_surface(const DisplacementFn& model, std::pair<double, double> strength_range,
                            std::pair<double, double> load_range, std::size_t resolution) {
  if (resolution < 2) throw std::invalid_argument("predict_surface: resolution must be >= 2");
  auto valid = [](std::pair<double, double> r) {
    return std::isfinite(r.first) && std::isfinite(r.second) && r.second > r.first;
  };
  if (!valid(strength_range) || !valid(load_range)) {
    throw std::invalid_argument("predict_surface: ranges must be finite with hi > lo");
  }
  auto axis = [resolution](std::pair<double, double> r) {
    std::vector<double> v;
    for (std::size_t i = 0; i < resolution; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(resolution - 1);
      v.push_back(i + 1 == resolution ? r.second : r.first + f * (r.second - r.first));
    }
    return v;
  };
  SurfaceGrid g;
  g.strengths = axis(strength_range);
  g.loads = axis(load_range);
  g.values.reserve(resolution * resolution);
  for (double s : g.strengths) {
    for (double l : g.loads) g.values.push_back(model(s, l));
  }
  return g;
}

void write_surface_csv(std::ostream& out, const SurfaceGrid& grid) {
  out << "strength_mpa,load,displacement_mm\n";
  for (std::size_t i = 0; i < grid.strengths.size(); ++i) {
    for (std::size_t j = 0; j < grid.loads.size(); ++j) {
      out << fmt_double(grid.strengths[i]) << ',' << fmt_double(grid.loads[j]) << ','
          << fmt_double(grid.at(i, j)) << '\n';
    }
  }
}

}  // namespace latpinn::lattice
