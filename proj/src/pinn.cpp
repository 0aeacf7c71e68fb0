#include "latpinn/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "latpinn/random.hpp"

namespace latpinn::pinn {

using ad::Tape;
using ad::Var;

double data_loss(std::span<const double> preds, std::span<const double> targets) {
  if (preds.empty()) throw std::invalid_argument("data_loss: empty input");
  if (preds.size() != targets.size()) throw std::invalid_argument("data_loss: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double r = preds[i] - targets[i];
    s += r * r;
  }
  return s / static_cast<double>(preds.size());
}

double physics_term(double strength, double load, double eps) { return load / (strength + eps); }

PhysicsStats physics_stats(std::span<const double> terms, double eps) {
  if (terms.empty()) throw std::invalid_argument("physics_stats: empty batch");
  const auto [lo, hi] = std::minmax_element(terms.begin(), terms.end());
  if (*lo == *hi) return {*lo, 0.0, eps};  // exact zeros after normalization
  const double n = static_cast<double>(terms.size());
  double mean = 0.0;
  for (double p : terms) mean += p;
  mean /= n;
  double var = 0.0;
  for (double p : terms) var += (p - mean) * (p - mean);
  return {mean, std::sqrt(var / n), eps};
}

std::vector<double> normalize_physics(std::span<const double> terms, double eps) {
  const PhysicsStats stats = physics_stats(terms, eps);
  std::vector<double> out;
  out.reserve(terms.size());
  for (double p : terms) out.push_back(stats.normalize(p));
  return out;
}

std::string to_string(PhysicsForm f) {
  return f == PhysicsForm::prediction ? "prediction" : "observed";
}

PhysicsForm physics_form_from_string(const std::string& s) {
  if (s == "prediction") return PhysicsForm::prediction;
  if (s == "observed") return PhysicsForm::observed;
  throw std::invalid_argument("unknown physics form '" + s + "' (expected prediction|observed)");
}

LossBreakdown lattice_total_loss(std::span<const double> preds, std::span<const double> targets,
                                 std::span<const double> physics_normalized, double lambda,
                                 PhysicsForm form) {
  auto terms = lattice_loss_terms<double>(preds, targets, physics_normalized, lambda, form);
  LossBreakdown b;
  b.data = terms.data;
  b.physics = terms.physics;
  b.total = terms.total;
  b.lambda = lambda;
  return b;
}

std::string to_string(PdeKind k) { return k == PdeKind::heat ? "heat" : "wave"; }

PdeKind pde_kind_from_string(const std::string& s) {
  if (s == "heat") return PdeKind::heat;
  if (s == "wave") return PdeKind::wave;
  throw std::invalid_argument("unknown PDE kind '" + s + "' (expected heat|wave)");
}

std::string to_string(Profile p) { return p == Profile::sine ? "sine" : "zero"; }

void PdeProblem::validate() const {
  if (!(coefficient > 0.0)) throw std::invalid_argument("PDE coefficient must be > 0");
  if (!(x_max > 0.0) || !(t_max > 0.0)) throw std::invalid_argument("PDE domain must be non-degenerate");
}

PdeProblem heat_problem(double alpha) {
  PdeProblem p;
  p.kind = PdeKind::heat;
  p.coefficient = alpha;
  return p;
}

PdeProblem wave_problem(double c) {
  PdeProblem p;
  p.kind = PdeKind::wave;
  p.coefficient = c;
  return p;
}

double analytic_solution(const PdeProblem& problem, double x, double t) {
  if (problem.initial == Profile::zero) return 0.0;
  if (problem.kind == PdeKind::wave && problem.velocity != Profile::zero) {
    throw std::invalid_argument("analytic wave solution needs zero initial velocity");
  }
  const double k = std::numbers::pi / problem.x_max;
  const double mode = std::sin(k * x);
  if (problem.kind == PdeKind::heat) return mode * std::exp(-problem.coefficient * k * k * t);
  return mode * std::cos(problem.coefficient * k * t);
}

CollocationSet sample_collocation(const PdeProblem& problem, std::size_t n, std::uint64_t seed) {
  problem.validate();
  if (n == 0) throw std::invalid_argument("sample_collocation: n must be >= 1");
  CollocationSet set;
  set.x_range = {0.0, problem.x_max};
  set.t_range = {0.0, problem.t_max};
  set.seed = seed;
  set.points.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = problem.x_max * rng.uniform_open();
    const double t = problem.t_max * rng.uniform_open();
    set.points.emplace_back(x, t);
  }
  return set;
}

namespace {

template <class T>
void require_nonempty(const T& c, const char* what) {
  if (c.empty()) throw std::invalid_argument(std::string(what) + ": empty sample set");
}

}  // namespace

double heat_residual_loss(const net::DenseNetwork& net, const CollocationSet& collocation,
                          double alpha) {
  require_nonempty(collocation.points, "heat_residual_loss");
  auto u = field_of<double>(net, net.params());
  double s = 0.0;
  for (auto [x, t] : collocation.points) {
    const double r = heat_residual<double>(u, x, t, alpha);
    s += r * r;
  }
  return s / static_cast<double>(collocation.points.size());
}

double wave_residual_loss(const net::DenseNetwork& net, const CollocationSet& collocation, double c) {
  require_nonempty(collocation.points, "wave_residual_loss");
  auto u = field_of<double>(net, net.params());
  double s = 0.0;
  for (auto [x, t] : collocation.points) {
    const double r = wave_residual<double>(u, x, t, c);
    s += r * r;
  }
  return s / static_cast<double>(collocation.points.size());
}

double wave_init_loss(const net::DenseNetwork& net, std::span<const double> xs, Profile u0,
                      Profile v0, double length) {
  require_nonempty(xs, "wave_init_loss");
  auto u = field_of<double>(net, net.params());
  double su = 0.0, sv = 0.0;
  for (double x : xs) {
    auto [val, vel] = first_in_t<double>(u, x, 0.0);
    const double du = val - eval_profile(u0, x, length);
    const double dv = vel - eval_profile(v0, x, length);
    su += du * du;
    sv += dv * dv;
  }
  const double n = static_cast<double>(xs.size());
  return su / n + sv / n;
}

double boundary_loss(const net::DenseNetwork& net, std::span<const double> ts, double length) {
  require_nonempty(ts, "boundary_loss");
  auto u = field_of<double>(net, net.params());
  double s0 = 0.0, s1 = 0.0;
  for (double t : ts) {
    const double a = u(0.0, t);
    const double b = u(length, t);
    s0 += a * a;
    s1 += b * b;
  }
  const double n = static_cast<double>(ts.size());
  return s0 / n + s1 / n;
}

namespace {

constexpr std::size_t kChunk = 64;

/// Accumulates mean-of-terms losses chunk by chunk so each tape stays small.
/// `term(tape, params, i)` returns the i-th summand as a Var.
class ChunkedMean {
 public:
  ChunkedMean(const net::DenseNetwork& shape, std::span<const double> params, Tape& tape)
      : shape_(shape), params_(params), grad_(params.size(), 0.0), tape_(tape) {}

  template <class Term>
  double add(std::size_t count, Term&& term) {
    double value = 0.0;
    const double scale = 1.0 / static_cast<double>(count);
    for (std::size_t start = 0; start < count; start += kChunk) {
      const std::size_t end = std::min(count, start + kChunk);
      tape_.clear();
      auto vars = tape_.variables(params_);
      std::span<const Var> pv(vars);
      auto u = field_of<Var>(shape_, pv);
      Var sum = term(u, start);
      for (std::size_t i = start + 1; i < end; ++i) sum = sum + term(u, i);
      Var scaled = sum * scale;
      value += scaled.value();
      tape_.adjoints(scaled, adj_);
      for (std::size_t k = 0; k < vars.size(); ++k) grad_[k] += adj_[vars[k].index];
    }
    return value;
  }

  std::vector<double> take_gradient() { return std::move(grad_); }
  Tape& tape() { return tape_; }

 private:
  const net::DenseNetwork& shape_;
  std::span<const double> params_;
  std::vector<double> grad_;
  Tape& tape_;
  std::vector<double> adj_;
};

}  // namespace

optimize::Objective make_heat_objective(const net::DenseNetwork& shape, const PdeProblem& problem,
                                        std::vector<DataPoint> data, CollocationSet collocation) {
  problem.validate();
  require_nonempty(collocation.points, "heat objective");
  require_nonempty(data, "heat objective");
  const double alpha = problem.coefficient;
  // The tape is reused across evaluations to keep its buffers warm; one
  // objective therefore serves one training run at a time.
  auto tape_buf = std::make_shared<Tape>();
  return [shape, alpha, data = std::move(data), col = std::move(collocation), tape_buf](
             std::span<const double> params) {
    ChunkedMean acc(shape, params, *tape_buf);
    Tape& tape = acc.tape();
    LossBreakdown b;
    b.lambda = 1.0;
    b.data = acc.add(data.size(), [&](const NetworkField<Var>& u, std::size_t i) {
      const auto& d = data[i];
      Var r = u(tape.variable(d.x), tape.variable(d.t)) - d.u;
      return r * r;
    });
    b.physics = acc.add(col.points.size(), [&](const NetworkField<Var>& u, std::size_t i) {
      auto [x, t] = col.points[i];
      Var r = heat_residual<Var>(u, tape.variable(x), tape.variable(t), alpha);
      return r * r;
    });
    b.total = b.data + b.physics;
    return optimize::LossEvaluation{b, acc.take_gradient()};
  };
}

optimize::Objective make_wave_objective(const net::DenseNetwork& shape, const PdeProblem& problem,
                                        CollocationSet collocation, std::vector<double> init_x,
                                        std::vector<double> boundary_t) {
  problem.validate();
  require_nonempty(collocation.points, "wave objective");
  require_nonempty(init_x, "wave objective");
  require_nonempty(boundary_t, "wave objective");
  auto tape_buf = std::make_shared<Tape>();
  return [shape, problem, col = std::move(collocation), init_x = std::move(init_x),
          boundary_t = std::move(boundary_t), tape_buf](std::span<const double> params) {
    ChunkedMean acc(shape, params, *tape_buf);
    Tape& tape = acc.tape();
    const double c = problem.coefficient;
    const double length = problem.x_max;
    LossBreakdown b;
    b.lambda = 1.0;
    b.physics = acc.add(col.points.size(), [&](const NetworkField<Var>& u, std::size_t i) {
      auto [x, t] = col.points[i];
      Var r = wave_residual<Var>(u, tape.variable(x), tape.variable(t), c);
      return r * r;
    });
    b.initial = acc.add(init_x.size(), [&](const NetworkField<Var>& u, std::size_t i) {
      const double x = init_x[i];
      auto [val, vel] = first_in_t<Var>(u, tape.variable(x), tape.variable(0.0));
      Var du = val - eval_profile(problem.initial, x, length);
      Var dv = vel - eval_profile(problem.velocity, x, length);
      return du * du + dv * dv;
    });
    b.boundary = acc.add(boundary_t.size(), [&](const NetworkField<Var>& u, std::size_t i) {
      const double t = boundary_t[i];
      Var a = u(tape.variable(0.0), tape.variable(t));
      Var e = u(tape.variable(length), tape.variable(t));
      return a * a + e * e;
    });
    b.total = b.physics + b.initial + b.boundary;
    return optimize::LossEvaluation{b, acc.take_gradient()};
  };
}

FieldGrid evaluate_grid(const net::DenseNetwork& net, const PdeProblem& problem, std::size_t n) {
  if (n < 2) throw std::invalid_argument("evaluate_grid: resolution must be >= 2");
  FieldGrid g;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n - 1);
    g.xs.push_back(problem.x_max * f);
    g.ts.push_back(problem.t_max * f);
  }
  g.predicted.reserve(n * n);
  g.exact.reserve(n * n);
  for (double t : g.ts) {
    for (double x : g.xs) {
      const std::array<double, 2> in{x, t};
      g.predicted.push_back(net.forward(in));
      g.exact.push_back(analytic_solution(problem, x, t));
    }
  }
  return g;
}

double relative_l2(const FieldGrid& grid) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.exact.size(); ++i) {
    const double r = grid.predicted[i] - grid.exact[i];
    num += r * r;
    den += grid.exact[i] * grid.exact[i];
  }
  if (den == 0.0) throw std::invalid_argument("relative_l2: reference field is identically zero");
  return std::sqrt(num / den);
}

PdeRunResult train_pde(const PdeRunConfig& config) {
  const PdeProblem& problem = config.problem;
  problem.validate();
  if (config.n_collocation == 0 || config.n_initial == 0 || config.n_boundary == 0) {
    throw std::invalid_argument("train_pde: sample counts must be >= 1");
  }

  net::NetworkSpec spec;
  spec.input_dim = 2;
  spec.hidden_dims = config.hidden;
  spec.seed = config.seed;
  spec.hidden_activation = net::Activation::tanh;
  net::DenseNetwork network = net::DenseNetwork::build(spec);

  // Independent streams for each sample family, all derived from the run seed.
  Rng seeder(config.seed ^ 0x9E3779B97F4A7C15ULL);
  CollocationSet collocation = sample_collocation(problem, config.n_collocation, seeder.next());
  Rng init_rng(seeder.next());
  Rng boundary_rng(seeder.next());
  Rng data_rng(seeder.next());

  std::vector<double> init_x, boundary_t;
  for (std::size_t i = 0; i < config.n_initial; ++i) init_x.push_back(problem.x_max * init_rng.uniform());
  for (std::size_t i = 0; i < config.n_boundary; ++i) boundary_t.push_back(problem.t_max * boundary_rng.uniform());

  optimize::Objective objective;
  if (problem.kind == PdeKind::heat) {
    // Interior observations come from the analytic field; initial and boundary
    // samples join the same data term.
    std::vector<DataPoint> data;
    for (std::size_t i = 0; i < config.n_data; ++i) {
      const double x = problem.x_max * data_rng.uniform_open();
      const double t = problem.t_max * data_rng.uniform_open();
      data.push_back({x, t, analytic_solution(problem, x, t)});
    }
    for (double x : init_x) data.push_back({x, 0.0, eval_profile(problem.initial, x, problem.x_max)});
    for (double t : boundary_t) {
      data.push_back({0.0, t, 0.0});
      data.push_back({problem.x_max, t, 0.0});
    }
    objective = make_heat_objective(network, problem, std::move(data), std::move(collocation));
  } else {
    objective = make_wave_objective(network, problem, std::move(collocation), std::move(init_x),
                                    std::move(boundary_t));
  }

  optimize::AdamState adam(network.parameter_count(), optimize::AdamConfig{config.lr});
  std::vector<double> params = network.get_params();
  auto history = optimize::train_loop(params, objective, config.epochs, adam);
  network.set_params(params);

  FieldGrid grid = evaluate_grid(network, problem, config.grid);
  const double err = relative_l2(grid);
  return PdeRunResult{std::move(network), std::move(history), std::move(grid), err};
}

}  // namespace latpinn::pinn
