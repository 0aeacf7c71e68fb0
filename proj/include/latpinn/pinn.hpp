#pragma once

// Loss terms for physics-informed training.
//
// Lattice regression: mean-squared data loss plus a lambda-weighted penalty
// tying predictions to a standardized load/strength proxy.
//
// PDE demos on x in [0, L], t in [0, T]:
//   heat   u_t  = alpha u_xx
//   wave   u_tt = c^2   u_xx,  u(x,0) = u0, u_t(x,0) = v0, u(0,t) = u(L,t) = 0
//
// Input derivatives of a field are taken by nesting forward-mode duals over
// the field evaluation; when the base scalar is ad::Var the same expressions
// are differentiable with respect to network parameters.

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "latpinn/autodiff.hpp"
#include "latpinn/net.hpp"
#include "latpinn/optimize.hpp"

namespace latpinn::pinn {

using optimize::LossBreakdown;

inline constexpr double kPhysicsEps = 1e-7;

// ---------------------------------------------------------------------------
// Lattice losses

/// Mean squared error. Throws on empty or mismatched inputs.
double data_loss(std::span<const double> preds, std::span<const double> targets);

/// load / (strength + eps).
double physics_term(double strength, double load, double eps = kPhysicsEps);

/// Batch statistics of the physics term (population standard deviation).
struct PhysicsStats {
  double mean = 0.0;
  double stddev = 0.0;
  double eps = kPhysicsEps;

  double normalize(double p) const { return (p - mean) / (stddev + eps); }
};

PhysicsStats physics_stats(std::span<const double> terms, double eps = kPhysicsEps);

/// (P - mean) / (std + eps) over the batch.
std::vector<double> normalize_physics(std::span<const double> terms, double eps = kPhysicsEps);

/// Which quantity the physics penalty compares against the normalized proxy.
/// `prediction` penalizes (y_hat - P'), which carries gradient; `observed`
/// uses the true targets (y - P') and is constant in the parameters.
enum class PhysicsForm { prediction, observed };

std::string to_string(PhysicsForm f);
PhysicsForm physics_form_from_string(const std::string& s);

template <class S>
struct LatticeLossTerms {
  S data;
  S physics;
  S total;
};

template <class S>
LatticeLossTerms<S> lattice_loss_terms(std::span<const S> preds, std::span<const double> targets,
                                       std::span<const double> physics_normalized, double lambda,
                                       PhysicsForm form = PhysicsForm::prediction) {
  const std::size_t n = preds.size();
  if (n == 0) throw std::invalid_argument("lattice loss: empty batch");
  if (targets.size() != n || physics_normalized.size() != n) {
    throw std::invalid_argument("lattice loss: length mismatch");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("lattice loss: lambda must be >= 0");
  const double inv_n = 1.0 / static_cast<double>(n);

  S data = (preds[0] - targets[0]) * (preds[0] - targets[0]);
  for (std::size_t i = 1; i < n; ++i) {
    S r = preds[i] - targets[i];
    data = data + r * r;
  }
  data = data * inv_n;

  S physics;
  if (form == PhysicsForm::prediction) {
    physics = (preds[0] - physics_normalized[0]) * (preds[0] - physics_normalized[0]);
    for (std::size_t i = 1; i < n; ++i) {
      S r = preds[i] - physics_normalized[i];
      physics = physics + r * r;
    }
    physics = physics * inv_n;
  } else {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = targets[i] - physics_normalized[i];
      c += r * r;
    }
    physics = data * 0.0 + c * inv_n;
  }
  S total = data + physics * lambda;
  return {data, physics, total};
}

LossBreakdown lattice_total_loss(std::span<const double> preds, std::span<const double> targets,
                                 std::span<const double> physics_normalized, double lambda,
                                 PhysicsForm form = PhysicsForm::prediction);

// ---------------------------------------------------------------------------
// PDE problems

enum class PdeKind { heat, wave };
std::string to_string(PdeKind k);
PdeKind pde_kind_from_string(const std::string& s);

/// Named profiles for u0 / v0. `sine` is sin(pi x / L).
enum class Profile { zero, sine };
std::string to_string(Profile p);

template <class S>
S eval_profile(Profile p, const S& x, double length) {
  using ad::sin;
  if (p == Profile::sine) return sin((std::numbers::pi / length) * x);
  return x * 0.0;
}

struct PdeProblem {
  PdeKind kind = PdeKind::heat;
  double coefficient = 0.1;  // alpha (heat) or c (wave)
  double x_max = 1.0;
  double t_max = 1.0;
  Profile initial = Profile::sine;
  Profile velocity = Profile::zero;  // wave only

  /// Throws std::invalid_argument unless coefficient > 0 and ranges are
  /// non-degenerate.
  void validate() const;
};

PdeProblem heat_problem(double alpha);
PdeProblem wave_problem(double c);

/// Closed-form solution for the sine initial profile (zero initial velocity
/// for the wave): sin(pi x/L) exp(-alpha (pi/L)^2 t) or sin(pi x/L) cos(c pi t/L).
double analytic_solution(const PdeProblem& problem, double x, double t);

struct CollocationSet {
  std::vector<std::pair<double, double>> points;  // (x, t)
  std::pair<double, double> x_range;
  std::pair<double, double> t_range;
  std::uint64_t seed = 0;
};

/// n i.i.d. uniform points in the open domain (0, L) x (0, T).
CollocationSet sample_collocation(const PdeProblem& problem, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Residual operators. `Field` is callable as u(x, t) for any scalar in
// {B, Dual<B>, Dual<Dual<B>>}; B is double or ad::Var.

namespace detail {

template <class B>
B lift(const B& like, double c) {
  if constexpr (std::is_same_v<B, ad::Var>) {
    return like.tape->variable(c);
  } else {
    (void)like;
    return c;
  }
}

}  // namespace detail

template <class B>
struct SecondOrder {
  B u, du, d2u;
};

/// u, du/dx and d2u/dx2 at (x, t) by forward-over-forward in x.
template <class B, class Field>
SecondOrder<B> derivatives_in_x(Field&& u, const B& x, const B& t) {
  using D1 = ad::Dual<B>;
  using D2 = ad::Dual<D1>;
  const B one = detail::lift(x, 1.0);
  const B zero = detail::lift(x, 0.0);
  D2 xs(D1(x, one), D1(one, zero));
  D2 ts(D1(t, zero), D1(zero, zero));
  D2 r = u(xs, ts);
  return {r.v.v, r.v.d, r.d.d};
}

/// u, du/dt and d2u/dt2 at (x, t) by forward-over-forward in t.
template <class B, class Field>
SecondOrder<B> derivatives_in_t(Field&& u, const B& x, const B& t) {
  using D1 = ad::Dual<B>;
  using D2 = ad::Dual<D1>;
  const B one = detail::lift(x, 1.0);
  const B zero = detail::lift(x, 0.0);
  D2 xs(D1(x, zero), D1(zero, zero));
  D2 ts(D1(t, one), D1(one, zero));
  D2 r = u(xs, ts);
  return {r.v.v, r.v.d, r.d.d};
}

/// u and du/dt at (x, t) by one forward pass in t.
template <class B, class Field>
std::pair<B, B> first_in_t(Field&& u, const B& x, const B& t) {
  using D1 = ad::Dual<B>;
  const B one = detail::lift(x, 1.0);
  const B zero = detail::lift(x, 0.0);
  D1 r = u(D1(x, zero), D1(t, one));
  return {r.v, r.d};
}

/// u_t - alpha u_xx
template <class B, class Field>
B heat_residual(Field&& u, const B& x, const B& t, double alpha) {
  auto [u0, ut] = first_in_t<B>(u, x, t);
  (void)u0;
  auto sx = derivatives_in_x<B>(u, x, t);
  return ut - sx.d2u * alpha;
}

/// Mixed directional second derivative D_a D_b u at (x, t) for directions
/// a = (a_x, a_t), b = (b_x, b_t): forward-over-forward with the inner dual
/// seeded along b and the outer along a.
template <class B, class Field>
B mixed_second(Field&& u, const B& x, const B& t, std::array<double, 2> a, std::array<double, 2> b) {
  using D1 = ad::Dual<B>;
  using D2 = ad::Dual<D1>;
  const B zero = detail::lift(x, 0.0);
  auto seed = [&](const B& p, double inner, double outer) {
    return D2(D1(p, detail::lift(x, inner)), D1(detail::lift(x, outer), zero));
  };
  D2 r = u(seed(x, b[0], a[0]), seed(t, b[1], a[1]));
  return r.d.d;
}

/// u_tt - c^2 u_xx, evaluated as D_a D_b u along the characteristic directions
/// a = (c, 1), b = (-c, 1):
///   D_a D_b u = -c^2 u_xx + (c - c) u_xt + u_tt.
template <class B, class Field>
B wave_residual(Field&& u, const B& x, const B& t, double c) {
  return mixed_second<B>(u, x, t, {c, 1.0}, {-c, 1.0});
}

/// Field view of a network with explicit parameters (double or ad::Var).
template <class P>
struct NetworkField {
  const net::DenseNetwork* net;
  std::span<const P> params;

  template <class S>
  S operator()(const S& x, const S& t) const {
    std::array<S, 2> in{x, t};
    return net->template forward<S, P>(std::span<const S>(in), params);
  }
};

template <class P>
NetworkField<P> field_of(const net::DenseNetwork& n, std::span<const P> params) {
  return NetworkField<P>{&n, params};
}

// ---------------------------------------------------------------------------
// PDE losses on a network at its stored parameters.

/// mean over collocation points of (u_t - alpha u_xx)^2.
double heat_residual_loss(const net::DenseNetwork& net, const CollocationSet& collocation,
                          double alpha);
/// mean over collocation points of (u_tt - c^2 u_xx)^2.
double wave_residual_loss(const net::DenseNetwork& net, const CollocationSet& collocation, double c);
/// mean (u(x,0) - u0(x))^2 + mean (u_t(x,0) - v0(x))^2.
double wave_init_loss(const net::DenseNetwork& net, std::span<const double> xs, Profile u0,
                      Profile v0, double length = 1.0);
/// mean u(0,t)^2 + mean u(L,t)^2.
double boundary_loss(const net::DenseNetwork& net, std::span<const double> ts, double length = 1.0);

// ---------------------------------------------------------------------------
// Training objectives

struct DataPoint {
  double x, t, u;
};

/// Heat objective: data MSE over `data` (which may pool initial and boundary
/// samples) plus the mean squared residual over `collocation`.
optimize::Objective make_heat_objective(const net::DenseNetwork& shape, const PdeProblem& problem,
                                        std::vector<DataPoint> data, CollocationSet collocation);

/// Wave objective: residual + initial (displacement and velocity) + boundary.
optimize::Objective make_wave_objective(const net::DenseNetwork& shape, const PdeProblem& problem,
                                        CollocationSet collocation, std::vector<double> init_x,
                                        std::vector<double> boundary_t);

struct PdeRunConfig {
  PdeProblem problem;
  std::size_t n_data = 100;
  std::size_t n_collocation = 1000;
  std::size_t n_initial = 50;
  std::size_t n_boundary = 50;
  long epochs = 1500;
  double lr = 5e-3;
  std::uint64_t seed = 42;
  std::vector<std::size_t> hidden = {20, 20, 20};
  std::size_t grid = 50;
};

struct FieldGrid {
  std::vector<double> xs, ts;
  std::vector<double> predicted;  // row-major, t-major: index it * nx + ix
  std::vector<double> exact;
};

struct PdeRunResult {
  net::DenseNetwork network;
  std::vector<LossBreakdown> history;
  FieldGrid grid;
  double relative_l2 = 0.0;
};

/// Relative L2 error of `field` against the analytic solution on an n x n grid
/// spanning the closed domain.
FieldGrid evaluate_grid(const net::DenseNetwork& net, const PdeProblem& problem, std::size_t n);
double relative_l2(const FieldGrid& grid);

/// Trains a tanh network on the heat (data + residual, with initial/boundary
/// samples pooled into the data term) or wave (residual + initial + boundary)
/// formulation and scores it against the analytic field.
PdeRunResult train_pde(const PdeRunConfig& config);

}  // namespace latpinn::pinn
