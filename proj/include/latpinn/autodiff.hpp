#pragma once

// Scalar automatic differentiation.
//
// Two building blocks are provided:
//
//  * `Tape` / `Var`: reverse mode. Every operation on a `Var` appends a node to
//    its tape; `Tape::adjoints` sweeps the record backwards once and yields the
//    derivative of one output with respect to every node.
//  * `Dual<T>`: forward mode. `T` may itself be a `Dual` (forward-over-forward,
//    giving second derivatives) or a `Var` (forward-over-reverse, giving
//    parameter gradients of input derivatives).
//
// Non-smooth conventions:
//  * relu(0) and max(a, b) with a == b send the derivative to the first
//    argument, so relu'(0) == 0 and relu'' == 0 everywhere.
//  * Division by zero and pow at a non-positive base follow IEEE arithmetic
//    (inf / nan propagate into values and partials); nothing throws.
//  * The exponent partial of pow(a, b) is 0 when a <= 0.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace latpinn::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while the tape lives
/// and has not been cleared.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t index = 0;

  double value() const;
};

/// Flat record of a computation. Nodes are stored in creation order, which is
/// a topological order, so the reverse sweep is a single backwards loop.
class Tape {
 public:
  Tape() { edge_begin_.push_back(0); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Independent variable (or constant: a leaf nobody differentiates with
  /// respect to is a constant).
  Var variable(double value);
  std::vector<Var> variables(std::span<const double> values);

  Var unary(double value, Var a, double da);
  Var binary(double value, Var a, double da, Var b, double db);

  /// sum_i coeffs[i] * inputs[i] (+ bias). One node with 2n(+1) edges; this is
  /// the hot path of every dense layer.
  Var dot(std::span<const Var> coeffs, std::span<const Var> inputs, const Var* bias = nullptr);

  /// d(output)/d(node) for every node on the tape.
  std::vector<double> adjoints(Var output) const;
  /// Same sweep, writing into `adj` so callers can reuse the buffer.
  void adjoints(Var output, std::vector<double>& adj) const;

  /// Gradient of `output` with respect to `wrt`, in the order given.
  std::vector<double> gradient(Var output, std::span<const Var> wrt) const;

  double value(std::uint32_t index) const { return values_[index]; }
  std::size_t size() const { return values_.size(); }
  std::size_t edge_count() const { return parents_.size(); }

  /// Drop every node. Outstanding `Var`s become dangling.
  void clear();

 private:
  Var push(double value);
  void check(Var v) const {
    if (v.tape != this) throw std::logic_error("autodiff: variable belongs to a different tape");
  }

  std::vector<double> values_;
  std::vector<std::uint32_t> edge_begin_;
  std::vector<std::uint32_t> parents_;
  std::vector<double> partials_;
};

inline double Var::value() const { return tape->value(index); }

// Reverse-mode primitives.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, double b);
Var operator-(double a, Var b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var operator/(Var a, double b);
Var operator/(double a, Var b);
inline Var& operator+=(Var& a, Var b) { return a = a + b; }
inline Var& operator-=(Var& a, Var b) { return a = a - b; }
inline Var& operator*=(Var& a, Var b) { return a = a * b; }

Var exp(Var a);
Var sin(Var a);
Var cos(Var a);
Var tanh(Var a);
Var pow(Var a, double p);
Var pow(Var a, Var b);
Var max(Var a, Var b);
Var max(double a, Var b);
Var relu(Var a);

inline double value_of(double v) { return v; }
inline double value_of(Var v) { return v.value(); }

// Plain-double counterparts so generic code can call the same names.
inline double exp(double a) { return std::exp(a); }
inline double sin(double a) { return std::sin(a); }
inline double cos(double a) { return std::cos(a); }
inline double tanh(double a) { return std::tanh(a); }
inline double pow(double a, double p) { return std::pow(a, p); }
inline double max(double a, double b) { return b > a ? b : a; }
inline double relu(double a) { return a > 0.0 ? a : 0.0; }

// ---------------------------------------------------------------------------
// Forward mode.

template <class T>
struct Dual {
  using value_type = T;
  T v{};  // value
  T d{};  // directional derivative

  Dual() = default;
  Dual(T value, T derivative) : v(std::move(value)), d(std::move(derivative)) {}
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

/// Innermost scalar of a (possibly nested) dual: double or Var.
template <class T>
struct base_scalar {
  using type = T;
};
template <class T>
struct base_scalar<Dual<T>> {
  using type = typename base_scalar<T>::type;
};
template <class T>
using base_scalar_t = typename base_scalar<T>::type;

template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

/// Embed a constant of the base scalar type into T with zero derivatives.
template <class T>
T constant_like(const base_scalar_t<T>& c, const base_scalar_t<T>& zero) {
  if constexpr (is_dual<T>::value) {
    using Inner = typename T::value_type;
    return T(constant_like<Inner>(c, zero), constant_like<Inner>(zero, zero));
  } else {
    return c;
  }
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, a.d - b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}

// Mixing with plain doubles.
template <class T>
Dual<T> operator+(const Dual<T>& a, double b) {
  return {a.v + b, a.d};
}
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) {
  return {a + b.v, b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) {
  return {a.v - b, a.d};
}
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) {
  return {a - b.v, -b.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) {
  return {a.v * b, a.d * b};
}
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) {
  return {a * b.v, a * b.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) {
  return {a.v / b, a.d / b};
}

template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) {
  return a = a + b;
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, e * a.d};
}
template <class T>
Dual<T> sin(const Dual<T>& a) {
  return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  return {cos(a.v), -(sin(a.v) * a.d)};
}
template <class T>
Dual<T> tanh(const Dual<T>& a) {
  T y = tanh(a.v);
  return {y, (1.0 - y * y) * a.d};
}
template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
  if (p == 0.0) return {pow(a.v, 0.0), a.d * 0.0};
  return {pow(a.v, p), (p * pow(a.v, p - 1.0)) * a.d};
}
template <class T>
Dual<T> relu(const Dual<T>& a) {
  if (value_of(a) > 0.0) return a;
  return {a.v * 0.0, a.d * 0.0};
}
template <class T>
Dual<T> max(const Dual<T>& a, const Dual<T>& b) {
  return value_of(b) > value_of(a) ? b : a;
}

// ---------------------------------------------------------------------------
// Convenience drivers.

/// Gradient of a scalar function of several variables. `f` receives the
/// parameters as tape variables and returns the output variable.
template <class F>
std::vector<double> gradient(F&& f, std::span<const double> params) {
  Tape tape;
  auto vars = tape.variables(params);
  Var out = f(std::span<const Var>(vars));
  return tape.gradient(out, vars);
}

/// First derivative by forward mode. `f` must be callable with Dual<double>.
template <class F>
double derivative(F&& f, double x) {
  return f(Dual<double>(x, 1.0)).d;
}

/// Second derivative by forward-over-forward. `f` must be callable with
/// Dual<Dual<double>>.
template <class F>
double second_derivative(F&& f, double x) {
  using D2 = Dual<Dual<double>>;
  D2 seeded(Dual<double>(x, 1.0), Dual<double>(1.0, 0.0));
  return f(seeded).d.d;
}

}  // namespace latpinn::ad
