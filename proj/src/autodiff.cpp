#include "latpinn/autodiff.hpp"

#include <limits>

namespace latpinn::ad {

Var Tape::push(double value) {
  if (values_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("autodiff: tape exceeds 2^32 nodes");
  }
  values_.push_back(value);
  edge_begin_.push_back(static_cast<std::uint32_t>(parents_.size()));
  return Var{this, static_cast<std::uint32_t>(values_.size() - 1)};
}

Var Tape::variable(double value) { return push(value); }

std::vector<Var> Tape::variables(std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(push(v));
  return out;
}

Var Tape::unary(double value, Var a, double da) {
  check(a);
  parents_.push_back(a.index);
  partials_.push_back(da);
  return push(value);
}

Var Tape::binary(double value, Var a, double da, Var b, double db) {
  check(a);
  check(b);
  parents_.push_back(a.index);
  partials_.push_back(da);
  parents_.push_back(b.index);
  partials_.push_back(db);
  return push(value);
}

Var Tape::dot(std::span<const Var> coeffs, std::span<const Var> inputs, const Var* bias) {
  const std::size_t n = coeffs.size();
  if (n != inputs.size()) throw std::invalid_argument("autodiff: dot size mismatch");
  const std::size_t base = parents_.size();
  const std::size_t edges = 2 * n + (bias != nullptr ? 1 : 0);
  parents_.resize(base + edges);
  partials_.resize(base + edges);
  std::uint32_t* par = parents_.data() + base;
  double* part = partials_.data() + base;
  const double* vals = values_.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t ci = coeffs[i].index;
    const std::uint32_t xi = inputs[i].index;
    const double c = vals[ci];
    const double x = vals[xi];
    sum += c * x;
    par[2 * i] = ci;
    part[2 * i] = x;
    par[2 * i + 1] = xi;
    part[2 * i + 1] = c;
  }
  if (bias != nullptr) {
    check(*bias);
    sum += vals[bias->index];
    par[2 * n] = bias->index;
    part[2 * n] = 1.0;
  }
  return push(sum);
}

std::vector<double> Tape::adjoints(Var output) const {
  std::vector<double> adj;
  adjoints(output, adj);
  return adj;
}

void Tape::adjoints(Var output, std::vector<double>& adj) const {
  check(output);
  adj.assign(values_.size(), 0.0);
  adj[output.index] = 1.0;
  for (std::size_t n = output.index + 1; n-- > 0;) {
    const double a = adj[n];
    if (a == 0.0) continue;
    for (std::uint32_t e = edge_begin_[n]; e < edge_begin_[n + 1]; ++e) {
      adj[parents_[e]] += partials_[e] * a;
    }
  }
}

std::vector<double> Tape::gradient(Var output, std::span<const Var> wrt) const {
  auto adj = adjoints(output);
  std::vector<double> g;
  g.reserve(wrt.size());
  for (Var v : wrt) {
    check(v);
    g.push_back(adj[v.index]);
  }
  return g;
}

void Tape::clear() {
  values_.clear();
  parents_.clear();
  partials_.clear();
  edge_begin_.assign(1, 0);
}

Var operator+(Var a, Var b) { return a.tape->binary(a.value() + b.value(), a, 1.0, b, 1.0); }
Var operator-(Var a, Var b) { return a.tape->binary(a.value() - b.value(), a, 1.0, b, -1.0); }
Var operator*(Var a, Var b) {
  return a.tape->binary(a.value() * b.value(), a, b.value(), b, a.value());
}
Var operator/(Var a, Var b) {
  const double q = a.value() / b.value();
  return a.tape->binary(q, a, 1.0 / b.value(), b, -q / b.value());
}
Var operator-(Var a) { return a.tape->unary(-a.value(), a, -1.0); }

Var operator+(Var a, double b) { return a.tape->unary(a.value() + b, a, 1.0); }
Var operator+(double a, Var b) { return b + a; }
Var operator-(Var a, double b) { return a.tape->unary(a.value() - b, a, 1.0); }
Var operator-(double a, Var b) { return b.tape->unary(a - b.value(), b, -1.0); }
Var operator*(Var a, double b) { return a.tape->unary(a.value() * b, a, b); }
Var operator*(double a, Var b) { return b * a; }
Var operator/(Var a, double b) { return a.tape->unary(a.value() / b, a, 1.0 / b); }
Var operator/(double a, Var b) {
  const double q = a / b.value();
  return b.tape->unary(q, b, -q / b.value());
}

Var exp(Var a) {
  const double e = std::exp(a.value());
  return a.tape->unary(e, a, e);
}
Var sin(Var a) { return a.tape->unary(std::sin(a.value()), a, std::cos(a.value())); }
Var cos(Var a) { return a.tape->unary(std::cos(a.value()), a, -std::sin(a.value())); }
Var tanh(Var a) {
  const double y = std::tanh(a.value());
  return a.tape->unary(y, a, 1.0 - y * y);
}
Var pow(Var a, double p) {
  const double x = a.value();
  const double dp = p == 0.0 ? 0.0 : p * std::pow(x, p - 1.0);
  return a.tape->unary(std::pow(x, p), a, dp);
}
Var pow(Var a, Var b) {
  const double x = a.value();
  const double p = b.value();
  const double y = std::pow(x, p);
  const double da = p == 0.0 ? 0.0 : p * std::pow(x, p - 1.0);
  const double db = x > 0.0 ? y * std::log(x) : 0.0;
  return a.tape->binary(y, a, da, b, db);
}
Var max(Var a, Var b) {
  const bool second = b.value() > a.value();
  return a.tape->binary(second ? b.value() : a.value(), a, second ? 0.0 : 1.0, b,
                        second ? 1.0 : 0.0);
}
Var max(double a, Var b) {
  const bool second = b.value() > a;
  return b.tape->unary(second ? b.value() : a, b, second ? 1.0 : 0.0);
}
Var relu(Var a) { return max(0.0, a); }

}  // namespace latpinn::ad
