#pragma once

// Dense feedforward network f(x) = phi_L(... phi_1(x) ...).
//
// Parameters live in one flat vector in the canonical order shared with the
// autodiff gradients and checkpoints: layer by layer, the weight matrix
// (out x in, row-major) followed by the bias vector.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latpinn/autodiff.hpp"

namespace latpinn::net {

enum class Activation { relu, tanh, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

enum class InitScheme { glorot_uniform, zeros };

struct NetworkSpec {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_dims = {64, 64, 32};
  std::uint64_t seed = 42;
  InitScheme init = InitScheme::glorot_uniform;
  Activation hidden_activation = Activation::relu;
};

/// 2-64-64-32-1 with ReLU.
NetworkSpec default_lattice_spec(std::uint64_t seed = 42);

class DenseNetwork {
 public:
  /// Throws std::invalid_argument on zero dimensions.
  static DenseNetwork build(const NetworkSpec& spec);
  /// Explicit construction, e.g. for hand-built nets. `params` may be empty
  /// (all zeros).
  DenseNetwork(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
               std::vector<double> params = {}, std::uint64_t seed = 0);

  const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
  std::size_t input_dim() const { return layer_sizes_.front(); }
  std::size_t layer_count() const { return layer_sizes_.size() - 1; }
  std::size_t parameter_count() const { return params_.size(); }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> params() const { return params_; }
  std::vector<double> get_params() const { return params_; }
  void set_params(std::span<const double> flat);

  /// Offset of layer l's weight block in the flat vector; its bias block
  /// follows at weight_offset(l) + out*in.
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + layer_sizes_[layer + 1] * layer_sizes_[layer];
  }

  double forward(std::span<const double> x) const;

  /// Forward pass with caller-supplied parameters of scalar type P (double or
  /// ad::Var) and inputs of type S (P, or nested ad::Dual over P).
  template <class S, class P>
  S forward(std::span<const S> x, std::span<const P> params) const;

  /// Signs of every hidden pre-activation (1 when > 0), layer by layer.
  std::vector<std::uint8_t> activation_pattern(std::span<const double> x,
                                               std::span<const double> params) const;

  nlohmann::json to_json() const;
  static DenseNetwork from_json(const nlohmann::json& j);

 private:
  DenseNetwork() = default;
  void compute_offsets();
  void check_input(std::size_t n) const;

  std::vector<std::size_t> layer_sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
  std::uint64_t seed_ = 0;
};

std::size_t parameter_count(std::span<const std::size_t> layer_sizes);

namespace detail {

template <class S>
S activate(const S& z, Activation a) {
  using ad::relu;
  using ad::tanh;
  switch (a) {
    case Activation::relu:
      return relu(z);
    case Activation::tanh:
      return tanh(z);
    case Activation::identity:
      break;
  }
  return z;
}

/// out[j] = sum_i W[j, i] in[i] (+ b[j]). Dual inputs are split into value and
/// derivative planes; the weights are constant along the input direction, so
/// the derivative plane is the same affine map without bias.
template <class P, class S>
void affine(std::span<const P> w, const P* b, std::size_t rows, std::span<const S> in,
            std::span<S> out) {
  const std::size_t cols = in.size();
  if constexpr (std::is_same_v<S, P>) {
    for (std::size_t j = 0; j < rows; ++j) {
      auto row = w.subspan(j * cols, cols);
      if constexpr (std::is_same_v<P, ad::Var>) {
        out[j] = row.front().tape->dot(row, in, b != nullptr ? b + j : nullptr);
      } else {
        P z = b != nullptr ? b[j] : P{};
        for (std::size_t i = 0; i < cols; ++i) z += row[i] * in[i];
        out[j] = z;
      }
    }
  } else {
    static_assert(ad::is_dual<S>::value, "input scalar must be P or a dual over P");
    using Inner = typename S::value_type;
    std::vector<Inner> in_v, in_d, out_v(rows), out_d(rows);
    in_v.reserve(cols);
    in_d.reserve(cols);
    for (const auto& s : in) {
      in_v.push_back(s.v);
      in_d.push_back(s.d);
    }
    affine<P, Inner>(w, b, rows, in_v, out_v);
    affine<P, Inner>(w, nullptr, rows, in_d, out_d);
    for (std::size_t j = 0; j < rows; ++j) out[j] = S(std::move(out_v[j]), std::move(out_d[j]));
  }
}

}  // namespace detail

template <class S, class P>
S DenseNetwork::forward(std::span<const S> x, std::span<const P> params) const {
  check_input(x.size());
  if (params.size() != params_.size()) {
    throw std::invalid_argument("forward: parameter vector has wrong length");
  }
  std::vector<S> cur(x.begin(), x.end());
  std::vector<S> next;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const std::size_t in = layer_sizes_[l];
    const std::size_t out = layer_sizes_[l + 1];
    next.assign(out, S{});
    detail::affine<P, S>(params.subspan(weight_offset(l), out * in), params.data() + bias_offset(l),
                         out, cur, next);
    const Activation act = l + 1 == layer_count() ? output_ : hidden_;
    if (act != Activation::identity) {
      for (auto& z : next) z = detail::activate(z, act);
    }
    cur.swap(next);
  }
  return cur.front();
}

}  // namespace latpinn::net
