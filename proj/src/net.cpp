#include "latpinn/net.hpp"

#include <cmath>
#include <stdexcept>

#include "latpinn/random.hpp"

namespace latpinn::net {

namespace {
constexpr int kFormatVersion = 1;
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

NetworkSpec default_lattice_spec(std::uint64_t seed) {
  NetworkSpec spec;
  spec.seed = seed;
  return spec;
}

std::size_t parameter_count(std::span<const std::size_t> layer_sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += layer_sizes[l + 1] * layer_sizes[l] + layer_sizes[l + 1];
  }
  return n;
}

DenseNetwork::DenseNetwork(std::vector<std::size_t> layer_sizes, Activation hidden,
                           Activation output, std::vector<double> params, std::uint64_t seed)
    : layer_sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output), seed_(seed) {
  if (layer_sizes_.size() < 2) throw std::invalid_argument("network needs at least two layers");
  for (auto n : layer_sizes_) {
    if (n == 0) throw std::invalid_argument("layer sizes must be positive");
  }
  compute_offsets();
  const std::size_t count = net::parameter_count(layer_sizes_);
  if (params.empty()) params.assign(count, 0.0);
  if (params.size() != count) {
    throw std::invalid_argument("parameter vector length " + std::to_string(params.size()) +
                                " does not match architecture (" + std::to_string(count) + ")");
  }
  params_ = std::move(params);
}

DenseNetwork DenseNetwork::build(const NetworkSpec& spec) {
  if (spec.input_dim == 0) throw std::invalid_argument("input dimension must be >= 1");
  std::vector<std::size_t> sizes{spec.input_dim};
  for (auto h : spec.hidden_dims) {
    if (h == 0) throw std::invalid_argument("hidden dimensions must be >= 1");
    sizes.push_back(h);
  }
  sizes.push_back(1);

  DenseNetwork net(sizes, spec.hidden_activation, Activation::identity, {}, spec.seed);
  if (spec.init == InitScheme::glorot_uniform) {
    Rng rng(spec.seed);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      const std::size_t in = sizes[l];
      const std::size_t out = sizes[l + 1];
      const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
      const std::size_t w0 = net.weight_offset(l);
      for (std::size_t k = 0; k < in * out; ++k) net.params_[w0 + k] = rng.uniform(-bound, bound);
      // biases stay zero
    }
  }
  return net;
}

void DenseNetwork::compute_offsets() {
  offsets_.clear();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    offsets_.push_back(off);
    off += layer_sizes_[l + 1] * layer_sizes_[l] + layer_sizes_[l + 1];
  }
}

void DenseNetwork::check_input(std::size_t n) const {
  if (n != input_dim()) {
    throw std::invalid_argument("forward: input has " + std::to_string(n) + " entries, network expects " +
                                std::to_string(input_dim()));
  }
}

void DenseNetwork::set_params(std::span<const double> flat) {
  if (flat.size() != params_.size()) {
    throw std::invalid_argument("set_params: expected " + std::to_string(params_.size()) +
                                " values, got " + std::to_string(flat.size()));
  }
  params_.assign(flat.begin(), flat.end());
}

double DenseNetwork::forward(std::span<const double> x) const {
  return forward<double, double>(x, std::span<const double>(params_));
}

std::vector<std::uint8_t> DenseNetwork::activation_pattern(std::span<const double> x,
                                                         std::span<const double> params) const {
  check_input(x.size());
  if (params.size() != params_.size()) {
    throw std::invalid_argument("activation_pattern: parameter vector has wrong length");
  }
  std::vector<std::uint8_t> pattern;
  std::vector<double> cur(x.begin(), x.end()), next;
  for (std::size_t l = 0; l + 1 < layer_count(); ++l) {
    const std::size_t in = layer_sizes_[l];
    const std::size_t out = layer_sizes_[l + 1];
    next.assign(out, 0.0);
    detail::affine<double, double>(params.subspan(weight_offset(l), out * in),
                                   params.data() + bias_offset(l), out, cur, next);
    for (auto& z : next) {
      pattern.push_back(z > 0.0 ? 1 : 0);
      z = detail::activate(z, hidden_);
    }
    cur.swap(next);
  }
  return pattern;
}

nlohmann::json DenseNetwork::to_json() const {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const std::size_t n_w = layer_sizes_[l + 1] * layer_sizes_[l];
    const auto w = params().subspan(weight_offset(l), n_w);
    const auto b = params().subspan(bias_offset(l), layer_sizes_[l + 1]);
    weights.push_back(std::vector<double>(w.begin(), w.end()));
    biases.push_back(std::vector<double>(b.begin(), b.end()));
  }
  return {{"format_version", kFormatVersion},
          {"layer_sizes", layer_sizes_},
          {"weights", weights},
          {"biases", biases},
          {"activation", to_string(hidden_)},
          {"output_activation", to_string(output_)},
          {"seed", seed_}};
}

DenseNetwork DenseNetwork::from_json(const nlohmann::json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kFormatVersion) {
    throw std::invalid_argument("unsupported checkpoint format_version " + std::to_string(version));
  }
  auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (sizes.size() < 2 || weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1) {
    throw std::invalid_argument("checkpoint layer count mismatch");
  }
  std::vector<double> flat;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    auto w = weights[l].get<std::vector<double>>();
    auto b = biases[l].get<std::vector<double>>();
    if (w.size() != sizes[l + 1] * sizes[l] || b.size() != sizes[l + 1]) {
      throw std::invalid_argument("checkpoint layer " + std::to_string(l) + " has wrong shape");
    }
    flat.insert(flat.end(), w.begin(), w.end());
    flat.insert(flat.end(), b.begin(), b.end());
  }
  const Activation out =
      j.contains("output_activation") ? activation_from_string(j["output_activation"]) : Activation::identity;
  return DenseNetwork(std::move(sizes), activation_from_string(j.at("activation")), out,
                      std::move(flat), j.value("seed", std::uint64_t{0}));
}

}  // namespace latpinn::net
