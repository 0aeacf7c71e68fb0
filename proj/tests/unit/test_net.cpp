#include <doctest.h>

#include <cmath>

#include "latpinn/net.hpp"
#include "support/oracles.hpp"

using namespace latpinn;
using net::Activation;
using net::DenseNetwork;

namespace {

// Straightforward evaluator written against the documented parameter layout.
double naive_forward(const std::vector<std::size_t>& sizes, const std::vector<double>& p,
                     std::vector<double> x, Activation hidden) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
      double z = p[off + in * out + o];
      for (std::size_t i = 0; i < in; ++i) z += p[off + o * in + i] * x[i];
      if (l + 2 < sizes.size()) z = hidden == Activation::relu ? std::max(0.0, z) : std::tanh(z);
      y[o] = z;
    }
    off += in * out + out;
    x = y;
  }
  return x[0];
}

}  // namespace

TEST_CASE("lattice network shape") {
  auto n = DenseNetwork::build(net::default_lattice_spec());
  CHECK(n.parameter_count() == 2 * 64 + 64 + 64 * 64 + 64 + 64 * 32 + 32 + 32 + 1);
  CHECK(n.layer_sizes() == std::vector<std::size_t>{2, 64, 64, 32, 1});
  CHECK(n.weight_offset(1) == 2 * 64 + 64);
  CHECK(n.bias_offset(0) == 128);
  const std::vector<std::size_t> sizes{2, 64, 64, 32, 1};
  CHECK(net::parameter_count(sizes) == 2 * 64 + 64 + 64 * 64 + 64 + 64 * 32 + 32 + 32 + 1);
}

TEST_CASE("glorot initialization is seeded and bounded") {
  auto a = DenseNetwork::build(net::default_lattice_spec(42));
  auto b = DenseNetwork::build(net::default_lattice_spec(42));
  auto c = DenseNetwork::build(net::default_lattice_spec(43));
  CHECK(a.get_params() == b.get_params());
  CHECK(a.get_params() != c.get_params());
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    const auto in = a.layer_sizes()[l], out = a.layer_sizes()[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (std::size_t k = 0; k < in * out; ++k) CHECK(std::abs(a.params()[a.weight_offset(l) + k]) <= bound);
    for (std::size_t k = 0; k < out; ++k) CHECK(a.params()[a.bias_offset(l) + k] == 0.0);
  }
  net::NetworkSpec zeros = net::default_lattice_spec();
  zeros.init = net::InitScheme::zeros;
  auto z = DenseNetwork::build(zeros);
  const std::vector<double> x{0.3, -1.0};
  CHECK(z.forward(x) == 0.0);
}

TEST_CASE("hand-built 2-2-1 network") {
  // W1 = I, b1 = 0, W2 = [2, 2.5], b2 = 0: f(1, 2) = 2 + 5
  DenseNetwork n({2, 2, 1}, Activation::relu, Activation::identity, {1, 0, 0, 1, 0, 0, 2, 2.5, 0});
  CHECK(n.forward(std::vector<double>{1.0, 2.0}) == 7.0);
  // relu clips the negative hidden unit
  CHECK(n.forward(std::vector<double>{-1.0, 2.0}) == 5.0);
}

TEST_CASE("forward matches an independent evaluator") {
  Rng rng(5);
  for (auto act : {Activation::relu, Activation::tanh}) {
    net::NetworkSpec spec;
    spec.hidden_dims = {7, 5};
    spec.hidden_activation = act;
    auto n = DenseNetwork::build(spec);
    auto p = n.get_params();
    for (auto& v : p) v = rng.normal(0.0, 0.5);
    n.set_params(p);
    for (int k = 0; k < 50; ++k) {
      std::vector<double> x{rng.normal(), rng.normal()};
      CHECK(n.forward(x) == doctest::Approx(naive_forward(n.layer_sizes(), p, x, act)).epsilon(1e-13));
    }
  }
}

TEST_CASE("relu network without biases is positively homogeneous") {
  Rng rng(6);
  auto n = DenseNetwork::build(net::default_lattice_spec(9));
  for (int k = 0; k < 20; ++k) {
    std::vector<double> x{rng.normal(), rng.normal()};
    const double a = rng.uniform(0.1, 5.0);
    std::vector<double> ax{a * x[0], a * x[1]};
    CHECK(n.forward(ax) == doctest::Approx(a * n.forward(x)).epsilon(1e-12));
  }
}

TEST_CASE("input derivatives through the network match finite differences") {
  net::NetworkSpec spec;
  spec.hidden_dims = {8, 8};
  spec.hidden_activation = Activation::tanh;
  auto n = DenseNetwork::build(spec);
  const double x0 = 0.3, t0 = -0.2;
  using D = ad::Dual<double>;
  std::array<D, 2> in{D(x0, 1.0), D(t0, 0.0)};
  const double dx = n.forward<D, double>(in, n.params()).d;
  auto f = [&](double x) { return n.forward(std::vector<double>{x, t0}); };
  CHECK(dx == doctest::Approx(oracle::central_difference(f, x0, 1e-6)).epsilon(1e-8));
}

TEST_CASE("activation pattern flags positive pre-activations") {
  DenseNetwork n({2, 2, 1}, Activation::relu, Activation::identity, {1, 0, 0, 1, 0, 0, 1, 1, 0});
  CHECK(n.activation_pattern(std::vector<double>{1.0, -1.0}, n.params()) == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("checkpoint round trip") {
  auto n = DenseNetwork::build(net::default_lattice_spec(17));
  auto j = n.to_json();
  CHECK(j["format_version"] == 1);
  CHECK(j["activation"] == "relu");
  auto m = DenseNetwork::from_json(nlohmann::json::parse(j.dump()));
  CHECK(m.get_params() == n.get_params());
  CHECK(m.layer_sizes() == n.layer_sizes());
  CHECK(m.seed() == 17);

  auto bad = j;
  bad["format_version"] = 2;
  CHECK_THROWS_AS(DenseNetwork::from_json(bad), std::invalid_argument);
  auto wrong = j;
  wrong["weights"][0].erase(0);
  CHECK_THROWS_AS(DenseNetwork::from_json(wrong), std::invalid_argument);
}

TEST_CASE("shape errors") {
  auto n = DenseNetwork::build(net::default_lattice_spec());
  CHECK_THROWS_AS(n.forward(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(n.set_params(std::vector<double>(10)), std::invalid_argument);
  net::NetworkSpec spec;
  spec.hidden_dims = {4, 0};
  CHECK_THROWS_AS(DenseNetwork::build(spec), std::invalid_argument);
  CHECK_THROWS_AS(net::activation_from_string("gelu"), std::invalid_argument);
}
