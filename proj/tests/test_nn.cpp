#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>

#include "deu/nn.hpp"
#include "deu/oracle.hpp"

using namespace deu;

namespace {
const StabilityConfig kCfg;

Network tame_deu_net(std::uint64_t seed, const std::vector<Eigen::Index>& sizes) {
  Network net = make_mlp(sizes, Activation::Deu, Activation::Identity, seed, kCfg);
  // keep pre-activations away from the clamp boundaries for FD checks
  std::mt19937_64 rng(seed + 7);
  for (DenseLayer& layer : net.layers) {
    if (layer.act != Activation::Deu) continue;
    for (DeuParams& p : layer.deu->params) {
      p = sample_regime_params(SolutionRegime::GeneralUnderdamped, rng, kCfg);
    }
  }
  return net;
}

// Input rows whose DEU pre-activations all stay clear of the step at t = 0,
// where the analytic gradient uses the smoothed delta but the forward value
// uses the hard step; finite differences only apply away from it.
Eigen::MatrixXd pick_inputs(const Network& net, std::mt19937_64& rng,
                            Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  Eigen::MatrixXd x(rows, cols);
  Eigen::Index got = 0;
  while (got < rows) {
    Eigen::MatrixXd row(1, cols);
    for (Eigen::Index j = 0; j < cols; ++j) row(0, j) = dist(rng);
    auto [out, caches] = network_forward(net, row);
    double min_abs = std::numeric_limits<double>::infinity();
    for (const LayerCache& c : caches) {
      if (c.deu_cache.pre_activations.size() > 0) {
        min_abs = std::min(min_abs,
                           c.deu_cache.pre_activations.cwiseAbs().minCoeff());
      }
    }
    if (min_abs > 0.3) x.row(got++) = row;
  }
  return x;
}
}  // namespace

TEST_CASE("baseline activations") {
  CHECK(baseline_activation(Activation::ReLU, -2.0).first == 0.0);
  CHECK(baseline_activation(Activation::ReLU, 3.0) == std::pair{3.0, 1.0});
  CHECK(baseline_activation(Activation::LeakyReLU, -2.0).first ==
        doctest::Approx(-0.02).epsilon(1e-12));
  CHECK(baseline_activation(Activation::SELU, 0.0).first == 0.0);
  const auto sig = baseline_activation(Activation::Sigmoid, 0.0);
  CHECK(sig.first == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sig.second == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(baseline_activation(Activation::Identity, -1.5) == std::pair{-1.5, 1.0});
  CHECK_THROWS_AS(baseline_activation(Activation::Deu, 1.0),
                  std::invalid_argument);
}

TEST_CASE("activation name round trip") {
  for (Activation a : {Activation::Deu, Activation::ReLU, Activation::Sigmoid,
                       Activation::LeakyReLU, Activation::SELU,
                       Activation::Identity}) {
    CHECK(activation_from_name(activation_name(a)) == a);
  }
  CHECK_THROWS_AS(activation_from_name("tanh"), std::invalid_argument);
}

TEST_CASE("network_forward identity layer") {
  Network net;
  DenseLayer layer;
  layer.W = Eigen::MatrixXd::Identity(3, 3);
  layer.bias = Eigen::VectorXd::Zero(3);
  layer.act = Activation::Identity;
  net.layers.push_back(layer);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  auto [out, caches] = network_forward(net, x);
  CHECK((out - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("network_forward single DEU ReLU neuron") {
  Network net;
  DenseLayer layer;
  layer.W = Eigen::MatrixXd::Ones(1, 1);
  layer.bias = Eigen::VectorXd::Zero(1);
  layer.act = Activation::Deu;
  layer.deu.emplace();
  layer.deu->cfg = kCfg;
  layer.deu->params = {{0, 1, 0, 0, 0}};
  net.layers.push_back(layer);
  Eigen::MatrixXd x(1, 1);
  x << 2.0;
  auto [out, caches] = network_forward(net, x);
  CHECK(out(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("network_forward matches a hand-rolled reference pass") {
  Network net = make_mlp({3, 4, 2}, Activation::Sigmoid, Activation::Identity,
                         99, kCfg);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 3);
  auto [out, caches] = network_forward(net, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    // layer 1 by explicit loops
    std::vector<double> h(4, 0.0);
    for (int n = 0; n < 4; ++n) {
      double z = net.layers[0].bias(n);
      for (int j = 0; j < 3; ++j) z += net.layers[0].W(n, j) * x(i, j);
      h[static_cast<std::size_t>(n)] = 1.0 / (1.0 + std::exp(-z));
    }
    for (int n = 0; n < 2; ++n) {
      double z = net.layers[1].bias(n);
      for (int j = 0; j < 4; ++j) {
        z += net.layers[1].W(n, j) * h[static_cast<std::size_t>(j)];
      }
      CHECK(out(i, n) == doctest::Approx(z).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(network_forward(net, Eigen::MatrixXd::Random(2, 5)),
                  std::invalid_argument);
}

TEST_CASE("network_backward zero loss gradient") {
  Network net = make_mlp({2, 3, 1}, Activation::ReLU, Activation::Identity, 4,
                         kCfg);
  auto [out, caches] = network_forward(net, Eigen::MatrixXd::Random(5, 2));
  const NetworkGrads grads =
      network_backward(net, caches, Eigen::MatrixXd::Zero(5, 1));
  for (const LayerGrads& g : grads.layers) {
    CHECK(g.dW.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.db.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("single linear layer MSE gradient closed form") {
  Network net;
  DenseLayer layer;
  layer.W = Eigen::MatrixXd::Random(1, 3);
  layer.bias = Eigen::VectorXd::Random(1);
  layer.act = Activation::Identity;
  net.layers.push_back(layer);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 3);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(8, 1);
  auto [out, caches] = network_forward(net, x);
  auto [loss, lgrad] = mse_loss(out, y);
  const NetworkGrads grads = network_backward(net, caches, lgrad);
  const Eigen::MatrixXd expect = 2.0 / 8.0 * (out - y).transpose() * x;
  CHECK((grads.layers[0].dW - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("end-to-end gradients match finite differences") {
  for (std::uint64_t seed : {1u, 2u}) {
    Network net = tame_deu_net(seed, {2, 4, 3, 1});
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd x = pick_inputs(net, rng, 6, 2);
    Eigen::MatrixXd y = Eigen::MatrixXd::Random(6, 1);

    auto loss_of = [&](const Network& n) {
      auto [out, c] = network_forward(n, x);
      return mse_loss(out, y).first;
    };
    auto [out, caches] = network_forward(net, x);
    auto [loss, lgrad] = mse_loss(out, y);
    const NetworkGrads grads = network_backward(net, caches, lgrad);

    const double h = 1e-6;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      for (Eigen::Index i = 0; i < net.layers[l].W.rows(); ++i) {
        for (Eigen::Index j = 0; j < net.layers[l].W.cols(); ++j) {
          Network lo = net, hi = net;
          lo.layers[l].W(i, j) -= h;
          hi.layers[l].W(i, j) += h;
          const double fd = (loss_of(hi) - loss_of(lo)) / (2 * h);
          const double g = grads.layers[l].dW(i, j);
          const double scale = std::max({std::abs(fd), std::abs(g), 1e-6});
          CHECK(std::abs(fd - g) / scale < 1e-3);
        }
      }
      if (net.layers[l].act != Activation::Deu) continue;
      for (std::size_t n = 0; n < net.layers[l].deu->params.size(); ++n) {
        for (int k = 0; k < 5; ++k) {
          Network lo = net, hi = net;
          auto field = [k](DeuParams& p) -> double* {
            double* f[5] = {&p.a, &p.b, &p.c, &p.c1, &p.c2};
            return f[k];
          };
          *field(lo.layers[l].deu->params[n]) -= h;
          *field(hi.layers[l].deu->params[n]) += h;
          const double fd = (loss_of(hi) - loss_of(lo)) / (2 * h);
          const double g = grads.layers[l].dtheta[n][static_cast<std::size_t>(k)];
          const double scale = std::max({std::abs(fd), std::abs(g), 1e-6});
          CHECK(std::abs(fd - g) / scale < 1e-3);
        }
      }
    }
  }
}

TEST_CASE("loss functions") {
  Eigen::MatrixXd y(2, 1);
  y << 1, -1;
  auto [zero_loss, zero_grad] = mse_loss(y, y);
  CHECK(zero_loss == 0.0);
  CHECK(zero_grad.cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd one(1, 1), zero(1, 1);
  one << 1;
  zero << 0;
  auto [l, g] = mse_loss(one, zero);
  CHECK(l == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

  Eigen::MatrixXd logits(1, 2);
  logits << 0, 0;
  auto [ce, cegrad] = softmax_ce_loss(logits, {0});
  CHECK(ce == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(cegrad(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(cegrad(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(softmax_ce_loss(logits, {5}), std::out_of_range);
  CHECK(ce >= 0.0);

  // log-sum-exp keeps extreme logits finite
  Eigen::MatrixXd big(1, 2);
  big << 1e4, -1e4;
  auto [bl, bg] = softmax_ce_loss(big, {1});
  CHECK(std::isfinite(bl));
  CHECK(bg.allFinite());
}

TEST_CASE("Glorot init bounds and reproducibility") {
  Network a = make_mlp({10, 6, 2}, Activation::ReLU, Activation::Identity, 77,
                       kCfg);
  Network b = make_mlp({10, 6, 2}, Activation::ReLU, Activation::Identity, 77,
                       kCfg);
  const double limit0 = std::sqrt(6.0 / (10 + 6));
  CHECK(a.layers[0].W.cwiseAbs().maxCoeff() <= limit0);
  CHECK(a.layers[0].bias.cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.layers[0].W - b.layers[0].W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.layers[1].W - b.layers[1].W).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam first step and zero-gradient identity") {
  Network net;
  DenseLayer layer;
  layer.W = Eigen::MatrixXd::Zero(1, 1);
  layer.bias = Eigen::VectorXd::Zero(1);
  layer.act = Activation::Identity;
  net.layers.push_back(layer);
  AdamConfig cfg;
  cfg.lr_weights = 1e-3;
  AdamState adam = make_adam(net, cfg);

  NetworkGrads grads;
  grads.layers.resize(1);
  grads.layers[0].dW = Eigen::MatrixXd::Constant(1, 1, 0.5);
  grads.layers[0].db = Eigen::VectorXd::Zero(1);
  adam_step(adam, net, grads);
  CHECK(net.layers[0].W(0, 0) == doctest::Approx(-1e-3).epsilon(1e-4));

  const double w = net.layers[0].W(0, 0);
  AdamState fresh = make_adam(net, cfg);
  grads.layers[0].dW.setZero();
  for (int i = 0; i < 10; ++i) adam_step(fresh, net, grads);
  CHECK(net.layers[0].W(0, 0) == w);
}

TEST_CASE("adam converges on a quadratic bowl") {
  Network net;
  DenseLayer layer;
  layer.W = Eigen::MatrixXd::Constant(1, 4, 0.5);  // ||w|| = 1
  layer.bias = Eigen::VectorXd::Zero(1);
  layer.act = Activation::Identity;
  net.layers.push_back(layer);
  AdamConfig cfg;
  cfg.lr_weights = 1e-2;
  AdamState adam = make_adam(net, cfg);
  NetworkGrads grads;
  grads.layers.resize(1);
  grads.layers[0].db = Eigen::VectorXd::Zero(1);
  for (int i = 0; i < 500; ++i) {
    grads.layers[0].dW = 2.0 * net.layers[0].W;  // d||w||^2
    adam_step(adam, net, grads);
  }
  CHECK(net.layers[0].W.norm() < 1e-2);
}

TEST_CASE("adam re-clamps DEU coefficients") {
  Network net;
  DenseLayer layer;
  layer.W = Eigen::MatrixXd::Ones(1, 1);
  layer.bias = Eigen::VectorXd::Zero(1);
  layer.act = Activation::Deu;
  layer.deu.emplace();
  layer.deu->cfg = kCfg;
  layer.deu->params = {{0.5, 0.012, 0.5, 0, 0}};
  net.layers.push_back(layer);
  AdamConfig cfg;
  cfg.lr_coeffs = 5e-3;
  AdamState adam = make_adam(net, cfg);
  NetworkGrads grads;
  grads.layers.resize(1);
  grads.layers[0].dW = Eigen::MatrixXd::Zero(1, 1);
  grads.layers[0].db = Eigen::VectorXd::Zero(1);
  grads.layers[0].dtheta = {{0.0, 1.0, 0.0, 0.0, 0.0}};
  adam_step(adam, net, grads);
  // 0.012 - 0.005 lands inside the forbidden band and must clamp to zero
  CHECK(net.layers[0].deu->params[0].b == 0.0);
  CHECK(net.layers[0].deu->params[0].a == 0.5);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Network net = tame_deu_net(12, {2, 3, 1});
  net.layers[0].act_clip = 1e3;
  const std::string path =
      (std::filesystem::temp_directory_path() / "deu_ckpt_test.txt").string();
  save_checkpoint(net, path);
  const Network back = load_checkpoint(path);
  REQUIRE(back.layers.size() == net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    CHECK(back.layers[l].act == net.layers[l].act);
    CHECK(back.layers[l].act_clip == net.layers[l].act_clip);
    CHECK((back.layers[l].W - net.layers[l].W).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.layers[l].bias - net.layers[l].bias).cwiseAbs().maxCoeff() ==
          0.0);
    if (net.layers[l].act == Activation::Deu) {
      for (std::size_t n = 0; n < net.layers[l].deu->params.size(); ++n) {
        const DeuParams& p = net.layers[l].deu->params[n];
        const DeuParams& q = back.layers[l].deu->params[n];
        CHECK(p.a == q.a);
        CHECK(p.b == q.b);
        CHECK(p.c == q.c);
        CHECK(p.c1 == q.c1);
        CHECK(p.c2 == q.c2);
      }
    }
  }
  std::filesystem::remove(path);
  CHECK_THROWS(load_checkpoint("/nonexistent/ckpt.txt"));
}
