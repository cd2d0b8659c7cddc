#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deu/deu_layer.hpp"

namespace deu {

enum class Activation { Deu, ReLU, Sigmoid, LeakyReLU, SELU, Identity };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd W;     // out x in
  Eigen::VectorXd bias;  // out
  Activation act = Activation::Identity;
  double leaky_slope = 0.01;
  double act_clip = 0.0;  // clamp |activation| during training; 0 disables
  std::optional<DeuLayerState> deu;  // present iff act == Deu

  Eigen::Index in_dim() const { return W.cols(); }
  Eigen::Index out_dim() const { return W.rows(); }
};

struct Network {
  std::vector<DenseLayer> layers;
};

struct LayerCache {
  Eigen::MatrixXd input;      // batch x in
  Eigen::MatrixXd act_deriv;  // d act / d z, fixed activations only
  DeuForwardCache deu_cache;
};

using ForwardCaches = std::vector<LayerCache>;

struct LayerGrads {
  Eigen::MatrixXd dW;
  Eigen::VectorXd db;
  std::vector<ParamGrad> dtheta;  // DEU layers only
};

struct NetworkGrads {
  std::vector<LayerGrads> layers;
};

// (y, dy/dt) of a fixed activation at a scalar input.
std::pair<double, double> baseline_activation(Activation kind, double t,
                                              double leaky_slope = 0.01);

std::pair<Eigen::MatrixXd, ForwardCaches> network_forward(
    const Network& net, const Eigen::MatrixXd& batch);

NetworkGrads network_backward(const Network& net, const ForwardCaches& caches,
                              const Eigen::MatrixXd& loss_grad);

// Mean squared error over all entries; gradient 2(pred - target)/N.
std::pair<double, Eigen::MatrixXd> mse_loss(const Eigen::MatrixXd& pred,
                                            const Eigen::MatrixXd& target);

// Mean negative log-likelihood with a log-sum-exp softmax; gradient
// (softmax - onehot)/batch. Throws on out-of-range labels.
std::pair<double, Eigen::MatrixXd> softmax_ce_loss(
    const Eigen::MatrixXd& logits, const std::vector<int>& labels);

// Glorot-uniform weights, zero biases; DEU parameters are left untouched.
void init_weights(Network& net, std::uint64_t seed);

// A fully connected net with the given layer sizes; every hidden layer uses
// `hidden`, the output layer `output`. DEU layers get init_params-seeded
// coefficients.
Network make_mlp(const std::vector<Eigen::Index>& sizes, Activation hidden,
                 Activation output, std::uint64_t seed,
                 const StabilityConfig& cfg = {});

struct AdamConfig {
  double lr_weights = 1e-3;
  double lr_coeffs = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  long step = 0;
  struct LayerMoments {
    Eigen::MatrixXd mW, vW;
    Eigen::VectorXd mb, vb;
    Eigen::MatrixXd mtheta, vtheta;  // width x 5
  };
  std::vector<LayerMoments> layers;
};

AdamState make_adam(const Network& net, const AdamConfig& cfg = {});

// One Adam update. Weights/biases use lr_weights, DEU coefficients
// lr_coeffs; DEU parameters are re-clamped afterwards. Coefficient moments
// advance only when update_coeffs is set (per-epoch update schedules).
void adam_step(AdamState& adam, Network& net, const NetworkGrads& grads,
               bool update_weights = true, bool update_coeffs = true);

// Self-describing text checkpoint; decimal serialization round-trips doubles
// exactly.
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace deu
