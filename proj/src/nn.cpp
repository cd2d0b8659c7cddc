#include "deu/nn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace deu {

namespace {

constexpr double kSeluAlpha = 1.6732632423543772;
constexpr double kSeluLambda = 1.0507009873554805;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Deu: return "deu";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::LeakyReLU: return "lrelu";
    case Activation::SELU: return "selu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "deu") return Activation::Deu;
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "lrelu") return Activation::LeakyReLU;
  if (name == "selu") return Activation::SELU;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation: " + name);
}

std::pair<double, double> baseline_activation(Activation kind, double t,
                                              double leaky_slope) {
  switch (kind) {
    case Activation::ReLU:
      return t > 0.0 ? std::pair{t, 1.0} : std::pair{0.0, 0.0};
    case Activation::Sigmoid: {
      const double s = sigmoid(t);
      return {s, s * (1.0 - s)};
    }
    case Activation::LeakyReLU:
      return t > 0.0 ? std::pair{t, 1.0}
                     : std::pair{leaky_slope * t, leaky_slope};
    case Activation::SELU:
      if (t > 0.0) return {kSeluLambda * t, kSeluLambda};
      return {kSeluLambda * kSeluAlpha * (std::exp(t) - 1.0),
              kSeluLambda * kSeluAlpha * std::exp(t)};
    case Activation::Identity:
      return {t, 1.0};
    case Activation::Deu:
      break;
  }
  throw std::invalid_argument("baseline_activation: DEU is not a fixed kind");
}

std::pair<Eigen::MatrixXd, ForwardCaches> network_forward(
    const Network& net, const Eigen::MatrixXd& batch) {
  ForwardCaches caches(net.layers.size());
  Eigen::MatrixXd x = batch;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    if (x.cols() != layer.in_dim()) {
      throw std::invalid_argument("network_forward: shape mismatch at layer " +
                                  std::to_string(l));
    }
    LayerCache& cache = caches[l];
    cache.input = x;
    Eigen::MatrixXd z =
        (x * layer.W.transpose()).rowwise() + layer.bias.transpose();
    if (layer.act == Activation::Deu) {
      auto [act, dc] = forward_batch(*layer.deu, z);
      cache.deu_cache = std::move(dc);
      if (layer.act_clip > 0.0) {
        // Exploding homogeneous tails would otherwise swamp the loss; the
        // clip mask zeroes their gradient in backward.
        cache.act_deriv =
            (act.array().abs() < layer.act_clip).cast<double>().matrix();
        act = act.cwiseMax(-layer.act_clip).cwiseMin(layer.act_clip);
      }
      x = std::move(act);
    } else {
      cache.act_deriv.resize(z.rows(), z.cols());
      Eigen::MatrixXd act(z.rows(), z.cols());
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
          auto [y, dy] = baseline_activation(layer.act, z(i, j),
                                             layer.leaky_slope);
          act(i, j) = y;
          cache.act_deriv(i, j) = dy;
        }
      }
      x = std::move(act);
    }
  }
  return {std::move(x), std::move(caches)};
}

NetworkGrads network_backward(const Network& net, const ForwardCaches& caches,
                              const Eigen::MatrixXd& loss_grad) {
  if (caches.size() != net.layers.size()) {
    throw std::invalid_argument("network_backward: stale caches");
  }
  NetworkGrads grads;
  grads.layers.resize(net.layers.size());

  Eigen::MatrixXd delta = loss_grad;  // dL/d(layer output)
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const DenseLayer& layer = net.layers[li];
    const LayerCache& cache = caches[li];

    Eigen::MatrixXd dz;  // dL/d(pre-activation)
    if (layer.act == Activation::Deu) {
      if (layer.act_clip > 0.0 && cache.act_deriv.size() == delta.size()) {
        delta = delta.cwiseProduct(cache.act_deriv);
      }
      auto [input_grad, theta_grad] =
          backward_batch(*layer.deu, cache.deu_cache, delta);
      dz = std::move(input_grad);
      grads.layers[li].dtheta = std::move(theta_grad);
    } else {
      if (cache.act_deriv.rows() != delta.rows() ||
          cache.act_deriv.cols() != delta.cols()) {
        throw std::invalid_argument("network_backward: stale caches");
      }
      dz = delta.cwiseProduct(cache.act_deriv);
    }
    grads.layers[li].dW = dz.transpose() * cache.input;
    grads.layers[li].db = dz.colwise().sum().transpose();
    delta = dz * layer.W;
  }
  return grads;
}

std::pair<double, Eigen::MatrixXd> mse_loss(const Eigen::MatrixXd& pred,
                                            const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("mse_loss: shape mismatch");
  }
  const double n = static_cast<double>(pred.size());
  const Eigen::MatrixXd diff = pred - target;
  return {diff.squaredNorm() / n, 2.0 * diff / n};
}

std::pair<double, Eigen::MatrixXd> softmax_ce_loss(
    const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  const Eigen::Index batch = logits.rows();
  const Eigen::Index k = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != batch) {
    throw std::invalid_argument("softmax_ce_loss: label count mismatch");
  }
  double loss = 0.0;
  Eigen::MatrixXd grad(batch, k);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= k) {
      throw std::out_of_range("softmax_ce_loss: label out of range");
    }
    const double zmax = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) sum += std::exp(logits(i, j) - zmax);
    const double lse = zmax + std::log(sum);
    loss += lse - logits(i, label);
    for (Eigen::Index j = 0; j < k; ++j) {
      grad(i, j) = std::exp(logits(i, j) - lse) / static_cast<double>(batch);
    }
    grad(i, label) -= 1.0 / static_cast<double>(batch);
  }
  return {loss / static_cast<double>(batch), std::move(grad)};
}

void init_weights(Network& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (DenseLayer& layer : net.layers) {
    const double fan_in = static_cast<double>(layer.in_dim());
    const double fan_out = static_cast<double>(layer.out_dim());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < layer.W.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j) {
        layer.W(i, j) = dist(rng);
      }
    }
    layer.bias.setZero();
  }
}

Network make_mlp(const std::vector<Eigen::Index>& sizes, Activation hidden,
                 Activation output, std::uint64_t seed,
                 const StabilityConfig& cfg) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("make_mlp: need at least input and output sizes");
  }
  Network net;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.W.resize(sizes[l + 1], sizes[l]);
    layer.bias.resize(sizes[l + 1]);
    layer.act = l + 2 < sizes.size() ? hidden : output;
    if (layer.act == Activation::Deu) {
      layer.deu.emplace();
      layer.deu->cfg = cfg;
      layer.deu->params = init_params(seed + 1000 * (l + 1),
                                      static_cast<std::size_t>(sizes[l + 1]), cfg);
    }
    net.layers.push_back(std::move(layer));
  }
  init_weights(net, seed);
  return net;
}

AdamState make_adam(const Network& net, const AdamConfig& cfg) {
  AdamState adam;
  adam.cfg = cfg;
  adam.layers.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    auto& m = adam.layers[l];
    m.mW = Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols());
    m.vW = m.mW;
    m.mb = Eigen::VectorXd::Zero(layer.bias.size());
    m.vb = m.mb;
    if (layer.act == Activation::Deu) {
      m.mtheta = Eigen::MatrixXd::Zero(layer.out_dim(), 5);
      m.vtheta = m.mtheta;
    }
  }
  return adam;
}

namespace {

inline double adam_update(double& m, double& v, double g, double lr,
                          const AdamConfig& cfg, double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
  return lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps_hat);
}

}  // namespace

void adam_step(AdamState& adam, Network& net, const NetworkGrads& grads,
               bool update_weights, bool update_coeffs) {
  if (adam.layers.size() != net.layers.size() ||
      grads.layers.size() != net.layers.size()) {
    throw std::invalid_argument("adam_step: state/grads mismatch");
  }
  adam.step += 1;
  const AdamConfig& cfg = adam.cfg;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.step));

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    DenseLayer& layer = net.layers[l];
    auto& m = adam.layers[l];
    const LayerGrads& g = grads.layers[l];

    if (update_weights) {
      for (Eigen::Index i = 0; i < layer.W.rows(); ++i) {
        for (Eigen::Index j = 0; j < layer.W.cols(); ++j) {
          layer.W(i, j) -= adam_update(m.mW(i, j), m.vW(i, j), g.dW(i, j),
                                       cfg.lr_weights, cfg, bc1, bc2);
        }
      }
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
        layer.bias(i) -= adam_update(m.mb(i), m.vb(i), g.db(i),
                                     cfg.lr_weights, cfg, bc1, bc2);
      }
    }

    if (layer.act == Activation::Deu && update_coeffs && !g.dtheta.empty()) {
      for (Eigen::Index n = 0; n < layer.out_dim(); ++n) {
        DeuParams& p = layer.deu->params[static_cast<std::size_t>(n)];
        double* fields[5] = {&p.a, &p.b, &p.c, &p.c1, &p.c2};
        for (int k = 0; k < 5; ++k) {
          *fields[k] -= adam_update(
              m.mtheta(n, k), m.vtheta(n, k),
              g.dtheta[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)],
              cfg.lr_coeffs, cfg, bc1, bc2);
        }
        p = clamp_params(p, layer.deu->cfg);
      }
    }
  }
}

void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for write: " + path);
  out << "deu-checkpoint v1\n";
  out << "layers " << net.layers.size() << "\n";
  for (const DenseLayer& layer : net.layers) {
    out << "layer act " << activation_name(layer.act) << " in "
        << layer.in_dim() << " out " << layer.out_dim() << " slope "
        << fmt17(layer.leaky_slope) << " clip " << fmt17(layer.act_clip)
        << "\n";
    out << "W";
    for (Eigen::Index i = 0; i < layer.W.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j) {
        out << " " << fmt17(layer.W(i, j));
      }
    }
    out << "\nbias";
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      out << " " << fmt17(layer.bias(i));
    }
    out << "\n";
    if (layer.act == Activation::Deu) {
      const DeuLayerState& st = *layer.deu;
      out << "stability " << fmt17(st.cfg.eps) << " " << fmt17(st.cfg.s_delta)
          << " " << fmt17(st.cfg.s_act) << " " << fmt17(st.cfg.exp_arg_cap)
          << " " << (st.t_star_mode == RefPointMode::BatchMean ? "batch-mean"
                                                               : "fixed-zero")
          << "\n";
      for (const DeuParams& p : st.params) {
        out << "theta " << fmt17(p.a) << " " << fmt17(p.b) << " " << fmt17(p.c)
            << " " << fmt17(p.c1) << " " << fmt17(p.c2) << "\n";
      }
    }
  }
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string tag, version;
  in >> tag >> version;
  if (tag != "deu-checkpoint" || version != "v1") {
    throw std::runtime_error("not a deu checkpoint: " + path);
  }
  std::size_t n_layers = 0;
  std::string key;
  in >> key >> n_layers;
  if (key != "layers") throw std::runtime_error("malformed checkpoint");

  Network net;
  for (std::size_t l = 0; l < n_layers; ++l) {
    DenseLayer layer;
    std::string act_name;
    Eigen::Index in_dim = 0, out_dim = 0;
    in >> key >> key >> act_name >> key >> in_dim >> key >> out_dim >> key >>
        layer.leaky_slope >> key >> layer.act_clip;
    layer.act = activation_from_name(act_name);
    layer.W.resize(out_dim, in_dim);
    layer.bias.resize(out_dim);
    in >> key;
    for (Eigen::Index i = 0; i < out_dim; ++i) {
      for (Eigen::Index j = 0; j < in_dim; ++j) in >> layer.W(i, j);
    }
    in >> key;
    for (Eigen::Index i = 0; i < out_dim; ++i) in >> layer.bias(i);
    if (layer.act == Activation::Deu) {
      layer.deu.emplace();
      std::string mode;
      in >> key >> layer.deu->cfg.eps >> layer.deu->cfg.s_delta >>
          layer.deu->cfg.s_act >> layer.deu->cfg.exp_arg_cap >> mode;
      layer.deu->t_star_mode = mode == "fixed-zero" ? RefPointMode::FixedZero
                                                    : RefPointMode::BatchMean;
      layer.deu->params.resize(static_cast<std::size_t>(out_dim));
      for (DeuParams& p : layer.deu->params) {
        in >> key >> p.a >> p.b >> p.c >> p.c1 >> p.c2;
      }
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace deu
