#include "deu/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "deu/oracle.hpp"

namespace deu {

namespace {

using nlohmann::json;

const std::map<std::string, Task> kTasks = {
    {"sine", Task::Sine},       {"complex", Task::Complex},
    {"circles", Task::Circles}, {"tabular", Task::Tabular},
    {"mnist", Task::Mnist}};

std::string task_name(Task t) {
  for (const auto& [name, task] : kTasks) {
    if (task == t) return name;
  }
  return "?";
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: bad number for '" + key + "': " + v);
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used == v.size() && n >= 0) return static_cast<std::uint64_t>(n);
  } catch (const std::exception&) {
  }
  throw ConfigError("config: bad count for '" + key + "': " + v);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": expected key = value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "task") {
      const auto it = kTasks.find(val);
      if (it == kTasks.end()) throw ConfigError("config: unknown task " + val);
      cfg.task = it->second;
    } else if (key == "hidden") {
      cfg.hidden.clear();
      std::string v = val;
      std::replace(v.begin(), v.end(), ',', ' ');
      std::istringstream hs(v);
      long h = 0;
      while (hs >> h) {
        if (h <= 0) throw ConfigError("config: hidden sizes must be positive");
        cfg.hidden.push_back(h);
      }
      if (cfg.hidden.empty()) throw ConfigError("config: empty hidden list");
    } else if (key == "activation") {
      try {
        cfg.activation = activation_from_name(val);
      } catch (const std::exception&) {
        throw ConfigError("config: unknown activation " + val);
      }
    } else if (key == "epochs") {
      cfg.epochs = parse_count(key, val);
      if (cfg.epochs == 0) throw ConfigError("config: epochs must be positive");
    } else if (key == "batch_size") {
      cfg.batch_size = parse_count(key, val);
      if (cfg.batch_size == 0) {
        throw ConfigError("config: batch_size must be positive");
      }
    } else if (key == "seed") {
      cfg.seed = parse_count(key, val);
    } else if (key == "lr_weights") {
      cfg.lr_weights = parse_double(key, val);
    } else if (key == "lr_coeffs") {
      cfg.lr_coeffs = parse_double(key, val);
    } else if (key == "coef_update_every") {
      if (val == "batch") {
        cfg.coef_update_every = CoefUpdateEvery::Batch;
      } else if (val == "epoch") {
        cfg.coef_update_every = CoefUpdateEvery::Epoch;
      } else {
        throw ConfigError("config: coef_update_every must be batch or epoch");
      }
    } else if (key == "lr_decay") {
      if (val == "none") {
        cfg.lr_decay = LrDecay::None;
      } else if (val == "cosine") {
        cfg.lr_decay = LrDecay::Cosine;
      } else {
        throw ConfigError("config: lr_decay must be none or cosine");
      }
    } else if (key == "eps") {
      cfg.eps = parse_double(key, val);
      if (cfg.eps <= 0) throw ConfigError("config: eps must be positive");
    } else if (key == "s_delta") {
      cfg.s_delta = parse_double(key, val);
      if (cfg.s_delta <= 0) throw ConfigError("config: s_delta must be positive");
    } else if (key == "s_act") {
      cfg.s_act = parse_double(key, val);
      if (cfg.s_act <= 0) throw ConfigError("config: s_act must be positive");
    } else if (key == "kfold") {
      cfg.kfold = parse_count(key, val);
      if (cfg.kfold == 1) throw ConfigError("config: kfold must be 0 or >= 2");
    } else if (key == "n_samples") {
      cfg.n_samples = parse_count(key, val);
    } else if (key == "noise_sigma") {
      cfg.noise_sigma = parse_double(key, val);
    } else if (key == "range_extension") {
      cfg.range_extension = parse_double(key, val);
    } else if (key == "deu_init") {
      if (val == "random") {
        cfg.deu_init = DeuInit::Random;
      } else if (val == "requ-relu") {
        cfg.deu_init = DeuInit::RequRelu;
      } else if (val == "relu") {
        cfg.deu_init = DeuInit::Relu;
      } else {
        throw ConfigError("config: deu_init must be random, requ-relu or relu");
      }
    } else if (key == "data_dir") {
      cfg.data_dir = val;
    } else if (key == "output_dir") {
      cfg.output_dir = val;
    } else if (!key.empty()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (cfg.data_dir.empty()) {
    if (const char* env = std::getenv("DEU_DATA_DIR")) cfg.data_dir = env;
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "task = " << task_name(cfg.task) << "\n";
  out << "hidden = ";
  for (std::size_t i = 0; i < cfg.hidden.size(); ++i) {
    out << (i ? "," : "") << cfg.hidden[i];
  }
  out << "\n";
  out << "activation = " << activation_name(cfg.activation) << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "lr_weights = " << cfg.lr_weights << "\n";
  out << "lr_coeffs = " << cfg.lr_coeffs << "\n";
  out << "coef_update_every = "
      << (cfg.coef_update_every == CoefUpdateEvery::Batch ? "batch" : "epoch")
      << "\n";
  out << "lr_decay = " << (cfg.lr_decay == LrDecay::None ? "none" : "cosine")
      << "\n";
  out << "eps = " << cfg.eps << "\n";
  out << "s_delta = " << cfg.s_delta << "\n";
  out << "s_act = " << cfg.s_act << "\n";
  out << "kfold = " << cfg.kfold << "\n";
  out << "n_samples = " << cfg.n_samples << "\n";
  out << "noise_sigma = " << cfg.noise_sigma << "\n";
  out << "range_extension = " << cfg.range_extension << "\n";
  out << "deu_init = "
      << (cfg.deu_init == DeuInit::Random
              ? "random"
              : cfg.deu_init == DeuInit::RequRelu ? "requ-relu" : "relu")
      << "\n";
  if (!cfg.data_dir.empty()) out << "data_dir = " << cfg.data_dir << "\n";
  out << "output_dir = " << cfg.output_dir << "\n";
  return out.str();
}

SplitDataset build_dataset(const RunConfig& cfg) {
  try {
    switch (cfg.task) {
      case Task::Sine:
        return split_train_test(
            gen_sine(cfg.n_samples, cfg.seed, cfg.range_extension),
            cfg.seed + 17, 0.8, true);
      case Task::Complex:
        return split_train_test(gen_complex_periodic(cfg.n_samples, cfg.seed),
                                cfg.seed + 17, 0.8, true);
      case Task::Circles:
        return split_train_test(
            gen_circles(cfg.n_samples, cfg.noise_sigma, cfg.seed),
            cfg.seed + 17);
      case Task::Tabular: {
        if (cfg.data_dir.empty()) {
          throw DataError("tabular task needs data_dir (or DEU_DATA_DIR)");
        }
        DelimitedSchema schema;
        return split_train_test(load_delimited(cfg.data_dir, schema),
                                cfg.seed + 17);
      }
      case Task::Mnist: {
        if (cfg.data_dir.empty()) {
          throw DataError("mnist task needs data_dir (or DEU_DATA_DIR)");
        }
        SplitDataset split;
        split.train = load_idx(cfg.data_dir + "/train-images-idx3-ubyte",
                               cfg.data_dir + "/train-labels-idx1-ubyte");
        split.test = load_idx(cfg.data_dir + "/t10k-images-idx3-ubyte",
                              cfg.data_dir + "/t10k-labels-idx1-ubyte");
        return split;
      }
    }
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  throw DataError("unknown task");
}

Network build_network(const RunConfig& cfg, Eigen::Index input_dim,
                      Eigen::Index output_dim) {
  std::vector<Eigen::Index> sizes;
  sizes.push_back(input_dim);
  for (Eigen::Index h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(output_dim);
  Network net = make_mlp(sizes, cfg.activation, Activation::Identity, cfg.seed,
                         cfg.stability());

  for (DenseLayer& layer : net.layers) {
    if (layer.act == Activation::Deu) layer.act_clip = 1e3;
  }

  if (cfg.activation == Activation::Deu && cfg.deu_init != DeuInit::Random) {
    for (DenseLayer& layer : net.layers) {
      if (layer.act != Activation::Deu) continue;
      for (std::size_t n = 0; n < layer.deu->params.size(); ++n) {
        if (cfg.deu_init == DeuInit::Relu) {
          layer.deu->params[n] = {0.0, 1.0, 0.0, 0.0, 0.0};
        } else {
          // Alternate ReQU / ReLU starts across the layer.
          layer.deu->params[n] = n % 2 == 0 ? DeuParams{1.0, 0.0, 0.0, 0.0, 0.0}
                                            : DeuParams{0.0, 1.0, 0.0, 0.0, 0.0};
        }
      }
    }
  }
  return net;
}

std::array<int, kNumRegimes> regime_census(const Network& net) {
  std::array<int, kNumRegimes> census{};
  for (const DenseLayer& layer : net.layers) {
    if (layer.act != Activation::Deu) continue;
    for (const DeuParams& p : layer.deu->params) {
      census[static_cast<std::size_t>(classify_regime(p, layer.deu->cfg))] += 1;
    }
  }
  return census;
}

double classification_accuracy(const Network& net, const Dataset& data) {
  auto [logits, caches] = network_forward(net, data.inputs);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index argmax = 0;
    logits.row(i).maxCoeff(&argmax);
    if (argmax == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

double dataset_loss(const Network& net, const Dataset& data) {
  auto [out, caches] = network_forward(net, data.inputs);
  if (data.is_classification()) {
    return softmax_ce_loss(out, data.labels).first;
  }
  return mse_loss(out, data.targets).first;
}

TrainResult train_network(Network net, const SplitDataset& data,
                          const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool classify = data.train.is_classification();
  const Eigen::Index n = data.train.size();
  const Eigen::Index batch_size =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(cfg.batch_size), n);

  AdamConfig adam_cfg;
  adam_cfg.lr_weights = cfg.lr_weights;
  adam_cfg.lr_coeffs = cfg.lr_coeffs;
  AdamState adam = make_adam(net, adam_cfg);

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  RunMetrics metrics;
  metrics.epochs.reserve(cfg.epochs);

  const bool per_epoch_coeffs = cfg.coef_update_every == CoefUpdateEvery::Epoch;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.lr_decay == LrDecay::Cosine) {
      const double f = 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(epoch) /
                                             static_cast<double>(cfg.epochs)));
      adam.cfg.lr_weights = cfg.lr_weights * f;
      adam.cfg.lr_coeffs = cfg.lr_coeffs * f;
    }
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    // Per-epoch coefficient schedule accumulates DEU gradients here.
    std::vector<std::vector<ParamGrad>> coeff_accum(net.layers.size());
    if (per_epoch_coeffs) {
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        if (net.layers[l].act == Activation::Deu) {
          coeff_accum[l].assign(
              static_cast<std::size_t>(net.layers[l].out_dim()),
              ParamGrad{0, 0, 0, 0, 0});
        }
      }
    }

    double loss_sum = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index start = 0; start < n; start += batch_size) {
      const Eigen::Index count = std::min(batch_size, n - start);
      Eigen::MatrixXd xb(count, data.train.inputs.cols());
      Eigen::MatrixXd yb;
      std::vector<int> lb;
      if (classify) {
        lb.resize(static_cast<std::size_t>(count));
      } else {
        yb.resize(count, data.train.targets.cols());
      }
      for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = data.train.inputs.row(src);
        if (classify) {
          lb[static_cast<std::size_t>(i)] =
              data.train.labels[static_cast<std::size_t>(src)];
        } else {
          yb.row(i) = data.train.targets.row(src);
        }
      }

      auto [out, caches] = network_forward(net, xb);
      double loss = 0.0;
      Eigen::MatrixXd grad;
      if (classify) {
        std::tie(loss, grad) = softmax_ce_loss(out, lb);
      } else {
        std::tie(loss, grad) = mse_loss(out, yb);
      }
      NetworkGrads grads = network_backward(net, caches, grad);

      if (per_epoch_coeffs) {
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
          if (net.layers[l].act != Activation::Deu) continue;
          for (std::size_t nn = 0; nn < coeff_accum[l].size(); ++nn) {
            for (std::size_t k = 0; k < 5; ++k) {
              coeff_accum[l][nn][k] += grads.layers[l].dtheta[nn][k];
            }
          }
        }
        adam_step(adam, net, grads, /*update_weights=*/true,
                  /*update_coeffs=*/false);
      } else {
        adam_step(adam, net, grads);
      }
      loss_sum += loss * static_cast<double>(count);
      seen += count;
    }

    if (per_epoch_coeffs) {
      NetworkGrads coeff_grads;
      coeff_grads.layers.resize(net.layers.size());
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const DenseLayer& layer = net.layers[l];
        coeff_grads.layers[l].dW =
            Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols());
        coeff_grads.layers[l].db = Eigen::VectorXd::Zero(layer.bias.size());
        coeff_grads.layers[l].dtheta = coeff_accum[l];
      }
      adam_step(adam, net, coeff_grads, /*update_weights=*/false,
                /*update_coeffs=*/true);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    const Dataset& eval_set = data.test.size() > 0 ? data.test : data.train;
    rec.eval_loss = dataset_loss(net, eval_set);
    rec.accuracy = classify ? classification_accuracy(net, eval_set) : -1.0;
    rec.census = regime_census(net);
    metrics.epochs.push_back(rec);
  }

  const auto t1 = std::chrono::steady_clock::now();
  metrics.wall_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return {std::move(net), std::move(metrics)};
}

void write_metrics(const RunMetrics& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open metrics file: " + path);
  for (const EpochRecord& rec : metrics.epochs) {
    json j;
    j["epoch"] = rec.epoch;
    j["train_loss"] = rec.train_loss;
    j["eval_loss"] = rec.eval_loss;
    if (rec.accuracy >= 0.0) j["accuracy"] = rec.accuracy;
    json census = json::object();
    for (int r = 0; r < kNumRegimes; ++r) {
      if (rec.census[static_cast<std::size_t>(r)] > 0) {
        census[regime_name(static_cast<SolutionRegime>(r))] =
            rec.census[static_cast<std::size_t>(r)];
      }
    }
    if (!census.empty()) j["census"] = census;
    out << j.dump() << "\n";
  }
}

int cmd_train(const std::string& config_path) {
  RunConfig cfg;
  try {
    cfg = parse_config_file(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  SplitDataset data;
  try {
    data = build_dataset(cfg);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  }

  const Eigen::Index out_dim =
      data.train.is_classification()
          ? 1 + *std::max_element(data.train.labels.begin(),
                                  data.train.labels.end())
          : data.train.targets.cols();
  Network net = build_network(cfg, data.train.inputs.cols(), out_dim);
  TrainResult result = train_network(std::move(net), data, cfg);

  std::filesystem::create_directories(cfg.output_dir);
  write_metrics(result.metrics, cfg.output_dir + "/metrics.jsonl");
  save_checkpoint(result.net, cfg.output_dir + "/checkpoint.txt");

  const EpochRecord& last = result.metrics.final_record();
  std::cout << "final train_loss=" << last.train_loss
            << " train_mse=" << dataset_loss(result.net, data.train)
            << " eval_loss=" << last.eval_loss;
  if (last.accuracy >= 0.0) std::cout << " accuracy=" << last.accuracy;
  std::cout << " wall_ms=" << result.metrics.wall_ms << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t trials) {
  if (trials == 0) {
    std::cerr << "gradcheck: trials must be >= 1\n";
    return 2;
  }
  std::mt19937_64 rng(seed);
  const StabilityConfig cfg;
  std::uniform_real_distribution<double> tdist(0.15, 5.0);
  std::uniform_int_distribution<int> sign(0, 1);

  struct Worst {
    double residual = 0.0;
    double grad = 0.0;
    int count = 0;
  };
  std::array<Worst, kNumRegimes> worst{};
  bool ok = true;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto regime = static_cast<SolutionRegime>(trial % kNumRegimes);
    const DeuParams p = sample_regime_params(regime, rng, cfg);
    const double rate = exponent_rate(p, cfg);
    const double t_max = rate > 0.0 ? std::min(5.0, 2.5 / rate) : 5.0;
    double t = std::min(tdist(rng), t_max);
    if (sign(rng)) t = -t;

    auto& w = worst[static_cast<std::size_t>(regime)];
    w.count += 1;

    const double res = std::abs(ode_residual(p, t, 1e-3, cfg));
    w.residual = std::max(w.residual, res);
    if (res > 1e-4) ok = false;

    // Finite-difference check of the analytic partials that are defined in
    // this regime (zero-clamped coefficients get theirs from gravitation).
    const ActivationEval e = eval(p, t, cfg);
    const double h = 1e-5;
    auto check = [&](double analytic, auto perturb) {
      DeuParams lo = p, hi = p;
      perturb(lo, -h);
      perturb(hi, +h);
      const double fd = (eval(hi, t, cfg).y - eval(lo, t, cfg).y) / (2.0 * h);
      const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-6});
      const double rel = std::abs(analytic - fd) / scale;
      w.grad = std::max(w.grad, rel);
      if (rel > 1e-3) ok = false;
    };
    const bool critical = regime == SolutionRegime::GeneralCritical;
    if (p.a != 0.0 && !critical) check(e.dy_da, [](DeuParams& q, double d) { q.a += d; });
    if (p.b != 0.0 && !critical) check(e.dy_db, [](DeuParams& q, double d) { q.b += d; });
    if (p.c != 0.0 && !critical) check(e.dy_dc, [](DeuParams& q, double d) { q.c += d; });
    check(e.dy_dc1, [](DeuParams& q, double d) { q.c1 += d; });
    check(e.dy_dc2, [](DeuParams& q, double d) { q.c2 += d; });
    {
      const double fd =
          (eval(p, t + h, cfg).y - eval(p, t - h, cfg).y) / (2.0 * h);
      const double scale = std::max({std::abs(e.dy_dt), std::abs(fd), 1e-6});
      const double rel = std::abs(e.dy_dt - fd) / scale;
      w.grad = std::max(w.grad, rel);
      if (rel > 1e-3) ok = false;
    }
  }

  for (int r = 0; r < kNumRegimes; ++r) {
    const auto& w = worst[static_cast<std::size_t>(r)];
    std::printf("%-20s trials=%4d worst_residual=%.3e worst_grad_rel=%.3e\n",
                regime_name(static_cast<SolutionRegime>(r)), w.count,
                w.residual, w.grad);
  }
  std::printf("gradcheck: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 4;
}

int cmd_sweep(const DeuParams& p, double lo, double hi, std::size_t n,
              const std::string& out_path, const std::string& vary,
              const std::vector<double>& vary_values) {
  if (!(lo < hi) || n < 2) {
    std::cerr << "sweep: bad range\n";
    return 2;
  }
  const StabilityConfig cfg;
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "sweep: cannot open " << out_path << "\n";
    return 3;
  }
  out.precision(17);

  std::vector<DeuParams> family;
  if (vary.empty()) {
    family.push_back(p);
  } else {
    for (double v : vary_values) {
      DeuParams q = p;
      if (vary == "a") {
        q.a = v;
      } else if (vary == "b") {
        q.b = v;
      } else if (vary == "c") {
        q.c = v;
      } else {
        std::cerr << "sweep: --vary must be a, b or c\n";
        return 2;
      }
      family.push_back(q);
    }
  }

  out << "# t";
  for (const DeuParams& q : family) {
    out << " y(a=" << q.a << ",b=" << q.b << ",c=" << q.c << ",c1=" << q.c1
        << ",c2=" << q.c2 << ")";
  }
  out << "\n";

  std::vector<std::vector<std::pair<double, double>>> curves;
  for (const DeuParams& q : family) {
    curves.push_back(sweep_activation(clamp_params(q, cfg), lo, hi, n, cfg));
  }
  for (std::size_t i = 0; i < n; ++i) {
    out << curves[0][i].first;
    for (const auto& curve : curves) out << " " << curve[i].second;
    out << "\n";
  }
  return 0;
}

namespace {

struct RunRow {
  std::string label;
  double mse = -1.0;
  double accuracy = -1.0;
};

RunRow run_row(const std::string& label, RunConfig cfg) {
  SplitDataset data = build_dataset(cfg);
  const Eigen::Index out_dim =
      data.train.is_classification()
          ? 1 + *std::max_element(data.train.labels.begin(),
                                  data.train.labels.end())
          : data.train.targets.cols();
  Network net = build_network(cfg, data.train.inputs.cols(), out_dim);
  TrainResult res = train_network(std::move(net), data, cfg);
  const EpochRecord& last = res.metrics.final_record();
  RunRow row;
  row.label = label;
  row.mse = data.train.is_classification() ? -1.0 : last.train_loss;
  row.accuracy = last.accuracy;
  std::printf("  %-24s train_loss=%.6g eval_loss=%.6g", label.c_str(),
              last.train_loss, last.eval_loss);
  if (last.accuracy >= 0.0) std::printf(" accuracy=%.4f", last.accuracy);
  std::printf(" (%.1fs)\n", res.metrics.wall_ms / 1000.0);
  return row;
}

}  // namespace

int cmd_reproduce(const std::string& experiment, const std::string& data_dir,
                  bool extended) {
  try {
    if (experiment == "sine") {
      std::printf("sine regression, y = (sin 2t + 1)/2 on [0, 2pi]\n");
      RunConfig deu2;
      deu2.task = Task::Sine;
      deu2.hidden = {2};
      deu2.activation = Activation::Deu;
      deu2.deu_init = DeuInit::RequRelu;
      deu2.epochs = 5000;
      deu2.n_samples = 200;
      deu2.lr_weights = 1e-2;
      deu2.lr_coeffs = 0.2;
      run_row("DEU 1x2", deu2);

      RunConfig relu20 = deu2;
      relu20.hidden = {20};
      relu20.activation = Activation::ReLU;
      relu20.deu_init = DeuInit::Random;
      relu20.epochs = 2000;
      run_row("ReLU 1x20", relu20);

      RunConfig sig100 = relu20;
      sig100.hidden = {100};
      sig100.activation = Activation::Sigmoid;
      run_row("Sigmoid 1x100", sig100);
      return 0;
    }
    if (experiment == "complex") {
      std::printf("complex periodic regression on [0, 4pi]\n");
      RunConfig deu;
      deu.task = Task::Complex;
      deu.hidden = {10, 5};
      deu.activation = Activation::Deu;
      deu.epochs = 5000;
      deu.n_samples = 400;
      deu.lr_weights = 1e-2;
      deu.lr_coeffs = 0.1;
      deu.lr_decay = LrDecay::Cosine;
      run_row("DEU 10x5", deu);
      RunConfig relu = deu;
      relu.activation = Activation::ReLU;
      run_row("ReLU 10x5", relu);
      return 0;
    }
    if (experiment == "circles") {
      std::printf("noisy circles classification (radii 1 and 2, sigma 0.1)\n");
      for (Eigen::Index width : {2, 4}) {
        for (Activation act : {Activation::Deu, Activation::ReLU}) {
          RunConfig cfg;
          cfg.task = Task::Circles;
          cfg.hidden = {width};
          cfg.activation = act;
          cfg.epochs = 1000;
          cfg.n_samples = 1000;
          cfg.lr_weights = 1e-2;
          cfg.lr_coeffs = 0.1;
          run_row(std::string(activation_name(act)) + " 1x" +
                      std::to_string(width),
                  cfg);
        }
      }
      return 0;
    }
    if (experiment == "diabetes") {
      std::printf("diabetes regression (expects diabetes.txt in data dir)\n");
      for (Eigen::Index width : {1, 2, 4, 8}) {
        for (Activation act : {Activation::Deu, Activation::ReLU}) {
          RunConfig cfg;
          cfg.task = Task::Tabular;
          cfg.data_dir = data_dir + "/diabetes.txt";
          cfg.hidden = {width};
          cfg.activation = act;
          cfg.epochs = 300;
          run_row(std::string(activation_name(act)) + " 1x" +
                      std::to_string(width),
                  cfg);
        }
      }
      return 0;
    }
    if (experiment == "mnist-width-sweep") {
      std::printf("MNIST accuracy by hidden width (single hidden layer)\n");
      const std::vector<Eigen::Index> widths =
          extended ? std::vector<Eigen::Index>{10, 20, 40, 60, 100}
                   : std::vector<Eigen::Index>{10, 100};
      for (Activation act : {Activation::ReLU, Activation::SELU,
                             Activation::LeakyReLU, Activation::Deu}) {
        for (Eigen::Index width : widths) {
          RunConfig cfg;
          cfg.task = Task::Mnist;
          cfg.data_dir = data_dir;
          cfg.hidden = {width};
          cfg.activation = act;
          cfg.epochs = 10;
          cfg.batch_size = 128;
          run_row(std::string(activation_name(act)) + " " +
                      std::to_string(width) + "n",
                  cfg);
        }
      }
      return 0;
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  }
  std::cerr << "unknown experiment '" << experiment
            << "' (expected sine, complex, circles, diabetes or "
               "mnist-width-sweep)\n";
  return 2;
}

}  // namespace deu
