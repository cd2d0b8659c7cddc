#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "deu/data.hpp"
#include "deu/nn.hpp"

namespace deu {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Task { Sine, Complex, Circles, Tabular, Mnist };
enum class CoefUpdateEvery { Batch, Epoch };
enum class DeuInit { Random, RequRelu, Relu };
enum class LrDecay { None, Cosine };

struct RunConfig {
  Task task = Task::Sine;
  std::vector<Eigen::Index> hidden = {2};
  Activation activation = Activation::Deu;
  std::size_t epochs = 1000;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double lr_weights = 1e-3;
  double lr_coeffs = 1e-2;
  CoefUpdateEvery coef_update_every = CoefUpdateEvery::Batch;
  LrDecay lr_decay = LrDecay::None;
  double eps = 0.01;
  double s_delta = 100.0;
  double s_act = 1.0;
  std::size_t kfold = 0;  // 0 = plain train/test split
  std::size_t n_samples = 200;
  double noise_sigma = 0.1;
  double range_extension = 0.0;
  DeuInit deu_init = DeuInit::Random;
  std::string data_dir;
  std::string output_dir = ".";

  StabilityConfig stability() const { return {eps, s_delta, s_act, 50.0}; }
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string config_to_text(const RunConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double eval_loss = 0.0;
  double accuracy = -1.0;  // < 0 for regression
  std::array<int, kNumRegimes> census{};
};

struct RunMetrics {
  std::vector<EpochRecord> epochs;
  double wall_ms = 0.0;  // reported on the console, never in metrics files

  const EpochRecord& final_record() const { return epochs.back(); }
};

struct TrainResult {
  Network net;
  RunMetrics metrics;
};

// Builds the task's dataset (synthetic tasks are seeded from cfg.seed).
SplitDataset build_dataset(const RunConfig& cfg);

// Builds the configured MLP for a dataset shape.
Network build_network(const RunConfig& cfg, Eigen::Index input_dim,
                      Eigen::Index output_dim);

// Minibatch Adam training. Classification is detected from the dataset.
TrainResult train_network(Network net, const SplitDataset& data,
                          const RunConfig& cfg);

std::array<int, kNumRegimes> regime_census(const Network& net);

// One self-describing record per epoch, no timing fields: byte-identical
// across reruns of the same (config, seed).
void write_metrics(const RunMetrics& metrics, const std::string& path);

double classification_accuracy(const Network& net, const Dataset& data);
double dataset_loss(const Network& net, const Dataset& data);

// CLI entry points. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 verification failure.
int cmd_train(const std::string& config_path);
int cmd_gradcheck(std::uint64_t seed, std::size_t trials);
int cmd_sweep(const DeuParams& p, double lo, double hi, std::size_t n,
              const std::string& out_path, const std::string& vary,
              const std::vector<double>& vary_values);
int cmd_reproduce(const std::string& experiment, const std::string& data_dir,
                  bool extended);

}  // namespace deu
