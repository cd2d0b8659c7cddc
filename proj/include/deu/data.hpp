#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace deu {

// Per-feature z-score statistics, computed on the train split only.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& x) const;
};

struct Dataset {
  Eigen::MatrixXd inputs;   // n x d
  Eigen::MatrixXd targets;  // n x k (regression)
  std::vector<int> labels;  // classification; empty for regression
  Normalization norm;       // identity unless the loader normalized

  Eigen::Index size() const { return inputs.rows(); }
  bool is_classification() const { return !labels.empty(); }
};

struct SplitDataset {
  Dataset train;
  Dataset test;
};

// t ~ Uniform[0, 2pi] (optionally extended), y = (sin 2t + 1)/2.
Dataset gen_sine(std::size_t n, std::uint64_t seed, double range_extension = 0.0);

// t ~ Uniform[0, 4pi], y = (sin t - cos(2t)^2)/2 + 4(1 + arccos(sin(t/2)))/3.
Dataset gen_complex_periodic(std::size_t n, std::uint64_t seed);

// n/2 points per class on circles of radius 1 and 2, radial Gaussian noise.
Dataset gen_circles(std::size_t n, double noise_sigma, std::uint64_t seed);

struct DelimitedSchema {
  bool has_header = false;
  bool normalize_features = true;
  bool target_is_label = false;  // last column as integer class label
};

// Comma/whitespace delimited numeric table; last column is the target.
Dataset load_delimited(const std::string& path, const DelimitedSchema& schema);

// MNIST-style IDX pair: images scaled to [0,1], labels 0-9.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Seeded shuffle, then an 80/20 (by default) train/test split. Feature
// normalization stats come from the train rows and are reapplied to test.
SplitDataset split_train_test(const Dataset& data, std::uint64_t seed,
                              double train_fraction = 0.8,
                              bool normalize = false);

}  // namespace deu
