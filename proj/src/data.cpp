#include "deu/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace deu {

Eigen::MatrixXd Normalization::apply(const Eigen::MatrixXd& x) const {
  if (mean.size() == 0) return x;
  return (x.rowwise() - mean.transpose()).array().rowwise() /
         std.transpose().array();
}

Eigen::MatrixXd Normalization::invert(const Eigen::MatrixXd& x) const {
  if (mean.size() == 0) return x;
  return (x.array().rowwise() * std.transpose().array()).matrix().rowwise() +
         mean.transpose();
}

Dataset gen_sine(std::size_t n, std::uint64_t seed, double range_extension) {
  if (n < 2) throw std::invalid_argument("gen_sine: n must be >= 2");
  std::mt19937_64 rng(seed);
  const double hi = 2.0 * std::numbers::pi * (1.0 + range_extension);
  std::uniform_real_distribution<double> dist(0.0, hi);
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(n), 1);
  d.targets.resize(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dist(rng);
    d.inputs(static_cast<Eigen::Index>(i), 0) = t;
    d.targets(static_cast<Eigen::Index>(i), 0) = (std::sin(2.0 * t) + 1.0) / 2.0;
  }
  return d;
}

Dataset gen_complex_periodic(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_complex_periodic: n must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 4.0 * std::numbers::pi);
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(n), 1);
  d.targets.resize(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dist(rng);
    const double c2 = std::cos(2.0 * t);
    const double y = (std::sin(t) - c2 * c2) / 2.0 +
                     4.0 * (1.0 + std::acos(std::sin(t / 2.0))) / 3.0;
    d.inputs(static_cast<Eigen::Index>(i), 0) = t;
    d.targets(static_cast<Eigen::Index>(i), 0) = y;
  }
  return d;
}

Dataset gen_circles(std::size_t n, double noise_sigma, std::uint64_t seed) {
  if (n % 2 != 0) throw std::invalid_argument("gen_circles: n must be even");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(n), 2);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = i < n / 2 ? 0 : 1;
    const double radius = (cls == 0 ? 1.0 : 2.0) +
                          (noise_sigma > 0.0 ? noise(rng) : 0.0);
    const double phi = angle(rng);
    d.inputs(static_cast<Eigen::Index>(i), 0) = radius * std::cos(phi);
    d.inputs(static_cast<Eigen::Index>(i), 1) = radius * std::sin(phi);
    d.labels[i] = cls;
  }
  return d;
}

Dataset load_delimited(const std::string& path, const DelimitedSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && schema.has_header) continue;
    // commas become whitespace, then stream extraction
    std::replace(line.begin(), line.end(), ',', ' ');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::vector<double> row;
    std::string cell;
    while (ss >> cell) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || !std::isfinite(v)) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": non-numeric cell '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() < 2) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed row (need >= 2 columns)");
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed row (expected " +
                               std::to_string(width) + " columns)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty data file: " + path);

  Dataset d;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index features = static_cast<Eigen::Index>(width - 1);
  d.inputs.resize(n, features);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < features; ++j) {
      d.inputs(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  if (schema.target_is_label) {
    d.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      d.labels[i] = static_cast<int>(std::lround(rows[i][width - 1]));
    }
  } else {
    d.targets.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      d.targets(i, 0) = rows[static_cast<std::size_t>(i)][width - 1];
    }
  }

  if (schema.normalize_features) {
    d.norm.mean = d.inputs.colwise().mean();
    d.norm.std.resize(features);
    for (Eigen::Index j = 0; j < features; ++j) {
      const double var =
          (d.inputs.col(j).array() - d.norm.mean(j)).square().mean();
      d.norm.std(j) = std::sqrt(var) > 1e-12 ? std::sqrt(var) : 1.0;
    }
    d.inputs = d.norm.apply(d.inputs);
  }
  return d;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw std::runtime_error("truncated IDX file: " + path);
  return (static_cast<std::uint32_t>(buf[0]) << 24) |
         (static_cast<std::uint32_t>(buf[1]) << 16) |
         (static_cast<std::uint32_t>(buf[2]) << 8) |
         static_cast<std::uint32_t>(buf[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open IDX file: " + images_path);
  if (read_be32(img, images_path) != 0x00000803u) {
    throw std::runtime_error("bad IDX image magic: " + images_path);
  }
  const std::uint32_t n = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot open IDX file: " + labels_path);
  if (read_be32(lab, labels_path) != 0x00000801u) {
    throw std::runtime_error("bad IDX label magic: " + labels_path);
  }
  const std::uint32_t n_labels = read_be32(lab, labels_path);
  if (n_labels != n) {
    throw std::runtime_error("IDX image/label count mismatch: " +
                             std::to_string(n) + " vs " +
                             std::to_string(n_labels));
  }

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pixels));
  d.labels.resize(n);
  std::vector<unsigned char> buf(pixels);
  for (std::uint32_t i = 0; i < n; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()),
             static_cast<std::streamsize>(pixels));
    if (!img) throw std::runtime_error("truncated IDX file: " + images_path);
    for (std::size_t j = 0; j < pixels; ++j) {
      d.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(buf[j]) / 255.0;
    }
    char lb = 0;
    lab.read(&lb, 1);
    if (!lab) throw std::runtime_error("truncated IDX file: " + labels_path);
    d.labels[i] = static_cast<int>(static_cast<unsigned char>(lb));
  }
  return d;
}

SplitDataset split_train_test(const Dataset& data, std::uint64_t seed,
                              double train_fraction, bool normalize) {
  const Eigen::Index n = data.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const Eigen::Index n_train =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
                                    std::llround(train_fraction * n)));

  auto take = [&](Eigen::Index begin, Eigen::Index count) {
    Dataset out;
    out.inputs.resize(count, data.inputs.cols());
    if (data.targets.size() > 0) out.targets.resize(count, data.targets.cols());
    if (data.is_classification()) out.labels.resize(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::Index src = order[static_cast<std::size_t>(begin + i)];
      out.inputs.row(i) = data.inputs.row(src);
      if (data.targets.size() > 0) out.targets.row(i) = data.targets.row(src);
      if (data.is_classification()) {
        out.labels[static_cast<std::size_t>(i)] =
            data.labels[static_cast<std::size_t>(src)];
      }
    }
    return out;
  };

  SplitDataset split;
  split.train = take(0, n_train);
  split.test = take(n_train, n - n_train);
  if (normalize) {
    const Eigen::Index features = split.train.inputs.cols();
    split.train.norm.mean = split.train.inputs.colwise().mean();
    split.train.norm.std.resize(features);
    for (Eigen::Index j = 0; j < features; ++j) {
      const double var = (split.train.inputs.col(j).array() -
                          split.train.norm.mean(j))
                             .square()
                             .mean();
      split.train.norm.std(j) = std::sqrt(var) > 1e-12 ? std::sqrt(var) : 1.0;
    }
    split.test.norm = split.train.norm;
    split.train.inputs = split.train.norm.apply(split.train.inputs);
    split.test.inputs = split.test.norm.apply(split.test.inputs);
  }
  return split;
}

}  // namespace deu
