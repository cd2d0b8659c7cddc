#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "deu/data.hpp"

using namespace deu;

namespace {
constexpr double kPi = std::numbers::pi;

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

double complex_formula(double t) {
  const double c2 = std::cos(2.0 * t);
  return (std::sin(t) - c2 * c2) / 2.0 +
         4.0 * (1.0 + std::acos(std::sin(t / 2.0))) / 3.0;
}
}  // namespace

TEST_CASE("gen_sine targets match the defining formula") {
  const Dataset d = gen_sine(500, 7);
  REQUIRE(d.size() == 500);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double t = d.inputs(i, 0);
    CHECK(t >= 0.0);
    CHECK(t <= 2.0 * kPi);
    CHECK(d.targets(i, 0) ==
          doctest::Approx((std::sin(2.0 * t) + 1.0) / 2.0).epsilon(1e-12));
  }
  // formula spot values
  CHECK((std::sin(2.0 * 0.0) + 1.0) / 2.0 == doctest::Approx(0.5));
  CHECK((std::sin(2.0 * (kPi / 4.0)) + 1.0) / 2.0 == doctest::Approx(1.0));
  CHECK((std::sin(2.0 * (3.0 * kPi / 4.0)) + 1.0) / 2.0 ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(gen_sine(1, 7), std::invalid_argument);

  const Dataset ext = gen_sine(500, 7, 0.25);
  CHECK(ext.inputs.maxCoeff() > 2.0 * kPi);
  CHECK(ext.inputs.maxCoeff() <= 2.5 * kPi);
}

TEST_CASE("gen_sine determinism") {
  const Dataset a = gen_sine(50, 3), b = gen_sine(50, 3), c = gen_sine(50, 4);
  CHECK((a.inputs - b.inputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.inputs - c.inputs).cwiseAbs().maxCoeff() != 0.0);
}

TEST_CASE("gen_complex_periodic matches the defining formula") {
  CHECK(complex_formula(0.0) == doctest::Approx(2.92773).epsilon(1e-5));
  CHECK(complex_formula(kPi) == doctest::Approx(0.833333).epsilon(1e-5));
  const Dataset d = gen_complex_periodic(300, 11);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double t = d.inputs(i, 0);
    CHECK(t >= 0.0);
    CHECK(t <= 4.0 * kPi);
    CHECK(d.targets(i, 0) == doctest::Approx(complex_formula(t)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gen_complex_periodic(0, 1), std::invalid_argument);
}

TEST_CASE("gen_circles class structure") {
  CHECK_THROWS_AS(gen_circles(7, 0.1, 1), std::invalid_argument);

  const Dataset clean = gen_circles(200, 0.0, 5);
  int zero = 0;
  for (Eigen::Index i = 0; i < clean.size(); ++i) {
    const double r = clean.inputs.row(i).norm();
    if (clean.labels[static_cast<std::size_t>(i)] == 0) {
      ++zero;
      CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    } else {
      CHECK(r == doctest::Approx(2.0).epsilon(1e-12));
    }
  }
  CHECK(zero == 100);

  const Dataset noisy = gen_circles(2000, 0.1, 6);
  int separable = 0;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) {
    const double r = noisy.inputs.row(i).norm();
    const int predicted = r < 1.5 ? 0 : 1;
    if (predicted == noisy.labels[static_cast<std::size_t>(i)]) ++separable;
  }
  CHECK(static_cast<double>(separable) / 2000.0 >= 0.99);
}

TEST_CASE("load_delimited exact matrix") {
  const std::string path = temp_file("deu_data_2row.csv");
  std::ofstream(path) << "1.5, 2.5, 10\n-0.5 3.25 20\n";
  DelimitedSchema schema;
  schema.normalize_features = false;
  const Dataset d = load_delimited(path, schema);
  REQUIRE(d.size() == 2);
  CHECK(d.inputs(0, 0) == 1.5);
  CHECK(d.inputs(0, 1) == 2.5);
  CHECK(d.inputs(1, 0) == -0.5);
  CHECK(d.inputs(1, 1) == 3.25);
  CHECK(d.targets(0, 0) == 10.0);
  CHECK(d.targets(1, 0) == 20.0);
  std::filesystem::remove(path);
}

TEST_CASE("load_delimited header skip and errors") {
  const std::string path = temp_file("deu_data_hdr.csv");
  std::ofstream(path) << "x1,x2,y\n1,2,3\n";
  DelimitedSchema schema;
  schema.has_header = true;
  schema.normalize_features = false;
  const Dataset d = load_delimited(path, schema);
  CHECK(d.size() == 1);
  CHECK(d.targets(0, 0) == 3.0);
  std::filesystem::remove(path);

  const std::string bad = temp_file("deu_data_bad.csv");
  std::ofstream(bad) << "1,2,3\n4,oops,6\n";
  DelimitedSchema plain;
  try {
    load_delimited(bad, plain);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::filesystem::remove(bad);

  const std::string empty = temp_file("deu_data_empty.csv");
  std::ofstream(empty) << "";
  CHECK_THROWS_AS(load_delimited(empty, plain), std::runtime_error);
  std::filesystem::remove(empty);
  CHECK_THROWS_AS(load_delimited("/nonexistent/file.csv", plain),
                  std::runtime_error);
}

TEST_CASE("load_delimited z-score normalization round trip") {
  const std::string path = temp_file("deu_data_norm.csv");
  std::ofstream(path) << "1,10,0\n2,20,0\n3,30,1\n4,40,1\n";
  DelimitedSchema schema;
  const Dataset d = load_delimited(path, schema);
  CHECK(std::abs(d.inputs.col(0).mean()) < 1e-12);
  CHECK(std::abs(d.inputs.col(1).mean()) < 1e-12);
  const Eigen::MatrixXd raw = d.norm.invert(d.inputs);
  CHECK(raw(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(raw(3, 1) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK((d.norm.apply(raw) - d.inputs).cwiseAbs().maxCoeff() < 1e-12);
  std::filesystem::remove(path);
}

namespace {
void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char buf[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_idx_fixture(const std::string& img_path, const std::string& lab_path,
                       std::uint32_t n_images, std::uint32_t n_labels) {
  std::ofstream img(img_path, std::ios::binary);
  write_be32(img, 0x00000803u);
  write_be32(img, n_images);
  write_be32(img, 2);
  write_be32(img, 2);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    const unsigned char px[4] = {0, 51, 204, 255};
    img.write(reinterpret_cast<const char*>(px), 4);
  }
  std::ofstream lab(lab_path, std::ios::binary);
  write_be32(lab, 0x00000801u);
  write_be32(lab, n_labels);
  for (std::uint32_t i = 0; i < n_labels; ++i) {
    const char v = static_cast<char>(i % 10);
    lab.write(&v, 1);
  }
}
}  // namespace

TEST_CASE("load_idx fixture") {
  const std::string img = temp_file("deu_idx_img"), lab = temp_file("deu_idx_lab");
  write_idx_fixture(img, lab, 2, 2);
  const Dataset d = load_idx(img, lab);
  REQUIRE(d.size() == 2);
  REQUIRE(d.inputs.cols() == 4);
  CHECK(d.inputs(0, 0) == 0.0);
  CHECK(d.inputs(0, 1) == doctest::Approx(51.0 / 255.0).epsilon(1e-12));
  CHECK(d.inputs(1, 2) == doctest::Approx(204.0 / 255.0).epsilon(1e-12));
  CHECK(d.inputs(1, 3) == 1.0);
  CHECK(d.labels[0] == 0);
  CHECK(d.labels[1] == 1);

  write_idx_fixture(img, lab, 2, 3);
  CHECK_THROWS_AS(load_idx(img, lab), std::runtime_error);

  {
    std::ofstream bad(img, std::ios::binary);
    write_be32(bad, 0xdeadbeefu);
  }
  CHECK_THROWS_AS(load_idx(img, lab), std::runtime_error);
  std::filesystem::remove(img);
  std::filesystem::remove(lab);
}

TEST_CASE("split_train_test determinism and train-only normalization") {
  const Dataset d = gen_sine(100, 9);
  const SplitDataset a = split_train_test(d, 21, 0.8, true);
  const SplitDataset b = split_train_test(d, 21, 0.8, true);
  CHECK(a.train.size() == 80);
  CHECK(a.test.size() == 20);
  CHECK((a.train.inputs - b.train.inputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.test.inputs - b.test.inputs).cwiseAbs().maxCoeff() == 0.0);
  // stats come from the train rows: train is centered, test is merely close
  CHECK(std::abs(a.train.inputs.col(0).mean()) < 1e-12);
  CHECK((a.train.norm.mean - a.test.norm.mean).cwiseAbs().maxCoeff() == 0.0);
  // round trip
  const Eigen::MatrixXd raw = a.train.norm.invert(a.train.inputs);
  CHECK((a.train.norm.apply(raw) - a.train.inputs).cwiseAbs().maxCoeff() <
        1e-12);
}
