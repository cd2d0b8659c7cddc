#include <CLI11.hpp>

#include "deu/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"differential equation unit experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train = app.add_subcommand("train", "train a network from a config");
  train->add_option("--config", config_path, "key = value config file")
      ->required();

  std::size_t trials = 200;
  std::uint64_t seed = 1;
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "verify analytic gradients and ODE residuals");
  gradcheck->add_option("--trials", trials, "random trials");
  gradcheck->add_option("--seed", seed, "RNG seed");

  deu::DeuParams p;
  std::string range = "-5:5";
  std::size_t n = 201;
  std::string out_path = "sweep.tsv";
  std::string vary;
  std::vector<double> vary_values;
  auto* sweep = app.add_subcommand("sweep", "tabulate one activation curve");
  sweep->add_option("--a", p.a, "coefficient a");
  sweep->add_option("--b", p.b, "coefficient b");
  sweep->add_option("--c", p.c, "coefficient c");
  sweep->add_option("--c1", p.c1, "initial-condition coefficient c1");
  sweep->add_option("--c2", p.c2, "initial-condition coefficient c2");
  sweep->add_option("--range", range, "lo:hi evaluation interval");
  sweep->add_option("--n", n, "number of grid points");
  sweep->add_option("--out", out_path, "output table path");
  sweep->add_option("--vary", vary, "sweep a family over a, b or c");
  sweep->add_option("--values", vary_values, "values for --vary");

  std::string experiment;
  std::string data_dir;
  bool extended = false;
  auto* reproduce =
      app.add_subcommand("reproduce", "rerun a canned experiment");
  reproduce->add_option("experiment", experiment,
                        "sine | complex | circles | diabetes | "
                        "mnist-width-sweep")
      ->required();
  reproduce->add_option("--data-dir", data_dir, "directory with local data");
  reproduce->add_flag("--extended", extended, "full width sweep");

  CLI11_PARSE(app, argc, argv);

  if (data_dir.empty()) {
    if (const char* env = std::getenv("DEU_DATA_DIR")) data_dir = env;
  }

  if (train->parsed()) return deu::cmd_train(config_path);
  if (gradcheck->parsed()) return deu::cmd_gradcheck(seed, trials);
  if (sweep->parsed()) {
    const auto colon = range.find(':');
    if (colon == std::string::npos) {
      std::cerr << "sweep: --range must be lo:hi\n";
      return 2;
    }
    double lo = 0.0, hi = 0.0;
    try {
      lo = std::stod(range.substr(0, colon));
      hi = std::stod(range.substr(colon + 1));
    } catch (const std::exception&) {
      std::cerr << "sweep: --range must be lo:hi\n";
      return 2;
    }
    return deu::cmd_sweep(p, lo, hi, n, out_path, vary, vary_values);
  }
  if (reproduce->parsed()) {
    return deu::cmd_reproduce(experiment, data_dir, extended);
  }
  return 2;
}
