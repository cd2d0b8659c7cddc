#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "deu/ode_core.hpp"

namespace deu {

enum class RefPointMode { BatchMean, FixedZero };

// A layer's worth of DEU neurons. Parameters are kept clamped between
// updates; the trainer re-clamps after every optimizer step.
struct DeuLayerState {
  std::vector<DeuParams> params;
  StabilityConfig cfg;
  RefPointMode t_star_mode = RefPointMode::BatchMean;

  std::size_t width() const { return params.size(); }
};

// Hypothetical non-singular ODE used to pull gradients out of a singular
// subspace, with initial-condition coefficients matched at t*.
struct GravitationResult {
  double a_t = 0.0;
  double b_t = 0.0;
  double c_t = 0.0;
  double c1_t = 0.0;
  double c2_t = 0.0;
  bool was_singular = false;

  DeuParams params() const { return {a_t, b_t, c_t, c1_t, c2_t}; }
};

struct DeuForwardCache {
  Eigen::MatrixXd pre_activations;         // batch x width
  std::vector<ActivationEval> evals;       // row-major batch x width
  std::vector<SolutionRegime> regimes;     // per neuron
};

// Per-neuron gradient of the batch loss with respect to (a, b, c, c1, c2).
using ParamGrad = std::array<double, 5>;

// a, b, c ~ Uniform(eps, 1), c1 = c2 = 0; deterministic per seed.
std::vector<DeuParams> init_params(std::uint64_t seed, std::size_t width,
                                   const StabilityConfig& cfg = {});

// Masked per-regime evaluation of a whole batch (Algorithm-1 style):
// neurons are grouped by regime, each group's closed form is evaluated
// over its column block with per-neuron constants hoisted out of the
// batch loop.
std::pair<Eigen::MatrixXd, DeuForwardCache> forward_batch(
    const DeuLayerState& state, const Eigen::MatrixXd& pre_activations);

// Chain rule through the cached evaluations. Parameter gradients are summed
// over the batch. Coefficients sitting in a singular subspace draw their
// partials from the outward-gravitation hypothetical ODE instead.
std::pair<Eigen::MatrixXd, std::vector<ParamGrad>> backward_batch(
    const DeuLayerState& state, const DeuForwardCache& cache,
    const Eigen::MatrixXd& upstream_grad);

// Nearest non-singular coefficients plus c1/c2 chosen so the hypothetical
// solution matches the actual value and slope at t* (regularized 2x2
// least squares, lambda = 1e-9). Identity for non-singular parameters.
GravitationResult outward_gravitation(const DeuParams& p,
                                      const StabilityConfig& cfg,
                                      double t_star);

// Reference point t* for one neuron's pre-activation column.
double reference_point(const Eigen::VectorXd& column, RefPointMode mode);

// Uniform grid evaluation, for plot emission.
std::vector<std::pair<double, double>> sweep_activation(
    const DeuParams& p, double t_min, double t_max, std::size_t n,
    const StabilityConfig& cfg = {});

}  // namespace deu
