#include "deu/deu_layer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace deu {

std::vector<DeuParams> init_params(std::uint64_t seed, std::size_t width,
                                   const StabilityConfig& cfg) {
  if (width == 0) throw std::invalid_argument("init_params: width must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(cfg.eps, 1.0);
  std::vector<DeuParams> out(width);
  for (DeuParams& p : out) {
    p.a = coef(rng);
    p.b = coef(rng);
    p.c = coef(rng);
    p.c1 = 0.0;
    p.c2 = 0.0;
  }
  return out;
}

std::pair<Eigen::MatrixXd, DeuForwardCache> forward_batch(
    const DeuLayerState& state, const Eigen::MatrixXd& pre_activations) {
  const Eigen::Index batch = pre_activations.rows();
  const Eigen::Index width = pre_activations.cols();
  if (static_cast<std::size_t>(width) != state.width()) {
    throw std::invalid_argument("forward_batch: width mismatch");
  }
  if (!pre_activations.allFinite()) {
    throw std::invalid_argument("forward_batch: non-finite input");
  }

  std::vector<RegimeCoeffs> coeffs;
  coeffs.reserve(state.width());
  for (const DeuParams& p : state.params) {
    coeffs.push_back(precompute_regime(p, state.cfg));
  }

  DeuForwardCache cache;
  cache.pre_activations = pre_activations;
  cache.evals.resize(static_cast<std::size_t>(batch * width));
  cache.regimes.resize(static_cast<std::size_t>(width));
  for (Eigen::Index n = 0; n < width; ++n) {
    cache.regimes[static_cast<std::size_t>(n)] =
        coeffs[static_cast<std::size_t>(n)].regime;
  }

  Eigen::MatrixXd activations(batch, width);
  // Iterate the subspaces; each nonempty group evaluates its own closed form
  // over the whole column block with the neuron constants hoisted.
  for (int reg = 0; reg < kNumRegimes; ++reg) {
    const auto regime = static_cast<SolutionRegime>(reg);
    for (Eigen::Index n = 0; n < width; ++n) {
      const RegimeCoeffs& rc = coeffs[static_cast<std::size_t>(n)];
      if (rc.regime != regime) continue;
      for (Eigen::Index i = 0; i < batch; ++i) {
        const ActivationEval e = eval_with(rc, pre_activations(i, n));
        activations(i, n) = e.y;
        cache.evals[static_cast<std::size_t>(i * width + n)] = e;
      }
    }
  }
  return {std::move(activations), std::move(cache)};
}

double reference_point(const Eigen::VectorXd& column, RefPointMode mode) {
  if (column.size() == 0) {
    throw std::invalid_argument("reference_point: empty batch");
  }
  return mode == RefPointMode::FixedZero ? 0.0 : column.mean();
}

GravitationResult outward_gravitation(const DeuParams& p,
                                      const StabilityConfig& cfg,
                                      double t_star) {
  const double eps = cfg.eps;
  auto escape = [eps](double q) {
    if (q > -eps && q < 0.0) return -eps;
    if (q >= 0.0 && q < eps) return eps;
    return q;
  };

  GravitationResult res;
  res.a_t = escape(p.a);
  res.b_t = escape(p.b);
  res.c_t = escape(p.c);
  res.was_singular = res.a_t != p.a || res.b_t != p.b || res.c_t != p.c;
  if (!res.was_singular) {
    res.c1_t = p.c1;
    res.c2_t = p.c2;
    return res;
  }

  // Match value and slope of the actual activation at t*. The hypothetical
  // solution is affine in (c1, c2), so two evaluations per basis direction
  // recover f~, f~1, f~2 and their time derivatives.
  const ActivationEval actual = eval(p, t_star, cfg);
  const DeuParams tilde{res.a_t, res.b_t, res.c_t, 0.0, 0.0};
  const RegimeCoeffs rc = precompute_regime(tilde, cfg);
  const ActivationEval base = eval_with(rc, t_star);
  DeuParams t1 = tilde;
  t1.c1 = 1.0;
  DeuParams t2 = tilde;
  t2.c2 = 1.0;
  const ActivationEval e1 = eval(t1, t_star, cfg);
  const ActivationEval e2 = eval(t2, t_star, cfg);

  const double a11 = e1.y - base.y;
  const double a12 = e2.y - base.y;
  const double a21 = e1.dy_dt - base.dy_dt;
  const double a22 = e2.dy_dt - base.dy_dt;
  const double b1 = actual.y - base.y;
  const double b2 = actual.dy_dt - base.dy_dt;

  // (A^T A + lambda I) x = A^T B with lambda = 1e-9.
  constexpr double lambda = 1e-9;
  const double m11 = a11 * a11 + a21 * a21 + lambda;
  const double m12 = a11 * a12 + a21 * a22;
  const double m22 = a12 * a12 + a22 * a22 + lambda;
  const double v1 = a11 * b1 + a21 * b2;
  const double v2 = a12 * b1 + a22 * b2;
  const double det = m11 * m22 - m12 * m12;
  res.c1_t = (v1 * m22 - v2 * m12) / det;
  res.c2_t = (m11 * v2 - m12 * v1) / det;
  return res;
}

std::pair<Eigen::MatrixXd, std::vector<ParamGrad>> backward_batch(
    const DeuLayerState& state, const DeuForwardCache& cache,
    const Eigen::MatrixXd& upstream_grad) {
  const Eigen::Index batch = cache.pre_activations.rows();
  const Eigen::Index width = cache.pre_activations.cols();
  if (static_cast<std::size_t>(width) != state.width() ||
      cache.evals.size() != static_cast<std::size_t>(batch * width)) {
    throw std::invalid_argument("backward_batch: stale cache");
  }
  if (upstream_grad.rows() != batch || upstream_grad.cols() != width) {
    throw std::invalid_argument("backward_batch: upstream shape mismatch");
  }

  Eigen::MatrixXd input_grad(batch, width);
  std::vector<ParamGrad> param_grads(static_cast<std::size_t>(width),
                                     ParamGrad{0, 0, 0, 0, 0});

  for (Eigen::Index n = 0; n < width; ++n) {
    const DeuParams& p = state.params[static_cast<std::size_t>(n)];
    const bool sing_a = p.a == 0.0;
    const bool sing_b = p.b == 0.0;
    const bool sing_c = p.c == 0.0;
    const bool any_singular = sing_a || sing_b || sing_c;

    RegimeCoeffs grav_rc;
    if (any_singular) {
      const double t_star =
          reference_point(cache.pre_activations.col(n), state.t_star_mode);
      const GravitationResult grav = outward_gravitation(p, state.cfg, t_star);
      grav_rc = precompute_regime(grav.params(), state.cfg);
    }

    ParamGrad& g = param_grads[static_cast<std::size_t>(n)];
    for (Eigen::Index i = 0; i < batch; ++i) {
      const ActivationEval& e = cache.evals[static_cast<std::size_t>(i * width + n)];
      const double up = upstream_grad(i, n);
      input_grad(i, n) = up * e.dy_dt;

      double da = e.dy_da, db = e.dy_db, dc = e.dy_dc;
      if (any_singular) {
        const ActivationEval ge = eval_with(grav_rc, cache.pre_activations(i, n));
        if (sing_a) da = ge.dy_da;
        if (sing_b) db = ge.dy_db;
        if (sing_c) dc = ge.dy_dc;
      }
      g[0] += up * da;
      g[1] += up * db;
      g[2] += up * dc;
      g[3] += up * e.dy_dc1;
      g[4] += up * e.dy_dc2;
    }
  }
  return {std::move(input_grad), std::move(param_grads)};
}

std::vector<std::pair<double, double>> sweep_activation(
    const DeuParams& p, double t_min, double t_max, std::size_t n,
    const StabilityConfig& cfg) {
  if (!(t_min < t_max) || n < 2) {
    throw std::invalid_argument("sweep_activation: degenerate range");
  }
  const RegimeCoeffs rc = precompute_regime(p, cfg);
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t =
        t_min + (t_max - t_min) * static_cast<double>(i) /
                    static_cast<double>(n - 1);
    out.emplace_back(t, eval_with(rc, t).y);
  }
  return out;
}

}  // namespace deu
