#include "deu/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deu/nn.hpp"

namespace deu {

double ode_residual(const DeuParams& p, double t, double h,
                    const StabilityConfig& cfg) {
  if (std::abs(t) <= 2.0 * h) {
    throw std::invalid_argument("ode_residual: t too close to the step");
  }
  const RegimeCoeffs rc = precompute_regime(p, cfg);
  auto y = [&](double x) { return eval_with(rc, x).y; };

  const double ym2 = y(t - 2.0 * h), ym1 = y(t - h);
  const double yp1 = y(t + h), yp2 = y(t + 2.0 * h);
  const double y0 = y(t);

  // 4th-order five-point stencils.
  const double d1 = (ym2 - 8.0 * ym1 + 8.0 * yp1 - yp2) / (12.0 * h);
  const double d2 =
      (-ym2 + 16.0 * ym1 - 30.0 * y0 + 16.0 * yp1 - yp2) / (12.0 * h * h);

  return p.a * d2 + p.b * d1 + p.c * y0 - core_forcing(rc.regime, t, cfg);
}

double finite_diff(const std::function<double(double)>& fn, double x, double h) {
  return (fn(x + h) - fn(x - h)) / (2.0 * h);
}

DeuParams sample_regime_params(SolutionRegime target, std::mt19937_64& rng,
                               const StabilityConfig& cfg) {
  std::uniform_real_distribution<double> mag(cfg.eps, 3.0);
  std::uniform_real_distribution<double> ic(-1.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  auto nz = [&] { return (coin(rng) ? 1.0 : -1.0) * mag(rng); };

  DeuParams p;
  for (;;) {
  p.c1 = ic(rng);
  p.c2 = ic(rng);
  switch (target) {
    case SolutionRegime::SigmoidCore:
      p = {0.0, 0.0, nz(), p.c1, p.c2};
      break;
    case SolutionRegime::FirstOrderPure:
      p = {0.0, nz(), 0.0, p.c1, p.c2};
      break;
    case SolutionRegime::FirstOrderDecay:
      p = {0.0, nz(), nz(), p.c1, p.c2};
      break;
    case SolutionRegime::PureQuadratic:
      p = {nz(), 0.0, 0.0, p.c1, p.c2};
      break;
    case SolutionRegime::PureOscillation: {
      const double s = coin(rng) ? 1.0 : -1.0;
      p = {s * mag(rng), 0.0, s * mag(rng), p.c1, p.c2};
      break;
    }
    case SolutionRegime::PureExponential: {
      const double s = coin(rng) ? 1.0 : -1.0;
      p = {s * mag(rng), 0.0, -s * mag(rng), p.c1, p.c2};
      break;
    }
    case SolutionRegime::DampedNoStiffness:
      p = {nz(), nz(), 0.0, p.c1, p.c2};
      break;
    case SolutionRegime::GeneralOverdamped:
      for (;;) {
        p = {nz(), nz(), nz(), p.c1, p.c2};
        if (p.b * p.b - 4.0 * p.a * p.c > cfg.eps) break;
      }
      break;
    case SolutionRegime::GeneralUnderdamped:
      for (;;) {
        const double s = coin(rng) ? 1.0 : -1.0;
        p = {s * mag(rng), nz(), s * mag(rng), p.c1, p.c2};
        if (p.b * p.b - 4.0 * p.a * p.c < -cfg.eps) break;
      }
      break;
    case SolutionRegime::GeneralCritical: {
      const double s = coin(rng) ? 1.0 : -1.0;
      const double b = nz();
      p = {(b / 2.0) * s, b, (b / 2.0) * s, p.c1, p.c2};
      break;
    }
  }
  const DeuParams clamped = clamp_params(p, cfg);
  // Reject samples the near-critical clamp moved out of the regime, and
  // samples whose exponential rate is too steep for finite-difference
  // oracles (rate * h errors swamp the tolerances).
  if (classify_regime(clamped, cfg) == target &&
      exponent_rate(clamped, cfg) <= 20.0) {
    return clamped;
  }
  }
}

double exponent_rate(const DeuParams& p, const StabilityConfig& cfg) {
  const RegimeCoeffs rc = precompute_regime(p, cfg);
  switch (rc.regime) {
    case SolutionRegime::FirstOrderDecay:
      return std::abs(p.c / p.b);
    case SolutionRegime::PureExponential:
      return rc.k0;
    case SolutionRegime::DampedNoStiffness:
      return std::abs(p.b / p.a);
    case SolutionRegime::GeneralOverdamped:
      return std::max(std::abs(rc.k0), std::abs(rc.k1));
    case SolutionRegime::GeneralUnderdamped:
    case SolutionRegime::GeneralCritical:
      return std::abs(rc.k0);
    default:
      return 0.0;
  }
}

Network build_fourier_network(const FourierSpec& spec) {
  const std::size_t width = 2 * spec.terms.size();

  DenseLayer hidden;
  hidden.act = Activation::Deu;
  hidden.W = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(width), 1);
  hidden.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width));
  hidden.deu.emplace();
  hidden.deu->t_star_mode = RefPointMode::FixedZero;

  DenseLayer out;
  out.act = Activation::Identity;
  out.W = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(width));
  out.bias = Eigen::VectorXd::Zero(1);

  for (std::size_t i = 0; i < spec.terms.size(); ++i) {
    const FourierTerm& term = spec.terms[i];
    if (term.omega <= 0.0) {
      throw std::invalid_argument("build_fourier_network: omega must be > 0");
    }
    const double a = 1.0 / (term.omega * term.omega);
    DeuParams carrier{a, 0.0, 1.0, term.gamma, term.beta};
    DeuParams canceller{a, 0.0, 1.0, 0.0, 0.0};
    hidden.deu->params.push_back(carrier);
    hidden.deu->params.push_back(canceller);
    out.W(0, static_cast<Eigen::Index>(2 * i)) = 1.0;
    out.W(0, static_cast<Eigen::Index>(2 * i + 1)) = -1.0;
  }

  Network net;
  net.layers.push_back(std::move(hidden));
  net.layers.push_back(std::move(out));
  return net;
}

}  // namespace deu
