#pragma once

#include <cstdint>

namespace deu {

// The five learnable scalars of one neuron: a y'' + b y' + c y = u(t),
// with c1, c2 selecting the homogeneous part (initial conditions).
struct DeuParams {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

// Numeric-stability knobs shared by all neurons of a layer.
struct StabilityConfig {
  double eps = 0.01;        // zero-clamp threshold for a, b, c and for Delta
  double s_delta = 100.0;   // sharpness of the smoothed Dirac delta
  double s_act = 1.0;       // sigmoid sharpness in the a=0,b=0 regime
  double exp_arg_cap = 50.0;  // max magnitude of any exponent argument
};

// Which closed-form family currently governs a neuron. Coefficients are
// assumed clamped, so "zero" means exactly zero.
enum class SolutionRegime {
  SigmoidCore,        // a=0, b=0, c!=0
  FirstOrderPure,     // a=0, b!=0, c=0    (ReLU-like)
  FirstOrderDecay,    // a=0, b!=0, c!=0
  PureQuadratic,      // a!=0, b=0, c=0    (ReQU-like)
  PureOscillation,    // b=0, ac>0
  PureExponential,    // b=0, ac<0
  DampedNoStiffness,  // a!=0, b!=0, c=0
  GeneralUnderdamped, // abc!=0, Delta<0
  GeneralOverdamped,  // abc!=0, Delta>0
  GeneralCritical     // abc!=0, Delta=0 (after the Delta clamp)
};

inline constexpr int kNumRegimes = 10;

const char* regime_name(SolutionRegime r);

// y(t) together with its six analytic partial derivatives.
struct ActivationEval {
  double y = 0.0;
  double dy_dt = 0.0;
  double dy_da = 0.0;
  double dy_db = 0.0;
  double dy_dc = 0.0;
  double dy_dc1 = 0.0;  // equals f1(t), the first homogeneous basis function
  double dy_dc2 = 0.0;  // equals f2(t)
};

// Per-neuron constants derived once from the clamped parameters and reused
// across a whole batch of inputs.
struct RegimeCoeffs {
  SolutionRegime regime;
  DeuParams p;
  StabilityConfig cfg;
  double k0 = 0.0;  // regime-dependent: omega, k, r1, alpha or root r
  double k1 = 0.0;  // r2 or beta
  double k2 = 0.0;  // sqrt(|Delta|)
};

// Zeroes out coefficients with 0 < |value| < eps, forbids a=b=c=0
// (forces b = eps), and flattens near-critical discriminants:
// if abc!=0, |b^2-4ac| < eps and sign(a)=sign(c), then
// a := (b/2) sign(a), c := (b/2) sign(c) so that Delta is exactly zero.
DeuParams clamp_params(const DeuParams& p, const StabilityConfig& cfg);

// Total over clamped parameters; throws std::invalid_argument when a
// coefficient sits in the forbidden band 0 < |value| < eps.
SolutionRegime classify_regime(const DeuParams& p, const StabilityConfig& cfg);

// Heaviside step with u(0) = 0.
inline double heaviside(double t) { return t > 0.0 ? 1.0 : 0.0; }

// Smoothed Dirac delta s*e^{-st}/(1+e^{-st})^2, stable for large |s t|.
double delta_approx(double t, double s);

// exp with the argument clipped to +-cap.
double capped_exp(double arg, double cap);

// Numerically stable logistic sigmoid.
double sigmoid(double x);

RegimeCoeffs precompute_regime(const DeuParams& p, const StabilityConfig& cfg);

// Closed-form solution and analytic partials at a single point, with every
// Dirac delta replaced by delta_approx(t, s_delta) and exponent arguments
// clipped to +-exp_arg_cap.
ActivationEval eval_with(const RegimeCoeffs& rc, double t);

ActivationEval eval(const DeuParams& p, double t, const StabilityConfig& cfg);

// Forcing term the regime actually solves against: u(t) everywhere except
// the sigmoid-core regime, which solves c y = sigmoid(s_act t).
double core_forcing(SolutionRegime regime, double t, const StabilityConfig& cfg);

}  // namespace deu
