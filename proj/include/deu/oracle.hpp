#pragma once

#include <functional>
#include <random>
#include <vector>

#include "deu/ode_core.hpp"

namespace deu {

struct Network;  // nn.hpp

// One trigonometric term beta*sin(omega t) + gamma*cos(omega t).
struct FourierTerm {
  double omega;
  double beta;
  double gamma;
};

struct FourierSpec {
  std::vector<FourierTerm> terms;
};

// a y'' + b y' + c y - g(t), with y'' and y' taken as 4th-order central
// differences of the closed-form eval. g is the regime's core forcing.
// Rejects |t| <= 2h (the step discontinuity breaks the stencil there).
double ode_residual(const DeuParams& p, double t, double h,
                    const StabilityConfig& cfg);

// Central difference (fn(x+h) - fn(x-h)) / 2h.
double finite_diff(const std::function<double(double)>& fn, double x, double h);

// Random clamped parameters guaranteed to land in the requested regime,
// coefficients bounded in [-3, 3], c1/c2 in [-1, 1].
DeuParams sample_regime_params(SolutionRegime target, std::mt19937_64& rng,
                               const StabilityConfig& cfg = {});

// Fastest exponential rate |d(exp arg)/dt| appearing in the regime's closed
// form; lets callers keep |rate * t| below exp_arg_cap so the cap never
// saturates inside a finite-difference stencil.
double exponent_rate(const DeuParams& p, const StabilityConfig& cfg = {});

// One hidden layer with two oscillatory neurons per term (a = 1/omega^2,
// b = 0, c = 1), wired +1/-1 into an identity output so the particular
// solutions cancel and the network computes the trigonometric sum exactly.
Network build_fourier_network(const FourierSpec& spec);

}  // namespace deu
