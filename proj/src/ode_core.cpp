#include "deu/ode_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace deu {

namespace {

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

}  // namespace

const char* regime_name(SolutionRegime r) {
  switch (r) {
    case SolutionRegime::SigmoidCore: return "SigmoidCore";
    case SolutionRegime::FirstOrderPure: return "FirstOrderPure";
    case SolutionRegime::FirstOrderDecay: return "FirstOrderDecay";
    case SolutionRegime::PureQuadratic: return "PureQuadratic";
    case SolutionRegime::PureOscillation: return "PureOscillation";
    case SolutionRegime::PureExponential: return "PureExponential";
    case SolutionRegime::DampedNoStiffness: return "DampedNoStiffness";
    case SolutionRegime::GeneralUnderdamped: return "GeneralUnderdamped";
    case SolutionRegime::GeneralOverdamped: return "GeneralOverdamped";
    case SolutionRegime::GeneralCritical: return "GeneralCritical";
  }
  return "?";
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double delta_approx(double t, double s) {
  const double sig = sigmoid(s * t);
  return s * sig * (1.0 - sig);
}

double capped_exp(double arg, double cap) {
  return std::exp(std::clamp(arg, -cap, cap));
}

DeuParams clamp_params(const DeuParams& p, const StabilityConfig& cfg) {
  require_finite(p.a, "a");
  require_finite(p.b, "b");
  require_finite(p.c, "c");
  require_finite(p.c1, "c1");
  require_finite(p.c2, "c2");

  DeuParams q = p;
  const double eps = cfg.eps;
  auto squash = [eps](double v) { return std::abs(v) < eps && v != 0.0 ? 0.0 : v; };
  q.a = squash(q.a);
  q.b = squash(q.b);
  q.c = squash(q.c);

  if (q.a == 0.0 && q.b == 0.0 && q.c == 0.0) {
    q.b = eps;
  }

  // Near-critical discriminant: pin Delta to exactly zero so the general
  // solution cannot blow up through the 1/sqrt(Delta) factors.
  if (q.a != 0.0 && q.b != 0.0 && q.c != 0.0) {
    const double delta = q.b * q.b - 4.0 * q.a * q.c;
    if (std::abs(delta) < eps && delta != 0.0 && sign_of(q.a) == sign_of(q.c)) {
      q.a = (q.b / 2.0) * sign_of(q.a);
      q.c = (q.b / 2.0) * sign_of(q.c);
    }
  }
  return q;
}

SolutionRegime classify_regime(const DeuParams& p, const StabilityConfig& cfg) {
  auto check = [&](double v, const char* what) {
    if (v != 0.0 && std::abs(v) < cfg.eps) {
      throw std::invalid_argument(std::string("unclamped coefficient ") + what);
    }
  };
  check(p.a, "a");
  check(p.b, "b");
  check(p.c, "c");

  if (p.a == 0.0) {
    if (p.b == 0.0) {
      if (p.c == 0.0) throw std::invalid_argument("a=b=c=0 is forbidden");
      return SolutionRegime::SigmoidCore;
    }
    return p.c == 0.0 ? SolutionRegime::FirstOrderPure
                      : SolutionRegime::FirstOrderDecay;
  }
  if (p.b == 0.0) {
    if (p.c == 0.0) return SolutionRegime::PureQuadratic;
    return p.a * p.c > 0.0 ? SolutionRegime::PureOscillation
                           : SolutionRegime::PureExponential;
  }
  if (p.c == 0.0) return SolutionRegime::DampedNoStiffness;

  const double delta = p.b * p.b - 4.0 * p.a * p.c;
  if (delta > 0.0) return SolutionRegime::GeneralOverdamped;
  if (delta < 0.0) return SolutionRegime::GeneralUnderdamped;
  return SolutionRegime::GeneralCritical;
}

double core_forcing(SolutionRegime regime, double t, const StabilityConfig& cfg) {
  if (regime == SolutionRegime::SigmoidCore) return sigmoid(cfg.s_act * t);
  return heaviside(t);
}

RegimeCoeffs precompute_regime(const DeuParams& p, const StabilityConfig& cfg) {
  RegimeCoeffs rc;
  rc.regime = classify_regime(p, cfg);
  rc.p = p;
  rc.cfg = cfg;
  switch (rc.regime) {
    case SolutionRegime::PureOscillation:
      rc.k0 = std::sqrt(p.c / p.a);  // omega
      break;
    case SolutionRegime::PureExponential:
      rc.k0 = std::sqrt(-p.c / p.a);  // growth/decay rate
      break;
    case SolutionRegime::GeneralOverdamped: {
      const double sq = std::sqrt(p.b * p.b - 4.0 * p.a * p.c);
      rc.k0 = (-p.b + sq) / (2.0 * p.a);  // r1
      rc.k1 = (-p.b - sq) / (2.0 * p.a);  // r2
      rc.k2 = sq;
      break;
    }
    case SolutionRegime::GeneralUnderdamped: {
      const double q = std::sqrt(4.0 * p.a * p.c - p.b * p.b);
      rc.k0 = -p.b / (2.0 * p.a);  // alpha
      rc.k1 = q / (2.0 * p.a);     // beta
      rc.k2 = q;
      break;
    }
    case SolutionRegime::GeneralCritical:
      rc.k0 = -p.b / (2.0 * p.a);  // double root
      break;
    default:
      break;
  }
  return rc;
}

ActivationEval eval_with(const RegimeCoeffs& rc, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("non-finite t");

  const DeuParams& p = rc.p;
  const StabilityConfig& cfg = rc.cfg;
  const double cap = cfg.exp_arg_cap;
  const double u = heaviside(t);
  const double ds = delta_approx(t, cfg.s_delta);

  ActivationEval out;
  switch (rc.regime) {
    case SolutionRegime::SigmoidCore: {
      // y = sigmoid(s t)/c; the forcing itself is the sigmoid here, so no
      // step function and no delta term appears.
      const double sig = sigmoid(cfg.s_act * t);
      out.y = sig / p.c;
      out.dy_dt = cfg.s_act * sig * (1.0 - sig) / p.c;
      out.dy_dc = -sig / (p.c * p.c);
      break;
    }
    case SolutionRegime::FirstOrderPure: {
      out.y = t * u / p.b + p.c1;
      out.dy_dt = u / p.b + t * ds / p.b;
      out.dy_db = -t * u / (p.b * p.b);
      out.dy_dc1 = 1.0;
      break;
    }
    case SolutionRegime::FirstOrderDecay: {
      const double ed = capped_exp(-p.c * t / p.b, cap);
      const double phi = (1.0 - ed) / p.c;  // particular part, times u
      out.y = p.c1 * ed + u * phi;
      out.dy_dt = -(p.c / p.b) * p.c1 * ed + u * ed / p.b + ds * phi;
      out.dy_db = ed * (p.c * t / (p.b * p.b)) * (p.c1 - u / p.c);
      out.dy_dc = -p.c1 * t * ed / p.b - u * (1.0 - ed) / (p.c * p.c) +
                  u * t * ed / (p.c * p.b);
      out.dy_dc1 = ed;
      break;
    }
    case SolutionRegime::PureQuadratic: {
      out.y = t * t * u / (2.0 * p.a) + p.c2 * t + p.c1;
      out.dy_dt = t * u / p.a + p.c2 + t * t * ds / (2.0 * p.a);
      out.dy_da = -t * t * u / (2.0 * p.a * p.a);
      out.dy_dc1 = 1.0;
      out.dy_dc2 = t;
      break;
    }
    case SolutionRegime::PureOscillation: {
      const double w = rc.k0;
      const double cw = std::cos(w * t);
      const double sw = std::sin(w * t);
      const double phi = -(cw - 1.0) / p.c;
      out.y = p.c2 * sw + p.c1 * cw + u * phi;
      out.dy_dt = w * (p.c2 * cw - p.c1 * sw) + u * w * sw / p.c + ds * phi;
      const double dy_dw = t * (p.c2 * cw - p.c1 * sw) + u * t * sw / p.c;
      out.dy_da = dy_dw * (-w / (2.0 * p.a));
      out.dy_dc = dy_dw * (w / (2.0 * p.c)) + u * (cw - 1.0) / (p.c * p.c);
      out.dy_dc1 = cw;
      out.dy_dc2 = sw;
      break;
    }
    case SolutionRegime::PureExponential: {
      const double k = rc.k0;
      const double ek = capped_exp(k * t, cap);
      const double em = capped_exp(-k * t, cap);
      const double ch = 0.5 * (ek + em);
      const double sh = 0.5 * (ek - em);
      const double phi = (1.0 - ch) / p.c;
      out.y = p.c1 * ek + p.c2 * em + u * phi;
      out.dy_dt = k * (p.c1 * ek - p.c2 * em) - u * k * sh / p.c + ds * phi;
      const double dy_dk = t * (p.c1 * ek - p.c2 * em) - u * t * sh / p.c;
      out.dy_da = dy_dk * (-k / (2.0 * p.a));
      out.dy_dc = dy_dk * (-1.0 / (2.0 * k * p.a)) -
                  u * (1.0 - ch) / (p.c * p.c);
      out.dy_dc1 = ek;
      out.dy_dc2 = em;
      break;
    }
    case SolutionRegime::DampedNoStiffness: {
      const double eb = capped_exp(-p.b * t / p.a, cap);
      const double ab2 = p.a / (p.b * p.b);
      const double phi = ab2 * (eb - 1.0) + t / p.b;
      out.y = u * phi - p.c1 * (p.a / p.b) * eb + p.c2;
      out.dy_dt = u * (1.0 - eb) / p.b + p.c1 * eb + ds * phi;
      out.dy_da = u * ((eb - 1.0) / (p.b * p.b) + t * eb / (p.a * p.b)) -
                  p.c1 * eb * (1.0 / p.b + t / p.a);
      out.dy_db = -2.0 * u * p.a * (eb - 1.0) / (p.b * p.b * p.b) -
                  u * t * eb / (p.b * p.b) - u * t / (p.b * p.b) +
                  p.c1 * eb * (p.a / (p.b * p.b) + t / p.b);
      out.dy_dc1 = -(p.a / p.b) * eb;
      out.dy_dc2 = 1.0;
      break;
    }
    case SolutionRegime::GeneralOverdamped: {
      const double r1 = rc.k0, r2 = rc.k1, sq = rc.k2;
      const double d = r1 - r2;
      const double e1 = capped_exp(r1 * t, cap);
      const double e2 = capped_exp(r2 * t, cap);
      const double num = r2 * e1 - r1 * e2;
      const double phi = (1.0 + num / d) / p.c;
      out.y = p.c1 * e1 + p.c2 * e2 + u * phi;
      out.dy_dt = p.c1 * r1 * e1 + p.c2 * r2 * e2 +
                  u * r1 * r2 * (e1 - e2) / (p.c * d) + ds * phi;
      const double dP_dr1 = ((r2 * t * e1 - e2) * d - num) / (d * d);
      const double dP_dr2 = ((e1 - r1 * t * e2) * d + num) / (d * d);
      const double dy_dr1 = p.c1 * t * e1 + u * dP_dr1 / p.c;
      const double dy_dr2 = p.c2 * t * e2 + u * dP_dr2 / p.c;
      const double r1a = -p.c / (p.a * sq) - r1 / p.a;
      const double r2a = p.c / (p.a * sq) - r2 / p.a;
      const double r1b = (-1.0 + p.b / sq) / (2.0 * p.a);
      const double r2b = (-1.0 - p.b / sq) / (2.0 * p.a);
      const double r1c = -1.0 / sq;
      const double r2c = 1.0 / sq;
      out.dy_da = dy_dr1 * r1a + dy_dr2 * r2a;
      out.dy_db = dy_dr1 * r1b + dy_dr2 * r2b;
      out.dy_dc = dy_dr1 * r1c + dy_dr2 * r2c - u * phi / p.c;
      out.dy_dc1 = e1;
      out.dy_dc2 = e2;
      break;
    }
    case SolutionRegime::GeneralUnderdamped: {
      const double al = rc.k0, be = rc.k1, q = rc.k2;
      const double ea = capped_exp(al * t, cap);
      const double cb = std::cos(be * t);
      const double sb = std::sin(be * t);
      const double cc = p.c1 - u / p.c;
      const double ss = p.c2 + u * al / (be * p.c);
      const double phi = (1.0 - ea * (cb - (al / be) * sb)) / p.c;
      out.y = ea * (cc * cb + ss * sb) + u / p.c;
      out.dy_dt = al * ea * (cc * cb + ss * sb) +
                  ea * be * (ss * cb - cc * sb) + ds * phi;
      const double dy_dal = t * ea * (cc * cb + ss * sb) +
                            ea * sb * u / (be * p.c);
      const double dy_dbe = ea * t * (ss * cb - cc * sb) -
                            ea * sb * u * al / (be * be * p.c);
      const double dy_dc_explicit =
          ea * (u * cb / (p.c * p.c) - u * al * sb / (be * p.c * p.c)) -
          u / (p.c * p.c);
      const double al_a = p.b / (2.0 * p.a * p.a);
      const double al_b = -1.0 / (2.0 * p.a);
      const double be_a = p.c / (p.a * q) - be / p.a;
      const double be_b = -p.b / (2.0 * p.a * q);
      const double be_c = 1.0 / q;
      out.dy_da = dy_dal * al_a + dy_dbe * be_a;
      out.dy_db = dy_dal * al_b + dy_dbe * be_b;
      out.dy_dc = dy_dbe * be_c + dy_dc_explicit;
      out.dy_dc1 = ea * cb;
      out.dy_dc2 = ea * sb;
      break;
    }
    case SolutionRegime::GeneralCritical: {
      const double r = rc.k0;
      const double er = capped_exp(r * t, cap);
      const double phi = (1.0 - er * (1.0 - r * t)) / p.c;
      out.y = er * (p.c1 + p.c2 * t) + u * phi;
      out.dy_dt = r * er * (p.c1 + p.c2 * t) + er * p.c2 +
                  u * er * r * r * t / p.c + ds * phi;
      // Partials along the Delta = 0 surface (the confluent form); finite
      // differences that step off the surface change basis and do not apply.
      const double dy_dr = t * er * (p.c1 + p.c2 * t) + u * er * r * t * t / p.c;
      out.dy_da = dy_dr * (p.b / (2.0 * p.a * p.a));
      out.dy_db = dy_dr * (-1.0 / (2.0 * p.a));
      out.dy_dc = -u * phi / p.c;
      out.dy_dc1 = er;
      out.dy_dc2 = t * er;
      break;
    }
  }
  return out;
}

ActivationEval eval(const DeuParams& p, double t, const StabilityConfig& cfg) {
  return eval_with(precompute_regime(p, cfg), t);
}

}  // namespace deu
