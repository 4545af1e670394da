// Problem parameters, the caustic/propagation regime table, and the
// closed-form exponents and thresholds used by the asymptotic statements.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsefocus/errors.hpp"

namespace pulsefocus {

/// Parameters of the reduced radial system
///   (d_t +- d_r) v_pm = eps^alpha r^{1-p} g(v_- + v_+),
///   g(y) = -a 2^{-p} |y|^{p-1} y,
/// with pulse data of width O(eps) supported around r = r0.
struct ProblemParams {
  double p = 3.0;      ///< nonlinearity exponent, > 1
  double alpha = 0.0;  ///< small-parameter power on the source, >= 0
  double a = 0.0;      ///< coupling; a > 0 dissipative, a < 0 accretive
  double r0 = 1.0;     ///< initial pulse radius, > 0
  double z0 = 1.0;     ///< profile support half-width, > 0
  double eps = 0.1;    ///< pulse width parameter, > 0

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(p) || !(p > 1.0))
      throw InvalidParameterError("p must be a finite number > 1");
    if (!finite(alpha) || !(alpha >= 0.0))
      throw InvalidParameterError("alpha must be a finite number >= 0");
    if (!finite(a)) throw InvalidParameterError("a must be finite");
    if (!finite(r0) || !(r0 > 0.0))
      throw InvalidParameterError("r0 must be positive");
    if (!finite(z0) || !(z0 > 0.0))
      throw InvalidParameterError("z0 must be positive");
    if (!finite(eps) || !(eps > 0.0))
      throw InvalidParameterError("eps must be positive");
  }

  /// Amplitude index J = alpha / (p - 1) of the original data scaling.
  double j_index() const { return alpha / (p - 1.0); }

  /// delta = r0 - z0*eps. By finite propagation speed the pulses cannot
  /// touch r = 0 before this time; the pre-focus closed forms live on
  /// [0, delta).
  double prefocus_horizon() const { return r0 - z0 * eps; }

  /// Data supported in |r - r0| <= z0*eps must stay away from the origin.
  void require_positive_horizon() const {
    if (!(prefocus_horizon() > 0.0))
      throw InvalidParameterError(
          "r0 - z0*eps must be positive: the initial shell may not touch "
          "the origin");
  }
};

enum class CausticRegime { Linear, Nonlinear, Supercritical };
enum class PropagationRegime { Linear, Nonlinear };

/// Annotation for table cells the asymptotic results do not cover.
enum class RegimeNote {
  None,
  /// alpha = p - 2 > 0: caustic crossing is governed by a scattering
  /// operator; no rate prediction is offered here.
  CriticalCompanion,
  /// alpha + 2 = p with p < 2 (reachable only inside the equality
  /// tolerance band, since alpha >= 0 forces alpha + 2 >= 2): no theory.
  CriticalUntheorized,
};

struct RegimeClass {
  CausticRegime caustic = CausticRegime::Linear;
  PropagationRegime propagation = PropagationRegime::Linear;
  RegimeNote note = RegimeNote::None;
};

/// Absolute tolerance for deciding alpha + 2 == p. The classification is
/// structurally discontinuous; experiments are expected to stay away from
/// the critical line, and silent misclassification would be worse than a
/// strict tolerance.
inline constexpr double kCriticalLineTol = 1e-12;

/// Place (alpha, p) in the caustic/propagation table.
/// Caustic: linear iff alpha + 2 > p, nonlinear iff alpha + 2 = p,
/// supercritical iff alpha + 2 < p. Propagation: nonlinear iff alpha = 0.
inline RegimeClass classify(const ProblemParams& params) {
  params.validate();
  const double excess = params.alpha + 2.0 - params.p;
  RegimeClass cls;
  if (std::abs(excess) <= kCriticalLineTol) {
    cls.caustic = CausticRegime::Nonlinear;
    if (std::abs(params.p - 2.0) <= kCriticalLineTol &&
        params.alpha <= kCriticalLineTol) {
      cls.note = RegimeNote::None;  // alpha = 0 = p - 2: covered
    } else if (params.p > 2.0) {
      cls.note = RegimeNote::CriticalCompanion;
    } else {
      cls.note = RegimeNote::CriticalUntheorized;
    }
  } else if (excess > 0.0) {
    cls.caustic = CausticRegime::Linear;
  } else {
    cls.caustic = CausticRegime::Supercritical;
  }
  cls.propagation = (params.alpha == 0.0) ? PropagationRegime::Nonlinear
                                          : PropagationRegime::Linear;
  return cls;
}

inline std::string to_string(CausticRegime c) {
  switch (c) {
    case CausticRegime::Linear: return "linear";
    case CausticRegime::Nonlinear: return "nonlinear";
    case CausticRegime::Supercritical: return "supercritical";
  }
  return "?";
}

inline std::string to_string(PropagationRegime pr) {
  return pr == PropagationRegime::Linear ? "linear" : "nonlinear";
}

inline std::string to_string(RegimeNote n) {
  switch (n) {
    case RegimeNote::None: return "none";
    case RegimeNote::CriticalCompanion: return "critical-companion";
    case RegimeNote::CriticalUntheorized: return "critical-untheorized";
  }
  return "?";
}

/// gamma = 1 - alpha/(p-1): the value rescaling exponent for which
/// psi(tau, rho) = eps^{-gamma} v(eps*tau, eps*rho) satisfies the eps-free
/// system. Negative exactly when alpha > p - 1.
inline double gamma_exponent(const ProblemParams& params) {
  params.validate();
  return 1.0 - params.alpha / (params.p - 1.0);
}

/// Predicted order of |v - v_free| in the sub-critical regime.
struct RatePrediction {
  double order = 0.0;    ///< slope of log(error) vs log(eps)
  bool log_factor = false;  ///< true when an extra |log eps| factor appears
};

/// Sub-critical linearization rate. Requires alpha > max(0, p-2).
///   p > 2   : O(eps^{min(1, alpha+2-p)})
///   p = 2   : O(eps + eps^alpha |log eps|), reported as order min(1, alpha)
///             with a log factor when alpha <= 1
///   1 < p < 2 : O(eps^{min(1, alpha)})
inline RatePrediction subcritical_rate(const ProblemParams& params) {
  params.validate();
  const double p = params.p;
  const double alpha = params.alpha;
  if (!(alpha > std::max(0.0, p - 2.0))) {
    if (p > 2.0 && std::abs(alpha - (p - 2.0)) <= kCriticalLineTol) {
      throw RegimeError(
          "alpha = p - 2 > 0 is the critical coupling: the caustic crossing "
          "is described by a scattering operator, and no linearization rate "
          "applies");
    }
    if (alpha < p - 2.0) {
      throw RegimeError(
          "alpha < p - 2: super-critical regime; expect dissipative "
          "absorption (a > 0) or accretive blow-up (a < 0) rather than a "
          "linearization rate");
    }
    throw RegimeError(
        "sub-critical rate requires alpha > max(0, p - 2); alpha = 0 gives "
        "nonlinear propagation with no small-parameter gain");
  }
  RatePrediction out;
  if (p > 2.0) {
    out.order = std::min(1.0, alpha + 2.0 - p);
  } else if (p == 2.0) {
    out.order = std::min(1.0, alpha);
    out.log_factor = (alpha <= 1.0);
  } else {
    out.order = std::min(1.0, alpha);
  }
  return out;
}

/// Absorption threshold time T(lambda, eps). Defined in the super-critical
/// regime only:
///   0 <= alpha < p - 2 : T = r0 - z0*eps - lambda * eps^{alpha/(p-2)}
///   alpha = 0 = p - 2  : T = r0 - z0*eps - lambda
/// Always < r0 - z0*eps for lambda > 0.
inline double absorption_time(double lambda, const ProblemParams& params) {
  params.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InvalidParameterError("lambda must be positive");
  const double p = params.p;
  const double alpha = params.alpha;
  if (alpha == 0.0 && p == 2.0)
    return params.prefocus_horizon() - lambda;
  if (alpha < p - 2.0)
    return params.prefocus_horizon() -
           lambda * std::pow(params.eps, alpha / (p - 2.0));
  throw RegimeError(
      "absorption threshold time is defined only in the super-critical "
      "regime (0 <= alpha < p - 2, or alpha = 0 = p - 2)");
}

/// Small-eps existence window size for 1 < p <= 2:
///   h_p(eps, T) = eps^alpha T^{2-p}        (1 < p < 2)
///   h_p(eps, T) = eps^alpha log(1 + T/eps) (p = 2)
inline double h_p(double eps, double t, const ProblemParams& params) {
  params.validate();
  if (!(eps > 0.0)) throw InvalidParameterError("eps must be positive");
  if (!(t > 0.0)) throw InvalidParameterError("T must be positive");
  const double p = params.p;
  if (p > 2.0)
    throw DomainError("h_p is defined for 1 < p <= 2 only");
  const double scale = std::pow(eps, params.alpha);
  if (p == 2.0) return scale * std::log(1.0 + t / eps);
  return scale * std::pow(t, 2.0 - p);
}

}  // namespace pulsefocus
