// Explicit solutions: the linear (free) transport solution, the primitive
// F_p, the pre-focus ray-ODE approximation, and the predicted blow-up /
// absorption quantities derived from it.
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "pulsefocus/errors.hpp"
#include "pulsefocus/profiles.hpp"
#include "pulsefocus/regimes.hpp"

namespace pulsefocus {

/// Pointwise sample of the pair (v_-, v_+).
struct FieldSample {
  double t = 0.0;
  double r = 0.0;
  double v_minus = 0.0;
  double v_plus = 0.0;
};

enum class AppValidityReason { PreFocusOnly, DenominatorVanishes };

/// Largest time up to which the ray-ODE approximation is defined.
struct AppValidity {
  double t_max = 0.0;
  AppValidityReason reason = AppValidityReason::PreFocusOnly;
};

/// F_p(x, y) = integral of s^{1-p} over [x, y], for 0 < x <= y:
///   p > 2   : (x^{2-p} - y^{2-p}) / (p-2)
///   p = 2   : log(y/x)
///   1 < p < 2 : (y^{2-p} - x^{2-p}) / (2-p)   (same integral)
inline double F_p(double x, double y, double p) {
  if (!(p > 1.0)) throw InvalidParameterError("F_p requires p > 1");
  if (!(x > 0.0)) throw DomainError("F_p: lower endpoint must be positive");
  if (!(y >= x)) throw DomainError("F_p: requires x <= y");
  if (p == 2.0) return std::log(y / x);
  if (p > 2.0) return (std::pow(x, 2.0 - p) - std::pow(y, 2.0 - p)) / (p - 2.0);
  return (std::pow(y, 2.0 - p) - std::pow(x, 2.0 - p)) / (2.0 - p);
}

/// Free (a = 0) solution with the sign-flipped reflection at r = 0:
///   v_-^free(t, r) = P_-(r+t, (r+t-r0)/eps)
///   v_+^free(t, r) = P_+(r-t, (r-t-r0)/eps) - P_-(t-r, (t-r-r0)/eps)
/// Terms vanish automatically outside the transported support shells.
inline FieldSample eval_free(const ReducedData& data,
                             const ProblemParams& params, double t, double r) {
  params.validate();
  params.require_positive_horizon();
  if (!(t >= 0.0) || !(r >= 0.0))
    throw InvalidParameterError("eval_free requires t, r >= 0");
  const double eps = params.eps;
  const double r0 = params.r0;
  FieldSample s{t, r, 0.0, 0.0};
  s.v_minus = data.p_minus(r + t, (r + t - r0) / eps);
  s.v_plus = data.p_plus(r - t, (r - t - r0) / eps) -
             data.p_minus(t - r, (t - r - r0) / eps);
  return s;
}

namespace detail {

// Quotient form of the solution of dv/dt = eps^alpha rho(t)^{1-p} g(v)
// along a ray, with accumulated primitive fp_val = F_p over the traversed
// radii. Throws BlowupError when the denominator is not positive.
inline double app_quotient(double p_val, double fp_val,
                           const ProblemParams& params, double t, double r) {
  if (p_val == 0.0) return 0.0;
  const double p = params.p;
  const double coef = params.a * std::pow(2.0, -p) * (p - 1.0) *
                      std::pow(params.eps, params.alpha);
  const double denom =
      1.0 + coef * fp_val * std::pow(std::abs(p_val), p - 1.0);
  if (!(denom > 0.0))
    throw BlowupError("ray-ODE denominator vanished (accretive blow-up)", t,
                      r);
  return p_val / std::pow(denom, 1.0 / (p - 1.0));
}

}  // namespace detail

/// Pre-focus approximation obtained by solving the source ODE along each
/// ray of geometric optics:
///   v_-^app(t, r) = P_-(r+t, z) / (1 + a 2^{-p} (p-1) eps^alpha
///                     F_p(r, r+t) |P_-(r+t, z)|^{p-1})^{1/(p-1)}
/// and symmetrically for v_+ with F_p(r-t, r). Valid for 0 <= t < r0-z0*eps
/// and r > 0; a nonpositive denominator signals accretive blow-up.
inline FieldSample eval_app(const ReducedData& data,
                            const ProblemParams& params, double t, double r) {
  params.validate();
  params.require_positive_horizon();
  if (!(r > 0.0)) throw DomainError("eval_app requires r > 0");
  if (!(t >= 0.0) || t >= params.prefocus_horizon())
    throw ValidityError("eval_app is defined for 0 <= t < r0 - z0*eps only");
  const double eps = params.eps;
  const double r0 = params.r0;
  FieldSample s{t, r, 0.0, 0.0};

  const double pm = data.p_minus(r + t, (r + t - r0) / eps);
  if (pm != 0.0)
    s.v_minus =
        detail::app_quotient(pm, F_p(r, r + t, params.p), params, t, r);

  const double pp = data.p_plus(r - t, (r - t - r0) / eps);
  if (pp != 0.0)
    s.v_plus =
        detail::app_quotient(pp, F_p(r - t, r, params.p), params, t, r);
  return s;
}

/// Blow-up time of the incoming approximate wave on the single ray
/// r + t = sigma, found by bisection on the vanishing-denominator
/// condition. Empty when the ray carries no data or the denominator stays
/// positive up to the pre-focus horizon.
inline std::optional<double> blowup_time_on_ray(const ReducedData& data,
                                                const ProblemParams& params,
                                                double sigma) {
  params.validate();
  params.require_positive_horizon();
  if (!(params.a < 0.0))
    throw DomainError("ray blow-up search requires accretive coupling a < 0");
  const double amp =
      std::abs(data.p_minus(sigma, (sigma - params.r0) / params.eps));
  if (amp == 0.0) return std::nullopt;

  const double p = params.p;
  const double k = -params.a * std::pow(2.0, -p) * (p - 1.0) *
                   std::pow(params.eps, params.alpha) *
                   std::pow(amp, p - 1.0);
  const double delta = params.prefocus_horizon();
  auto denom = [&](double t) {
    return 1.0 - k * F_p(sigma - t, sigma, p);
  };
  // sigma >= delta on the data shell, so r = sigma - t stays positive for
  // t < delta.
  const double t_hi = delta * (1.0 - 1e-13);
  if (denom(t_hi) > 0.0) return std::nullopt;

  double lo = 0.0, hi = t_hi;  // denom(lo) = 1 > 0 >= denom(hi)
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    (denom(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Earliest blow-up time of the approximate solution, scanning rays across
/// the incoming pulse support. Requires a < 0. Falls back to
/// PreFocusOnly with t_max = r0 - z0*eps when no ray root exists.
inline AppValidity predicted_blowup_time(const ReducedData& data,
                                         const ProblemParams& params,
                                         std::size_t n_rays = 64) {
  params.validate();
  params.require_positive_horizon();
  if (!(params.a < 0.0))
    throw DomainError("blow-up prediction requires accretive coupling a < 0");
  if (n_rays < 2) throw InvalidParameterError("need at least two rays");

  const double width = params.z0 * params.eps;
  std::optional<double> best;
  for (std::size_t i = 0; i < n_rays; ++i) {
    const double frac =
        -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n_rays - 1);
    const double sigma = params.r0 + width * frac;
    if (auto t = blowup_time_on_ray(data, params, sigma)) {
      if (!best || *t < *best) best = *t;
    }
  }
  if (best) return {*best, AppValidityReason::DenominatorVanishes};
  return {params.prefocus_horizon(), AppValidityReason::PreFocusOnly};
}

/// lambda-dependent factor of the dissipative sup-norm bound at the
/// absorption threshold time: lambda^{(p-2)/(p-1)} for p > 2, 1/|log lambda|
/// for p = 2. The unknown constant in front is never materialized; callers
/// compare ratios so it cancels.
inline double app_sup_bound(double lambda, const ProblemParams& params) {
  params.validate();
  if (!(params.a > 0.0))
    throw RegimeError("sup-norm bound factor requires dissipative a > 0");
  const double p = params.p;
  const double alpha = params.alpha;
  const bool supercritical =
      (alpha < p - 2.0) || (alpha == 0.0 && p == 2.0);
  if (!supercritical)
    throw RegimeError(
        "sup-norm bound factor is defined in the super-critical regime only "
        "(0 <= alpha < p - 2, or alpha = 0 = p - 2)");
  if (!(lambda > 0.0)) throw InvalidParameterError("lambda must be positive");
  if (p == 2.0) {
    if (!(lambda < 1.0))
      throw InvalidParameterError("for p = 2 the factor needs lambda < 1");
    return -1.0 / std::log(lambda);
  }
  return std::pow(lambda, (p - 2.0) / (p - 1.0));
}

/// d_t u(t, r) = (v_- + v_+) / (2r). At r = 0 the numerator vanishes by the
/// boundary condition; the quotient itself is not defined there.
inline double reconstruct_dtu(const FieldSample& sample) {
  if (!(sample.r > 0.0))
    throw DomainError(
        "d_t u reconstruction needs r > 0 (at r = 0 use the boundary "
        "condition: the numerator vanishes)");
  return (sample.v_minus + sample.v_plus) / (2.0 * sample.r);
}

}  // namespace pulsefocus
