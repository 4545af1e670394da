// Smooth compactly supported pulse profiles U0, U1 and their algebraic
// reduction to the characteristic data P_-, P_+, P_1.
#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "pulsefocus/errors.hpp"
#include "pulsefocus/regimes.hpp"

namespace pulsefocus {

/// A shape z -> shape(z) supported in [-z0, z0], with analytic derivatives.
/// deriv2 may be empty; it is needed only to build derivative profiles.
struct PulseShape {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> deriv2;
};

/// Radial envelope r -> e(r) with analytic derivative.
struct Envelope {
  std::function<double(double)> value;
  std::function<double(double)> deriv;

  static Envelope constant() {
    return {[](double) { return 1.0; }, [](double) { return 0.0; }};
  }

  /// e(r) = 1 + slope * (r - r_ref)
  static Envelope linear(double slope, double r_ref) {
    return {[slope, r_ref](double r) { return 1.0 + slope * (r - r_ref); },
            [slope](double) { return slope; }};
  }
};

enum class BumpKind { SmoothBump, Polynomial, TruncatedGaussian };

namespace detail {

// exp(-1/(1-s^2)) on |s| < 1, extended by zero. All derivatives vanish at
// the support boundary. The exponent guard avoids 0 * inf at |s| -> 1.
inline PulseShape smooth_bump_shape(double z0) {
  auto core = [z0](double z, int order) -> double {
    const double s = z / z0;
    const double u = 1.0 - s * s;
    if (u <= 0.0) return 0.0;
    const double t = 1.0 / u;
    if (t > 700.0) return 0.0;
    const double f = std::exp(-t);
    if (order == 0) return f;
    const double g1 = -2.0 * s * t * t;  // d/ds of -1/(1-s^2)
    if (order == 1) return f * g1 / z0;
    const double g2 = -2.0 * (1.0 + 3.0 * s * s) * t * t * t;
    return f * (g1 * g1 + g2) / (z0 * z0);
  };
  return {[core](double z) { return core(z, 0); },
          [core](double z) { return core(z, 1); },
          [core](double z) { return core(z, 2); }};
}

// (1-s^2)^4 on |s| < 1. C^3 across the boundary; enough regularity for
// grid experiments, with cheap exact derivatives.
inline PulseShape polynomial_shape(double z0) {
  auto core = [z0](double z, int order) -> double {
    const double s = z / z0;
    const double u = 1.0 - s * s;
    if (u <= 0.0) return 0.0;
    if (order == 0) return u * u * u * u;
    if (order == 1) return -8.0 * s * u * u * u / z0;
    return u * u * (56.0 * s * s - 8.0) / (z0 * z0);
  };
  return {[core](double z) { return core(z, 0); },
          [core](double z) { return core(z, 1); },
          [core](double z) { return core(z, 2); }};
}

// Gaussian cut to [-z0, z0] and shifted to vanish at the boundary:
// (exp(-c s^2) - exp(-c)) / (1 - exp(-c)). The first derivative has a
// small jump (~ 2c e^{-c}) at the support edge.
inline PulseShape truncated_gaussian_shape(double z0) {
  constexpr double c = 8.0;
  const double floor_v = std::exp(-c);
  const double norm = 1.0 - floor_v;
  auto core = [z0, floor_v, norm](double z, int order) -> double {
    const double s = z / z0;
    if (std::abs(s) >= 1.0) return 0.0;
    const double e = std::exp(-c * s * s);
    if (order == 0) return (e - floor_v) / norm;
    if (order == 1) return -2.0 * c * s * e / (norm * z0);
    return 2.0 * c * (2.0 * c * s * s - 1.0) * e / (norm * z0 * z0);
  };
  return {[core](double z) { return core(z, 0); },
          [core](double z) { return core(z, 1); },
          [core](double z) { return core(z, 2); }};
}

}  // namespace detail

/// Separable profile U(r, z) = amplitude * envelope(r) * shape(z), with
/// shape supported in [-z0, z0]. Derivatives are analytic members; the
/// closed forms downstream rely on them being exact, so numerical
/// differentiation of profiles is not used anywhere.
struct PulseProfile {
  double amplitude = 0.0;
  double z0 = 1.0;
  PulseShape shape;
  Envelope envelope = Envelope::constant();

  double value(double r, double z) const {
    return amplitude * envelope.value(r) * shape.value(z);
  }
  double dz(double r, double z) const {
    return amplitude * envelope.value(r) * shape.deriv(z);
  }
  double dr(double r, double z) const {
    return amplitude * envelope.deriv(r) * shape.value(z);
  }

  static PulseProfile zero(double z0) {
    if (!(z0 > 0.0)) throw InvalidParameterError("z0 must be positive");
    PulseShape s{[](double) { return 0.0; }, [](double) { return 0.0; },
                 [](double) { return 0.0; }};
    return PulseProfile{0.0, z0, std::move(s), Envelope::constant()};
  }
};

/// Build a standard test profile with constant envelope.
inline PulseProfile make_bump(double amplitude, double z0, BumpKind kind) {
  if (!(z0 > 0.0) || !std::isfinite(z0))
    throw InvalidParameterError("z0 must be positive");
  if (!std::isfinite(amplitude))
    throw InvalidParameterError("amplitude must be finite");
  PulseShape shape;
  switch (kind) {
    case BumpKind::SmoothBump: shape = detail::smooth_bump_shape(z0); break;
    case BumpKind::Polynomial: shape = detail::polynomial_shape(z0); break;
    case BumpKind::TruncatedGaussian:
      shape = detail::truncated_gaussian_shape(z0);
      break;
  }
  return PulseProfile{amplitude, z0, std::move(shape), Envelope::constant()};
}

/// Profile representing d_z U. Requires the shape's second derivative.
inline PulseProfile derivative_profile(const PulseProfile& u) {
  if (!u.shape.deriv2)
    throw InvalidParameterError(
        "derivative_profile needs a shape with a second derivative");
  PulseShape s{u.shape.deriv, u.shape.deriv2, nullptr};
  return PulseProfile{u.amplitude, u.z0, std::move(s), u.envelope};
}

/// Characteristic data of the reduced system:
///   P_-(r, z) = r U1(r, z) + r d_z U0(r, z)
///   P_+(r, z) = r U1(r, z) - r d_z U0(r, z)
///   P_1(r, z) = U0(r, z) + r d_r U0(r, z)
/// All three vanish for |z| >= z0 (the evaluators enforce this, so direct
/// constructions from raw callables inherit the support automatically).
class ReducedData {
 public:
  using Field = std::function<double(double, double)>;

  ReducedData(const PulseProfile& u0, const PulseProfile& u1)
      : z0_(u0.z0),
        p_minus_([u0, u1](double r, double z) {
          return r * u1.value(r, z) + r * u0.dz(r, z);
        }),
        p_plus_([u0, u1](double r, double z) {
          return r * u1.value(r, z) - r * u0.dz(r, z);
        }),
        p_one_([u0](double r, double z) {
          return u0.value(r, z) + r * u0.dr(r, z);
        }) {
    if (u0.z0 != u1.z0)
      throw InvalidParameterError("U0 and U1 must share the support radius z0");
  }

  /// Synthetic data for tests and ray studies. Callables are only consulted
  /// for |z| < z0.
  ReducedData(Field p_minus, Field p_plus, Field p_one, double z0)
      : z0_(z0),
        p_minus_(std::move(p_minus)),
        p_plus_(std::move(p_plus)),
        p_one_(std::move(p_one)) {
    if (!(z0 > 0.0)) throw InvalidParameterError("z0 must be positive");
  }

  double p_minus(double r, double z) const {
    return std::abs(z) >= z0_ ? 0.0 : p_minus_(r, z);
  }
  double p_plus(double r, double z) const {
    return std::abs(z) >= z0_ ? 0.0 : p_plus_(r, z);
  }
  double p_one(double r, double z) const {
    return std::abs(z) >= z0_ ? 0.0 : p_one_(r, z);
  }
  double z0() const { return z0_; }

 private:
  double z0_;
  Field p_minus_;
  Field p_plus_;
  Field p_one_;
};

inline ReducedData reduce(const PulseProfile& u0, const PulseProfile& u1) {
  return ReducedData(u0, u1);
}

struct InitialValues {
  double v_minus = 0.0;
  double v_plus = 0.0;
};

/// Initial values of the reduced system at radius r:
///   v_-(0, r) = P_-(r, (r-r0)/eps) + eps P_1(r, (r-r0)/eps)
///   v_+(0, r) = P_+(r, (r-r0)/eps) - eps P_1(r, (r-r0)/eps)
/// Zero whenever |r - r0| > z0 * eps.
inline InitialValues initial_data(const ReducedData& data,
                                  const ProblemParams& params, double r) {
  params.validate();
  params.require_positive_horizon();
  if (!(r >= 0.0)) throw InvalidParameterError("r must be nonnegative");
  const double z = (r - params.r0) / params.eps;
  const double p1 = data.p_one(r, z);
  return {data.p_minus(r, z) + params.eps * p1,
          data.p_plus(r, z) - params.eps * p1};
}

}  // namespace pulsefocus
