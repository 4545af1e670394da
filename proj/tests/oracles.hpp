// Test-only oracles, independent of the implementation paths they check:
// adaptive Simpson quadrature and a fixed-step RK4 integrator for one-ray
// ODEs.
#pragma once

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson_panel(const std::function<double(double)>& f, double a,
                            double b) {
  return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol, int depth = 28) {
  const double whole = simpson_panel(f, a, b);
  const double mid = 0.5 * (a + b);
  const double left = simpson_panel(f, a, mid);
  const double right = simpson_panel(f, mid, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, mid, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, mid, b, 0.5 * tol, depth - 1);
}

/// Classic RK4 with n fixed steps for dv/dt = f(t, v).
inline double rk4(const std::function<double(double, double)>& f, double t0,
                  double v0, double t1, int n) {
  const double h = (t1 - t0) / n;
  double t = t0, v = v0;
  for (int i = 0; i < n; ++i) {
    const double k1 = f(t, v);
    const double k2 = f(t + 0.5 * h, v + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, v + 0.5 * h * k2);
    const double k4 = f(t + h, v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + (i + 1) * h;
  }
  return v;
}

}  // namespace oracle
