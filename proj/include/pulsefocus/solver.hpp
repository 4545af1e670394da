// Unit-CFL solver for the mixed problem on a staggered radial grid:
// exact characteristic transport (index shifts), sign-flipped reflection
// at r = 0, Strang-split stiff source substepping, blow-up detection.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "pulsefocus/errors.hpp"
#include "pulsefocus/profiles.hpp"
#include "pulsefocus/regimes.hpp"

namespace pulsefocus {

/// Staggered grid: cell centers r_j = (j + 1/2) dr, so every evaluation
/// point keeps r > 0 and the r^{1-p} factor stays finite. dt = dr exactly
/// (unit CFL): transport is an index shift.
struct Grid {
  double dr = 0.0;
  std::size_t n_cells = 0;
  double t_final = 0.0;
  double initial_sup = 0.0;  ///< sup |v_pm| at t = 0; fixes the blow-up threshold

  double dt() const { return dr; }
  double r_center(std::size_t j) const {
    return (static_cast<double>(j) + 0.5) * dr;
  }
  /// Values past 1e6 times the initial sup count as blow-up.
  double blowup_threshold() const {
    return initial_sup > 0.0 ? 1e6 * initial_sup
                             : std::numeric_limits<double>::infinity();
  }
};

struct BlowupBracket {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

/// One time level of (v_-, v_+). When blown_up is set the values are the
/// last finite figures observed during the failed step (cells may sit at
/// slightly different sub-times); they are kept so the terminal amplitude
/// is measurable, but they are not a solution sample.
struct GridState {
  double t = 0.0;
  std::vector<double> v_minus;
  std::vector<double> v_plus;
  bool blown_up = false;
  BlowupBracket bracket{};
};

struct SubstepStats {
  std::uint64_t source_updates = 0;
  std::uint32_t max_substeps = 0;
};

struct Trajectory {
  ProblemParams params;
  Grid grid;
  int resolution = 0;  ///< cells per pulse width 2 z0 eps
  std::vector<GridState> snapshots;
  SubstepStats stats{};
  bool blown_up = false;
  BlowupBracket bracket{};
};

namespace detail {

struct SourceResult {
  double s_end = 0.0;
  bool tripped = false;     ///< hit the blow-up threshold or lost finiteness
  bool converged = false;
  std::uint32_t substeps = 0;
};

/// Integrate ds/dt = -coef |s|^{p-1} s over [0, h] with explicit midpoint,
/// doubling the substep count until two consecutive sweeps agree to 1e-10
/// relative. A sweep aborts (keeping the last finite value) as soon as an
/// iterate passes trip_limit or stops being finite; if the cap of 2^20
/// substeps is reached without agreement the cell is reported tripped.
inline SourceResult integrate_power_ode(double s0, double coef, double h,
                                        double p, double trip_limit) {
  SourceResult out;
  if (s0 == 0.0 || coef == 0.0 || h == 0.0) {
    out.s_end = s0;
    out.converged = true;
    out.substeps = 1;
    return out;
  }
  auto f = [coef, p](double s) {
    return -coef * std::pow(std::abs(s), p - 1.0) * s;
  };
  constexpr std::uint32_t kMaxSubsteps = 1u << 20;
  constexpr double kTol = 1e-10;

  double prev = std::numeric_limits<double>::quiet_NaN();
  bool have_prev = false;
  double last_finite = s0;  // finest pre-trip value seen
  bool last_sweep_tripped = false;

  for (std::uint32_t m = 1;; m *= 2) {
    const double hs = h / static_cast<double>(m);
    double s = s0;
    bool tripped = false;
    for (std::uint32_t k = 0; k < m; ++k) {
      const double mid = s + 0.5 * hs * f(s);
      if (!std::isfinite(mid) || std::abs(mid) > trip_limit) {
        tripped = true;
        break;
      }
      const double next = s + hs * f(mid);
      if (!std::isfinite(next) || std::abs(next) > trip_limit) {
        tripped = true;
        break;
      }
      s = next;
    }
    out.substeps = m;
    last_sweep_tripped = tripped;
    if (tripped) {
      last_finite = s;
      have_prev = false;  // a finer sweep must re-establish agreement
    } else {
      const double scale =
          std::max({std::abs(s), std::abs(prev), std::abs(s0)});
      if (have_prev && std::abs(s - prev) <= kTol * scale) {
        out.s_end = s;
        out.converged = true;
        return out;
      }
      prev = s;
      have_prev = true;
      last_finite = s;
    }
    if (m >= kMaxSubsteps) {
      // Either a genuine singularity inside the step or hopeless stiffness.
      out.s_end = last_finite;
      out.tripped = true;
      out.converged = !last_sweep_tripped;
      return out;
    }
  }
}

}  // namespace detail

/// Build the grid and sample the initial data. The radial domain covers
/// [0, r0 + t_final + z0*eps] plus margin, so waves never reach the right
/// boundary and no artificial outflow condition is needed.
inline std::pair<Grid, GridState> initialize(const ReducedData& data,
                                             const ProblemParams& params,
                                             int resolution, double t_final) {
  params.validate();
  params.require_positive_horizon();
  if (resolution < 16)
    throw ConfigError("resolution must be at least 16 cells per pulse");
  if (!(t_final >= 0.0) || !std::isfinite(t_final))
    throw ConfigError("t_final must be finite and nonnegative");

  Grid grid;
  grid.dr = 2.0 * params.z0 * params.eps / static_cast<double>(resolution);
  grid.t_final = t_final;
  const double r_max = params.r0 + t_final + params.z0 * params.eps;
  grid.n_cells = static_cast<std::size_t>(std::ceil(r_max / grid.dr)) + 2;

  GridState state;
  state.t = 0.0;
  state.v_minus.resize(grid.n_cells, 0.0);
  state.v_plus.resize(grid.n_cells, 0.0);
  double sup = 0.0;
  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    const auto iv = initial_data(data, params, grid.r_center(j));
    state.v_minus[j] = iv.v_minus;
    state.v_plus[j] = iv.v_plus;
    sup = std::max({sup, std::abs(iv.v_minus), std::abs(iv.v_plus)});
  }
  grid.initial_sup = sup;
  return {grid, state};
}

namespace detail {

// Half source step: at each cell the pair (v_-, v_+) receives the same
// increment, so d = v_- - v_+ is constant and s = v_- + v_+ obeys
// ds/dt = -(a 2^{1-p} eps^alpha r^{1-p}) |s|^{p-1} s.
// Returns false when a cell tripped the blow-up guard.
inline bool half_source(const Grid& grid, GridState& st,
                        const ProblemParams& params, double h,
                        SubstepStats& stats) {
  if (params.a == 0.0) return true;
  const double base =
      params.a * std::pow(2.0, 1.0 - params.p) * std::pow(params.eps, params.alpha);
  const double trip = 2.0 * grid.blowup_threshold();
  bool ok = true;
  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    const double vm = st.v_minus[j];
    const double vp = st.v_plus[j];
    const double s0 = vm + vp;
    if (s0 == 0.0) continue;
    const double coef = base * std::pow(grid.r_center(j), 1.0 - params.p);
    const auto res = integrate_power_ode(s0, coef, h, params.p, trip);
    ++stats.source_updates;
    stats.max_substeps = std::max(stats.max_substeps, res.substeps);
    const double d = vm - vp;
    st.v_minus[j] = 0.5 * (d + res.s_end);
    st.v_plus[j] = 0.5 * (res.s_end - d);
    if (res.tripped) ok = false;
  }
  return ok;
}

// Exact unit-CFL transport with sign-flipped reflection: v_- shifts one
// cell inward, v_+ one cell outward, and the v_- content leaving cell 0
// re-enters cell 0's v_+ with flipped sign.
inline void shift_transport(GridState& st) {
  auto& vm = st.v_minus;
  auto& vp = st.v_plus;
  const std::size_t n = vm.size();
  if (vp[n - 1] != 0.0)
    throw Error("outgoing wave reached the right boundary: domain under-sized");
  const double reflected = -vm[0];
  for (std::size_t j = 0; j + 1 < n; ++j) vm[j] = vm[j + 1];
  vm[n - 1] = 0.0;
  for (std::size_t j = n - 1; j > 0; --j) vp[j] = vp[j - 1];
  vp[0] = reflected;
}

}  // namespace detail

/// One Strang step: half source, exact shift, half source. On blow-up the
/// returned state keeps the last finite values, carries the bracket
/// [t, t+dt], and is flagged; it must not be stepped further.
inline GridState step(const Grid& grid, const GridState& state,
                      const ProblemParams& params,
                      SubstepStats* stats = nullptr) {
  if (state.blown_up)
    throw InvalidParameterError("cannot step a blown-up state");
  if (state.v_minus.size() != grid.n_cells ||
      state.v_plus.size() != grid.n_cells)
    throw InvalidParameterError("state does not match the grid");

  SubstepStats local{};
  SubstepStats& st = stats ? *stats : local;
  const double dt = grid.dt();
  GridState next = state;

  auto fail = [&](GridState s) {
    s.t = state.t + dt;
    s.blown_up = true;
    s.bracket = {state.t, state.t + dt};
    return s;
  };

  if (!detail::half_source(grid, next, params, 0.5 * dt, st))
    return fail(std::move(next));
  detail::shift_transport(next);
  if (!detail::half_source(grid, next, params, 0.5 * dt, st))
    return fail(std::move(next));

  next.t = state.t + dt;
  double sup = 0.0;
  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    sup = std::max({sup, std::abs(next.v_minus[j]), std::abs(next.v_plus[j])});
    if (!std::isfinite(next.v_minus[j]) || !std::isfinite(next.v_plus[j]))
      return fail(std::move(next));
  }
  if (sup > grid.blowup_threshold()) return fail(std::move(next));
  return next;
}

/// March the state forward, recording snapshots at the nearest grid time
/// (dt-aligned, never interpolated). On blow-up the trajectory truncates:
/// the flagged terminal state is appended and the bracket recorded.
inline Trajectory run(const Grid& grid, const GridState& state0,
                      const ProblemParams& params,
                      std::span<const double> snapshot_times,
                      int resolution = 0) {
  params.validate();
  const double dt = grid.dt();
  std::vector<std::int64_t> indices;
  indices.reserve(snapshot_times.size());
  for (double t : snapshot_times) {
    if (!(t >= 0.0) || t > grid.t_final + 0.5 * dt)
      throw InvalidParameterError("snapshot times must lie in [0, t_final]");
    indices.push_back(static_cast<std::int64_t>(std::llround(t / dt)));
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

  Trajectory traj;
  traj.params = params;
  traj.grid = grid;
  traj.resolution =
      resolution > 0
          ? resolution
          : static_cast<int>(
                std::llround(2.0 * params.z0 * params.eps / grid.dr));

  GridState current = state0;
  std::size_t next_idx = 0;
  if (!indices.empty() && indices[0] == 0) {
    traj.snapshots.push_back(current);
    ++next_idx;
  }
  const std::int64_t last = indices.empty() ? 0 : indices.back();
  for (std::int64_t k = 1; k <= last; ++k) {
    current = step(grid, current, params, &traj.stats);
    current.t = static_cast<double>(k) * dt;  // avoid accumulation drift
    if (current.blown_up) {
      current.bracket = {static_cast<double>(k - 1) * dt,
                         static_cast<double>(k) * dt};
      traj.snapshots.push_back(current);
      traj.blown_up = true;
      traj.bracket = current.bracket;
      return traj;
    }
    if (next_idx < indices.size() && indices[next_idx] == k) {
      traj.snapshots.push_back(current);
      ++next_idx;
    }
  }
  return traj;
}

/// Self-similar rescaling psi(tau, rho) = eps^{-gamma} v(eps tau, eps rho):
/// values scale by eps^{-gamma}, coordinates by 1/eps.
inline std::pair<Grid, GridState> to_scaled(const Grid& grid,
                                            const GridState& state,
                                            const ProblemParams& params) {
  const double gamma = gamma_exponent(params);
  const double factor = std::pow(params.eps, -gamma);
  Grid g = grid;
  g.dr = grid.dr / params.eps;
  g.t_final = grid.t_final / params.eps;
  g.initial_sup = grid.initial_sup * factor;
  GridState s = state;
  s.t = state.t / params.eps;
  for (auto& v : s.v_minus) v *= factor;
  for (auto& v : s.v_plus) v *= factor;
  s.bracket = {state.bracket.t_lo / params.eps,
               state.bracket.t_hi / params.eps};
  return {g, s};
}

inline std::pair<Grid, GridState> from_scaled(const Grid& grid,
                                              const GridState& state,
                                              const ProblemParams& params) {
  const double gamma = gamma_exponent(params);
  const double factor = std::pow(params.eps, gamma);
  Grid g = grid;
  g.dr = grid.dr * params.eps;
  g.t_final = grid.t_final * params.eps;
  g.initial_sup = grid.initial_sup * factor;
  GridState s = state;
  s.t = state.t * params.eps;
  for (auto& v : s.v_minus) v *= factor;
  for (auto& v : s.v_plus) v *= factor;
  s.bracket = {state.bracket.t_lo * params.eps,
               state.bracket.t_hi * params.eps};
  return {g, s};
}

}  // namespace pulsefocus
