#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pulsefocus/closedform.hpp"
#include "pulsefocus/solver.hpp"

using namespace pulsefocus;

namespace {

ReducedData bump_data(double amp, double z0 = 1.0) {
  return reduce(PulseProfile::zero(z0),
                make_bump(amp, z0, BumpKind::SmoothBump));
}

// U0 = amp * bump, U1 = d_z U0: outgoing data vanishes identically.
ReducedData focusing_only_data(double amp, double z0 = 1.0) {
  const auto u0 = make_bump(amp, z0, BumpKind::SmoothBump);
  return reduce(u0, derivative_profile(u0));
}

double sup_diff_vs_free(const Trajectory& traj, const ReducedData& data) {
  double worst = 0.0;
  for (const auto& st : traj.snapshots) {
    for (std::size_t j = 0; j < traj.grid.n_cells; ++j) {
      const auto ref =
          eval_free(data, traj.params, st.t, traj.grid.r_center(j));
      worst = std::max({worst, std::abs(st.v_minus[j] - ref.v_minus),
                        std::abs(st.v_plus[j] - ref.v_plus)});
    }
  }
  return worst;
}

// Sixth-order interpolation of fine-grid cell values at the midpoint
// between centers m and m+1; coarse centers sit exactly there under even
// refinement. High order keeps the comparison floor far below the
// splitting error.
double interp_fine(const std::vector<double>& v, std::size_t m) {
  return (3.0 * v[m - 2] - 25.0 * v[m - 1] + 150.0 * v[m] +
          150.0 * v[m + 1] - 25.0 * v[m + 2] + 3.0 * v[m + 3]) /
         256.0;
}

}  // namespace

TEST_CASE("initialize: spacing, support, zero data") {
  ProblemParams params{3.0, 1.0, 0.0, 1.0, 1.0, 0.05};
  const auto data = bump_data(1.0);
  auto [grid, state] = initialize(data, params, 64, 1.0);
  CHECK(grid.dr == Catch::Approx(0.1 / 64.0));
  CHECK(grid.dt() == grid.dr);
  CHECK(grid.r_center(grid.n_cells - 1) >= params.r0 + 1.0 + 0.05);

  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    if (std::abs(grid.r_center(j) - params.r0) > params.z0 * params.eps) {
      CHECK(state.v_minus[j] == 0.0);
      CHECK(state.v_plus[j] == 0.0);
    }
  }

  auto [gz, sz] = initialize(reduce(PulseProfile::zero(1.0),
                                    PulseProfile::zero(1.0)),
                             params, 64, 1.0);
  for (double v : sz.v_minus) CHECK(v == 0.0);
  for (double v : sz.v_plus) CHECK(v == 0.0);
  CHECK(gz.initial_sup == 0.0);

  CHECK_THROWS_AS(initialize(data, params, 8, 1.0), ConfigError);
  ProblemParams touching{3.0, 1.0, 0.0, 0.04, 1.0, 0.05};
  CHECK_THROWS_AS(initialize(data, touching, 64, 1.0),
                  InvalidParameterError);
}

TEST_CASE("free transport is exact through the reflection") {
  ProblemParams params{3.0, 1.0, 0.0, 1.0, 1.0, 0.1};
  const auto data = bump_data(1.0);
  auto [grid, state0] = initialize(data, params, 32, 2.2);
  const std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.2};
  const auto traj = run(grid, state0, params, times, 32);
  REQUIRE(traj.snapshots.size() == 5);
  CHECK(sup_diff_vs_free(traj, data) <= 1e-10);
}

TEST_CASE("reflection boundary trace stays Lipschitz-small") {
  ProblemParams params{3.0, 1.0, 0.0, 1.0, 1.0, 0.1};
  const auto data = bump_data(1.0);
  auto [grid, state0] = initialize(data, params, 32, 2.2);
  // Lipschitz constant of the sampled P_- profile along the radius.
  double lip = 0.0;
  for (std::size_t j = 0; j + 1 < grid.n_cells; ++j) {
    const auto a = initial_data(data, params, grid.r_center(j));
    const auto b = initial_data(data, params, grid.r_center(j + 1));
    lip = std::max(lip, std::abs(b.v_minus - a.v_minus) / grid.dr);
  }
  GridState st = state0;
  double worst = 0.0;
  const int steps = static_cast<int>(std::llround(2.2 / grid.dt()));
  for (int k = 0; k < steps; ++k) {
    st = step(grid, st, params);
    worst = std::max(worst, std::abs(st.v_minus[0] + st.v_plus[0]));
  }
  CHECK(worst <= 1.01 * lip * grid.dr + 1e-12);
}

TEST_CASE("discrete finite speed") {
  const auto data = bump_data(1.2);

  SECTION("a = 0: exact shells") {
    ProblemParams params{3.0, 1.0, 0.0, 1.0, 1.0, 0.1};
    auto [grid, state0] = initialize(data, params, 32, 0.6);
    auto traj = run(grid, state0, params, std::vector<double>{0.6}, 32);
    const auto& st = traj.snapshots.back();
    const double w = params.z0 * params.eps + grid.dr;  // widened by one cell
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
      const double r = grid.r_center(j);
      if (std::abs(r + st.t - params.r0) > w) CHECK(st.v_minus[j] == 0.0);
      if (std::abs(r - st.t - params.r0) > w &&
          std::abs(st.t - r - params.r0) > w)
        CHECK(st.v_plus[j] == 0.0);
    }
  }

  SECTION("a != 0: the expanding data cone") {
    ProblemParams params{3.0, 0.5, 2.0, 1.0, 1.0, 0.1};
    auto [grid, state0] = initialize(data, params, 32, 0.6);
    auto traj = run(grid, state0, params, std::vector<double>{0.6}, 32);
    const auto& st = traj.snapshots.back();
    const double w = params.z0 * params.eps + st.t + grid.dr;
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
      if (std::abs(grid.r_center(j) - params.r0) > w) {
        CHECK(st.v_minus[j] == 0.0);
        CHECK(st.v_plus[j] == 0.0);
      }
    }
  }
}

TEST_CASE("single-cell pulse follows the one-ray ODE to second order per step") {
  const auto zero =
      reduce(PulseProfile::zero(1.0), PulseProfile::zero(1.0));
  auto one_step_error = [&](int resolution) {
    ProblemParams params{3.0, 0.5, 3.0, 1.0, 1.0, 0.1};
    auto [grid, state0] = initialize(zero, params, resolution, 0.5);
    grid.initial_sup = 1.0;
    const std::size_t j0 = grid.n_cells / 2;
    state0.v_minus[j0] = 1.0;
    const GridState next = step(grid, state0, params);
    const double ea = std::pow(params.eps, params.alpha);
    auto rhs = [&](double t, double v) {
      const double r = grid.r_center(j0) - t;
      return ea * std::pow(r, 1.0 - params.p) *
             (-params.a * std::pow(2.0, -params.p) *
              std::pow(std::abs(v), params.p - 1.0) * v);
    };
    const double v_ode = oracle::rk4(rhs, 0.0, 1.0, grid.dt(), 400);
    return std::abs(next.v_minus[j0 - 1] - v_ode);
  };
  const double e32 = one_step_error(32);
  const double e64 = one_step_error(64);
  CHECK(e32 < 1e-4);
  CHECK(e32 / e64 > 3.0);  // halving dt cuts the per-step gap ~4x
}

TEST_CASE("dissipative source strictly shrinks |v_- + v_+|") {
  ProblemParams params{3.0, 0.0, 1.5, 1.0, 1.0, 0.1};
  const auto zero =
      reduce(PulseProfile::zero(1.0), PulseProfile::zero(1.0));
  auto [grid, state0] = initialize(zero, params, 32, 0.5);
  grid.initial_sup = 1.0;
  const std::size_t j0 = grid.n_cells / 2;
  state0.v_minus[j0] = 0.8;  // other field zero at the cell
  const GridState next = step(grid, state0, params);
  // The v_- content moved to j0-1; the generated v_+ moved to j0+1.
  CHECK(std::abs(next.v_minus[j0 - 1]) < 0.8);
  CHECK(std::abs(next.v_minus[j0 - 1] + next.v_plus[j0 - 1]) < 0.8);
}

TEST_CASE("run: t_final = 0 keeps only the initial snapshot") {
  ProblemParams params{3.0, 1.0, 0.0, 1.0, 1.0, 0.1};
  const auto data = bump_data(1.0);
  auto [grid, state0] = initialize(data, params, 32, 0.0);
  const auto traj = run(grid, state0, params, std::vector<double>{0.0}, 32);
  REQUIRE(traj.snapshots.size() == 1);
  CHECK(traj.snapshots[0].t == 0.0);
  CHECK_FALSE(traj.blown_up);
}

TEST_CASE("grid convergence: second-order self-convergence on a smooth run") {
  ProblemParams params{3.0, 1.0, 4.0, 1.0, 1.0, 0.1};
  const auto data = bump_data(1.5);
  const double t_end = 0.5;
  auto solve = [&](int res) {
    auto [grid, state0] = initialize(data, params, res, t_end);
    return std::pair{grid,
                     run(grid, state0, params, std::vector<double>{t_end}, res)
                         .snapshots.back()};
  };
  auto [g32, s32] = solve(32);
  auto [g64, s64] = solve(64);
  auto [g256, ref] = solve(256);

  auto err_vs_ref = [&](const Grid& g, const GridState& s, int ratio) {
    double worst = 0.0;
    for (std::size_t j = 1; j + 2 < g.n_cells; ++j) {
      const std::size_t m = static_cast<std::size_t>(ratio) * j + ratio / 2;
      if (m + 4 >= g256.n_cells || m < 3) continue;
      worst = std::max(
          {worst, std::abs(s.v_minus[j] - interp_fine(ref.v_minus, m - 1)),
           std::abs(s.v_plus[j] - interp_fine(ref.v_plus, m - 1))});
    }
    return worst;
  };
  const double e32 = err_vs_ref(g32, s32, 8);
  const double e64 = err_vs_ref(g64, s64, 4);
  CHECK(e32 > 1e-9);  // above the source-integration noise floor
  const double ratio = e32 / e64;
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("accretive run records a bracket near the predicted root") {
  ProblemParams params{3.0, 0.0, -1.0, 1.0, 1.0, 0.1};
  const auto data = focusing_only_data(2.0);
  const auto pred = predicted_blowup_time(data, params);
  REQUIRE(pred.reason == AppValidityReason::DenominatorVanishes);

  const double t_final = params.prefocus_horizon() - 2.0 * (0.2 / 32.0);
  auto [grid, state0] = initialize(data, params, 32, t_final);
  std::vector<double> times;
  for (int k = 1; k <= 8; ++k) times.push_back(t_final * k / 8.0);
  const auto traj = run(grid, state0, params, times, 32);
  REQUIRE(traj.blown_up);
  const double tol = 5.0 * grid.dt() + params.z0 * params.eps;
  const double dist = std::max({0.0, traj.bracket.t_lo - pred.t_max,
                                pred.t_max - traj.bracket.t_hi});
  CHECK(dist <= tol);

  // Terminal state is flagged, finite, and large.
  const auto& last = traj.snapshots.back();
  CHECK(last.blown_up);
  double sup = 0.0;
  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    REQUIRE(std::isfinite(last.v_minus[j]));
    REQUIRE(std::isfinite(last.v_plus[j]));
    sup = std::max({sup, std::abs(last.v_minus[j]), std::abs(last.v_plus[j])});
  }
  CHECK(sup >= 1e3 * grid.initial_sup);
  CHECK_THROWS_AS(step(grid, last, params), InvalidParameterError);
}

TEST_CASE("scaled coordinates round-trip") {
  ProblemParams params{3.0, 1.0, 1.0, 1.0, 1.0, 0.1};
  const auto data = bump_data(1.0);
  auto [grid, state0] = initialize(data, params, 32, 0.3);
  auto traj = run(grid, state0, params, std::vector<double>{0.3}, 32);
  const GridState& st = traj.snapshots.back();

  auto [sg, ss] = to_scaled(grid, st, params);
  CHECK(ss.t == Catch::Approx(st.t / params.eps));
  CHECK(sg.dr == Catch::Approx(grid.dr / params.eps));
  auto [bg, bs] = from_scaled(sg, ss, params);
  CHECK(bg.dr == Catch::Approx(grid.dr).epsilon(1e-14));
  CHECK(bs.t == Catch::Approx(st.t).epsilon(1e-14));
  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    CHECK(bs.v_minus[j] ==
          Catch::Approx(st.v_minus[j]).epsilon(1e-14).margin(1e-300));
    CHECK(bs.v_plus[j] ==
          Catch::Approx(st.v_plus[j]).epsilon(1e-14).margin(1e-300));
  }

  SECTION("gamma = 0 leaves values unchanged") {
    ProblemParams flat{3.0, 2.0, 1.0, 1.0, 1.0, 0.1};  // alpha = p - 1
    auto [fg, fs] = to_scaled(grid, st, flat);
    for (std::size_t j = 0; j < grid.n_cells; ++j)
      CHECK(fs.v_minus[j] == st.v_minus[j]);
    CHECK(fs.t == Catch::Approx(st.t / flat.eps));
  }

  SECTION("zero state maps to zero state") {
    GridState z = state0;
    std::fill(z.v_minus.begin(), z.v_minus.end(), 0.0);
    std::fill(z.v_plus.begin(), z.v_plus.end(), 0.0);
    auto [zg, zs] = to_scaled(grid, z, params);
    for (double v : zs.v_minus) CHECK(v == 0.0);
    for (double v : zs.v_plus) CHECK(v == 0.0);
  }
}

TEST_CASE("outflow at the right boundary is a hard error") {
  ProblemParams params{3.0, 1.0, 0.0, 1.0, 1.0, 0.1};
  const auto data = bump_data(1.0);
  auto [grid, state0] = initialize(data, params, 32, 0.3);
  state0.v_plus[grid.n_cells - 1] = 0.5;
  CHECK_THROWS_AS(step(grid, state0, params), Error);
}
