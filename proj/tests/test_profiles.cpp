#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "pulsefocus/profiles.hpp"

using namespace pulsefocus;

TEST_CASE("smooth bump values and derivatives") {
  const auto bump = make_bump(1.0, 1.0, BumpKind::SmoothBump);
  CHECK(bump.value(1.0, 0.0) == Catch::Approx(std::exp(-1.0)));
  CHECK(bump.dz(1.0, 0.0) == 0.0);  // even shape
  CHECK(bump.value(1.0, 1.0) == 0.0);
  CHECK(bump.value(1.0, -1.0) == 0.0);
  CHECK(bump.value(1.0, 5.0) == 0.0);

  // Analytic derivative agrees with a central difference inside the support.
  for (double z : {-0.8, -0.3, 0.2, 0.6, 0.95}) {
    const double h = 1e-6;
    const double fd =
        (bump.value(1.0, z + h) - bump.value(1.0, z - h)) / (2.0 * h);
    CHECK(bump.dz(1.0, z) == Catch::Approx(fd).margin(1e-7));
  }
}

TEST_CASE("all bump kinds vanish at the support boundary") {
  for (auto kind : {BumpKind::SmoothBump, BumpKind::Polynomial,
                    BumpKind::TruncatedGaussian}) {
    for (double z0 : {0.5, 1.0, 2.0}) {
      const auto prof = make_bump(2.0, z0, kind);
      CHECK(prof.value(1.0, z0) == 0.0);
      CHECK(prof.value(1.0, -z0) == 0.0);
      CHECK(std::abs(prof.value(1.0, 0.0)) > 0.0);
      // Shape and derivative bounded, derivative supported in [-z0, z0].
      double sup_v = 0.0, sup_d = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        const double z = -2.0 * z0 + 4.0 * z0 * i / 1000.0;
        sup_v = std::max(sup_v, std::abs(prof.value(1.0, z)));
        sup_d = std::max(sup_d, std::abs(prof.dz(1.0, z)));
        if (std::abs(z) >= z0) CHECK(prof.dz(1.0, z) == 0.0);
      }
      CHECK(std::isfinite(sup_v));
      CHECK(std::isfinite(sup_d));
    }
  }
}

TEST_CASE("second derivatives are analytic where provided") {
  for (auto kind : {BumpKind::SmoothBump, BumpKind::Polynomial,
                    BumpKind::TruncatedGaussian}) {
    const auto prof = make_bump(1.0, 1.0, kind);
    REQUIRE(prof.shape.deriv2);
    for (double z : {-0.7, -0.2, 0.1, 0.5, 0.9}) {
      const double h = 1e-5;
      const double fd =
          (prof.shape.deriv(z + h) - prof.shape.deriv(z - h)) / (2.0 * h);
      CHECK(prof.shape.deriv2(z) == Catch::Approx(fd).margin(1e-5));
    }
  }
}

TEST_CASE("make_bump rejects bad support radius") {
  CHECK_THROWS_AS(make_bump(1.0, 0.0, BumpKind::SmoothBump),
                  InvalidParameterError);
  CHECK_THROWS_AS(make_bump(1.0, -1.0, BumpKind::Polynomial),
                  InvalidParameterError);
}

TEST_CASE("reduction formulas") {
  const auto u1 = make_bump(0.7, 1.0, BumpKind::SmoothBump);

  SECTION("U0 = 0 gives P_-+ = r U1 and P_1 = 0") {
    const auto data = reduce(PulseProfile::zero(1.0), u1);
    for (double r : {0.5, 1.0, 2.0})
      for (double z : {-0.5, 0.0, 0.4}) {
        CHECK(data.p_minus(r, z) == Catch::Approx(r * u1.value(r, z)));
        CHECK(data.p_plus(r, z) == Catch::Approx(r * u1.value(r, z)));
        CHECK(data.p_one(r, z) == 0.0);
      }
  }

  SECTION("U1 = 0 gives opposite characteristic data") {
    const auto u0 = make_bump(1.3, 1.0, BumpKind::Polynomial);
    const auto data = reduce(u0, PulseProfile::zero(1.0));
    for (double r : {0.5, 1.0, 2.0})
      for (double z : {-0.5, 0.0, 0.4}) {
        CHECK(data.p_minus(r, z) == Catch::Approx(-data.p_plus(r, z)));
        CHECK(data.p_minus(r, z) == Catch::Approx(r * u0.dz(r, z)));
      }
  }

  SECTION("r-independent envelope gives P_1 = U0") {
    const auto u0 = make_bump(1.1, 1.0, BumpKind::SmoothBump);
    const auto data = reduce(u0, PulseProfile::zero(1.0));
    for (double r : {0.2, 1.0, 3.0})
      CHECK(data.p_one(r, 0.3) == Catch::Approx(u0.value(r, 0.3)));
  }

  SECTION("sum identity P_- + P_+ = 2 r U1 with nontrivial envelope") {
    auto u0 = make_bump(0.9, 1.0, BumpKind::SmoothBump);
    u0.envelope = Envelope::linear(0.5, 1.0);
    const auto data = reduce(u0, u1);
    for (double r : {0.5, 1.0, 1.7})
      for (double z : {-0.8, -0.1, 0.0, 0.3, 0.77})
        CHECK(data.p_minus(r, z) + data.p_plus(r, z) ==
              Catch::Approx(2.0 * r * u1.value(r, z)).margin(1e-14));
  }

  SECTION("mismatched z0 rejected") {
    CHECK_THROWS_AS(reduce(PulseProfile::zero(2.0), u1),
                    InvalidParameterError);
  }
}

TEST_CASE("reduce is linear in the profiles") {
  const double c = 2.75;
  auto u0 = make_bump(0.4, 1.0, BumpKind::Polynomial);
  auto u1 = make_bump(0.9, 1.0, BumpKind::SmoothBump);
  auto u0c = u0;
  u0c.amplitude *= c;
  auto u1c = u1;
  u1c.amplitude *= c;
  const auto base = reduce(u0, u1);
  const auto scaled = reduce(u0c, u1c);
  for (double r : {0.5, 1.0, 2.0})
    for (double z : {-0.6, 0.0, 0.2, 0.9}) {
      CHECK(scaled.p_minus(r, z) ==
            Catch::Approx(c * base.p_minus(r, z)).margin(1e-14));
      CHECK(scaled.p_plus(r, z) ==
            Catch::Approx(c * base.p_plus(r, z)).margin(1e-14));
      CHECK(scaled.p_one(r, z) ==
            Catch::Approx(c * base.p_one(r, z)).margin(1e-14));
    }
}

TEST_CASE("derivative profile represents d_z U0") {
  const auto u0 = make_bump(2.0, 1.0, BumpKind::SmoothBump);
  const auto du = derivative_profile(u0);
  for (double z : {-0.9, -0.4, 0.0, 0.3, 0.8})
    CHECK(du.value(1.0, z) == Catch::Approx(u0.dz(1.0, z)));
  // U1 = d_z U0 makes the outgoing data vanish identically.
  const auto data = reduce(u0, du);
  for (double r : {0.5, 1.0, 2.0})
    for (double z : {-0.9, -0.2, 0.0, 0.5})
      CHECK(data.p_plus(r, z) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("initial data support and values") {
  const ProblemParams params{3.0, 1.0, 0.0, 1.0, 1.0, 0.05};
  const double a0 = 0.8, a1 = 1.2;
  const auto u0 = make_bump(a0, 1.0, BumpKind::SmoothBump);
  const auto u1 = make_bump(a1, 1.0, BumpKind::SmoothBump);
  const auto data = reduce(u0, u1);

  SECTION("vanishes outside |r - r0| <= z0 eps, sampled on 1000 points") {
    for (int i = 0; i <= 1000; ++i) {
      const double r = 3.0 * i / 1000.0;
      const auto iv = initial_data(data, params, r);
      if (std::abs(r - params.r0) > params.z0 * params.eps) {
        CHECK(iv.v_minus == 0.0);
        CHECK(iv.v_plus == 0.0);
      }
    }
  }

  SECTION("center values match direct evaluation of the reduction") {
    // At r = r0 the bump derivative vanishes, so
    // v_-+(0, r0) = r0 a1 e^{-1} +- eps a0 e^{-1}.
    const auto iv = initial_data(data, params, params.r0);
    const double core = std::exp(-1.0);
    CHECK(iv.v_minus ==
          Catch::Approx(params.r0 * a1 * core + params.eps * a0 * core));
    CHECK(iv.v_plus ==
          Catch::Approx(params.r0 * a1 * core - params.eps * a0 * core));
  }

  SECTION("with U0 = 0 the eps-correction is absent") {
    const auto pure = reduce(PulseProfile::zero(1.0), u1);
    const auto iv = initial_data(pure, params, 1.02);
    const double z = (1.02 - params.r0) / params.eps;
    CHECK(iv.v_minus == Catch::Approx(pure.p_minus(1.02, z)));
    CHECK(iv.v_plus == Catch::Approx(pure.p_plus(1.02, z)));
  }

  SECTION("data touching the origin is rejected") {
    const ProblemParams bad{3.0, 1.0, 0.0, 0.04, 1.0, 0.05};
    CHECK_THROWS_AS(initial_data(data, bad, 0.5), InvalidParameterError);
  }
}
