#include <catch2/catch_amalgamated.hpp>

#include "pulsefocus/regimes.hpp"

using namespace pulsefocus;

namespace {
ProblemParams params(double p, double alpha, double a = 0.0, double r0 = 1.0,
                     double z0 = 1.0, double eps = 0.1) {
  return ProblemParams{p, alpha, a, r0, z0, eps};
}
}  // namespace

TEST_CASE("classify reproduces the regime table") {
  auto cls = classify(params(3.0, 2.0));
  CHECK(cls.caustic == CausticRegime::Linear);
  CHECK(cls.propagation == PropagationRegime::Linear);

  cls = classify(params(3.0, 1.0));
  CHECK(cls.caustic == CausticRegime::Nonlinear);
  CHECK(cls.propagation == PropagationRegime::Linear);
  CHECK(cls.note == RegimeNote::CriticalCompanion);

  cls = classify(params(2.0, 0.0));
  CHECK(cls.caustic == CausticRegime::Nonlinear);
  CHECK(cls.propagation == PropagationRegime::Nonlinear);
  CHECK(cls.note == RegimeNote::None);  // alpha = 0 = p - 2 is covered

  cls = classify(params(4.0, 0.5));
  CHECK(cls.caustic == CausticRegime::Supercritical);
  CHECK(cls.propagation == PropagationRegime::Linear);
}

TEST_CASE("classify rejects invalid parameters") {
  CHECK_THROWS_AS(classify(params(3.0, -0.5)), InvalidParameterError);
  CHECK_THROWS_AS(classify(params(1.0, 1.0)), InvalidParameterError);
  CHECK_THROWS_AS(classify(params(0.5, 1.0)), InvalidParameterError);
}

TEST_CASE("caustic cells partition the parameter quadrant") {
  for (double p : {1.2, 1.7, 2.0, 2.5, 3.0, 4.0, 7.5}) {
    for (double alpha : {0.0, 0.3, 0.5, 1.0, 1.5, 2.0, 3.0, 6.0}) {
      const auto cls = classify(params(p, alpha));
      const double excess = alpha + 2.0 - p;
      int matches = 0;
      if (cls.caustic == CausticRegime::Linear) {
        CHECK(excess > kCriticalLineTol);
        ++matches;
      }
      if (cls.caustic == CausticRegime::Nonlinear) {
        CHECK(std::abs(excess) <= kCriticalLineTol);
        ++matches;
      }
      if (cls.caustic == CausticRegime::Supercritical) {
        CHECK(excess < -kCriticalLineTol);
        ++matches;
      }
      CHECK(matches == 1);
      CHECK((cls.propagation == PropagationRegime::Nonlinear) ==
            (alpha == 0.0));
    }
  }
}

TEST_CASE("gamma exponent") {
  CHECK(gamma_exponent(params(3.0, 0.0)) == 1.0);
  CHECK(gamma_exponent(params(3.0, 2.0)) == 0.0);
  CHECK(gamma_exponent(params(3.0, 4.0)) == -1.0);
}

TEST_CASE("gamma is negative exactly when alpha exceeds p - 1") {
  for (double p : {1.5, 2.0, 3.0, 4.0})
    for (double alpha : {0.0, 0.4, 0.9, 1.0, 1.1, 2.0, 3.5}) {
      const double gamma = gamma_exponent(params(p, alpha));
      CHECK((gamma < 0.0) == (alpha > p - 1.0));
    }
}

TEST_CASE("subcritical rate branches") {
  auto rate = subcritical_rate(params(3.0, 1.5));
  CHECK(rate.order == Catch::Approx(0.5));
  CHECK_FALSE(rate.log_factor);

  rate = subcritical_rate(params(1.5, 2.0));
  CHECK(rate.order == 1.0);
  CHECK_FALSE(rate.log_factor);

  rate = subcritical_rate(params(2.0, 0.5));
  CHECK(rate.order == Catch::Approx(0.5));
  CHECK(rate.log_factor);

  rate = subcritical_rate(params(2.0, 1.5));
  CHECK(rate.order == 1.0);
  CHECK_FALSE(rate.log_factor);
}

TEST_CASE("subcritical rate hypothesis violations name the applicable regime") {
  CHECK_THROWS_AS(subcritical_rate(params(4.0, 0.5)), RegimeError);
  CHECK_THROWS_AS(subcritical_rate(params(3.0, 1.0)), RegimeError);
  CHECK_THROWS_AS(subcritical_rate(params(1.5, 0.0)), RegimeError);
  CHECK_THROWS_WITH(subcritical_rate(params(4.0, 0.5)),
                    Catch::Matchers::ContainsSubstring("super-critical"));
  CHECK_THROWS_WITH(subcritical_rate(params(3.0, 1.0)),
                    Catch::Matchers::ContainsSubstring("critical"));
}

TEST_CASE("subcritical order is continuous and saturates at 1") {
  // For p > 2 the order equals 1 exactly when alpha >= max(1, p-1).
  for (double p : {2.5, 3.0, 4.0}) {
    for (double alpha = p - 2.0 + 0.01; alpha < 5.0; alpha += 0.037) {
      const auto rate = subcritical_rate(params(p, alpha));
      if (alpha >= std::max(1.0, p - 1.0)) CHECK(rate.order == 1.0);
      else CHECK(rate.order < 1.0);
    }
  }
}

TEST_CASE("absorption threshold time") {
  CHECK(absorption_time(0.1, params(4.0, 1.0, 1.0, 1.0, 1.0, 0.01)) ==
        Catch::Approx(0.98).margin(1e-14));
  CHECK(absorption_time(0.1, params(2.0, 0.0, 1.0, 1.0, 1.0, 0.01)) ==
        Catch::Approx(0.89).margin(1e-14));
  // lambda, eps -> 0 limit approaches r0.
  CHECK(absorption_time(1e-12, params(4.0, 1.0, 1.0, 1.0, 1.0, 1e-12)) ==
        Catch::Approx(1.0).margin(1e-11));
}

TEST_CASE("absorption time stays below the pre-focus horizon") {
  for (double lambda : {1e-6, 0.01, 0.1, 0.5})
    for (double eps : {1.0, 0.3, 0.1, 0.01, 1e-4}) {
      const auto pp = params(4.0, 1.0, 1.0, 2.0, 1.0, eps);
      CHECK(absorption_time(lambda, pp) < pp.prefocus_horizon());
    }
}

TEST_CASE("absorption time regime errors") {
  CHECK_THROWS_AS(absorption_time(0.1, params(3.0, 1.5)), RegimeError);
  CHECK_THROWS_AS(absorption_time(0.1, params(2.0, 0.5)), RegimeError);
  CHECK_THROWS_AS(absorption_time(-0.1, params(4.0, 1.0)),
                  InvalidParameterError);
}

TEST_CASE("h_p existence window size") {
  CHECK(h_p(0.1, 1.0, params(1.5, 1.0)) == Catch::Approx(0.1));
  CHECK(h_p(0.1, 0.9, params(2.0, 1.0)) ==
        Catch::Approx(0.1 * std::log(10.0)));
  CHECK(h_p(0.1, 1e-12, params(1.5, 1.0)) < 1e-6);  // T -> 0 limit
  CHECK_THROWS_AS(h_p(0.1, 1.0, params(3.0, 1.0)), DomainError);
}
