#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ptransit/transition.hpp"

using namespace ptransit;

TEST_CASE("canonical matrix: identity limit and reference magnitudes") {
  auto T0 = canonical_T(0.0, 1);
  CHECK((T0.entries - Mat2::Identity()).norm() == 0.0);

  // |nu| = 1/2, both scenarios; magnitudes forced by the polar form
  auto Tp = canonical_T(Complex(0, 0.5), +1);
  CHECK(std::abs(Tp.t(1, 1)) == doctest::Approx(std::exp(-kPi / 2)).epsilon(1e-12));
  CHECK(std::abs(Tp.t(1, 2)) ==
        doctest::Approx(std::sqrt(1.0 - std::exp(-kPi))).epsilon(1e-12));
  CHECK(std::abs(Tp.t(2, 1)) ==
        doctest::Approx(std::sqrt(1.0 - std::exp(-kPi))).epsilon(1e-12));
  CHECK(std::abs(Tp.det() - 1.0) < 1e-13);

  auto Tm = canonical_T(Complex(0, -0.5), -1);
  CHECK(std::abs(Tm.t(1, 1)) == doctest::Approx(std::exp(kPi / 2)).epsilon(1e-12));
  CHECK(std::abs(Tm.t(1, 2)) ==
        doctest::Approx(std::sqrt(1.0 - std::exp(-kPi)) * std::exp(kPi / 2))
            .epsilon(1e-12));
  CHECK(std::abs(Tm.det() - 1.0) < 1e-12);
}

TEST_CASE("canonical magnitudes across a log sweep of |nu|") {
  for (int w : {+1, -1}) {
    for (int k = 0; k < 50; ++k) {
      double anu = std::pow(10.0, -4.0 + 5.7 * k / 49.0);  // 1e-4 .. ~50
      Complex nu(0.0, w * anu);
      auto T = canonical_T(nu, w);
      double t11 = std::abs(T.t(1, 1));
      double expect11 = std::exp(-kPi * anu * w);
      CHECK(std::abs(t11 / expect11 - 1.0) < 1e-10);
      double t12t21 = std::abs(T.t(1, 2) * T.t(2, 1));
      double expect_off =
          (1.0 - std::exp(-2.0 * kPi * anu)) * std::exp(-kPi * anu * (w - 1));
      CHECK(std::abs(t12t21 / expect_off - 1.0) < 1e-10);
      CHECK(std::abs(T.det() - 1.0) < 1e-12 * std::max(1.0, std::norm(T.t(1, 1))));
    }
  }
}

TEST_CASE("polar and cartesian forms agree entrywise") {
  for (int w : {+1, -1}) {
    for (double anu : {1e-3, 0.2, 0.5, 2.0, 20.0}) {
      Complex nu(0.0, w * anu);
      auto Tc = canonical_T(nu, w);
      auto Tp = polar_T(nu, w);
      double scale = Tc.entries.cwiseAbs().maxCoeff();
      CHECK((Tc.entries - Tp.matrix.entries).cwiseAbs().maxCoeff() <=
            1e-10 * scale);
    }
  }
  // theta' -> 0 like 1/(12 |nu|)
  auto big = polar_T(Complex(0, 20.0), +1);
  CHECK(big.theta_defined);
  CHECK(std::abs(big.theta_prime) < 1e-2);
  CHECK(big.theta_prime == doctest::Approx(-1.0 / (12.0 * 20.0)).epsilon(0.01));

  auto zero = polar_T(0.0, +1);
  CHECK(!zero.theta_defined);
}

TEST_CASE("limits of the canonical matrix") {
  SUBCASE("nu -> 0: entries approach the identity at the square-root rate") {
    // |t12| = sqrt(1 - e^{-2 pi |nu|}) ~ sqrt(2 pi |nu|): the deviation from
    // the identity scales as sqrt(|nu|), not |nu|
    for (double anu : {1e-6, 1e-4, 1e-3}) {
      auto T = canonical_T(Complex(0, anu), +1);
      double dist = (T.entries - Mat2::Identity()).norm();
      CHECK(dist <= 4.0 * std::sqrt(anu));
      CHECK(dist >= 2.0 * std::sqrt(anu));  // genuinely square-root, not linear
      CHECK(std::abs(T.t(1, 1) - 1.0) <= 5.0 * anu);  // diagonal is linear
      CHECK(std::abs(T.t(2, 2) - 1.0) <= 5.0 * anu);
    }
  }

  SUBCASE("w = +1, |nu| = 20: antisymmetric swap with the -1 upper entry") {
    auto T = canonical_T(Complex(0, 20.0), +1);
    Mat2 limit;
    limit << 0.0, -1.0, 1.0, 0.0;
    // approach is theta'-limited: |T - limit| ~ |theta'(20)| = 1/240
    double dist = (T.entries - limit).norm();
    CHECK(dist < 1e-2);
    CHECK(dist == doctest::Approx(std::sqrt(2.0) / 240.0).epsilon(0.05));
    CHECK(T.t(1, 2).real() < -0.999);  // the sign of the -1 entry
    CHECK(T.t(2, 1).real() > 0.999);
  }

  SUBCASE("w = -1, |nu| = 5: entrywise e^{pi |nu|} band") {
    double anu = 5.0;
    auto T = canonical_T(Complex(0, -anu), -1);
    double big = std::exp(kPi * anu);
    for (int i = 1; i <= 2; ++i)
      for (int j = 1; j <= 2; ++j) {
        double ratio = std::abs(T.t(i, j)) / big;
        CHECK(ratio >= 1.0 - 3.0 * std::exp(-kPi * anu));
        CHECK(ratio <= 1.0 + 3.0 * std::exp(-kPi * anu));
      }
  }

  SUBCASE("perturbed-mode correspondence fixes the -1 sign") {
    // An exact solution following the upper perturbed branch maps from
    // -Psi_2 on the left to Psi_1 on the right; with the second branch this
    // is exactly T = [[0,-1],[1,0]] in the large-|nu| limit.
    auto T = canonical_T(Complex(0, 20.0), +1);
    Vec2 left1(0.0, -1.0);  // hat-Psi_1 = -Psi_2- on the left
    Vec2 right1 = T.entries * left1;
    CHECK(std::abs(right1(0) - 1.0) < 1e-2);  // = +Psi_1+ on the right
    CHECK(std::abs(right1(1)) < 1e-2);
    Vec2 left2(1.0, 0.0);   // hat-Psi_2 = +Psi_1- on the left
    Vec2 right2 = T.entries * left2;
    CHECK(std::abs(right2(1) - 1.0) < 1e-2);  // = +Psi_2+ on the right
  }
}

TEST_CASE("general and renumbered forms") {
  auto T = canonical_T(Complex(0, 0.5), +1);

  SUBCASE("unit factors reproduce the canonical matrix") {
    auto G = general_T(T, 1.0, 1.0, 1.0, 1.0);
    CHECK((G.entries - T.entries).norm() < 1e-15);
    CHECK(G.convention == TConvention::general);
  }

  SUBCASE("reciprocal scalings move only the off-diagonal entries") {
    Complex c(1.3, 0.4);
    auto G = general_T(T, c, 1.0 / c, c, 1.0 / c);
    CHECK(std::abs(G.t(1, 1) - T.t(1, 1)) < 1e-14);
    CHECK(std::abs(G.t(2, 2) - T.t(2, 2)) < 1e-14);
    CHECK(std::abs(G.t(1, 2) - c * c * T.t(1, 2)) < 1e-14);
    CHECK(std::abs(G.t(2, 1) - T.t(2, 1) / (c * c)) < 1e-14);
  }

  SUBCASE("zero factors are rejected") {
    CHECK_THROWS_AS((void)general_T(T, 0.0, 1.0, 1.0, 1.0), AssumptionError);
  }

  SUBCASE("renumbering") {
    auto R = renumber_T(T);
    CHECK(R.convention == TConvention::renumbered);
    CHECK(std::abs(R.det() - 1.0) < 1e-13);
    // identity nu: renumbered = [[0,1],[-1,0]]
    auto R0 = renumber_T(canonical_T(0.0, +1));
    Mat2 swap;
    swap << 0.0, 1.0, -1.0, 0.0;
    CHECK((R0.entries - swap).norm() < 1e-15);
    CHECK_THROWS_AS((void)renumber_T(R), AssumptionError);

    // large |nu|: diagonal entries carry e^{+- i theta'}
    auto Rl = renumber_T(canonical_T(Complex(0, 20.0), +1));
    double mag = std::sqrt(1.0 - std::exp(-2.0 * kPi * 20.0));
    CHECK(std::abs(Rl.t(1, 1)) == doctest::Approx(mag).epsilon(1e-10));
    CHECK(std::abs(Rl.t(2, 2)) == doctest::Approx(mag).epsilon(1e-10));
  }
}

TEST_CASE("reflection and transmission coefficients") {
  SUBCASE("real turning points, |nu| = 1/2") {
    auto T = canonical_T(Complex(0, -0.5), -1);
    auto rt = reflection_transmission(T);
    CHECK(rt.scenario_matches);
    CHECK(std::abs(rt.Tcoef) == doctest::Approx(std::exp(-kPi / 2)).epsilon(1e-12));
    CHECK(std::abs(rt.R) ==
          doctest::Approx(std::sqrt(1.0 - std::exp(-kPi))).epsilon(1e-12));
    CHECK(std::norm(rt.R) + std::norm(rt.Tcoef) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("identity matrix transmits fully") {
    auto rt = reflection_transmission(canonical_T(0.0, -1));
    CHECK(std::abs(rt.R) == 0.0);
    CHECK(std::abs(rt.Tcoef - 1.0) == 0.0);
  }

  SUBCASE("thick barrier") {
    auto T = canonical_T(Complex(0, -3.0), -1);
    auto rt = reflection_transmission(T);
    CHECK(std::abs(rt.Tcoef) == doctest::Approx(std::exp(-3.0 * kPi)).epsilon(1e-10));
  }

  SUBCASE("avoided crossing flagged") {
    auto rt = reflection_transmission(canonical_T(Complex(0, 0.5), +1));
    CHECK(!rt.scenario_matches);
  }
}

TEST_CASE("structural properties of the transition matrix") {
  SUBCASE("unitary for equal flux signs") {
    auto r = check_T_properties(canonical_T(Complex(0, 0.5), +1), 1, 1);
    CHECK(r.flux_ok);
    CHECK(r.det_ok);
    CHECK(r.unitarity_consistent);
    CHECK(r.unitarity < 1e-12);
  }

  SUBCASE("non-unitary but flux-conserving for opposite signs") {
    auto r = check_T_properties(canonical_T(Complex(0, -0.5), -1), 1, -1);
    CHECK(r.flux_ok);
    CHECK(r.det_ok);
    CHECK(r.unitarity > 1.0);  // visibly non-unitary
    CHECK(r.unitarity_consistent);
  }

  SUBCASE("t21 = -conj(t12) N1/N2 under canonical normalization") {
    for (int w : {+1, -1}) {
      auto T = canonical_T(Complex(0, w * 0.8), w);
      Complex expect = -std::conj(T.t(1, 2)) * double(w);  // N1/N2 = w
      CHECK(std::abs(T.t(2, 1) - expect) < 1e-12 * std::abs(expect));
      CHECK(std::abs(T.t(2, 2) - std::conj(T.t(1, 1))) < 1e-14);
    }
  }
}

TEST_CASE("out-of-range orders are rejected") {
  CHECK_THROWS_AS((void)canonical_T(Complex(0.3, 0.5), +1), AssumptionError);
  CHECK_THROWS_AS((void)canonical_T(Complex(0, 101.0), +1), AssumptionError);
}
