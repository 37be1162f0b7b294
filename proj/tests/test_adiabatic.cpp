#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ptransit/adiabatic.hpp"
#include "ptransit/quadrature.hpp"
#include "support.hpp"

using namespace ptransit;
using ptransit::testing::make_synthetic_pencil;

namespace {

struct Fixture {
  PencilProblem problem;
  BranchPair branches;
  DegeneracyData data;
};

Fixture make(const std::string& name) {
  Fixture f;
  f.problem = builtin_problem(name);
  auto grid = uniform_grid(f.problem.x_lo, f.problem.x_hi, 401);
  f.branches = smooth_branches(f.problem, grid);
  double x0 = locate_degeneracy(f.branches, f.problem, f.problem.x_lo + 1e-3,
                                f.problem.x_hi - 1e-3);
  f.data = extract_parameters(f.branches, f.problem, x0, 0.0);
  return f;
}

}  // namespace

TEST_CASE("adaptive quadrature sanity") {
  auto r = integrate_gk([](double x) { return Complex(std::cos(20.0 * x), 0.0); },
                        0.0, 1.0, 1e-12);
  CHECK(std::abs(r.value.real() - std::sin(20.0) / 20.0) < 1e-12);
  // kinked integrand with a declared breakpoint
  auto r2 = integrate_gk([](double x) { return Complex(std::abs(x - 0.3), 0.0); },
                         0.0, 1.0, 1e-12, {0.3});
  double expect = 0.3 * 0.3 / 2 + 0.7 * 0.7 / 2;
  CHECK(std::abs(r2.value.real() - expect) < 1e-12);
  // reversed bounds flip the sign
  auto r3 = integrate_gk([](double x) { return Complex(x, 0.0); }, 1.0, 0.0, 1e-13);
  CHECK(std::abs(r3.value.real() + 0.5) < 1e-12);
}

TEST_CASE("beta_pr: graphene closed form in both regions") {
  auto f = make("graphene");
  double hbar = 1e-4;
  double sh = std::sqrt(hbar);
  double xs = default_x_star(hbar);
  Options opts;
  opts.exact_outer_proxy = false;  // the displayed perturbation series

  SUBCASE("inner region reproduces -Q sgn(x) sqrt(x^2 - hbar p^2/Q^2)") {
    for (double x : {0.2 * xs, 0.7 * xs, -0.4 * xs}) {
      Complex got = beta_pr(f.data, f.branches, f.problem, 1, f.data.x0 + x,
                            hbar, xs, opts);
      double sg = x >= 0 ? 1.0 : -1.0;
      Complex expect = -1.0 * sg * std::sqrt(Complex(x * x - hbar));
      CHECK(std::abs(got - expect) < 1e-8);
    }
    // at the crossing itself the value is the tunneling scale sqrt(hbar) p
    Complex at0 = beta_pr(f.data, f.branches, f.problem, 1, f.data.x0, hbar, xs, opts);
    CHECK(std::abs(at0) == doctest::Approx(sh * f.data.p).epsilon(1e-9));
    CHECK(std::abs(at0.real()) < 1e-12);  // purely imaginary inside the barrier
  }

  SUBCASE("outer region carries the -hbar p^2 / (2 (E-U)) correction") {
    for (double x : {0.3, -0.45}) {
      Complex got =
          beta_pr(f.data, f.branches, f.problem, 1, f.data.x0 + x, hbar, xs, opts);
      double eu = x;  // E - U = x for the default profile
      double expect = -eu - hbar * 1.0 / (2.0 * (-eu));
      CHECK(std::abs(got - expect) < 1e-9);
    }
  }

  SUBCASE("nu = 0: both regions collapse to the unperturbed branch") {
    auto pr = builtin_problem("lz", {{"p", 0.0}});
    auto grid = uniform_grid(-1.0, 1.0, 201);
    auto branches = smooth_branches(pr, grid);
    double x0 = locate_degeneracy(branches, pr, -0.9, 0.9);
    auto d = extract_parameters(branches, pr, x0, 0.0);
    for (double x : {0.01, 0.2, -0.15}) {
      Complex got = beta_pr(d, branches, pr, 2, x, hbar, xs, opts);
      CHECK(std::abs(got - x) < 1e-9);  // beta_2 = Q x exactly
    }
  }

  SUBCASE("seam jump is O(hbar^{1/2+g})") {
    for (double hb : {1e-3, 1e-4, 1e-5}) {
      double xst = default_x_star(hb);
      double jump = std::abs(
          beta_pr(f.data, f.branches, f.problem, 1, f.data.x0 + xst * (1 + 1e-9),
                  hb, xst, opts) -
          beta_pr(f.data, f.branches, f.problem, 1, f.data.x0 + xst * (1 - 1e-9),
                  hb, xst, opts));
      CHECK(jump <= 10.0 * std::pow(hb, 0.5 + 0.2));
    }
  }
}

TEST_CASE("berry phase integrand") {
  SUBCASE("real structures give zero") {
    auto f = make("graphene");
    CHECK(std::abs(berry_phase_integrand(f.problem, f.branches.first, 0.3, 0.0)) <
          1e-9);
  }

  SUBCASE("gauge twist shifts the integrand by sigma'(x)") {
    auto f = make("graphene");
    auto twisted = f.branches.first;
    twisted.gauge_twist = [](double x) { return x; };  // sigma' = 1
    double v = berry_phase_integrand(f.problem, twisted, 0.3, 0.0);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("regauge changes the integral by sigma(b) - sigma(a)") {
    auto sp = make_synthetic_pencil(
        11u, {1.0, 1.0, 1.0},
        {[](double x) { return -x; }, [](double x) { return x; },
         [](double) { return 3.0; }},
        0.5);
    auto grid = uniform_grid(-1.0, 1.0, 401);
    auto branches = smooth_branches(sp.problem, grid);
    auto base = branches.first;
    auto twisted = branches.first;
    twisted.gauge_twist = [](double x) { return 0.4 * std::sin(2.0 * x); };
    auto integral = [&](const EigenBranch& br, double a, double b) {
      return integrate_gk(
                 [&](double x) {
                   return Complex(berry_phase_integrand(sp.problem, br, x, 0.0),
                                  0.0);
                 },
                 a, b, 1e-10)
          .value.real();
    };
    double a = 0.2, b = 0.8;
    double d0 = integral(base, a, b);
    double d1 = integral(twisted, a, b);
    double expect = 0.4 * (std::sin(1.6) - std::sin(0.4));
    CHECK(d1 - d0 == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("canonical modes") {
  SUBCASE("graphene: explicit phase integral of the closed form") {
    auto f = make("graphene");
    double hbar = 1e-3;
    double x = 0.4;
    Options sopts;
    sopts.exact_outer_proxy = false;
    Vec mode =
        canonical_mode_value(f.data, f.branches, f.problem, 1, +1, x, hbar, sopts);
    // |N_j| = 1 and phi constant: the mode is phi_1 times a pure phase
    BranchPoint p = branch_eval(f.problem, f.branches.first, x);
    CHECK(std::abs(mode.norm() - 1.0) < 1e-8);
    Complex ratio = (p.phi.adjoint() * mode)(0, 0);
    CHECK(std::abs(std::abs(ratio) - 1.0) < 1e-8);

    // oracle phase: (1/hbar) int_{kappa+}^{x} beta1_pr with the closed form
    double kap = f.data.kappa(+1, hbar).real();
    auto integrand = [&](double xp) {
      if (std::abs(xp) > default_x_star(hbar))
        return Complex(-xp - hbar / (2.0 * -xp), 0.0);
      double sg = xp >= 0 ? 1.0 : -1.0;
      return Complex(-sg * std::sqrt(Complex(xp * xp - hbar)));
    };
    Complex phase = integrate_gk(integrand, kap, x, 1e-13,
                                 {default_x_star(hbar), -default_x_star(hbar)})
                        .value / hbar;
    // theta_1 = theta_a / 2 (the tau integral vanishes: beta0 = beta_av = 0)
    Complex expect = std::exp(kI * (phase + f.data.theta_a / 2.0));
    CHECK(std::abs(ratio / std::abs(ratio) - expect) < 1e-5);

    // the exact-eigenvalue proxy shifts the phase by O(hbar) only
    Vec mode_exact =
        canonical_mode_value(f.data, f.branches, f.problem, 1, +1, x, hbar);
    Complex rr = (mode_exact.adjoint() * mode)(0, 0);
    CHECK(std::abs(std::arg(rr)) < 50.0 * hbar);
  }

  SUBCASE("flux of the canonical mode is +-1 + O(sqrt(hbar))") {
    for (const char* name : {"graphene", "lz", "wave"}) {
      auto f = make(name);
      double hbar = 1e-4;
      for (int j : {1, 2}) {
        for (int side : {-1, +1}) {
          double x = f.data.x0 + side * 0.35;
          Vec mode =
              canonical_mode_value(f.data, f.branches, f.problem, j, side, x, hbar);
          double flux = gamma_inner(mode, mode, f.problem.Gamma).real();
          int expect_sign =
              (j == 1 ? f.branches.first : f.branches.second).norm_sign;
          INFO(name << " j=" << j << " side=" << side);
          CHECK(std::abs(flux - expect_sign) <= 10.0 * std::sqrt(hbar));
        }
      }
    }
  }

  SUBCASE("flux deviation constant is stable under hbar halving") {
    auto f = make("lz");
    double x = f.data.x0 + 0.4;
    auto dev = [&](double hb) {
      Vec mode = canonical_mode_value(f.data, f.branches, f.problem, 1, +1, x, hb);
      return std::abs(gamma_inner(mode, mode, f.problem.Gamma).real() - 1.0);
    };
    double c1 = dev(4e-4) / std::sqrt(4e-4);
    double c2 = dev(2e-4) / std::sqrt(2e-4);
    CHECK(c2 <= 3.0 * std::max(c1, 1e-6));
    CHECK(c1 <= 3.0 * std::max(c2, 1e-6));
  }

  SUBCASE("x* independence: doubling x* moves the value by O(hbar^{1/2-g})") {
    auto f = make("lz");
    Options opts;
    double ref_scale = 0.0;
    double prev_change = 0.0;
    for (double hbar : {1e-4, 1e-5}) {
      Options o1 = opts;           // g = 0.2
      Options o2 = opts;
      o2.g_exponent = 0.2 - std::log(2.0) / std::log(hbar);  // doubles x*
      double x = f.data.x0 + 0.3;
      Vec m1 = canonical_mode_value(f.data, f.branches, f.problem, 1, +1, x,
                                    hbar, o1);
      Vec m2 = canonical_mode_value(f.data, f.branches, f.problem, 1, +1, x,
                                    hbar, o2);
      double change = (m1 - m2).norm() / m1.norm();
      double bound = std::pow(hbar, 0.5 - 0.2);
      INFO("hbar = " << hbar << " change = " << change);
      CHECK(change <= 3.0 * bound);
      if (ref_scale == 0.0) {
        ref_scale = change / bound;
        prev_change = change;
      } else {
        CHECK(change <= prev_change);  // shrinks with hbar
      }
    }
  }

  SUBCASE("continuity through the crossing for nu = 0, w = +1") {
    auto pr = builtin_problem("lz", {{"p", 0.0}});
    auto grid = uniform_grid(-1.0, 1.0, 201);
    auto branches = smooth_branches(pr, grid);
    double x0 = locate_degeneracy(branches, pr, -0.9, 0.9);
    auto d = extract_parameters(branches, pr, x0, 0.0);
    double hbar = 1e-4;
    double xs = default_x_star(hbar);
    Vec left = canonical_mode_value(d, branches, pr, 1, -1, -xs, hbar);
    Vec right = canonical_mode_value(d, branches, pr, 1, +1, xs, hbar);
    // same reference point, continuous integrand: phases join smoothly
    Complex ovl = (left.adjoint() * right)(0, 0);
    double joint_phase = std::arg(ovl);
    // the phase accumulated between -x* and x* along beta_1 = -x
    Complex acc = integrate_gk(
                      [&](double xp) {
                        return Complex(-xp, 0.0);
                      },
                      -xs, xs, 1e-13)
                      .value / hbar;
    CHECK(std::remainder(joint_phase + acc.real(), 2.0 * kPi) ==
          doctest::Approx(0.0).epsilon(1e-6));
  }
}

TEST_CASE("general modes and normalization factors") {
  auto f = make("graphene");
  double hbar = 1e-3;

  SUBCASE("norm factor reproduces general = n * canonical at sample points") {
    for (int j : {1, 2}) {
      ModeSpec spec{j, +1, false, 0.5, hbar};
      Complex n = mode_norm_factor(spec, f.data, f.branches, f.problem);
      for (double x : {0.25, 0.35, 0.5, 0.62, 0.8}) {
        Vec gen = general_mode_value(spec, f.data, f.branches, f.problem, x);
        Vec can =
            canonical_mode_value(f.data, f.branches, f.problem, j, +1, x, hbar);
        INFO("j=" << j << " x=" << x);
        CHECK((gen - n * can).norm() <= 1e-8 * gen.norm());
      }
    }
  }

  SUBCASE("|n| = |N(x_ref)|^{1/2} when the proxy eigenvalue is real") {
    ModeSpec spec{1, +1, false, 0.5, hbar};
    Complex n = mode_norm_factor(spec, f.data, f.branches, f.problem);
    BranchPoint p = branch_eval(f.problem, f.branches.first, 0.5);
    CHECK(std::abs(n) == doctest::Approx(std::sqrt(std::abs(p.N))).epsilon(1e-8));
  }

  SUBCASE("shifting x_ref multiplies the mode by a constant phase") {
    ModeSpec s1{1, +1, false, 0.45, hbar};
    ModeSpec s2{1, +1, false, 0.55, hbar};
    Vec a1 = general_mode_value(s1, f.data, f.branches, f.problem, 0.7);
    Vec a2 = general_mode_value(s2, f.data, f.branches, f.problem, 0.7);
    Vec b1 = general_mode_value(s1, f.data, f.branches, f.problem, 0.8);
    Vec b2 = general_mode_value(s2, f.data, f.branches, f.problem, 0.8);
    Complex r1 = (a2.adjoint() * a1)(0, 0) / a2.squaredNorm();
    Complex r2 = (b2.adjoint() * b1)(0, 0) / b2.squaredNorm();
    CHECK(std::abs(r1 - r2) < 1e-8);
    CHECK(std::abs(std::abs(r1) - 1.0) < 1e-8);  // |N| ratio is 1 here
  }

  SUBCASE("pure regauge leaves |n| unchanged") {
    ModeSpec spec{1, +1, false, 0.5, hbar};
    Complex n0 = mode_norm_factor(spec, f.data, f.branches, f.problem);
    auto twisted = f.branches;
    twisted.first.gauge_twist = [](double x) { return 0.3 * x * x - 0.2; };
    auto d2 = extract_parameters(twisted, f.problem, f.data.x0, 0.0);
    Complex n1 = mode_norm_factor(spec, d2, twisted, f.problem);
    CHECK(std::abs(std::abs(n1) - std::abs(n0)) < 1e-7);
  }
}

TEST_CASE("canonical mode is gauge-covariant up to a constant phase") {
  auto f = make("graphene");
  double hbar = 1e-3;
  auto twisted = f.branches;
  twisted.first.gauge_twist = [](double x) { return 0.7 * std::sin(x) + 0.1; };
  twisted.second.gauge_twist = [](double x) { return -0.2 * x; };
  auto d2 = extract_parameters(twisted, f.problem, f.data.x0, 0.0);

  Complex ratio0;
  bool first = true;
  for (double x : {0.25, 0.4, 0.6, 0.75}) {
    Vec base = canonical_mode_value(f.data, f.branches, f.problem, 1, +1, x, hbar);
    Vec tw = canonical_mode_value(d2, twisted, f.problem, 1, +1, x, hbar);
    Complex r = (base.adjoint() * tw)(0, 0) / base.squaredNorm();
    CHECK(std::abs(std::abs(r) - 1.0) < 1e-7);
    if (first) { ratio0 = r; first = false; }
    else CHECK(std::abs(r - ratio0) < 1e-7);
  }
}

TEST_CASE("phase quadrature converges at high order under step halving") {
  // smooth phase integral evaluated with one panel vs forced subdivisions:
  // halving the panel width must reduce the fixed-rule error by >= 2^4
  auto f = [](double x) { return Complex(std::exp(-x) * std::sin(8.0 * x), 0.0); };
  double exact = integrate_gk(f, 0.0, 2.0, 1e-14).value.real();
  auto fixed_panels = [&](int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = 2.0 * i / n, b = 2.0 * (i + 1) / n;
      acc += integrate_gk(f, a, b, 1e30).value.real();  // single GK panel
    }
    return acc;
  };
  double e2 = std::abs(fixed_panels(2) - exact);
  double e4 = std::abs(fixed_panels(4) - exact);
  CHECK(e4 <= e2 / 16.0 + 1e-15);
}
