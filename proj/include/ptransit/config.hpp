#pragma once

namespace ptransit {

// Numerical knobs shared across the library.  Defaults are the values used by
// the test and acceptance suites; everything is overridable from a spec file.
struct Options {
  // pencil / eigenproblem
  double real_eig_tol = 1e-10;   // |Im beta| <= tol * scale(K) counts as real
  double gamma_sv_tol = 1e-10;   // sigma_min(Gamma) > tol * sigma_max gate
  double cluster_tol = 1e-8;     // eigenvalue clustering, relative to scale(K)
  double gap_min = 0.05;         // required gap between tracked pair and rest
  int grid_points = 801;         // default branch grid resolution
  int guard_band_steps = 10;     // half-width (in grid steps) around the crossing

  // finite differences
  double fd_step_rel = 1e-4;     // K' stencil step, relative to domain width
  double berry_fd_rel = 1e-5;    // eigenvector derivative step for Im S

  // matching geometry
  double g_exponent = 0.2;       // x* = hbar^(1/2 - g), g in (0, 1/4)
  double quad_tol = 1e-12;       // absolute tolerance of phase quadratures
  // phase-proxy eigenvalue in the outer region: exact perturbed-pencil
  // eigenvalue (true) or its displayed perturbation series (false)
  bool exact_outer_proxy = true;

  // parabolic cylinder evaluation
  double z_switch = 6.0;         // series / asymptotics crossover radius

  // oracle integrator
  double flux_tol = 1e-8;        // relative flux drift budget per trace
  double ode_tol = 1e-12;        // local error tolerance (>= 1e-12)
  double x0_pow = 0.3;           // X0 = max(5 hbar^x0_pow, 20 sqrt(hbar))

  // gauge
  bool fix_theta_a = false;      // rotate phi_1, phi_2 at the crossing so theta_a = 0

  unsigned threads = 0;          // 0: PENCIL_TRANSIT_THREADS env or hardware count
};

}  // namespace ptransit
