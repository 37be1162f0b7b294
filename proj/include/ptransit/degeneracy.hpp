#pragma once

#include "ptransit/pencil.hpp"

namespace ptransit {

// Scalar data of the crossing: location, slopes, coupling, and the derived
// parameters that fix the transition matrix and the matching geometry.
struct DegeneracyData {
  double x0 = 0.0;      // crossing location
  double Q = 0.0;       // half difference of branch slopes, > 0
  double b = 0.0;       // crossing displacement from the perturbation
  double p = 0.0;       // eigenvalue separation / barrier half-width scale
  int w = 0;            // sgn(N1 N2): +1 avoided crossing, -1 real turning pts
  Complex nu;           // i p^2 w / (2Q), purely imaginary
  Complex sqrt_nu;      // e^{i pi w/4} sqrt|nu|
  Complex sigma;        // e^{-i pi/4} sqrt(2Q)
  double theta_a = 0.0; // coupling phase in the current eigenvector gauge
  double beta0 = 0.0;   // common eigenvalue at the crossing
  double beta_av_c0 = 0.0;  // hat beta_av^(1)(tau) = c0 + c1 tau
  double beta_av_c1 = 0.0;
  double N1 = 0.0, N2 = 0.0;    // normalizations at x0
  Complex B12;                  // (phi_1, B phi_2) at x0
  Vec phi1_0, phi2_0;           // crossing-point eigenvectors (left-limit gauge)
  bool trivial = false;         // p = 0: no coupling, identity transition

  Complex tau_ref(int side) const;      // tau_{+-} (real part of the
                                        // degeneracy point in tau units)
  Complex kappa(int side, double hbar) const;  // x0 + sqrt(hbar) tau_{+-}
};

// Bracketed crossing search on the tracked branches: bisection on
// beta_2 - beta_1 followed by one Newton polish with the slope identity.
double locate_degeneracy(const BranchPair& branches, const PencilProblem& problem,
                         double lo, double hi, const Options& opts = {});

// All scalar parameters at the crossing.  When opts.fix_theta_a is set the
// branch eigenvector gauges are rotated by e^{+- i theta_a / 2} first, which
// drives theta_a to zero.
DegeneracyData extract_parameters(BranchPair& branches,
                                  const PencilProblem& problem, double x0,
                                  double fd_step, const Options& opts = {});

// First-order perturbed eigenvalues near the crossing as functions of
// tau = (x - x0)/sqrt(hbar):  beta_av + (-1)^j sqrt((tau+b)^2 Q^2 + p^2 w).
// For w = -1 the root is imaginary inside |tau + b| < p/Q.
std::pair<Complex, Complex> perturbed_eigvals_near(const DegeneracyData& data,
                                                   double tau);

// Coefficient rows alpha_{j k} of the perturbed eigenvectors in the basis
// {phi_1(x0), phi_2(x0)}, primary representation alpha_{j1} = B12/N1,
// alpha_{j2} = beta_j - beta_av + Q (tau + b).
Mat2 perturbed_eigvecs_near(const DegeneracyData& data, double tau);

struct PerturbedAway {
  double beta_check1, beta_check2;      // eigenvalues through O(hbar)
  Complex partner_coeff1, partner_coeff2;  // sqrt(hbar)-order mixing coefficient
  Vec perp1, perp2;                     // complement corrections (order sqrt(hbar))
};

// Perturbation series of the full pencil away from the crossing.  Requires
// |x - x0| >= 2 sqrt(hbar); the series is not asymptotic closer in.
PerturbedAway perturbed_away(const BranchPair& branches,
                             const PencilProblem& problem,
                             const DegeneracyData& data, double x,
                             double sqrt_hbar, const Options& opts = {});

}  // namespace ptransit
