#pragma once

#include "ptransit/degeneracy.hpp"
#include "ptransit/quadrature.hpp"

namespace ptransit {

struct ModeSpec {
  int j = 1;            // 1 or 2
  int side = 1;         // -1: left of the crossing, +1: right
  bool canonical = true;
  double x_ref = 0.0;   // lower phase limit for general modes
  double hbar = 0.0;
};

double default_x_star(double hbar, const Options& opts = {});

// Piecewise eigenvalue proxy for the phase integral: the perturbation series
// in the outer region |x - x0| > x_star, the stretched-variable square root
// branch (continued through the crossing by the sgn factor) inside.
Complex beta_pr(const DegeneracyData& data, const BranchPair& branches,
                const PencilProblem& problem, int j, double x, double hbar,
                double x_star, const Options& opts = {});

// Im (phi_j, Gamma dphi_j/dx)/N_j in the branch's smooth gauge.
double berry_phase_integrand(const PencilProblem& problem,
                             const EigenBranch& branch, double x,
                             double fd_step, const Options& opts = {});

// Constant phase of the canonical mode: (-1)^{j+1} theta_a/2 plus the
// averaged-eigenvalue integral from -b to tau_ref (zero for w = +1).
double canonical_mode_phase(const DegeneracyData& data, int j, int side,
                            double hbar);

// Closed-form signed inner phase integral
// int_{u_a}^{u_b} sgn(u) sqrt(Q^2 u^2 + p^2 w) du in u = tau + b.
Complex inner_root_integral(const DegeneracyData& data, double u_a, double u_b);

Vec canonical_mode_value(const DegeneracyData& data, const BranchPair& branches,
                         const PencilProblem& problem, int j, int side, double x,
                         double hbar, const Options& opts = {});

struct CanonicalScalar {
  Complex factor;     // e^{i theta_j} exp(i P/hbar - i Berry)
  BranchPoint point;  // principal eigenpair at x
};

// The canonical mode is factor * phi_j(x)/|N_j(x)|^{1/2}; exposing the scalar
// lets the oracle attach it to the perturbed eigenvector direction instead.
CanonicalScalar canonical_mode_scalar(const DegeneracyData& data,
                                      const BranchPair& branches,
                                      const PencilProblem& problem, int j,
                                      int side, double x, double hbar,
                                      const Options& opts = {});

Vec general_mode_value(const ModeSpec& spec, const DegeneracyData& data,
                       const BranchPair& branches, const PencilProblem& problem,
                       double x, const Options& opts = {});

// Constant ratio general/canonical: n_j^{+-}.
Complex mode_norm_factor(const ModeSpec& spec, const DegeneracyData& data,
                         const BranchPair& branches, const PencilProblem& problem,
                         const Options& opts = {});

}  // namespace ptransit
