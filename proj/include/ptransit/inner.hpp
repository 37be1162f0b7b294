#pragma once

#include "ptransit/degeneracy.hpp"
#include "ptransit/pcf.hpp"

namespace ptransit {

// Resonance-zone solution near the crossing.  The two free constants select a
// particular solution of the coupled coefficient system; the state itself is
// psi(tau) = (a1 phi_1(x0) + a2 phi_2(x0)) * exp(i/sqrt(hbar) * phase(tau)).
struct InnerState {
  Complex A;
  Complex B;
  DegeneracyData data;
  double hbar = 0.0;
};

struct InnerCoefficients {
  Complex a1;
  Complex a2;
};

InnerCoefficients inner_coefficients(const InnerState& state, double tau,
                                     const PcfOptions& pcf_opts = {});

// Accumulated average phase int_{-b}^{tau} (beta0 + sqrt(hbar) beta_av) dtau'.
Complex inner_average_phase(const DegeneracyData& data, double hbar, double tau);

Vec inner_state_value(const InnerState& state, double tau,
                      const PcfOptions& pcf_opts = {});

struct InnerAsymptote {
  Complex coeff_phi1;    // coefficient of phi_1(x0)
  Complex coeff_phi2;    // coefficient of phi_2(x0)
  double remainder_bound;
};

// Leading two-term asymptote of the amplitude phi^(0) for tau -> side*inf:
// the phi_1 piece carries xi_{nu-1} and grows against the ray Gaussian, the
// phi_2 piece is the Gaussian-on-ray combination of the two constants.
InnerAsymptote inner_asymptote(const InnerState& state, int side, double tau);

}  // namespace ptransit
