#pragma once

#include "ptransit/types.hpp"

namespace ptransit {

// Principal-branch log Gamma for complex argument (Lanczos rational
// approximation, reflection for Re z < 1/2).  The imaginary part is the
// analytic (unwrapped) arg Gamma on the right half plane.
Complex log_gamma(Complex z);
Complex gamma_fn(Complex z);
// 1/Gamma as an entire function; exact zero at non-positive integers.
Complex inv_gamma(Complex z);

enum class PcfRegime { series, asymptotic };
enum class PcfSector { principal, extended };

struct PcfEvaluation {
  Complex value;
  Complex derivative;
  PcfRegime regime;
  double est_error;  // heuristic relative error estimate
};

struct PcfOptions {
  double z_switch = 6.0;
  double ray_tol = 1e-8;      // angular tolerance for the supported rays
  bool check_order = true;    // require purely imaginary nu at the surface
};

// Weber parabolic cylinder function D_nu(z) with derivative, for purely
// imaginary order and z on the matching set: the disk |z| <= z_switch plus
// the rays arg z in {-pi/4, 3pi/4}.
PcfEvaluation pcf_d(Complex nu, Complex z, const PcfOptions& opts = {});

// Same evaluation for order nu - 1 (needed by the companion coefficient).
PcfEvaluation pcf_d_down(Complex nu, Complex z, const PcfOptions& opts = {});

// Sector-aware large-|z| expansion.  The principal sector carries
// z^nu e^{-z^2/4} (...); the extended sector adds the subdominant
// xi_nu e^{2 i pi nu} z^{-nu-1} e^{z^2/4} (...) term.
Complex pcf_asymptotic(Complex nu, Complex z, PcfSector sector,
                       const PcfOptions& opts = {});

Complex pcf_xi(Complex nu);  // -sqrt(2 pi) e^{-i pi nu} / Gamma(-nu)

enum class PcfLimitKind { dominant, decaying, subdominant };

struct PcfLimitForm {
  Complex leading;
  PcfLimitKind kind;
  double remainder_bound;  // O(1/tau) estimate
};

// Leading matching-ray forms of D_mu(side * sigma (tau + b)) for mu = nu
// (dominant Gaussian-on-ray term) and mu = nu - 1 (either O(1/tau) decay on
// the -pi/4 ray or the xi_{nu-1}-weighted subdominant term on the 3pi/4 ray).
PcfLimitForm pcf_limit_form(Complex nu, double tau, Complex sigma, double b,
                            int side, bool down_order);

}  // namespace ptransit
