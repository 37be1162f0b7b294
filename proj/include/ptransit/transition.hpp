#pragma once

#include "ptransit/types.hpp"

namespace ptransit {

enum class TConvention { canonical, general, renumbered };

struct TransitionMatrix2 {
  Mat2 entries;
  TConvention convention = TConvention::canonical;
  Complex nu;
  int w = 0;

  Complex t(int j, int k) const { return entries(j - 1, k - 1); }
  Complex det() const { return entries.determinant(); }
};

// Canonical transition matrix as a function of (nu, w) alone.  nu = 0 yields
// the exact identity.
TransitionMatrix2 canonical_T(Complex nu, int w);

struct PolarT {
  TransitionMatrix2 matrix;
  double theta_prime = 0.0;   // arg Gamma(1+nu) minus its large-|nu| principal part
  bool theta_defined = false; // false in the nu = 0 limit
};

// Same matrix assembled from moduli and phases; independent cross-check of
// the cartesian construction.
PolarT polar_T(Complex nu, int w);

// Rescales the canonical matrix to arbitrary mode normalizations:
// diag(n1p, n2p) * T * diag(1/n1m, 1/n2m).
TransitionMatrix2 general_T(const TransitionMatrix2& canonical, Complex n1m,
                            Complex n2m, Complex n1p, Complex n2p);

// Switches to the numbering that follows eigenvalue sign instead of slope:
// T -> T * [[0, 1], [-1, 0]].
TransitionMatrix2 renumber_T(const TransitionMatrix2& T);

struct ReflectionTransmission {
  Complex R;
  Complex Tcoef;
  bool scenario_matches;  // true when w = -1 (real turning points)
};

ReflectionTransmission reflection_transmission(const TransitionMatrix2& T);

struct TPropertyReport {
  double flux_row1 = 0.0;      // |N1 - |t11|^2 N1 - |t21|^2 N2|
  double flux_row2 = 0.0;
  double flux_cross = 0.0;     // |conj(t11) t12 N1 + conj(t21) t22 N2|
  double det_deviation = 0.0;  // |det T - 1|
  double unitarity = 0.0;      // ||T T^H - I||
  bool flux_ok = false;
  bool det_ok = false;
  bool unitarity_consistent = false;  // unitary iff w = +1
  bool all_pass() const { return flux_ok && det_ok && unitarity_consistent; }
};

TPropertyReport check_T_properties(const TransitionMatrix2& T, int N1_sign,
                                   int N2_sign, double tol = 1e-10);

}  // namespace ptransit
