#include "ptransit/transition.hpp"

#include <cmath>

#include "ptransit/pcf.hpp"

namespace ptransit {

namespace {

void require_order(Complex nu) {
  if (std::abs(nu.real()) > 1e-12 * (1.0 + std::abs(nu)))
    throw AssumptionError("transition: nu must be purely imaginary");
  if (std::abs(nu) > 100.0)
    throw AssumptionError("transition: |nu| > 100 is out of range");
}

}  // namespace

TransitionMatrix2 canonical_T(Complex nu, int w) {
  require_order(nu);
  TransitionMatrix2 T;
  T.nu = nu;
  T.w = w;
  T.convention = TConvention::canonical;
  double anu = std::abs(nu);
  if (anu == 0.0) {
    T.entries = Mat2::Identity();
    return T;
  }
  Complex sqrt_nu = std::exp(kI * kPi * double(w) / 4.0) * std::sqrt(anu);
  Complex root = std::sqrt(2.0 * kPi) * sqrt_nu;
  Complex diag = std::exp(kI * kPi * nu);
  Complex gearing = nu - nu * std::log(anu);  // purely imaginary
  T.entries(0, 0) = diag;
  T.entries(1, 1) = diag;
  T.entries(0, 1) =
      kI * root * std::exp(kI * kPi * nu / 2.0 + gearing) * inv_gamma(1.0 - nu);
  T.entries(1, 0) =
      root * std::exp(kI * kPi * nu / 2.0 - gearing) * inv_gamma(1.0 + nu);
  return T;
}

PolarT polar_T(Complex nu, int w) {
  require_order(nu);
  PolarT out;
  out.matrix.nu = nu;
  out.matrix.w = w;
  out.matrix.convention = TConvention::canonical;
  double anu = std::abs(nu);
  if (anu == 0.0) {
    out.matrix.entries = Mat2::Identity();
    out.theta_defined = false;
    return out;
  }
  double theta_gamma = anu * w * (std::log(anu) - 1.0) + kPi * w / 4.0;
  double arg_gamma = log_gamma(1.0 + nu).imag();
  out.theta_prime = arg_gamma - theta_gamma;
  out.theta_defined = true;

  double mod_diag = std::exp(-kPi * anu * w);
  double mod_off = std::sqrt(1.0 - std::exp(-2.0 * kPi * anu)) *
                   std::exp(-kPi / 2.0 * anu * (w - 1));
  out.matrix.entries(0, 0) = mod_diag;
  out.matrix.entries(1, 1) = mod_diag;
  out.matrix.entries(0, 1) =
      mod_off * std::exp(kI * (out.theta_prime + kPi / 2.0 * (1.0 + w)));
  out.matrix.entries(1, 0) = mod_off * std::exp(-kI * out.theta_prime);
  return out;
}

TransitionMatrix2 general_T(const TransitionMatrix2& canonical, Complex n1m,
                            Complex n2m, Complex n1p, Complex n2p) {
  for (Complex n : {n1m, n2m, n1p, n2p})
    if (std::abs(n) == 0.0)
      throw AssumptionError("general_T: zero normalization factor");
  TransitionMatrix2 T = canonical;
  T.convention = TConvention::general;
  Mat2 left = Mat2::Zero(), right = Mat2::Zero();
  left(0, 0) = n1p;
  left(1, 1) = n2p;
  right(0, 0) = 1.0 / n1m;
  right(1, 1) = 1.0 / n2m;
  T.entries = left * canonical.entries * right;
  return T;
}

TransitionMatrix2 renumber_T(const TransitionMatrix2& T) {
  if (T.convention == TConvention::renumbered)
    throw AssumptionError("renumber_T: matrix is already renumbered");
  TransitionMatrix2 out = T;
  Mat2 swap;
  swap << 0.0, 1.0, -1.0, 0.0;
  out.entries = T.entries * swap;
  out.convention = TConvention::renumbered;
  return out;
}

ReflectionTransmission reflection_transmission(const TransitionMatrix2& T) {
  if (std::abs(T.entries(1, 1)) == 0.0)
    throw NumericError("reflection_transmission: t22 = 0");
  ReflectionTransmission rt;
  rt.scenario_matches = (T.w == -1);
  rt.R = -T.entries(1, 0) / T.entries(1, 1);
  rt.Tcoef = T.entries.determinant() / T.entries(1, 1);
  return rt;
}

TPropertyReport check_T_properties(const TransitionMatrix2& T, int N1_sign,
                                   int N2_sign, double tol) {
  const Mat2& t = T.entries;
  double N1 = N1_sign, N2 = N2_sign;
  // residuals relative to the entry scale; tunneling matrices grow like
  // e^{pi |nu|} and the identities live at the cancellation limit
  double scale = std::max(1.0, t.cwiseAbs2().maxCoeff());
  TPropertyReport r;
  r.flux_row1 =
      std::abs(N1 - std::norm(t(0, 0)) * N1 - std::norm(t(1, 0)) * N2) / scale;
  r.flux_row2 =
      std::abs(N2 - std::norm(t(0, 1)) * N1 - std::norm(t(1, 1)) * N2) / scale;
  r.flux_cross = std::abs(std::conj(t(0, 0)) * t(0, 1) * N1 +
                          std::conj(t(1, 0)) * t(1, 1) * N2) /
                 scale;
  r.det_deviation = std::abs(t.determinant() - 1.0) / scale;
  r.unitarity = (t * t.adjoint() - Mat2::Identity()).norm();
  r.flux_ok = r.flux_row1 <= tol && r.flux_row2 <= tol && r.flux_cross <= tol;
  r.det_ok = r.det_deviation <= tol;
  bool unitary = r.unitarity <= tol * scale;
  r.unitarity_consistent = (N1_sign * N2_sign > 0) == unitary;
  return r;
}

}  // namespace ptransit
