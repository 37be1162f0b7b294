#include "ptransit/inner.hpp"

#include <cmath>

namespace ptransit {

InnerCoefficients inner_coefficients(const InnerState& state, double tau,
                                     const PcfOptions& pcf_opts) {
  const DegeneracyData& d = state.data;
  Complex t = d.sigma * (tau + d.b);
  InnerCoefficients out;
  Complex dp = pcf_d(d.nu, t, pcf_opts).value;
  Complex dm = pcf_d(d.nu, -t, pcf_opts).value;
  out.a2 = state.A * dp + state.B * dm;
  if (d.trivial) {
    out.a1 = 0.0;
    return out;
  }
  Complex dp1 = pcf_d_down(d.nu, t, pcf_opts).value;
  Complex dm1 = pcf_d_down(d.nu, -t, pcf_opts).value;
  out.a1 = -kI * (d.B12 / (d.sigma * d.N1)) * (state.A * dp1 - state.B * dm1);
  return out;
}

Complex inner_average_phase(const DegeneracyData& data, double hbar, double tau) {
  double sh = std::sqrt(hbar);
  double u = tau + data.b;
  // int (beta0 + sh (c0 + c1 tau')) dtau' from -b to tau
  double integral = data.beta0 * u +
                    sh * (data.beta_av_c0 * u +
                          0.5 * data.beta_av_c1 * (tau * tau - data.b * data.b));
  return Complex(integral, 0.0);
}

Vec inner_state_value(const InnerState& state, double tau,
                      const PcfOptions& pcf_opts) {
  const DegeneracyData& d = state.data;
  InnerCoefficients c = inner_coefficients(state, tau, pcf_opts);
  Complex phase = inner_average_phase(d, state.hbar, tau) / std::sqrt(state.hbar);
  Complex pref = std::exp(kI * phase);
  return pref * (c.a1 * d.phi1_0 + c.a2 * d.phi2_0);
}

InnerAsymptote inner_asymptote(const InnerState& state, int side, double tau) {
  const DegeneracyData& d = state.data;
  if (std::abs(tau) < 10.0)
    throw AssumptionError("inner_asymptote: |tau| must be >= 10");
  if (sign_of(tau) != side)
    throw AssumptionError("inner_asymptote: sign(tau) does not match side");

  Complex nu = d.nu;
  Complex st = std::abs(d.sigma * tau);
  Complex gauss = std::exp(-d.sigma * d.sigma * (tau + d.b) * (tau + d.b) / 4.0);
  Complex grow = 1.0 / gauss;
  Complex xi_down = pcf_xi(nu - 1.0) * std::exp(5.0 * kI * kPi * nu / 4.0);
  Complex amp1 = d.trivial ? Complex(0.0) : -kI * d.B12 / (d.sigma * d.N1);

  InnerAsymptote out;
  if (side < 0) {
    out.coeff_phi1 = amp1 * xi_down * state.A * grow * std::pow(st, -nu);
    out.coeff_phi2 = (state.A * std::exp(3.0 * kI * kPi * nu / 4.0) +
                      state.B * std::exp(-kI * kPi * nu / 4.0)) *
                     std::pow(st, nu) * gauss;
  } else {
    out.coeff_phi1 = -amp1 * xi_down * state.B * grow * std::pow(st, -nu);
    out.coeff_phi2 = (state.A * std::exp(-kI * kPi * nu / 4.0) +
                      state.B * std::exp(3.0 * kI * kPi * nu / 4.0)) *
                     std::pow(st, nu) * gauss;
  }
  out.remainder_bound =
      (1.0 + std::abs(nu) * std::abs(nu)) * (std::abs(state.A) + std::abs(state.B)) /
      std::abs(tau);
  return out;
}

}  // namespace ptransit
