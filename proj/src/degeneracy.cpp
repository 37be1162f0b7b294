#include "ptransit/degeneracy.hpp"

#include <cmath>
#include <sstream>

namespace ptransit {

Complex DegeneracyData::tau_ref(int side) const {
  if (w > 0) return Complex(-b, 0.0);
  return Complex(-b + side * p / Q, 0.0);
}

Complex DegeneracyData::kappa(int side, double hbar) const {
  Complex tau = w > 0 ? Complex(-b, side * p / Q) : Complex(-b + side * p / Q, 0.0);
  return x0 + std::sqrt(hbar) * tau;
}

double locate_degeneracy(const BranchPair& branches, const PencilProblem& problem,
                         double lo, double hi, const Options& opts) {
  auto diff = [&](double x) {
    return branch_eval(problem, branches.second, x, opts).beta -
           branch_eval(problem, branches.first, x, opts).beta;
  };

  const int samples = 65;
  double prev_x = lo, prev_d = diff(lo);
  double a = 0.0, bb = 0.0;
  int changes = 0;
  for (int i = 1; i < samples; ++i) {
    double x = lo + (hi - lo) * i / double(samples - 1);
    double d = diff(x);
    if (prev_d == 0.0) { a = prev_x; bb = prev_x; ++changes; }
    else if (prev_d * d < 0) { a = prev_x; bb = x; ++changes; }
    prev_x = x;
    prev_d = d;
  }
  if (changes == 0)
    throw AssumptionError("locate_degeneracy: no sign change of beta_2 - beta_1");
  if (changes > 1)
    throw AssumptionError("locate_degeneracy: multiple crossings in the bracket");

  double fa = diff(a), fb = diff(bb);
  if (fa == 0.0) return a;
  if (fb == 0.0) return bb;
  double tol = 1e-12 * problem.width();
  while (bb - a > tol) {
    double m = 0.5 * (a + bb);
    double fm = diff(m);
    if (fm == 0.0) { a = bb = m; break; }
    if (fa * fm < 0) { bb = m; fb = fm; } else { a = m; fa = fm; }
  }
  double x0 = 0.5 * (a + bb);

  // Newton polish using the slope identity d(beta2-beta1)/dx = K'22/N2 - K'11/N1
  auto table = matrix_elements(branches, problem, x0, 0.0, opts);
  double slope = (table.Kp(1, 1) / table.N2 - table.Kp(0, 0) / table.N1).real();
  if (std::abs(slope) < 1e-8)
    throw AssumptionError("locate_degeneracy: slope below 1e-8, crossing is not simple");
  x0 -= diff(x0) / slope;

  double scale = std::max({1.0, std::abs(table.beta1), std::abs(table.beta2)});
  if (std::abs(diff(x0)) > 1e-10 * scale)
    throw NumericError("locate_degeneracy: residual gap after polish");
  return x0;
}

DegeneracyData extract_parameters(BranchPair& branches,
                                  const PencilProblem& problem, double x0,
                                  double fd_step, const Options& opts) {
  auto t = matrix_elements(branches, problem, x0, fd_step, opts);

  DegeneracyData d;
  d.x0 = x0;
  d.N1 = t.N1;
  d.N2 = t.N2;
  d.Q = 0.5 * (t.Kp(1, 1).real() / t.N2 - t.Kp(0, 0).real() / t.N1);
  if (d.Q <= 0)
    throw AssumptionError("extract_parameters: Q <= 0, branch numbering is wrong");
  d.w = sign_of(t.N1 * t.N2);
  d.b = (t.B_el(1, 1).real() / t.N2 - t.B_el(0, 0).real() / t.N1) / (2.0 * d.Q);
  d.p = std::sqrt(std::norm(t.B_el(0, 1)) / std::abs(t.N1 * t.N2));
  d.nu = kI * d.p * d.p * double(d.w) / (2.0 * d.Q);
  d.sqrt_nu = std::exp(kI * kPi * double(d.w) / 4.0) * std::sqrt(std::abs(d.nu));
  d.sigma = std::exp(-kI * kPi / 4.0) * std::sqrt(2.0 * d.Q);
  d.beta0 = 0.5 * (t.beta1 + t.beta2);
  d.beta_av_c0 = 0.5 * (t.B_el(0, 0).real() / t.N1 + t.B_el(1, 1).real() / t.N2);
  d.beta_av_c1 = 0.5 * (t.Kp(0, 0).real() / t.N1 + t.Kp(1, 1).real() / t.N2);
  d.B12 = t.B_el(0, 1);
  d.phi1_0 = t.phi1;
  d.phi2_0 = t.phi2;
  d.trivial = std::abs(t.B_el(0, 1)) < 1e-14;

  if (d.trivial) {
    d.theta_a = kPi / 4.0 * (1.0 - d.w);
    d.p = 0.0;
    d.nu = 0.0;
    d.sqrt_nu = 0.0;
    return d;
  }

  d.theta_a = std::arg(t.B_el(0, 1) / t.N1) + kPi / 4.0 * (1.0 - d.w);

  if (opts.fix_theta_a && std::abs(d.theta_a) > 1e-14) {
    // rotate phi_1 by e^{i theta_a/2}, phi_2 by e^{-i theta_a/2}; theta_a
    // shifts by sigma_2 - sigma_1 = -theta_a
    Complex r1 = std::exp(kI * d.theta_a / 2.0);
    Complex r2 = std::exp(-kI * d.theta_a / 2.0);
    for (auto& nd : branches.first.nodes) nd.phi *= r1;
    for (auto& nd : branches.second.nodes) nd.phi *= r2;
    Options rest = opts;
    rest.fix_theta_a = false;
    return extract_parameters(branches, problem, x0, fd_step, rest);
  }
  return d;
}

std::pair<Complex, Complex> perturbed_eigvals_near(const DegeneracyData& data,
                                                   double tau) {
  double u = tau + data.b;
  Complex rad(u * u * data.Q * data.Q + data.p * data.p * data.w, 0.0);
  Complex root = std::sqrt(rad);  // positive real or positive imaginary
  Complex av = data.beta_av_c0 + data.beta_av_c1 * tau;
  return {av - root, av + root};
}

Mat2 perturbed_eigvecs_near(const DegeneracyData& data, double tau) {
  auto [b1, b2] = perturbed_eigvals_near(data, tau);
  Complex av = data.beta_av_c0 + data.beta_av_c1 * tau;
  double u = tau + data.b;
  Mat2 alpha;
  if (data.trivial) {
    alpha << 1.0, 0.0, 0.0, 1.0;
    return alpha;
  }
  Complex a11 = data.B12 / data.N1;
  alpha(0, 0) = a11;
  alpha(0, 1) = b1 - av + data.Q * u;
  alpha(1, 0) = a11;
  alpha(1, 1) = b2 - av + data.Q * u;
  return alpha;
}

PerturbedAway perturbed_away(const BranchPair& branches,
                             const PencilProblem& problem,
                             const DegeneracyData& data, double x,
                             double sqrt_hbar, const Options& opts) {
  double dist = std::abs(x - data.x0);
  if (dist < 2.0 * sqrt_hbar)
    throw AssumptionError("perturbed_away: x is inside the inner region");

  auto t = matrix_elements(branches, problem, x, 0.0, opts);
  Mat B = problem.B(x);
  Mat K = problem.K(x);

  PerturbedAway out;
  double hbar = sqrt_hbar * sqrt_hbar;
  Complex cross = t.B_el(1, 0) * t.B_el(0, 1) / ((t.beta1 - t.beta2) * t.N1 * t.N2);

  // complement corrections from the restricted resolvent
  Vec f1 = (t.B_el(0, 0) / t.N1) * (problem.Gamma * t.phi1) - B * t.phi1;
  Vec f2 = (t.B_el(1, 1) / t.N2) * (problem.Gamma * t.phi2) - B * t.phi2;
  Eigen::PartialPivLU<Mat> lu(problem.Gamma);
  Vec g1 = lu.solve(f1);
  Vec g2 = lu.solve(f2);
  out.perp1 = solve_orthogonal_complement(K, problem.Gamma, t.beta1, t.phi1,
                                          t.phi2, t.N1, t.N2, g1);
  out.perp2 = solve_orthogonal_complement(K, problem.Gamma, t.beta2, t.phi1,
                                          t.phi2, t.N1, t.N2, g2);

  Complex perp_term1 = (t.phi1.adjoint() * B * out.perp1)(0, 0) / t.N1;
  Complex perp_term2 = (t.phi2.adjoint() * B * out.perp2)(0, 0) / t.N2;

  out.beta_check1 = t.beta1 + sqrt_hbar * t.B_el(0, 0).real() / t.N1 +
                    hbar * (cross + perp_term1).real();
  out.beta_check2 = t.beta2 + sqrt_hbar * t.B_el(1, 1).real() / t.N2 +
                    hbar * (-cross + perp_term2).real();
  out.partner_coeff1 = t.B_el(1, 0) / ((t.beta1 - t.beta2) * t.N2);
  out.partner_coeff2 = t.B_el(0, 1) / ((t.beta2 - t.beta1) * t.N1);
  return out;
}

}  // namespace ptransit
