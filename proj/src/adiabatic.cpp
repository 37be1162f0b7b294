#include "ptransit/adiabatic.hpp"

#include <cmath>
#include <sstream>

#include "ptransit/inner.hpp"

namespace ptransit {

namespace {

// Perturbation-series integrand in the outer region, through O(hbar).
Complex series_outer_integrand(const BranchPair& branches,
                               const PencilProblem& problem, int j, double x,
                               double hbar, const Options& opts) {
  int anchor = anchor_node(branches.first, x);
  BranchPoint p1 = branch_eval(problem, branches.first, x, opts, anchor);
  BranchPoint p2 = branch_eval(problem, branches.second, x, opts, anchor);
  const BranchPoint& pj = (j == 1) ? p1 : p2;
  double Nj = pj.N;
  Mat B = problem.B(x);

  Complex Bjj = (pj.phi.adjoint() * B * pj.phi)(0, 0);
  Complex B12 = (p1.phi.adjoint() * B * p2.phi)(0, 0);
  Complex B21 = (p2.phi.adjoint() * B * p1.phi)(0, 0);
  double sgn_j = (j == 1) ? -1.0 : 1.0;
  Complex cross = sgn_j * B21 * B12 / ((p2.beta - p1.beta) * p1.N * p2.N);

  Complex perp_term = 0.0;
  if (problem.dim > 2) {
    Vec f = (Bjj / Nj) * (problem.Gamma * pj.phi) - B * pj.phi;
    Eigen::PartialPivLU<Mat> lu(problem.Gamma);
    Vec g = lu.solve(f);
    Vec perp = solve_orthogonal_complement(problem.K(x), problem.Gamma, pj.beta,
                                           p1.phi, p2.phi, p1.N, p2.N, g);
    perp_term = (pj.phi.adjoint() * B * perp)(0, 0) / Nj;
  }
  return pj.beta + std::sqrt(hbar) * Bjj / Nj + hbar * (cross + perp_term);
}

// Exact eigenvalue of the perturbed pencil on the branch continuing the
// unperturbed mode j.
Complex exact_outer_integrand(const BranchPair& branches,
                              const PencilProblem& problem, int j, double x,
                              double hbar, const Options& opts) {
  double sh = std::sqrt(hbar);
  PencilProblem perturbed = problem;
  auto baseK = problem.K;
  auto baseB = problem.B;
  perturbed.K = [baseK, baseB, sh](double xx) {
    return Mat(baseK(xx) + sh * baseB(xx));
  };
  perturbed.K_deriv = nullptr;
  const EigenBranch& br = (j == 1) ? branches.first : branches.second;
  BranchPoint target = branch_eval(problem, br, x, opts);
  auto pairs = solve_pencil_at(perturbed, x, opts);
  int best = -1;
  double score = -1.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].is_real) continue;
    double s = std::abs(gamma_inner(target.phi, pairs[i].phi, problem.Gamma));
    if (s > score) { score = s; best = int(i); }
  }
  if (best < 0)
    throw NumericError("outer phase proxy: no real perturbed eigenvalue");
  return pairs[size_t(best)].beta.real();
}

Complex outer_integrand(const DegeneracyData&, const BranchPair& branches,
                        const PencilProblem& problem, int j, double x,
                        double hbar, const Options& opts) {
  return opts.exact_outer_proxy
             ? exact_outer_integrand(branches, problem, j, x, hbar, opts)
             : series_outer_integrand(branches, problem, j, x, hbar, opts);
}

// antiderivative of sqrt(Q^2 s^2 + c) for s >= 0, normalized so F(0) = 0
Complex root_antideriv(double Q, Complex c, double s) {
  if (std::abs(c) < 1e-300) return Complex(0.5 * Q * s * s, 0.0);
  Complex root = std::sqrt(Q * Q * s * s + c);
  return 0.5 * s * root + c / (2.0 * Q) * std::log((Q * s + root) / std::sqrt(c));
}

}  // namespace

double default_x_star(double hbar, const Options& opts) {
  return std::pow(hbar, 0.5 - opts.g_exponent);
}

Complex inner_root_integral(const DegeneracyData& data, double u_a, double u_b) {
  Complex c(data.p * data.p * double(data.w), 0.0);
  auto E = [&](double u) { return root_antideriv(data.Q, c, std::abs(u)); };
  return E(u_b) - E(u_a);
}

Complex beta_pr(const DegeneracyData& data, const BranchPair& branches,
                const PencilProblem& problem, int j, double x, double hbar,
                double x_star, const Options& opts) {
  double sh = std::sqrt(hbar);
  double dist = std::abs(x - data.x0);
  if (dist > x_star)
    return outer_integrand(data, branches, problem, j, x, hbar, opts);
  double tau = (x - data.x0) / sh;
  double u = tau + data.b;
  Complex root = std::sqrt(Complex(data.Q * data.Q * u * u +
                                   data.p * data.p * double(data.w)));
  double sgn_j = (j == 1) ? -1.0 : 1.0;
  double sgn_u = u >= 0 ? 1.0 : -1.0;
  return data.beta0 + sh * (data.beta_av_c0 + data.beta_av_c1 * tau) +
         sh * sgn_j * sgn_u * root;
}

double berry_phase_integrand(const PencilProblem& problem,
                             const EigenBranch& branch, double x, double fd_step,
                             const Options& opts) {
  double h = fd_step > 0 ? fd_step : opts.berry_fd_rel * problem.width();
  int anchor = anchor_node(branch, x);
  BranchPoint p0 = branch_eval(problem, branch, x, opts, anchor);
  BranchPoint pm = branch_eval(problem, branch, x - h, opts, anchor);
  BranchPoint pp = branch_eval(problem, branch, x + h, opts, anchor);
  BranchPoint pm2 = branch_eval(problem, branch, x - 2 * h, opts, anchor);
  BranchPoint pp2 = branch_eval(problem, branch, x + 2 * h, opts, anchor);

  Complex o = gamma_inner(p0.phi, pp.phi, problem.Gamma) * double(branch.norm_sign);
  if (o.real() <= 0.0)
    throw NumericError("berry_phase_integrand: gauge discontinuity detected");

  Vec d_h = (pp.phi - pm.phi) / (2.0 * h);
  Vec d_2h = (pp2.phi - pm2.phi) / (4.0 * h);
  Vec d = (4.0 * d_h - d_2h) / 3.0;  // Richardson
  return (gamma_inner(p0.phi, d, problem.Gamma) / p0.N).imag();
}

double canonical_mode_phase(const DegeneracyData& data, int j, int side,
                            double hbar) {
  double tau_s = data.tau_ref(side).real();
  double theta = (j == 1 ? 0.5 : -0.5) * data.theta_a;
  return theta + inner_average_phase(data, hbar, tau_s).real() / std::sqrt(hbar);
}

namespace {

// Exact averaged eigenvalue proxy inside the matching zone: the smooth
// unperturbed average plus the sqrt(hbar) diagonal shift.  Its linearization
// at x0 is the displayed beta0 + sqrt(hbar) beta_av^(1)(tau) form; keeping
// the true average avoids a curvature phase error that would grow like
// hbar^{1/2 - 3g} across the zone.
Complex inner_average_exact(const BranchPair& branches,
                            const PencilProblem& problem, double x, double hbar,
                            const Options& opts) {
  int anchor = anchor_node(branches.first, x);
  BranchPoint p1 = branch_eval(problem, branches.first, x, opts, anchor);
  BranchPoint p2 = branch_eval(problem, branches.second, x, opts, anchor);
  Mat B = problem.B(x);
  Complex b11 = (p1.phi.adjoint() * B * p1.phi)(0, 0) / p1.N;
  Complex b22 = (p2.phi.adjoint() * B * p2.phi)(0, 0) / p2.N;
  Complex avg = 0.5 * (p1.beta + p2.beta) + 0.5 * std::sqrt(hbar) * (b11 + b22);
  if (problem.dim > 2) {
    // symmetric O(hbar) complement correction (the mode-mixing cross terms
    // cancel in the j-sum; the perpendicular ones do not)
    Eigen::PartialPivLU<Mat> lu(problem.Gamma);
    Mat K = problem.K(x);
    Vec f1 = b11 * (problem.Gamma * p1.phi) - B * p1.phi;
    Vec f2 = b22 * (problem.Gamma * p2.phi) - B * p2.phi;
    Vec perp1 = solve_orthogonal_complement(K, problem.Gamma, p1.beta, p1.phi,
                                            p2.phi, p1.N, p2.N, lu.solve(f1));
    Vec perp2 = solve_orthogonal_complement(K, problem.Gamma, p2.beta, p1.phi,
                                            p2.phi, p1.N, p2.N, lu.solve(f2));
    Complex t1 = (p1.phi.adjoint() * B * perp1)(0, 0) / p1.N;
    Complex t2 = (p2.phi.adjoint() * B * perp2)(0, 0) / p2.N;
    avg += 0.5 * hbar * (t1 + t2);
  }
  return avg;
}

}  // namespace

namespace {

struct PhaseParts {
  Complex p_over_hbar;  // (1/hbar) int beta_pr
  double berry;         // int Im S_jj
};

PhaseParts canonical_phase_parts(const DegeneracyData& data,
                                 const BranchPair& branches,
                                 const PencilProblem& problem, int j, int side,
                                 double x, double hbar, const Options& opts) {
  double sh = std::sqrt(hbar);
  double x_star = default_x_star(hbar, opts);
  double x_ref = data.x0 + sh * data.tau_ref(side).real();
  if (std::abs(x_ref - data.x0) >= x_star)
    throw NumericError("canonical mode: x_star does not cover the turning point");

  double seam = data.x0 + side * x_star;
  bool beyond_seam = std::abs(x - data.x0) > x_star;
  double inner_end = beyond_seam ? seam : x;

  // inner piece: exact averaged eigenvalue by quadrature plus the closed-form
  // square-root branch
  double tau_a = (x_ref - data.x0) / sh;
  double tau_b = (inner_end - data.x0) / sh;
  auto avg_f = [&](double xp) {
    return inner_average_exact(branches, problem, xp, hbar, opts);
  };
  Complex inner_avg = integrate_gk(avg_f, x_ref, inner_end, opts.quad_tol).value;
  double sgn_j = (j == 1) ? -1.0 : 1.0;
  Complex inner_root =
      sgn_j * inner_root_integral(data, tau_a + data.b, tau_b + data.b);
  Complex P = inner_avg + hbar * inner_root;

  // outer piece, adaptive quadrature
  if (beyond_seam) {
    auto f = [&](double xp) {
      return outer_integrand(data, branches, problem, j, xp, hbar, opts);
    };
    P += integrate_gk(f, seam, x, opts.quad_tol).value;
  }

  const EigenBranch& br = (j == 1) ? branches.first : branches.second;
  auto berry_f = [&](double xp) {
    return Complex(berry_phase_integrand(problem, br, xp, 0.0, opts), 0.0);
  };
  double berry = integrate_gk(berry_f, x_ref, x, 1e-9, {}, 400).value.real();

  return {P / hbar, berry};
}

}  // namespace

CanonicalScalar canonical_mode_scalar(const DegeneracyData& data,
                                      const BranchPair& branches,
                                      const PencilProblem& problem, int j,
                                      int side, double x, double hbar,
                                      const Options& opts) {
  double sh = std::sqrt(hbar);
  if ((x - data.x0) * side <= 0)
    throw AssumptionError("canonical_mode_value: side does not match x");
  if (std::abs(x - data.x0) < 2.0 * sh)
    throw AssumptionError("canonical_mode_value: x is inside the inner region");

  PhaseParts parts =
      canonical_phase_parts(data, branches, problem, j, side, x, hbar, opts);
  double theta = canonical_mode_phase(data, j, side, hbar);

  const EigenBranch& br = (j == 1) ? branches.first : branches.second;
  CanonicalScalar out;
  out.point = branch_eval(problem, br, x, opts);
  Complex phase = theta + parts.p_over_hbar - parts.berry;
  out.factor = std::exp(kI * phase);
  return out;
}

Vec canonical_mode_value(const DegeneracyData& data, const BranchPair& branches,
                         const PencilProblem& problem, int j, int side, double x,
                         double hbar, const Options& opts) {
  CanonicalScalar s =
      canonical_mode_scalar(data, branches, problem, j, side, x, hbar, opts);
  return s.factor * s.point.phi / std::sqrt(std::abs(s.point.N));
}

Vec general_mode_value(const ModeSpec& spec, const DegeneracyData& data,
                       const BranchPair& branches, const PencilProblem& problem,
                       double x, const Options& opts) {
  double sh = std::sqrt(spec.hbar);
  if ((spec.x_ref - data.x0) * spec.side <= 0 || (x - data.x0) * spec.side <= 0)
    throw AssumptionError("general_mode_value: x or x_ref on the wrong side");
  if (std::abs(spec.x_ref - data.x0) < 2.0 * sh)
    throw AssumptionError("general_mode_value: x_ref too close to the crossing");

  const EigenBranch& br = (spec.j == 1) ? branches.first : branches.second;
  auto f = [&](double xp) {
    return outer_integrand(data, branches, problem, spec.j, xp, spec.hbar, opts);
  };
  Complex P = integrate_gk(f, spec.x_ref, x, opts.quad_tol).value;
  auto berry_f = [&](double xp) {
    return Complex(berry_phase_integrand(problem, br, xp, 0.0, opts), 0.0);
  };
  double berry = integrate_gk(berry_f, spec.x_ref, x, 1e-9, {}, 400).value.real();

  BranchPoint p = branch_eval(problem, br, x, opts);
  BranchPoint pref = branch_eval(problem, br, spec.x_ref, opts);
  Complex phase = P / spec.hbar - berry;
  return std::sqrt(std::abs(pref.N)) * std::exp(kI * phase) * p.phi /
         std::sqrt(std::abs(p.N));
}

Complex mode_norm_factor(const ModeSpec& spec, const DegeneracyData& data,
                         const BranchPair& branches, const PencilProblem& problem,
                         const Options& opts) {
  if (spec.canonical)
    throw AssumptionError("mode_norm_factor: spec must describe a general mode");
  PhaseParts parts = canonical_phase_parts(data, branches, problem, spec.j,
                                           spec.side, spec.x_ref, spec.hbar, opts);
  double theta = canonical_mode_phase(data, spec.j, spec.side, spec.hbar);
  const EigenBranch& br = (spec.j == 1) ? branches.first : branches.second;
  BranchPoint pref = branch_eval(problem, br, spec.x_ref, opts);
  // general(x_ref) = |N|^{1/2} phi(x_ref)/|N|^{1/2} = phi(x_ref); canonical
  // carries exp(i theta + i P/hbar - i berry) phi/|N|^{1/2}
  Complex phase = theta + parts.p_over_hbar - parts.berry;
  return std::sqrt(std::abs(pref.N)) * std::exp(-kI * phase);
}

}  // namespace ptransit
