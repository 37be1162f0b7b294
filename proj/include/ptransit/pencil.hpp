#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "ptransit/config.hpp"
#include "ptransit/types.hpp"

namespace ptransit {

// Self-adjoint matrix pencil K(x) - beta Gamma with a slow perturbation B(x).
// K and B map x to n x n Hermitian matrices; Gamma is constant, Hermitian and
// invertible.  Optional analytic derivatives avoid finite differencing.
struct PencilProblem {
  int dim = 0;
  std::function<Mat(double)> K;
  std::function<Mat(double)> B;
  Mat Gamma;
  double x_lo = -1.0;
  double x_hi = 1.0;

  std::function<Mat(double)> K_deriv;  // optional d/dx K
  std::function<Mat(double)> B_deriv;  // optional d/dx B

  double width() const { return x_hi - x_lo; }
};

// Flux-type inner product (u, Gamma v), conjugate-linear in the first slot.
template <typename U, typename V>
Complex gamma_inner(const Eigen::MatrixBase<U>& u, const Eigen::MatrixBase<V>& v,
                    const Mat& Gamma) {
  if (u.rows() != Gamma.rows() || v.rows() != Gamma.cols())
    throw AssumptionError("gamma_inner: dimension mismatch");
  return (u.adjoint() * Gamma * v)(0, 0);
}

// d/dx of a matrix map by 4th-order central differences.
Mat matrix_deriv(const std::function<Mat(double)>& M, double x, double h);

// Checks Hermiticity of K, B on samples plus invertibility of Gamma.
// Throws AssumptionError with the offending entry on failure.
void validate_problem(const PencilProblem& problem, const Options& opts = {},
                      int samples = 17);

struct EigenPair {
  Complex beta;
  Vec phi;       // unit 2-norm
  Complex N;     // (phi, Gamma phi), or (phi_conj_partner, Gamma phi) if complex
  bool is_real = false;
};

// All eigenpairs of K(x) phi = beta Gamma phi.  Real pairs are flagged and
// degenerate clusters are rotated to a Gamma-orthogonal basis.
std::vector<EigenPair> solve_pencil_at(const PencilProblem& problem, double x,
                                       const Options& opts = {});

struct BranchNode {
  double x;
  double beta;
  Vec phi;
  double N;
};

// One smooth real eigenvalue branch on a grid, with a continuous eigenvector
// gauge.  gauge_twist, when set, multiplies phi by exp(i sigma(x)) on
// evaluation; it exists so tests can regauge without rebuilding.
struct EigenBranch {
  int index = 0;  // 1 or 2
  std::vector<BranchNode> nodes;
  int norm_sign = 0;
  std::function<double(double)> gauge_twist;

  const std::vector<double>& grid() const;  // lazily cached xs
  mutable std::vector<double> grid_cache;
};

struct BranchPoint {
  double beta;
  Vec phi;
  double N;
};

using BranchPair = std::pair<EigenBranch, EigenBranch>;

// Tracks the two branches that cross inside the grid, numbered so that
// beta_2 - beta_1 ~ 2 Q (x - x0) with Q > 0.  Continuation through the
// crossing follows eigenvector overlap, never value sorting.
BranchPair smooth_branches(const PencilProblem& problem,
                           const std::vector<double>& grid,
                           const Options& opts = {});

// Evaluates a branch at arbitrary x in the gauge anchored at the grid node
// whose cell contains x (or at `anchor` when >= 0, which callers use to keep
// finite-difference stencils in a single smooth gauge patch).
BranchPoint branch_eval(const PencilProblem& problem, const EigenBranch& branch,
                        double x, const Options& opts = {}, int anchor = -1);

int anchor_node(const EigenBranch& branch, double x);

struct MatrixElementTable {
  double x;
  Mat2 B_el;   // (phi_j, B phi_k)
  Mat2 Kp;     // (phi_j, K' phi_k)
  Mat2 S;      // (phi_i, Gamma dphi_j/dx) / N_i
  double N1, N2;
  double beta1, beta2;
  double dbeta1, dbeta2;  // branch slopes from the same stencil
  Vec phi1, phi2;
  // residuals of d beta_j/dx = K'_jj/N_j and (beta_k - beta_j) S_jk = K'_jk
  double slope_residual;
  double conversion_residual;
};

MatrixElementTable matrix_elements(const BranchPair& branches,
                                   const PencilProblem& problem, double x,
                                   double fd_step, const Options& opts = {});

// Solves (K - beta Gamma) v = Gamma f restricted to the Gamma-orthogonal
// complement of phi_1, phi_2 (f is projected there first).  Unique by the
// gap assumption; used for eigenvector corrections and the solvability probe.
Vec solve_orthogonal_complement(const Mat& K, const Mat& Gamma, double beta,
                                const Vec& phi1, const Vec& phi2,
                                Complex N1, Complex N2, const Vec& f);

struct PencilPropertyReport {
  bool orthogonality = false;
  double worst_orthogonality = 0.0;
  bool norms_bounded = false;
  double min_abs_norm = 0.0;
  bool signs_constant = false;
  bool reality = false;
  double worst_imag = 0.0;
  bool solvability = false;
  double worst_solve_residual = 0.0;
  bool slope_identity = false;
  double worst_slope_residual = 0.0;
  int sign_product = 0;  // sgn(N1 N2)
  bool all_pass() const {
    return orthogonality && norms_bounded && signs_constant && reality &&
           solvability && slope_identity;
  }
};

PencilPropertyReport verify_pencil_properties(const BranchPair& branches,
                                              const PencilProblem& problem,
                                              const std::vector<double>& grid,
                                              const Options& opts = {});

std::vector<double> uniform_grid(double lo, double hi, int n);

}  // namespace ptransit
