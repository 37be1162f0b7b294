#include "ptransit/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <tuple>

namespace ptransit {

namespace {

double matrix_scale(const Mat& M) {
  double s = M.norm();
  return s > 0 ? s : 1.0;
}

void check_hermitian(const Mat& M, double x, const char* name) {
  double dev = (M - M.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-12 * matrix_scale(M)) {
    std::ostringstream os;
    os << name << "(" << x << ") is not Hermitian: max |M - M^H| = " << dev;
    throw AssumptionError(os.str());
  }
}

}  // namespace

Mat matrix_deriv(const std::function<Mat(double)>& M, double x, double h) {
  return (-M(x + 2 * h) + 8.0 * M(x + h) - 8.0 * M(x - h) + M(x - 2 * h)) /
         (12.0 * h);
}

void validate_problem(const PencilProblem& problem, const Options& opts,
                      int samples) {
  if (problem.dim < 2) throw AssumptionError("pencil dimension must be >= 2");
  if (problem.Gamma.rows() != problem.dim || problem.Gamma.cols() != problem.dim)
    throw AssumptionError("Gamma dimension mismatch");
  check_hermitian(problem.Gamma, 0.0, "Gamma");

  Eigen::JacobiSVD<Mat> svd(problem.Gamma);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= opts.gamma_sv_tol * smax) {
    std::ostringstream os;
    os << "Gamma is numerically singular: sigma_min/sigma_max = "
       << smin / smax;
    throw AssumptionError(os.str());
  }

  for (int i = 0; i < samples; ++i) {
    double x = problem.x_lo + problem.width() * i / double(samples - 1);
    Mat K = problem.K(x);
    Mat B = problem.B(x);
    if (K.rows() != problem.dim || B.rows() != problem.dim)
      throw AssumptionError("K/B dimension mismatch");
    check_hermitian(K, x, "K");
    check_hermitian(B, x, "B");
  }

  // crude smoothness probe: bounded second differences of K and B
  double h = 1e-3 * problem.width();
  for (int i = 1; i + 1 < samples; ++i) {
    double x = problem.x_lo + problem.width() * i / double(samples - 1);
    Mat d2 = problem.K(x + h) - 2.0 * problem.K(x) + problem.K(x - h);
    if (!d2.allFinite())
      throw AssumptionError("K is not smooth on the domain");
  }
}

std::vector<EigenPair> solve_pencil_at(const PencilProblem& problem, double x,
                                       const Options& opts) {
  const int n = problem.dim;
  Mat K = problem.K(x);
  double scale = matrix_scale(K);

  Eigen::PartialPivLU<Mat> lu(problem.Gamma);
  Mat A = lu.solve(K);  // Gamma^{-1} K
  Eigen::ComplexEigenSolver<Mat> es(A);
  if (es.info() != Eigen::Success)
    throw NumericError("eigenvalue solver failed to converge");

  std::vector<EigenPair> pairs(n);
  for (int i = 0; i < n; ++i) {
    pairs[i].beta = es.eigenvalues()(i);
    pairs[i].phi = es.eigenvectors().col(i);
    pairs[i].phi.normalize();
    pairs[i].is_real = std::abs(pairs[i].beta.imag()) <= opts.real_eig_tol * scale;
    if (pairs[i].is_real) pairs[i].beta = pairs[i].beta.real();
  }
  std::sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    if (a.beta.real() != b.beta.real()) return a.beta.real() < b.beta.real();
    return a.beta.imag() < b.beta.imag();
  });

  // Degenerate real clusters: first Gamma-orthogonalize via the Gram
  // eigenbasis, then rotate to the basis that diagonalizes K' in the
  // Gamma-metric.  The latter is the limit basis of the smooth eigenvector
  // branches through a simple crossing (degenerate perturbation theory),
  // which makes K'_{jk} off-diagonal elements vanish there.
  double ctol = std::max(opts.cluster_tol * scale, 1e-13);
  for (int i = 0; i < n;) {
    int j = i + 1;
    while (j < n && pairs[j].is_real && pairs[i].is_real &&
           std::abs(pairs[j].beta.real() - pairs[i].beta.real()) < ctol)
      ++j;
    int m = j - i;
    if (m > 1) {
      Mat Phi(n, m);
      for (int k = 0; k < m; ++k) Phi.col(k) = pairs[i + k].phi;
      Mat G = Phi.adjoint() * problem.Gamma * Phi;
      Eigen::SelfAdjointEigenSolver<Mat> ges(0.5 * (G + G.adjoint()));
      Mat ortho = Phi * ges.eigenvectors();
      Eigen::VectorXd gram = ges.eigenvalues();
      if (gram.cwiseAbs().minCoeff() > 1e-10) {
        double h = opts.fd_step_rel * problem.width();
        Mat Kp = problem.K_deriv ? problem.K_deriv(x)
                                 : matrix_deriv(problem.K, x, h);
        Mat M = ortho.adjoint() * Kp * ortho;
        Mat Dm = Mat::Zero(m, m);
        for (int k = 0; k < m; ++k) Dm(k, k) = gram(k);
        Eigen::ComplexEigenSolver<Mat> slopes(Dm.inverse() * M);
        if (slopes.info() == Eigen::Success &&
            std::abs(slopes.eigenvectors().determinant()) > 1e-6) {
          Mat resolved = ortho * slopes.eigenvectors();
          // re-associate each resolved vector with the raw eigenpair it
          // overlaps most: at a small-but-resolvable gap the raw vectors
          // still identify the branches
          std::vector<int> taken(m, 0);
          Mat assigned = resolved;
          for (int k = 0; k < m; ++k) {
            int best = -1;
            double score = -1.0;
            for (int q = 0; q < m; ++q) {
              if (taken[q]) continue;
              double s = std::abs((Phi.col(k).adjoint() * resolved.col(q))(0, 0)) /
                         resolved.col(q).norm();
              if (s > score) { score = s; best = q; }
            }
            taken[best] = 1;
            assigned.col(k) = resolved.col(best);
          }
          ortho = assigned;
        }
      }
      for (int k = 0; k < m; ++k) pairs[i + k].phi = ortho.col(k).normalized();
    }
    i = j;
  }

  for (int i = 0; i < n; ++i) {
    if (pairs[i].is_real) {
      pairs[i].N = gamma_inner(pairs[i].phi, pairs[i].phi, problem.Gamma).real();
    } else {
      // complex eigenvalues pair with their conjugates
      int partner = -1;
      double best = 1e300;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        double d = std::abs(pairs[k].beta - std::conj(pairs[i].beta));
        if (d < best) { best = d; partner = k; }
      }
      pairs[i].N = partner >= 0
                       ? gamma_inner(pairs[partner].phi, pairs[i].phi, problem.Gamma)
                       : Complex(0.0);
    }
  }
  return pairs;
}

const std::vector<double>& EigenBranch::grid() const {
  if (grid_cache.size() != nodes.size()) {
    grid_cache.resize(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) grid_cache[i] = nodes[i].x;
  }
  return grid_cache;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / double(n - 1);
  return g;
}

namespace {

// Align phase so that (prev, Gamma phi) * sgn(N) has positive real part.
void align_phase(const Vec& prev, Vec& phi, const Mat& Gamma, double norm_sign) {
  Complex ovl = gamma_inner(prev, phi, Gamma) * norm_sign;
  if (std::abs(ovl) < 1e-300) return;
  phi *= std::exp(-kI * std::arg(ovl));
}

struct TrackState {
  std::vector<std::vector<Complex>> betas;  // [branch][node]
  std::vector<std::vector<Vec>> phis;
  std::vector<std::vector<double>> norms;
};

// Continue all real branches across the grid by eigenvector overlap.
TrackState track_all(const PencilProblem& problem, const std::vector<double>& grid,
                     const Options& opts) {
  const int n = problem.dim;
  TrackState st;
  st.betas.assign(n, {});
  st.phis.assign(n, {});
  st.norms.assign(n, {});

  std::vector<EigenPair> prev = solve_pencil_at(problem, grid[0], opts);
  for (int i = 0; i < n; ++i) {
    st.betas[i].push_back(prev[i].beta);
    st.phis[i].push_back(prev[i].phi);
    st.norms[i].push_back(prev[i].N.real());
  }

  for (size_t k = 1; k < grid.size(); ++k) {
    std::vector<EigenPair> cur = solve_pencil_at(problem, grid[k], opts);
    std::vector<int> taken(n, 0);
    std::vector<int> assign(n, -1);
    // greedy overlap matching, strongest overlaps first
    std::vector<std::tuple<double, int, int>> scores;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = std::abs(gamma_inner(st.phis[i].back(), cur[j].phi, problem.Gamma));
        // ordinary overlap as tie-breaker; Gamma-overlap can vanish spuriously
        s += 1e-3 * std::abs(st.phis[i].back().dot(cur[j].phi));
        scores.emplace_back(s, i, j);
      }
    std::sort(scores.begin(), scores.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
    int assigned = 0;
    for (const auto& [s, i, j] : scores) {
      (void)s;
      if (assign[i] >= 0 || taken[j]) continue;
      assign[i] = j;
      taken[j] = 1;
      if (++assigned == n) break;
    }
    for (int i = 0; i < n; ++i) {
      EigenPair& p = cur[assign[i]];
      double ns = st.norms[i].back() >= 0 ? 1.0 : -1.0;
      align_phase(st.phis[i].back(), p.phi, problem.Gamma, ns);
      st.betas[i].push_back(p.beta);
      st.phis[i].push_back(p.phi);
      st.norms[i].push_back(p.N.real());
    }
  }
  return st;
}

}  // namespace

BranchPair smooth_branches(const PencilProblem& problem,
                           const std::vector<double>& grid, const Options& opts) {
  if (grid.size() < 8) throw AssumptionError("smooth_branches: grid too coarse");
  const int n = problem.dim;
  TrackState st = track_all(problem, grid, opts);
  const size_t m = grid.size();

  // locate the pair whose difference changes sign exactly once
  struct CrossingPair { int a, b; double beta0; };
  std::vector<CrossingPair> candidates;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      int changes = 0;
      int last_sign = 0;
      size_t k_cross = 0;
      for (size_t k = 0; k < m; ++k) {
        double d = st.betas[i][k].real() - st.betas[j][k].real();
        int s = sign_of(d);
        if (s == 0) { k_cross = k; continue; }  // exact hit of the crossing node
        if (last_sign != 0 && s != last_sign) { ++changes; k_cross = k; }
        last_sign = s;
      }
      if (changes > 1)
        throw AssumptionError("tracked pair crosses more than once in the domain");
      if (changes > 0) candidates.push_back({i, j, st.betas[i][k_cross].real()});
    }
  }
  if (candidates.empty())
    throw AssumptionError("no eigenvalue crossing found on the grid");
  // A branch participating in two crossings is genuinely entangled.  Disjoint
  // pairs (e.g. forward and backward waveguide modes crossing at the same x)
  // are fine; the pair with the largest crossing eigenvalue is tracked.
  for (size_t u = 0; u < candidates.size(); ++u)
    for (size_t v = u + 1; v < candidates.size(); ++v) {
      const auto& cu = candidates[u];
      const auto& cv = candidates[v];
      if (cu.a == cv.a || cu.a == cv.b || cu.b == cv.a || cu.b == cv.b)
        throw AssumptionError("more than two branches entangled with the crossing");
    }
  std::sort(candidates.begin(), candidates.end(),
            [](const CrossingPair& x, const CrossingPair& y) {
              return x.beta0 > y.beta0;
            });
  int a = candidates.front().a;
  int b = candidates.front().b;

  // reality of the tracked pair
  for (size_t k = 0; k < m; ++k) {
    double scale = std::max({1.0, std::abs(st.betas[a][k]), std::abs(st.betas[b][k])});
    if (std::abs(st.betas[a][k].imag()) > 1e-8 * scale ||
        std::abs(st.betas[b][k].imag()) > 1e-8 * scale)
      throw AssumptionError("complex eigenvalues detected among the tracked pair");
  }

  // gap to the rest of the spectrum
  for (size_t k = 0; k < m; ++k) {
    for (int i = 0; i < n; ++i) {
      if (i == a || i == b) continue;
      double gap = std::min(std::abs(st.betas[i][k] - st.betas[a][k]),
                            std::abs(st.betas[i][k] - st.betas[b][k]));
      if (gap < opts.gap_min) {
        std::ostringstream os;
        os << "spectral gap violated at x = " << grid[k] << " (gap = " << gap << ")";
        throw AssumptionError(os.str());
      }
    }
  }

  // number by slope at the crossing: branch 2 is the one whose beta grows
  size_t kc = 0;
  double dmin = 1e300;
  for (size_t k = 0; k < m; ++k) {
    double d = std::abs(st.betas[a][k].real() - st.betas[b][k].real());
    if (d < dmin) { dmin = d; kc = k; }
  }
  size_t k0 = kc > 0 ? kc - 1 : kc;
  size_t k1 = kc + 1 < m ? kc + 1 : kc;
  double slope_a = (st.betas[a][k1].real() - st.betas[a][k0].real()) / (grid[k1] - grid[k0]);
  double slope_b = (st.betas[b][k1].real() - st.betas[b][k0].real()) / (grid[k1] - grid[k0]);
  if (slope_b < slope_a) std::swap(a, b);

  auto build = [&](int idx, int which) {
    EigenBranch br;
    br.index = idx;
    br.nodes.resize(m);
    for (size_t k = 0; k < m; ++k) {
      br.nodes[k] = {grid[k], st.betas[which][k].real(), st.phis[which][k],
                     st.norms[which][k]};
    }
    double n0 = br.nodes.front().N;
    br.norm_sign = n0 >= 0 ? 1 : -1;
    for (size_t k = 0; k < m; ++k) {
      if (br.nodes[k].N * n0 <= 0)
        throw AssumptionError("normalization N_j changes sign along a branch");
    }
    br.grid();  // warm the cache; branches are shared read-only across threads
    return br;
  };
  return {build(1, a), build(2, b)};
}

int anchor_node(const EigenBranch& branch, double x) {
  const auto& xs = branch.grid();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  int k = int(it - xs.begin()) - 1;
  return std::clamp(k, 0, int(xs.size()) - 1);
}

BranchPoint branch_eval(const PencilProblem& problem, const EigenBranch& branch,
                        double x, const Options& opts, int anchor) {
  int k = anchor >= 0 ? anchor : anchor_node(branch, x);
  const BranchNode& node = branch.nodes[size_t(k)];

  std::vector<EigenPair> pairs = solve_pencil_at(problem, x, opts);
  // candidate with the largest overlap against the anchor vector
  int best = -1;
  double best_score = -1.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].is_real) continue;
    double s = std::abs(gamma_inner(node.phi, pairs[i].phi, problem.Gamma)) +
               1e-3 * std::abs(node.phi.dot(pairs[i].phi));
    if (s > best_score) { best_score = s; best = int(i); }
  }
  if (best < 0) throw NumericError("branch_eval: no real eigenpair at x");

  // degenerate clusters are already rotated to the limit basis inside
  // solve_pencil_at, so overlap selection is all that is needed here
  Vec phi = pairs[best].phi;
  double ns = branch.norm_sign;
  align_phase(node.phi, phi, problem.Gamma, ns);
  if (branch.gauge_twist) phi *= std::exp(kI * branch.gauge_twist(x));

  BranchPoint out;
  out.beta = pairs[best].beta.real();
  out.phi = phi;
  out.N = gamma_inner(phi, phi, problem.Gamma).real();
  return out;
}

MatrixElementTable matrix_elements(const BranchPair& branches,
                                   const PencilProblem& problem, double x,
                                   double fd_step, const Options& opts) {
  if (x <= problem.x_lo || x >= problem.x_hi)
    throw AssumptionError("matrix_elements: x must be interior to the domain");
  const double h = fd_step > 0 ? fd_step : opts.fd_step_rel * problem.width();

  const EigenBranch* br[2] = {&branches.first, &branches.second};
  int anchor = anchor_node(branches.first, x);

  BranchPoint p[2] = {branch_eval(problem, *br[0], x, opts, anchor),
                      branch_eval(problem, *br[1], x, opts, anchor)};

  Mat Kp = problem.K_deriv ? problem.K_deriv(x) : matrix_deriv(problem.K, x, h);
  Mat B = problem.B(x);

  MatrixElementTable t;
  t.x = x;
  t.N1 = p[0].N;
  t.N2 = p[1].N;
  t.beta1 = p[0].beta;
  t.beta2 = p[1].beta;
  t.phi1 = p[0].phi;
  t.phi2 = p[1].phi;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      t.B_el(i, j) = (p[i].phi.adjoint() * B * p[j].phi)(0, 0);
      t.Kp(i, j) = (p[i].phi.adjoint() * Kp * p[j].phi)(0, 0);
    }

  // eigenvector and eigenvalue derivatives on a shared 4-point stencil
  Vec dphi[2];
  double dbeta[2];
  for (int j = 0; j < 2; ++j) {
    BranchPoint pm2 = branch_eval(problem, *br[j], x - 2 * h, opts, anchor);
    BranchPoint pm1 = branch_eval(problem, *br[j], x - h, opts, anchor);
    BranchPoint pp1 = branch_eval(problem, *br[j], x + h, opts, anchor);
    BranchPoint pp2 = branch_eval(problem, *br[j], x + 2 * h, opts, anchor);
    dphi[j] = (-pp2.phi + 8.0 * pp1.phi - 8.0 * pm1.phi + pm2.phi) / (12.0 * h);
    dbeta[j] = (-pp2.beta + 8.0 * pp1.beta - 8.0 * pm1.beta + pm2.beta) / (12.0 * h);
  }
  t.dbeta1 = dbeta[0];
  t.dbeta2 = dbeta[1];
  double Ns[2] = {t.N1, t.N2};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      t.S(i, j) = gamma_inner(p[i].phi, dphi[j], problem.Gamma) / Ns[i];

  double kscale = std::max(1.0, t.Kp.cwiseAbs().maxCoeff());
  t.slope_residual =
      std::max(std::abs(dbeta[0] - (t.Kp(0, 0) / t.N1).real()),
               std::abs(dbeta[1] - (t.Kp(1, 1) / t.N2).real())) /
      kscale;
  t.conversion_residual =
      std::max(std::abs((t.beta2 - t.beta1) * t.S(0, 1) - t.Kp(0, 1)),
               std::abs((t.beta1 - t.beta2) * t.S(1, 0) - t.Kp(1, 0))) /
      kscale;
  return t;
}

Vec solve_orthogonal_complement(const Mat& K, const Mat& Gamma, double beta,
                                const Vec& phi1, const Vec& phi2, Complex N1,
                                Complex N2, const Vec& f) {
  const int n = int(K.rows());
  Vec fp = f;
  fp -= phi1 * (gamma_inner(phi1, f, Gamma) / N1);
  fp -= phi2 * (gamma_inner(phi2, f, Gamma) / N2);

  // Lagrange system: (K - beta Gamma) v + Gamma phi_j lambda_j = Gamma fp,
  // with (phi_j, Gamma v) = 0.
  Mat Smat = Mat::Zero(n + 2, n + 2);
  Smat.topLeftCorner(n, n) = K - beta * Gamma;
  Smat.block(0, n, n, 1) = Gamma * phi1;
  Smat.block(0, n + 1, n, 1) = Gamma * phi2;
  Smat.block(n, 0, 1, n) = (Gamma * phi1).adjoint();
  Smat.block(n + 1, 0, 1, n) = (Gamma * phi2).adjoint();
  Vec rhs = Vec::Zero(n + 2);
  rhs.head(n) = Gamma * fp;
  Vec sol = Smat.fullPivLu().solve(rhs);
  return sol.head(n);
}

PencilPropertyReport verify_pencil_properties(const BranchPair& branches,
                                              const PencilProblem& problem,
                                              const std::vector<double>& grid,
                                              const Options& opts) {
  PencilPropertyReport r;
  r.worst_orthogonality = 0.0;
  r.min_abs_norm = 1e300;
  r.worst_imag = 0.0;
  r.worst_solve_residual = 0.0;
  r.worst_slope_residual = 0.0;

  int s1 = branches.first.norm_sign, s2 = branches.second.norm_sign;
  r.sign_product = s1 * s2;
  bool signs_ok = true;

  for (double x : grid) {
    auto pairs = solve_pencil_at(problem, x, opts);
    for (size_t i = 0; i < pairs.size(); ++i)
      for (size_t j = 0; j < pairs.size(); ++j) {
        if (i == j) continue;
        if (std::abs(std::conj(pairs[i].beta) - pairs[j].beta) < 1e-8) continue;
        double o = std::abs(gamma_inner(pairs[i].phi, pairs[j].phi, problem.Gamma));
        r.worst_orthogonality = std::max(r.worst_orthogonality, o);
      }
    BranchPoint b1 = branch_eval(problem, branches.first, x, opts);
    BranchPoint b2 = branch_eval(problem, branches.second, x, opts);
    r.min_abs_norm = std::min({r.min_abs_norm, std::abs(b1.N), std::abs(b2.N)});
    if (b1.N * s1 <= 0 || b2.N * s2 <= 0) signs_ok = false;
  }

  // solvability probe at a few interior points
  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    double x = problem.x_lo + problem.width() * (0.21 + 0.29 * trial);
    BranchPoint b1 = branch_eval(problem, branches.first, x, opts);
    BranchPoint b2 = branch_eval(problem, branches.second, x, opts);
    Vec f(problem.dim);
    for (int i = 0; i < problem.dim; ++i) f(i) = Complex(gauss(rng), gauss(rng));
    Mat K = problem.K(x);
    Vec fp = f;
    fp -= b1.phi * (gamma_inner(b1.phi, f, problem.Gamma) / b1.N);
    fp -= b2.phi * (gamma_inner(b2.phi, f, problem.Gamma) / b2.N);
    Vec v = solve_orthogonal_complement(K, problem.Gamma, b1.beta, b1.phi, b2.phi,
                                        b1.N, b2.N, f);
    double res = ((K - b1.beta * problem.Gamma) * v - problem.Gamma * fp).norm() /
                 std::max(1.0, fp.norm());
    double orth = std::abs(gamma_inner(b1.phi, v, problem.Gamma)) +
                  std::abs(gamma_inner(b2.phi, v, problem.Gamma));
    r.worst_solve_residual = std::max(r.worst_solve_residual, res + orth);
  }

  // slope identity away from the crossing
  for (int trial = 0; trial < 5; ++trial) {
    double x = problem.x_lo + problem.width() * (0.12 + 0.19 * trial);
    auto t = matrix_elements(branches, problem, x, 0.0, opts);
    r.worst_slope_residual = std::max(r.worst_slope_residual, t.slope_residual);
  }

  r.orthogonality = r.worst_orthogonality <= 1e-10;
  r.norms_bounded = r.min_abs_norm > 1e-6;
  r.signs_constant = signs_ok;
  r.reality = true;  // enforced during tracking
  r.solvability = r.worst_solve_residual <= 1e-8;
  r.slope_identity = r.worst_slope_residual <= 1e-6;
  return r;
}

}  // namespace ptransit
