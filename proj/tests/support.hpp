#pragma once

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "ptransit/models.hpp"
#include "ptransit/pencil.hpp"

namespace ptransit::testing {

// Synthetic pencil with closed-form spectrum: columns of P(x) = P0 exp(x D A)
// are Gamma-orthogonal with norms eta_j for Gamma = (P0^-1)^H D P0^-1, and
// K(x) = (P(x)^H)^-1 diag(eta_j beta_j(x)) P(x)^-1 has eigenpairs
// (beta_j(x), P(x) e_j) with N_j = eta_j.  A complex generator makes the
// eigenvectors rotate, giving nontrivial Berry terms.
struct SyntheticPencil {
  PencilProblem problem;
  std::vector<std::function<double(double)>> betas;
  std::vector<double> etas;
  Mat P0;
  Mat generator;  // D A, with A skew-Hermitian

  Mat P(double x) const { return P0 * (x * generator).exp(); }
  Vec phi(int j, double x) const { return P(x).col(j); }
};

inline SyntheticPencil make_synthetic_pencil(
    unsigned seed, const std::vector<double>& etas,
    const std::vector<std::function<double(double)>>& betas,
    double rotation_strength = 0.4, double x_lo = -1.0, double x_hi = 1.0) {
  const int n = int(etas.size());
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto rnd = [&] { return Complex(g(rng), g(rng)); };

  // random invertible P0 with Gamma-orthogonal columns by construction
  Mat P0(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P0(i, j) = rnd();
  // keep it well-conditioned
  Eigen::JacobiSVD<Mat> svd(P0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  P0 = svd.matrixU() * svd.matrixV().adjoint() + 0.15 * P0 / svd.singularValues()(0);

  Mat D = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = etas[size_t(i)];

  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rotation_strength * rnd();
  Mat Ah = A.adjoint();
  A = 0.5 * (A - Ah);  // skew-Hermitian

  SyntheticPencil sp;
  sp.P0 = P0;
  sp.generator = D * A;
  sp.betas = betas;
  sp.etas = etas;

  Mat P0inv = P0.inverse();
  Mat Gamma = P0inv.adjoint() * D * P0inv;
  Mat Gh = Gamma.adjoint();
  Gamma = 0.5 * (Gamma + Gh);

  auto gen = sp.generator;
  auto beta_list = betas;
  auto eta_list = etas;
  sp.problem.dim = n;
  sp.problem.x_lo = x_lo;
  sp.problem.x_hi = x_hi;
  sp.problem.Gamma = Gamma;
  sp.problem.K = [P0, gen, beta_list, eta_list, n](double x) {
    Mat P = P0 * (x * gen).exp();
    Mat Pinv = P.inverse();
    Mat mid = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      mid(i, i) = eta_list[size_t(i)] * beta_list[size_t(i)](x);
    Mat K = Pinv.adjoint() * mid * Pinv;
    return Mat(0.5 * (K + K.adjoint()));
  };
  sp.problem.B = [n](double) { return Mat(Mat::Zero(n, n)); };
  return sp;
}

inline std::mt19937& test_rng() {
  static std::mt19937 rng(987654);
  return rng;
}

}  // namespace ptransit::testing
