#pragma once

#include <map>
#include <string>
#include <vector>

#include "ptransit/pencil.hpp"

namespace ptransit {

// Built-in example problems.
//
// graphene: K = (E - U(x)) I2, Gamma = antidiag(1,1), B = [[0,-ip],[ip,0]],
//           U a polynomial (linear -Qx by default).  Klein-tunneling setup
//           with opposite mode flux signs.
// lz:       K = diag(-Qx, Qx), Gamma = I, B = [[0,p],[p,0]].  Avoided
//           crossing with equal flux signs.
// wave:     two transverse modes of a smoothly irregular waveguide, reduced
//           to a 4x4 pencil: K = [[A(x),0],[0,I]], Gamma = [[0,I],[I,0]],
//           A = diag(mu - s x, mu + s x), B coupling r between the modes.
//           Forward-propagating pair crosses at x = 0 with equal flux signs.
// schrodinger: first-order form of the stationary equation -h^2 psi'' = (E-U) psi;
//           its eigenvectors degenerate at the turning point (Jordan block),
//           so analysis must reject it.
PencilProblem builtin_problem(const std::string& name,
                              const std::map<std::string, double>& params = {});

std::vector<std::string> builtin_names();

// Polynomial-entry problem: entry (i,j) of K and B given by complex
// coefficient lists, lowest degree first.
struct PolynomialMatrix {
  int dim = 0;
  std::vector<std::vector<std::vector<Complex>>> coeffs;  // [i][j][k] x^k
  Mat eval(double x) const;
};

PencilProblem polynomial_problem(const PolynomialMatrix& K,
                                 const PolynomialMatrix& B, const Mat& Gamma,
                                 double x_lo, double x_hi);

}  // namespace ptransit
