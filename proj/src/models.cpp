#include "ptransit/models.hpp"

#include <cmath>

namespace ptransit {

namespace {

double param(const std::map<std::string, double>& p, const std::string& key,
             double def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

PencilProblem make_graphene(const std::map<std::string, double>& params) {
  double Q = param(params, "Q", 1.0);
  double p = param(params, "p", 1.0);
  double E = param(params, "E", 0.0);
  // U(x) = u0 + u1 x + u2 x^2 + u3 x^3, default the linear profile -Q x
  double u0 = param(params, "u0", 0.0);
  double u1 = param(params, "u1", -Q);
  double u2 = param(params, "u2", 0.0);
  double u3 = param(params, "u3", 0.0);

  PencilProblem pr;
  pr.dim = 2;
  pr.x_lo = param(params, "x_lo", -1.0);
  pr.x_hi = param(params, "x_hi", 1.0);
  auto U = [=](double x) { return u0 + x * (u1 + x * (u2 + x * u3)); };
  pr.K = [=](double x) { return Mat(Mat::Identity(2, 2) * (E - U(x))); };
  pr.K_deriv = [=](double x) {
    return Mat(Mat::Identity(2, 2) * (-(u1 + x * (2 * u2 + 3 * u3 * x))));
  };
  pr.B = [=](double) {
    Mat b(2, 2);
    b << 0.0, Complex(0.0, -p), Complex(0.0, p), 0.0;
    return b;
  };
  pr.B_deriv = [](double) { return Mat(Mat::Zero(2, 2)); };
  Mat g(2, 2);
  g << 0.0, 1.0, 1.0, 0.0;
  pr.Gamma = g;
  return pr;
}

PencilProblem make_lz(const std::map<std::string, double>& params) {
  double Q = param(params, "Q", 1.0);
  double p = param(params, "p", 1.0);
  // optional diagonal perturbation entries displace the crossing by
  // b = (d2 - d1)/(2Q) and shift the averaged eigenvalue
  double d1 = param(params, "d1", 0.0);
  double d2 = param(params, "d2", 0.0);
  PencilProblem pr;
  pr.dim = 2;
  pr.x_lo = param(params, "x_lo", -1.0);
  pr.x_hi = param(params, "x_hi", 1.0);
  pr.K = [=](double x) {
    Mat k(2, 2);
    k << -Q * x, 0.0, 0.0, Q * x;
    return k;
  };
  pr.K_deriv = [=](double) {
    Mat k(2, 2);
    k << -Q, 0.0, 0.0, Q;
    return k;
  };
  pr.B = [=](double) {
    Mat b(2, 2);
    b << d1, p, p, d2;
    return b;
  };
  pr.B_deriv = [](double) { return Mat(Mat::Zero(2, 2)); };
  pr.Gamma = Mat::Identity(2, 2);
  return pr;
}

PencilProblem make_wave(const std::map<std::string, double>& params) {
  double mu = param(params, "mu", 1.0);   // squared wavenumber at the crossing
  double s = param(params, "s", 1.0);     // detuning slope of the two modes
  double r = param(params, "r", 1.0);     // nonseparable coupling strength
  PencilProblem pr;
  pr.dim = 4;
  pr.x_lo = param(params, "x_lo", -0.5);
  pr.x_hi = param(params, "x_hi", 0.5);
  pr.K = [=](double x) {
    Mat k = Mat::Zero(4, 4);
    k(0, 0) = mu - s * x;
    k(1, 1) = mu + s * x;
    k(2, 2) = 1.0;
    k(3, 3) = 1.0;
    return k;
  };
  pr.K_deriv = [=](double) {
    Mat k = Mat::Zero(4, 4);
    k(0, 0) = -s;
    k(1, 1) = s;
    return k;
  };
  pr.B = [=](double) {
    Mat b = Mat::Zero(4, 4);
    b(0, 1) = r;
    b(1, 0) = r;
    return b;
  };
  pr.B_deriv = [](double) { return Mat(Mat::Zero(4, 4)); };
  Mat g = Mat::Zero(4, 4);
  g(0, 2) = 1.0;
  g(1, 3) = 1.0;
  g(2, 0) = 1.0;
  g(3, 1) = 1.0;
  pr.Gamma = g;
  return pr;
}

PencilProblem make_schrodinger(const std::map<std::string, double>& params) {
  // 2m(E - U(x)) = slope * x by default: turning point at x = 0
  double slope = param(params, "slope", 1.0);
  PencilProblem pr;
  pr.dim = 2;
  pr.x_lo = param(params, "x_lo", -1.0);
  pr.x_hi = param(params, "x_hi", 1.0);
  pr.K = [=](double x) {
    Mat k(2, 2);
    k << slope * x, 0.0, 0.0, 1.0;
    return k;
  };
  pr.K_deriv = [=](double) {
    Mat k(2, 2);
    k << slope, 0.0, 0.0, 0.0;
    return k;
  };
  pr.B = [](double) { return Mat(Mat::Zero(2, 2)); };
  pr.B_deriv = [](double) { return Mat(Mat::Zero(2, 2)); };
  Mat g(2, 2);
  g << 0.0, 1.0, 1.0, 0.0;
  pr.Gamma = g;
  return pr;
}

}  // namespace

PencilProblem builtin_problem(const std::string& name,
                              const std::map<std::string, double>& params) {
  if (name == "graphene") return make_graphene(params);
  if (name == "lz") return make_lz(params);
  if (name == "wave") return make_wave(params);
  if (name == "schrodinger") return make_schrodinger(params);
  throw ParseError("unknown builtin model '" + name + "'");
}

std::vector<std::string> builtin_names() {
  return {"graphene", "lz", "wave", "schrodinger"};
}

Mat PolynomialMatrix::eval(double x) const {
  Mat m = Mat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      Complex acc = 0.0;
      double xk = 1.0;
      for (const Complex& c : coeffs[size_t(i)][size_t(j)]) {
        acc += c * xk;
        xk *= x;
      }
      m(i, j) = acc;
    }
  return m;
}

PencilProblem polynomial_problem(const PolynomialMatrix& K,
                                 const PolynomialMatrix& B, const Mat& Gamma,
                                 double x_lo, double x_hi) {
  if (K.dim != B.dim || K.dim != Gamma.rows())
    throw ParseError("polynomial problem: dimension mismatch between K, B, Gamma");
  PencilProblem pr;
  pr.dim = K.dim;
  pr.x_lo = x_lo;
  pr.x_hi = x_hi;
  pr.K = [K](double x) { return K.eval(x); };
  pr.B = [B](double x) { return B.eval(x); };
  pr.Gamma = Gamma;
  return pr;
}

}  // namespace ptransit
