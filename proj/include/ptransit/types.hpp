#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace ptransit {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr Complex kI{0.0, 1.0};

// Violated modelling assumption (no simple crossing, Jordan block, gap loss, ...).
struct AssumptionError : std::runtime_error {
  explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical machinery failed (non-convergence, step underflow, drift).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input (spec files, CLI values).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

inline int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

}  // namespace ptransit
