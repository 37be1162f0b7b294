#pragma once

#include <functional>
#include <vector>

#include "ptransit/types.hpp"

namespace ptransit {

struct QuadResult {
  Complex value;
  double err_estimate;
  int panels;
};

// Adaptive Gauss-Kronrod 7/15 for complex-valued integrands on [a, b].
// `breakpoints` become mandatory panel boundaries (integrand kinks).
QuadResult integrate_gk(const std::function<Complex(double)>& f, double a,
                        double b, double abs_tol,
                        const std::vector<double>& breakpoints = {},
                        int max_panels = 4000);

}  // namespace ptransit
