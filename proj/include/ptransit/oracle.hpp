#pragma once

#include "ptransit/adiabatic.hpp"
#include "ptransit/transition.hpp"

namespace ptransit {

struct IntegratorStats {
  long steps = 0;
  long rejected = 0;
  double max_local_error = 0.0;
  double max_flux_drift = 0.0;
};

// Sampled exact solution of (K + sqrt(hbar) B) psi = -i hbar Gamma psi'.
struct OracleTrace {
  double hbar = 0.0;
  std::vector<double> xs;
  std::vector<Vec> psis;
  std::vector<double> flux;
  IntegratorStats stats;

  const Vec& last() const { return psis.back(); }
};

// Adaptive embedded Runge-Kutta integration with exact-flux monitoring.
// Aborts when the relative flux drift exceeds 100x the budget.
OracleTrace integrate(const PencilProblem& problem, double hbar, double x_from,
                      double x_to, const Vec& psi0, double tol,
                      const Options& opts = {});

struct EmpiricalTransition {
  Mat2 matrix;
  double hbar = 0.0;
  double match_x = 0.0;
  Eigen::Vector2d residuals;     // spectral-complement leakage per column
  double worst_flux_drift = 0.0;
};

double default_X0(const PencilProblem& problem, const DegeneracyData& data,
                  double hbar, const Options& opts = {});

// Seeds each canonical left mode at x0 - X0, integrates across the crossing,
// and reads the coefficients off at x0 + X0 with perturbed-pencil projections.
EmpiricalTransition extract_empirical_T(const PencilProblem& problem,
                                        const DegeneracyData& data,
                                        const BranchPair& branches, double hbar,
                                        double X0, double tol,
                                        const Options& opts = {});

struct ConvergenceRow {
  double hbar;
  double X0;
  double err_fro;            // ||T_emp - T_asym||_F
  Mat2 entry_abs_diff;       // per-entry |difference|
  double flux_drift;
  double residual;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double fitted_order = 0.0;
  bool order_fitted = false;
  bool monotone = true;
  TransitionMatrix2 asymptotic;
};

ConvergenceStudy convergence_study(const PencilProblem& problem,
                                   const DegeneracyData& data,
                                   const BranchPair& branches,
                                   const std::vector<double>& hbars,
                                   const Options& opts = {});

unsigned resolve_threads(const Options& opts);

}  // namespace ptransit
