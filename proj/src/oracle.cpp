#include "ptransit/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace ptransit {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0,
                 kE4 = 71.0 / 1920.0, kE5 = -17253.0 / 339200.0,
                 kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

double max_abs_beta(const PencilProblem& problem, double hbar, double a,
                    double b) {
  double m = 0.0;
  double sh = std::sqrt(hbar);
  for (int i = 0; i <= 16; ++i) {
    double x = a + (b - a) * i / 16.0;
    Mat Ktot = problem.K(x) + sh * problem.B(x);
    Mat A = problem.Gamma.partialPivLu().solve(Ktot);
    Eigen::ComplexEigenSolver<Mat> es(A);
    for (int k = 0; k < A.rows(); ++k)
      m = std::max(m, std::abs(es.eigenvalues()(k)));
  }
  return std::max(m, 1e-8);
}

}  // namespace

OracleTrace integrate(const PencilProblem& problem, double hbar, double x_from,
                      double x_to, const Vec& psi0, double tol,
                      const Options& opts) {
  if (tol < 1e-12) throw AssumptionError("integrate: tol must be >= 1e-12");
  if (psi0.size() != problem.dim)
    throw AssumptionError("integrate: initial state dimension mismatch");

  const double sh = std::sqrt(hbar);
  Eigen::PartialPivLU<Mat> gamma_lu(problem.Gamma);
  auto rhs = [&](double x, const Vec& psi) -> Vec {
    Mat Ktot = problem.K(x) + sh * problem.B(x);
    return (kI / hbar) * gamma_lu.solve(Ktot * psi);
  };
  auto flux_of = [&](const Vec& psi) {
    return gamma_inner(psi, psi, problem.Gamma).real();
  };

  const double dir = x_to >= x_from ? 1.0 : -1.0;
  const double span = std::abs(x_to - x_from);
  const double beta_max = max_abs_beta(problem, hbar, x_from, x_to);

  // two step ceilings: the oscillation-resolution one and a flux-drift budget
  // (per-step |R(i theta)|^2 defect ~ theta^6/1800 for this pair)
  double h_osc = hbar / (10.0 * beta_max);
  double total_phase = span * beta_max / hbar;
  double theta_budget =
      std::pow(1800.0 * 0.3 * opts.flux_tol / std::max(total_phase, 1.0), 0.2);
  double h_flux = theta_budget * hbar / beta_max;
  double h_max = std::min({h_osc, h_flux, span});

  OracleTrace trace;
  trace.hbar = hbar;
  double flux0 = flux_of(psi0);
  double flux_scale = 1.0 + std::abs(flux0);

  double x = x_from;
  Vec y = psi0;
  Vec k1 = rhs(x, y);
  double h = h_max;

  double sample_phase_step = 2.0 * kPi / 20.0;
  double phase_since_sample = 1e300;  // force first sample

  auto record = [&](double xx, const Vec& yy) {
    trace.xs.push_back(xx);
    trace.psis.push_back(yy);
    trace.flux.push_back(flux_of(yy));
  };

  const long max_steps = 80'000'000;
  while (dir * (x_to - x) > 0) {
    if (trace.stats.steps + trace.stats.rejected > max_steps)
      throw NumericError("integrate: step budget exhausted");
    h = std::min(h, h_max);
    if (dir * (x + dir * h - x_to) > 0) h = std::abs(x_to - x);
    if (h < 1e-15 * std::max(1.0, std::abs(x)))
      throw NumericError("integrate: step size underflow");
    double hs = dir * h;

    Vec k2 = rhs(x + 0.2 * hs, y + hs * (kA21 * k1));
    Vec k3 = rhs(x + 0.3 * hs, y + hs * (kA31 * k1 + kA32 * k2));
    Vec k4 = rhs(x + 0.8 * hs, y + hs * (kA41 * k1 + kA42 * k2 + kA43 * k3));
    Vec k5 = rhs(x + 8.0 / 9.0 * hs,
                 y + hs * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
    Vec k6 = rhs(x + hs,
                 y + hs * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 +
                           kA65 * k5));
    Vec ynew = y + hs * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    Vec k7 = rhs(x + hs, ynew);
    Vec errv = hs * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 +
                     kE7 * k7);

    double err = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double sc = tol * (1.0 + std::max(std::abs(y(i)), std::abs(ynew(i))));
      err = std::max(err, std::abs(errv(i)) / sc);
    }

    if (err <= 1.0) {
      x += hs;
      y = ynew;
      k1 = k7;  // FSAL
      ++trace.stats.steps;
      trace.stats.max_local_error = std::max(trace.stats.max_local_error, err * tol);

      double fl = flux_of(y);
      double drift = std::abs(fl - flux0) / flux_scale;
      trace.stats.max_flux_drift = std::max(trace.stats.max_flux_drift, drift);
      if (drift > 100.0 * opts.flux_tol) {
        std::ostringstream os;
        os << "integrate: flux drift " << drift << " exceeds 100x budget at x = "
           << x;
        throw NumericError(os.str());
      }

      // record early enough that no gap exceeds the 20-per-period target
      phase_since_sample += h * beta_max / hbar;
      if (phase_since_sample >= 0.6 * sample_phase_step) {
        record(x, y);
        phase_since_sample = 0.0;
      }
    } else {
      ++trace.stats.rejected;
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
  }

  if (trace.xs.empty() || trace.xs.back() != x) record(x, y);
  return trace;
}

double default_X0(const PencilProblem& problem, const DegeneracyData& data,
                  double hbar, const Options& opts) {
  double X0 = std::max(5.0 * std::pow(hbar, opts.x0_pow), 20.0 * std::sqrt(hbar));
  double room = 0.9 * std::min(data.x0 - problem.x_lo, problem.x_hi - data.x0);
  return std::min(X0, room);
}

EmpiricalTransition extract_empirical_T(const PencilProblem& problem,
                                        const DegeneracyData& data,
                                        const BranchPair& branches, double hbar,
                                        double X0, double tol,
                                        const Options& opts) {
  double sh = std::sqrt(hbar);
  double g = opts.g_exponent;
  // X0 must sit beyond the matching zone; the nominal 5 hbar^{1/2-g} demand
  // is relaxed to what a clipped domain can support
  if (X0 < std::max(1.5 * std::pow(hbar, 0.5 - g), 5.0 * sh))
    throw AssumptionError("extract_empirical_T: X0 is inside the matching zone");
  double xl = data.x0 - X0;
  double xr = data.x0 + X0;
  if (xl <= problem.x_lo || xr >= problem.x_hi)
    throw AssumptionError("extract_empirical_T: X0 exceeds the domain");

  // perturbed pencil eigenvectors at both endpoints; they carry the
  // sqrt(hbar) mode-mixing correction, which removes the leading beating
  // error from the seeded and projected states
  PencilProblem perturbed = problem;
  auto baseK = problem.K;
  auto baseB = problem.B;
  perturbed.K = [baseK, baseB, sh](double x) {
    return Mat(baseK(x) + sh * baseB(x));
  };
  perturbed.K_deriv = nullptr;

  // perturbed direction aligned in phase and flux sign with the principal one
  auto hat_direction = [&](double x, int j) {
    auto pairs = solve_pencil_at(perturbed, x, opts);
    const EigenBranch& br = (j == 1) ? branches.first : branches.second;
    BranchPoint target = branch_eval(problem, br, x, opts);
    int best = -1;
    double score = -1.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
      if (!pairs[i].is_real) continue;
      double s = std::abs(gamma_inner(target.phi, pairs[i].phi, problem.Gamma));
      if (s > score) { score = s; best = int(i); }
    }
    if (best < 0) throw NumericError("extract_empirical_T: projection basis");
    EigenPair hat = pairs[size_t(best)];
    Complex ovl = gamma_inner(target.phi, hat.phi, problem.Gamma) *
                  double(br.norm_sign);
    hat.phi *= std::exp(-kI * std::arg(ovl));
    return hat;
  };

  EigenPair hat1 = hat_direction(xr, 1);
  EigenPair hat2 = hat_direction(xr, 2);
  Complex s1r = canonical_mode_scalar(data, branches, problem, 1, +1, xr, hbar,
                                      opts).factor;
  Complex s2r = canonical_mode_scalar(data, branches, problem, 2, +1, xr, hbar,
                                      opts).factor;
  Vec can1 = s1r * hat1.phi / std::sqrt(std::abs(hat1.N.real()));
  Vec can2 = s2r * hat2.phi / std::sqrt(std::abs(hat2.N.real()));
  Complex denom1 = gamma_inner(hat1.phi, can1, problem.Gamma) / hat1.N;
  Complex denom2 = gamma_inner(hat2.phi, can2, problem.Gamma) / hat2.N;

  EmpiricalTransition out;
  out.hbar = hbar;
  out.match_x = X0;
  for (int j = 1; j <= 2; ++j) {
    EigenPair hat_seed = hat_direction(xl, j);
    Complex s_seed = canonical_mode_scalar(data, branches, problem, j, -1, xl,
                                           hbar, opts).factor;
    Vec psi0 = s_seed * hat_seed.phi / std::sqrt(std::abs(hat_seed.N.real()));
    OracleTrace tr = integrate(problem, hbar, xl, xr, psi0, tol, opts);
    out.worst_flux_drift = std::max(out.worst_flux_drift, tr.stats.max_flux_drift);
    const Vec& psi = tr.last();

    Complex k1 = gamma_inner(hat1.phi, psi, problem.Gamma) / hat1.N / denom1;
    Complex k2 = gamma_inner(hat2.phi, psi, problem.Gamma) / hat2.N / denom2;
    out.matrix(0, j - 1) = k1;
    out.matrix(1, j - 1) = k2;

    Vec recon = (gamma_inner(hat1.phi, psi, problem.Gamma) / hat1.N) * hat1.phi +
                (gamma_inner(hat2.phi, psi, problem.Gamma) / hat2.N) * hat2.phi;
    out.residuals(j - 1) = (psi - recon).norm() / psi.norm();
    if (out.residuals(j - 1) > 10.0 * sh) {
      std::ostringstream os;
      os << "extract_empirical_T: projection residual " << out.residuals(j - 1)
         << " exceeds 10 sqrt(hbar)";
      throw NumericError(os.str());
    }
  }
  return out;
}

unsigned resolve_threads(const Options& opts) {
  if (opts.threads > 0) return opts.threads;
  if (const char* env = std::getenv("PENCIL_TRANSIT_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return unsigned(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

ConvergenceStudy convergence_study(const PencilProblem& problem,
                                   const DegeneracyData& data,
                                   const BranchPair& branches,
                                   const std::vector<double>& hbars,
                                   const Options& opts) {
  ConvergenceStudy study;
  study.asymptotic = canonical_T(data.nu, data.w);
  study.rows.resize(hbars.size());

  unsigned nthreads = std::min<unsigned>(resolve_threads(opts),
                                         unsigned(hbars.size()));
  std::vector<std::exception_ptr> errors(hbars.size());
  auto work = [&](size_t i) {
    try {
      double hbar = hbars[i];
      double X0 = default_X0(problem, data, hbar, opts);
      EmpiricalTransition emp = extract_empirical_T(problem, data, branches,
                                                    hbar, X0, opts.ode_tol, opts);
      ConvergenceRow row;
      row.hbar = hbar;
      row.X0 = X0;
      row.err_fro = (emp.matrix - study.asymptotic.entries).norm();
      row.entry_abs_diff = (emp.matrix - study.asymptotic.entries).cwiseAbs();
      row.flux_drift = emp.worst_flux_drift;
      row.residual = emp.residuals.maxCoeff();
      study.rows[i] = row;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (nthreads <= 1) {
    for (size_t i = 0; i < hbars.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (unsigned t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (size_t i = next++; i < hbars.size(); i = next++) work(i);
      });
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < errors.size(); ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  // least-squares slope of log err against log hbar
  if (hbars.size() >= 2) {
    double floor = 1e-12;
    bool above_floor = true;
    for (const auto& r : study.rows) above_floor &= r.err_fro > floor;
    if (above_floor) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int n = int(study.rows.size());
      for (const auto& r : study.rows) {
        double lx = std::log(r.hbar), ly = std::log(r.err_fro);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
      }
      study.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      study.order_fitted = true;
    }
  }
  // monotone errors in hbar (rows may arrive in any hbar order; sort a copy)
  std::vector<ConvergenceRow> sorted = study.rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const ConvergenceRow& a, const ConvergenceRow& b) {
              return a.hbar < b.hbar;
            });
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].err_fro < sorted[i - 1].err_fro * 0.999) study.monotone = false;
  return study;
}

}  // namespace ptransit
