#include "ptransit/report.hpp"

#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace ptransit {

namespace {

// Distance of the closest eigenvalue pair at x.
double min_pair_gap(const PencilProblem& problem, double x, const Options& opts,
                    Complex* beta_mid) {
  auto pairs = solve_pencil_at(problem, x, opts);
  double best = 1e300;
  for (size_t i = 0; i < pairs.size(); ++i)
    for (size_t j = i + 1; j < pairs.size(); ++j) {
      double d = std::abs(pairs[i].beta - pairs[j].beta);
      if (d < best) {
        best = d;
        if (beta_mid) *beta_mid = 0.5 * (pairs[i].beta + pairs[j].beta);
      }
    }
  return best;
}

// Rejects crossings whose eigenvectors degenerate (algebraic multiplicity 2,
// geometric 1).  The probe refines the closest approach of the spectrum and
// rank-tests the pencil there.
void jordan_probe(const PencilProblem& problem, const Options& opts) {
  Complex beta_mid;
  double a = problem.x_lo + 1e-9 * problem.width();
  double b = problem.x_hi - 1e-9 * problem.width();
  const int coarse = 129;
  double best_x = a, best_gap = 1e300;
  for (int i = 0; i < coarse; ++i) {
    double x = a + (b - a) * i / double(coarse - 1);
    double g = min_pair_gap(problem, x, opts, nullptr);
    if (g < best_gap) { best_gap = g; best_x = x; }
  }
  // golden-section refinement of the closest approach
  double lo = std::max(a, best_x - problem.width() / coarse);
  double hi = std::min(b, best_x + problem.width() / coarse);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = min_pair_gap(problem, c, opts, nullptr);
  double fd = min_pair_gap(problem, d, opts, nullptr);
  for (int it = 0; it < 80 && hi - lo > 1e-13 * problem.width(); ++it) {
    if (fc < fd) {
      hi = d; d = c; fd = fc;
      c = hi - gr * (hi - lo);
      fc = min_pair_gap(problem, c, opts, nullptr);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + gr * (hi - lo);
      fd = min_pair_gap(problem, d, opts, nullptr);
    }
  }
  double x_min = 0.5 * (lo + hi);
  double gap = min_pair_gap(problem, x_min, opts, &beta_mid);
  // problem scale over the whole domain; the pencil can vanish entirely at
  // the crossing (graphene), which would defeat a local relative tolerance
  double scale = 1e-12;
  for (int i = 0; i <= 8; ++i)
    scale = std::max(scale, problem.K(a + (b - a) * i / 8.0).norm());
  if (gap > 1e-5 * scale) return;  // nothing degenerates here

  Mat pencil = problem.K(x_min) - beta_mid * problem.Gamma;
  Eigen::JacobiSVD<Mat> svd(pencil);
  const auto& sv = svd.singularValues();
  int deficiency = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) < 1e-6 * scale) ++deficiency;
  if (deficiency < 2) {
    std::ostringstream os;
    os << "Jordan-block case, out of scope: the two eigenvectors become "
          "linearly dependent at the degeneracy point x = "
       << x_min
       << " (algebraic multiplicity 2, geometric 1), as happens for the "
          "first-order reduction of the stationary Schrodinger equation";
    throw AssumptionError(os.str());
  }
}

std::string cformat(Complex z) {
  double re = z.real() == 0.0 ? 0.0 : z.real();  // normalize -0
  double im = z.imag() == 0.0 ? 0.0 : z.imag();
  std::ostringstream os;
  os << std::setprecision(10) << re << (im >= 0 ? "+" : "") << im << "i";
  return os.str();
}

}  // namespace

AnalysisResult analyze(const ProblemSpec& spec) {
  AnalysisResult r;
  r.spec = spec;
  const Options& opts = spec.options;
  validate_problem(spec.problem, opts);
  jordan_probe(spec.problem, opts);

  auto grid = uniform_grid(spec.problem.x_lo, spec.problem.x_hi, opts.grid_points);
  r.branches = smooth_branches(spec.problem, grid, opts);
  double x0 = locate_degeneracy(r.branches, spec.problem,
                                spec.problem.x_lo + 1e-6 * spec.problem.width(),
                                spec.problem.x_hi - 1e-6 * spec.problem.width(),
                                opts);
  r.data = extract_parameters(r.branches, spec.problem, x0, 0.0, opts);
  r.properties = verify_pencil_properties(r.branches, spec.problem,
                                          uniform_grid(spec.problem.x_lo,
                                                       spec.problem.x_hi, 41),
                                          opts);
  r.scenario = r.data.w > 0 ? "avoided crossing" : "real turning points";
  return r;
}

JsonValue analysis_json(const AnalysisResult& r) {
  const DegeneracyData& d = r.data;
  double hbar = r.spec.hbars.front();
  JsonValue j = JsonValue::object();
  j.set("model", JsonValue::str(r.spec.model_kind == "builtin"
                                    ? r.spec.builtin_name
                                    : "polynomial"));
  j.set("dim", JsonValue::integer(r.spec.problem.dim));
  j.set("scenario", JsonValue::str(r.scenario));
  j.set("x0", JsonValue::num(d.x0));
  j.set("Q", JsonValue::num(d.Q));
  j.set("b", JsonValue::num(d.b));
  j.set("p", JsonValue::num(d.p));
  j.set("w", JsonValue::integer(d.w));
  j.set("nu", JsonValue::complex(d.nu));
  j.set("sqrt_nu", JsonValue::complex(d.sqrt_nu));
  j.set("sigma", JsonValue::complex(d.sigma));
  j.set("theta_a", JsonValue::num(d.theta_a));
  j.set("beta0", JsonValue::num(d.beta0));
  j.set("beta_av", JsonValue::object()
                       .set("c0", JsonValue::num(d.beta_av_c0))
                       .set("c1", JsonValue::num(d.beta_av_c1)));
  j.set("hbar_ref", JsonValue::num(hbar));
  j.set("kappa_plus", JsonValue::complex(d.kappa(+1, hbar)));
  j.set("kappa_minus", JsonValue::complex(d.kappa(-1, hbar)));
  j.set("N1", JsonValue::num(d.N1));
  j.set("N2", JsonValue::num(d.N2));
  j.set("trivial_transition", JsonValue::boolean(d.trivial));

  JsonValue props = JsonValue::object();
  props.set("orthogonality", JsonValue::boolean(r.properties.orthogonality));
  props.set("worst_orthogonality", JsonValue::num(r.properties.worst_orthogonality));
  props.set("norms_bounded", JsonValue::boolean(r.properties.norms_bounded));
  props.set("min_abs_norm", JsonValue::num(r.properties.min_abs_norm));
  props.set("signs_constant", JsonValue::boolean(r.properties.signs_constant));
  props.set("reality", JsonValue::boolean(r.properties.reality));
  props.set("solvability", JsonValue::boolean(r.properties.solvability));
  props.set("worst_solve_residual", JsonValue::num(r.properties.worst_solve_residual));
  props.set("slope_identity", JsonValue::boolean(r.properties.slope_identity));
  props.set("worst_slope_residual", JsonValue::num(r.properties.worst_slope_residual));
  props.set("sign_product", JsonValue::integer(r.properties.sign_product));
  props.set("all_pass", JsonValue::boolean(r.properties.all_pass()));
  j.set("properties", std::move(props));
  return j;
}

std::string analysis_text(const AnalysisResult& r) {
  const DegeneracyData& d = r.data;
  std::ostringstream os;
  os << std::setprecision(10);
  os << "pencil analysis\n";
  os << "  model:      "
     << (r.spec.model_kind == "builtin" ? r.spec.builtin_name : "polynomial")
     << " (n = " << r.spec.problem.dim << ")\n";
  os << "  scenario:   " << r.scenario << " (w = " << d.w << ")\n";
  os << "  crossing:   x0 = " << d.x0 << ", beta0 = " << d.beta0 << "\n";
  os << "  parameters: Q = " << d.Q << ", b = " << d.b << ", p = " << d.p
     << "\n";
  os << "              nu = " << cformat(d.nu) << ", theta_a = " << d.theta_a
     << "\n";
  double hbar = r.spec.hbars.front();
  os << "  degeneracy points (hbar = " << hbar << "): kappa+ = "
     << cformat(d.kappa(+1, hbar)) << ", kappa- = " << cformat(d.kappa(-1, hbar))
     << "\n";
  if (d.trivial) os << "  note: B12 = 0, trivial transition (identity matrix)\n";
  os << "  properties: " << (r.properties.all_pass() ? "all pass" : "FAILURES")
     << " (orthogonality " << r.properties.worst_orthogonality
     << ", slope residual " << r.properties.worst_slope_residual
     << ", sgn N1 N2 = " << r.properties.sign_product << ")\n";
  return os.str();
}

TransitionResult compute_transition(const AnalysisResult& a, double hbar,
                                    const TransitionOptions& topts) {
  TransitionResult r;
  r.canonical = canonical_T(a.data.nu, a.data.w);
  r.polar = polar_T(a.data.nu, a.data.w);
  r.properties = check_T_properties(r.canonical, a.data.N1 >= 0 ? 1 : -1,
                                    a.data.N2 >= 0 ? 1 : -1);
  r.trivial = a.data.trivial;
  if (topts.flux_numbering) r.renumbered = renumber_T(r.canonical);
  if (a.data.w < 0) r.rt = reflection_transmission(r.canonical);

  if (topts.general_modes) {
    std::array<double, 4> refs{};
    if (topts.x_refs.size() == 2) {
      refs = {topts.x_refs[0], topts.x_refs[0], topts.x_refs[1], topts.x_refs[1]};
    } else if (topts.x_refs.size() == 4) {
      refs = {topts.x_refs[0], topts.x_refs[1], topts.x_refs[2], topts.x_refs[3]};
    } else {
      throw ParseError("general modes need 2 or 4 reference abscissae");
    }
    std::array<Complex, 4> n{};
    for (int k = 0; k < 4; ++k) {
      ModeSpec spec;
      spec.j = (k % 2) + 1;
      spec.side = k < 2 ? -1 : +1;
      spec.canonical = false;
      spec.x_ref = refs[size_t(k)];
      spec.hbar = hbar;
      n[size_t(k)] = mode_norm_factor(spec, a.data, a.branches, a.spec.problem,
                                      a.spec.options);
    }
    r.n_factors = n;
    r.general = general_T(r.canonical, n[0], n[1], n[2], n[3]);
  }
  return r;
}

namespace {

JsonValue t_json(const TransitionMatrix2& T) {
  JsonValue j = JsonValue::object();
  const char* conv = T.convention == TConvention::canonical    ? "canonical"
                     : T.convention == TConvention::general    ? "general"
                                                               : "renumbered";
  j.set("convention", JsonValue::str(conv));
  j.set("entries", JsonValue::matrix(T.entries));
  j.set("abs", JsonValue::matrix(T.entries.cwiseAbs().cast<Complex>()));
  j.set("det", JsonValue::complex(T.det()));
  return j;
}

}  // namespace

JsonValue transition_json(const TransitionResult& r, const AnalysisResult& a) {
  JsonValue j = JsonValue::object();
  j.set("nu", JsonValue::complex(a.data.nu));
  j.set("w", JsonValue::integer(a.data.w));
  j.set("trivial", JsonValue::boolean(r.trivial));
  j.set("canonical", t_json(r.canonical));
  if (r.polar.theta_defined)
    j.set("theta_prime", JsonValue::num(r.polar.theta_prime));
  JsonValue props = JsonValue::object();
  props.set("det_deviation", JsonValue::num(r.properties.det_deviation));
  props.set("flux_row1", JsonValue::num(r.properties.flux_row1));
  props.set("flux_row2", JsonValue::num(r.properties.flux_row2));
  props.set("flux_cross", JsonValue::num(r.properties.flux_cross));
  props.set("unitarity_deviation", JsonValue::num(r.properties.unitarity));
  props.set("all_pass", JsonValue::boolean(r.properties.all_pass()));
  j.set("properties", std::move(props));
  if (r.renumbered) j.set("renumbered", t_json(*r.renumbered));
  if (r.general) j.set("general", t_json(*r.general));
  if (r.n_factors) {
    JsonValue nf = JsonValue::object();
    nf.set("n1_minus", JsonValue::complex((*r.n_factors)[0]));
    nf.set("n2_minus", JsonValue::complex((*r.n_factors)[1]));
    nf.set("n1_plus", JsonValue::complex((*r.n_factors)[2]));
    nf.set("n2_plus", JsonValue::complex((*r.n_factors)[3]));
    j.set("norm_factors", std::move(nf));
  }
  if (r.rt) {
    JsonValue rt = JsonValue::object();
    rt.set("R", JsonValue::complex(r.rt->R));
    rt.set("T", JsonValue::complex(r.rt->Tcoef));
    rt.set("abs_R", JsonValue::num(std::abs(r.rt->R)));
    rt.set("abs_T", JsonValue::num(std::abs(r.rt->Tcoef)));
    j.set("reflection_transmission", std::move(rt));
  }
  return j;
}

std::string transition_text(const TransitionResult& r, const AnalysisResult& a) {
  std::ostringstream os;
  os << std::setprecision(10);
  const Mat2& t = r.canonical.entries;
  os << "canonical transition matrix (nu = " << cformat(a.data.nu)
     << ", w = " << a.data.w << ")\n";
  for (int i = 0; i < 2; ++i)
    os << "  [ " << cformat(t(i, 0)) << "   " << cformat(t(i, 1)) << " ]\n";
  os << "  |t11| = " << std::abs(t(0, 0)) << ", |t12| = " << std::abs(t(0, 1))
     << ", det = " << cformat(r.canonical.det()) << "\n";
  if (r.trivial) os << "  note: trivial transition (no coupling)\n";
  if (r.rt) {
    os << "  reflection/transmission: |R| = " << std::abs(r.rt->R)
       << ", |T| = " << std::abs(r.rt->Tcoef) << "\n";
  }
  if (r.renumbered) {
    os << "flux-numbering matrix:\n";
    for (int i = 0; i < 2; ++i)
      os << "  [ " << cformat(r.renumbered->entries(i, 0)) << "   "
         << cformat(r.renumbered->entries(i, 1)) << " ]\n";
  }
  if (r.general) {
    os << "general-mode matrix:\n";
    for (int i = 0; i < 2; ++i)
      os << "  [ " << cformat(r.general->entries(i, 0)) << "   "
         << cformat(r.general->entries(i, 1)) << " ]\n";
  }
  os << "  properties: " << (r.properties.all_pass() ? "all pass" : "FAILURES")
     << " (|det - 1| = " << r.properties.det_deviation << ")\n";
  return os.str();
}

OracleRunResult run_oracle(const AnalysisResult& a,
                           const std::vector<double>& hbars, double x0_override,
                           double tol_override) {
  Options opts = a.spec.options;
  if (tol_override > 0) opts.ode_tol = tol_override;
  OracleRunResult r;
  if (x0_override > 0) {
    // fixed projection abscissa for every hbar
    r.study.asymptotic = canonical_T(a.data.nu, a.data.w);
    for (double hbar : hbars) {
      EmpiricalTransition emp = extract_empirical_T(
          a.spec.problem, a.data, a.branches, hbar, x0_override, opts.ode_tol, opts);
      ConvergenceRow row;
      row.hbar = hbar;
      row.X0 = x0_override;
      row.err_fro = (emp.matrix - r.study.asymptotic.entries).norm();
      row.entry_abs_diff = (emp.matrix - r.study.asymptotic.entries).cwiseAbs();
      row.flux_drift = emp.worst_flux_drift;
      row.residual = emp.residuals.maxCoeff();
      r.study.rows.push_back(row);
    }
  } else {
    r.study = convergence_study(a.spec.problem, a.data, a.branches, hbars, opts);
  }
  return r;
}

JsonValue oracle_json(const OracleRunResult& r, const AnalysisResult& a) {
  JsonValue j = JsonValue::object();
  j.set("asymptotic", t_json(r.study.asymptotic));
  JsonValue rows = JsonValue::array();
  for (const auto& row : r.study.rows) {
    JsonValue rj = JsonValue::object();
    rj.set("hbar", JsonValue::num(row.hbar));
    rj.set("X0", JsonValue::num(row.X0));
    rj.set("err_fro", JsonValue::num(row.err_fro));
    rj.set("entry_abs_diff", JsonValue::matrix(row.entry_abs_diff.cast<Complex>()));
    rj.set("flux_drift", JsonValue::num(row.flux_drift));
    rj.set("residual", JsonValue::num(row.residual));
    rows.push(std::move(rj));
  }
  j.set("rows", std::move(rows));
  if (r.study.order_fitted)
    j.set("fitted_order", JsonValue::num(r.study.fitted_order));
  j.set("monotone", JsonValue::boolean(r.study.monotone));
  if (a.data.w < 0) {
    auto rt = reflection_transmission(r.study.asymptotic);
    j.set("asymptotic_abs_R", JsonValue::num(std::abs(rt.R)));
    j.set("asymptotic_abs_T", JsonValue::num(std::abs(rt.Tcoef)));
  }
  return j;
}

std::string oracle_text(const OracleRunResult& r, const AnalysisResult& a) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "oracle comparison against the closed-form transition matrix\n";
  os << "  " << std::setw(12) << "hbar" << std::setw(12) << "X0" << std::setw(14)
     << "||dT||_F" << std::setw(14) << "flux drift" << std::setw(14)
     << "residual" << "\n";
  for (const auto& row : r.study.rows) {
    os << "  " << std::setw(12) << row.hbar << std::setw(12) << row.X0
       << std::setw(14) << row.err_fro << std::setw(14) << row.flux_drift
       << std::setw(14) << row.residual << "\n";
  }
  if (r.study.order_fitted)
    os << "  fitted convergence order: " << r.study.fitted_order << "\n";
  else
    os << "  convergence order not fitted (single hbar or error at floor)\n";
  if (!r.study.monotone)
    os << "  warning: errors are not monotone in hbar (check X0 rule)\n";
  if (a.data.w < 0) {
    auto rt = reflection_transmission(r.study.asymptotic);
    os << "  asymptotic |R| = " << std::abs(rt.R) << ", |T| = "
       << std::abs(rt.Tcoef) << "\n";
  }
  return os.str();
}

std::string trace_to_csv(const OracleTrace& trace) {
  std::ostringstream os;
  os << "x";
  int n = trace.psis.empty() ? 0 : int(trace.psis.front().size());
  for (int i = 0; i < n; ++i) os << ",re_psi" << i + 1 << ",im_psi" << i + 1;
  os << ",flux\n";
  os << std::setprecision(17);
  for (size_t k = 0; k < trace.xs.size(); ++k) {
    os << trace.xs[k];
    for (int i = 0; i < n; ++i)
      os << "," << trace.psis[k](i).real() << "," << trace.psis[k](i).imag();
    os << "," << trace.flux[k] << "\n";
  }
  return os.str();
}

}  // namespace ptransit
