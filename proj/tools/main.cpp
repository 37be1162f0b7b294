#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ptransit/pcf.hpp"
#include "ptransit/report.hpp"

using namespace ptransit;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'");
  out << content;
}

ProblemSpec spec_from_cli(const std::string& spec_path,
                          const std::string& builtin,
                          const std::vector<std::string>& params) {
  if (!spec_path.empty() && !builtin.empty())
    throw ParseError("give either --spec or --builtin, not both");
  if (!spec_path.empty()) return load_spec_file(spec_path);
  if (builtin.empty()) throw ParseError("one of --spec or --builtin is required");
  std::map<std::string, double> p;
  for (const std::string& kv : params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ParseError("--param expects key=value, got '" + kv + "'");
    try {
      p[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError("--param value is not a number in '" + kv + "'");
    }
  }
  ProblemSpec spec;
  spec.model_kind = "builtin";
  spec.builtin_name = builtin;
  spec.problem = builtin_problem(builtin, p);
  spec.hbars = {1e-3};
  return spec;
}

Complex parse_nu(const std::string& text) {
  // accepts forms like "0.5i", "-0.25i", "0", "0i"
  std::string t = text;
  bool imag = false;
  if (!t.empty() && (t.back() == 'i' || t.back() == 'I')) {
    imag = true;
    t.pop_back();
  }
  if (t.empty() || t == "+" || t == "-") t += "1";
  size_t pos = 0;
  double v;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ParseError("cannot parse nu from '" + text + "'");
  }
  if (pos != t.size()) throw ParseError("cannot parse nu from '" + text + "'");
  if (!imag && v != 0.0)
    throw ParseError("nu must be purely imaginary (e.g. 0.5i)");
  return imag ? Complex(0.0, v) : Complex(0.0, 0.0);
}

int run(int argc, char** argv) {
  CLI::App app{"nonadiabatic transitions of self-adjoint operator pencils"};
  app.require_subcommand(1);

  std::string spec_path, builtin, json_path, csv_path;
  std::vector<std::string> params;

  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "problem spec file (JSON)");
    cmd->add_option("--builtin", builtin, "builtin model name");
    cmd->add_option("--param", params, "builtin parameter key=value");
    cmd->add_option("--json", json_path, "write a JSON report to this path");
  };

  auto* cmd_analyze = app.add_subcommand(
      "analyze", "locate the crossing and extract its parameters");
  add_input(cmd_analyze);

  auto* cmd_transition =
      app.add_subcommand("transition", "closed-form transition matrices");
  add_input(cmd_transition);
  std::string numbering = "smooth", modes = "canonical";
  std::vector<double> xrefs;
  double hbar_flag = 0.0;
  cmd_transition->add_option("--numbering", numbering,
                             "matrix numbering: smooth|flux");
  cmd_transition->add_option("--modes", modes,
                             "mode normalization: canonical|general");
  cmd_transition->add_option("--xref", xrefs,
                             "reference abscissae for general modes "
                             "(x- x+ or x1- x2- x1+ x2+)");
  cmd_transition->add_option("--hbar", hbar_flag, "hbar for general modes");

  auto* cmd_oracle = app.add_subcommand(
      "oracle", "integrate the exact problem and compare transition matrices");
  add_input(cmd_oracle);
  std::vector<double> hbars;
  double X0 = 0.0, tol = 0.0;
  cmd_oracle->add_option("--hbar", hbars, "hbar values for the sweep");
  cmd_oracle->add_option("--X0", X0, "projection abscissa (default: rule)");
  cmd_oracle->add_option("--tol", tol, "integrator tolerance (>= 1e-12)");
  cmd_oracle->add_option("--csv", csv_path, "write trace CSV files (prefix)");

  auto* cmd_pcf =
      app.add_subcommand("pcf", "parabolic cylinder function along a ray");
  std::string nu_text = "0", ray = "-45deg";
  double range = 10.0;
  int steps = 100;
  cmd_pcf->add_option("--nu", nu_text, "purely imaginary order, e.g. 0.5i");
  cmd_pcf->add_option("--ray", ray, "ray: -45deg or 135deg");
  cmd_pcf->add_option("--range", range, "maximum |z|");
  cmd_pcf->add_option("--steps", steps, "number of samples");
  cmd_pcf->add_option("--csv", csv_path, "write the scan to this path");

  auto* cmd_example =
      app.add_subcommand("example", "emit a sample problem spec file");
  std::string example_name;
  std::string out_path;
  cmd_example->add_option("name", example_name, "graphene|lz|wave|schrodinger")
      ->required();
  cmd_example->add_option("--out", out_path, "output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  if (cmd_example->parsed()) {
    std::string text = example_spec_text(example_name);
    if (out_path.empty())
      std::cout << text;
    else
      write_file(out_path, text);
    return 0;
  }

  if (cmd_pcf->parsed()) {
    Complex nu = parse_nu(nu_text);
    double angle;
    if (ray == "-45deg" || ray == "-pi/4")
      angle = -kPi / 4.0;
    else if (ray == "135deg" || ray == "3pi/4")
      angle = 3.0 * kPi / 4.0;
    else
      throw ParseError("unsupported ray '" + ray + "' (use -45deg or 135deg)");
    if (steps < 2) throw ParseError("--steps must be >= 2");

    std::ostringstream os;
    os << "abs_z,re_D,im_D,regime,est_error\n";
    os << std::setprecision(17);
    for (int i = 0; i < steps; ++i) {
      double rr = range * (i + 1) / double(steps);
      Complex z = std::polar(rr, angle);
      PcfEvaluation ev = pcf_d(nu, z);
      os << rr << "," << ev.value.real() << "," << ev.value.imag() << ","
         << (ev.regime == PcfRegime::series ? "series" : "asymptotic") << ","
         << ev.est_error << "\n";
    }
    if (csv_path.empty())
      std::cout << os.str();
    else
      write_file(csv_path, os.str());
    return 0;
  }

  ProblemSpec spec = spec_from_cli(spec_path, builtin, params);
  AnalysisResult analysis = analyze(spec);

  if (cmd_analyze->parsed()) {
    std::cout << analysis_text(analysis);
    if (!json_path.empty()) write_file(json_path, analysis_json(analysis).dump());
    return analysis.properties.all_pass() ? 0 : 1;
  }

  if (cmd_transition->parsed()) {
    TransitionOptions topts;
    if (numbering == "flux")
      topts.flux_numbering = true;
    else if (numbering != "smooth")
      throw ParseError("--numbering must be smooth or flux");
    if (modes == "general") {
      topts.general_modes = true;
      topts.x_refs = xrefs;
    } else if (modes != "canonical") {
      throw ParseError("--modes must be canonical or general");
    }
    double hbar = hbar_flag > 0 ? hbar_flag : spec.hbars.front();
    TransitionResult tr = compute_transition(analysis, hbar, topts);
    std::cout << transition_text(tr, analysis);
    if (!json_path.empty())
      write_file(json_path, transition_json(tr, analysis).dump());
    return 0;
  }

  if (cmd_oracle->parsed()) {
    std::vector<double> hs = hbars.empty() ? spec.hbars : hbars;
    OracleRunResult res = run_oracle(analysis, hs, X0, tol);
    std::cout << oracle_text(res, analysis);
    if (!json_path.empty())
      write_file(json_path, oracle_json(res, analysis).dump());
    if (!csv_path.empty()) {
      // one canonical-mode trace per hbar for inspection
      for (double hbar : hs) {
        double xw = default_X0(spec.problem, analysis.data, hbar, spec.options);
        Vec psi0 = canonical_mode_value(analysis.data, analysis.branches,
                                        spec.problem, 1, -1, analysis.data.x0 - xw,
                                        hbar, spec.options);
        OracleTrace trace =
            integrate(spec.problem, hbar, analysis.data.x0 - xw,
                      analysis.data.x0 + xw, psi0,
                      tol > 0 ? tol : spec.options.ode_tol, spec.options);
        std::ostringstream name;
        name << csv_path << "_hbar" << hbar << ".csv";
        write_file(name.str(), trace_to_csv(trace));
      }
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const AssumptionError& e) {
    std::cerr << "assumption violated: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
