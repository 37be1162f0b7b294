#include "ptransit/spec_file.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ptransit {

namespace {

using nlohmann::json;

Complex parse_complex(const json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw ParseError("expected a number or [re, im] pair at " + where);
}

Mat parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ParseError("expected a matrix (array of rows) at " + where);
  int n = int(j.size());
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || int(j[i].size()) != n)
      throw ParseError("matrix at " + where + " is not square");
    for (int k = 0; k < n; ++k)
      m(i, k) = parse_complex(j[i][k], where + "[" + std::to_string(i) + "][" +
                                           std::to_string(k) + "]");
  }
  return m;
}

PolynomialMatrix parse_poly_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ParseError("expected polynomial matrix at " + where);
  PolynomialMatrix pm;
  pm.dim = int(j.size());
  pm.coeffs.resize(size_t(pm.dim));
  for (int i = 0; i < pm.dim; ++i) {
    if (!j[i].is_array() || int(j[i].size()) != pm.dim)
      throw ParseError("polynomial matrix at " + where + " is not square");
    pm.coeffs[size_t(i)].resize(size_t(pm.dim));
    for (int k = 0; k < pm.dim; ++k) {
      const json& cell = j[i][k];
      if (!cell.is_array())
        throw ParseError("polynomial entry must be a coefficient list at " + where);
      std::vector<Complex> cs;
      for (size_t q = 0; q < cell.size(); ++q)
        cs.push_back(parse_complex(cell[q], where + " coefficient"));
      if (cs.empty()) cs.push_back(0.0);
      pm.coeffs[size_t(i)][size_t(k)] = std::move(cs);
    }
  }
  return pm;
}

void check_hermitian_samples(const PencilProblem& pr) {
  for (int s = 0; s <= 8; ++s) {
    double x = pr.x_lo + pr.width() * s / 8.0;
    for (const char* which : {"K", "B"}) {
      Mat m = which[0] == 'K' ? pr.K(x) : pr.B(x);
      for (int i = 0; i < pr.dim; ++i)
        for (int j = 0; j < pr.dim; ++j) {
          if (std::abs(m(i, j) - std::conj(m(j, i))) >
              1e-12 * std::max(1.0, m.norm())) {
            std::ostringstream os;
            os << which << " is not Hermitian at x = " << x << ", entries ("
               << i << "," << j << ") vs (" << j << "," << i << ")";
            throw ParseError(os.str());
          }
        }
    }
  }
}

void apply_options(const json& j, Options& o) {
  auto get = [&](const char* k, double& target) {
    if (j.contains(k)) target = j.at(k).get<double>();
  };
  get("real_eig_tol", o.real_eig_tol);
  get("gamma_sv_tol", o.gamma_sv_tol);
  get("gap_min", o.gap_min);
  get("fd_step_rel", o.fd_step_rel);
  get("berry_fd_rel", o.berry_fd_rel);
  get("g_exponent", o.g_exponent);
  get("quad_tol", o.quad_tol);
  get("z_switch", o.z_switch);
  get("flux_tol", o.flux_tol);
  get("ode_tol", o.ode_tol);
  get("x0_pow", o.x0_pow);
  if (j.contains("grid_points")) o.grid_points = j.at("grid_points").get<int>();
  if (j.contains("gauge")) {
    std::string g = j.at("gauge").get<std::string>();
    if (g == "phase-fixed") o.fix_theta_a = true;
    else if (g == "natural") o.fix_theta_a = false;
    else throw ParseError("options.gauge must be 'natural' or 'phase-fixed'");
  }
  if (o.g_exponent <= 0.0 || o.g_exponent >= 0.25)
    throw ParseError("options.g_exponent must lie in (0, 1/4)");
}

}  // namespace

ProblemSpec parse_spec_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec file is not valid JSON: ") + e.what());
  }

  ProblemSpec spec;
  if (!j.contains("model")) throw ParseError("spec file: missing 'model'");
  spec.model_kind = j.at("model").get<std::string>();

  double x_lo = -1.0, x_hi = 1.0;
  if (j.contains("domain")) {
    auto d = j.at("domain");
    if (!d.is_array() || d.size() != 2)
      throw ParseError("spec file: 'domain' must be [x_lo, x_hi]");
    x_lo = d[0].get<double>();
    x_hi = d[1].get<double>();
    if (!(x_hi > x_lo)) throw ParseError("spec file: domain must be increasing");
  }

  if (spec.model_kind == "builtin") {
    if (!j.contains("builtin"))
      throw ParseError("spec file: model 'builtin' needs a 'builtin' object");
    const json& b = j.at("builtin");
    spec.builtin_name = b.at("name").get<std::string>();
    std::map<std::string, double> params;
    if (b.contains("params"))
      for (auto it = b.at("params").begin(); it != b.at("params").end(); ++it)
        params[it.key()] = it.value().get<double>();
    if (j.contains("domain")) {
      params["x_lo"] = x_lo;
      params["x_hi"] = x_hi;
    }
    spec.problem = builtin_problem(spec.builtin_name, params);
  } else if (spec.model_kind == "polynomial") {
    if (!j.contains("polynomial"))
      throw ParseError("spec file: model 'polynomial' needs a 'polynomial' object");
    const json& p = j.at("polynomial");
    PolynomialMatrix K = parse_poly_matrix(p.at("K"), "polynomial.K");
    PolynomialMatrix B = parse_poly_matrix(p.at("B"), "polynomial.B");
    Mat gamma = parse_matrix(p.at("Gamma"), "polynomial.Gamma");
    spec.problem = polynomial_problem(K, B, gamma, x_lo, x_hi);
    check_hermitian_samples(spec.problem);
  } else {
    throw ParseError("spec file: model must be 'builtin' or 'polynomial'");
  }

  if (j.contains("hbar")) {
    const json& h = j.at("hbar");
    if (h.is_number()) {
      spec.hbars.push_back(h.get<double>());
    } else if (h.is_array()) {
      for (const auto& v : h) spec.hbars.push_back(v.get<double>());
    } else {
      throw ParseError("spec file: 'hbar' must be a number or a list");
    }
    for (double v : spec.hbars)
      if (!(v > 0.0 && v < 1.0))
        throw ParseError("spec file: hbar values must lie in (0, 1)");
  }
  if (spec.hbars.empty()) spec.hbars.push_back(1e-3);

  if (j.contains("options")) apply_options(j.at("options"), spec.options);
  return spec;
}

ProblemSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec_json(ss.str());
}

std::string example_spec_text(const std::string& name) {
  if (name == "graphene" || name == "lz" || name == "wave") {
    std::ostringstream os;
    os << "{\n"
       << "  \"model\": \"builtin\",\n"
       << "  \"builtin\": {\"name\": \"" << name << "\", \"params\": {"
       << (name == "wave" ? "\"mu\": 1.0, \"s\": 1.0, \"r\": 1.0"
                          : "\"Q\": 1.0, \"p\": 1.0")
       << "}},\n"
       << "  \"hbar\": [0.01, 0.001],\n"
       << "  \"domain\": " << (name == "wave" ? "[-0.5, 0.5]" : "[-1.0, 1.0]")
       << ",\n"
       << "  \"options\": {\"gauge\": \"natural\"}\n"
       << "}\n";
    return os.str();
  }
  if (name == "schrodinger") {
    // first-order form of the stationary equation; rejected by analysis
    // because the eigenvectors degenerate at the turning point
    return std::string("{\n") +
           "  \"model\": \"polynomial\",\n"
           "  \"polynomial\": {\n"
           "    \"K\": [[[0.0, 1.0], [0.0]], [[0.0], [1.0]]],\n"
           "    \"B\": [[[0.0], [0.0]], [[0.0], [0.0]]],\n"
           "    \"Gamma\": [[0.0, 1.0], [1.0, 0.0]]\n"
           "  },\n"
           "  \"hbar\": 0.001,\n"
           "  \"domain\": [-1.0, 1.0]\n"
           "}\n";
  }
  throw ParseError("no example spec named '" + name + "'");
}

}  // namespace ptransit
