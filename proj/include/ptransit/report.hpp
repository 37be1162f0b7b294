#pragma once

#include <optional>
#include <string>

#include "ptransit/json_writer.hpp"
#include "ptransit/oracle.hpp"
#include "ptransit/spec_file.hpp"

namespace ptransit {

// Full analysis pipeline: validation, Jordan probe, branch tracking,
// crossing location, parameter extraction, and the pencil property report.
struct AnalysisResult {
  ProblemSpec spec;
  BranchPair branches;
  DegeneracyData data;
  PencilPropertyReport properties;
  std::string scenario;  // "avoided crossing" or "real turning points"
};

AnalysisResult analyze(const ProblemSpec& spec);

JsonValue analysis_json(const AnalysisResult& r);
std::string analysis_text(const AnalysisResult& r);

struct TransitionOptions {
  bool flux_numbering = false;  // emit the renumbered matrix as well
  bool general_modes = false;
  std::vector<double> x_refs;   // [x1-, x2-, x1+, x2+] or [x-, x+]
};

struct TransitionResult {
  TransitionMatrix2 canonical;
  PolarT polar;
  TPropertyReport properties;
  std::optional<TransitionMatrix2> renumbered;
  std::optional<TransitionMatrix2> general;
  std::optional<std::array<Complex, 4>> n_factors;  // n1-, n2-, n1+, n2+
  std::optional<ReflectionTransmission> rt;
  bool trivial = false;
};

TransitionResult compute_transition(const AnalysisResult& a, double hbar,
                                    const TransitionOptions& topts = {});

JsonValue transition_json(const TransitionResult& r, const AnalysisResult& a);
std::string transition_text(const TransitionResult& r, const AnalysisResult& a);

struct OracleRunResult {
  ConvergenceStudy study;
};

OracleRunResult run_oracle(const AnalysisResult& a,
                           const std::vector<double>& hbars, double x0_override,
                           double tol_override);

JsonValue oracle_json(const OracleRunResult& r, const AnalysisResult& a);
std::string oracle_text(const OracleRunResult& r, const AnalysisResult& a);

std::string trace_to_csv(const OracleTrace& trace);

}  // namespace ptransit
