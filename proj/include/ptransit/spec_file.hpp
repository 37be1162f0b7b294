#pragma once

#include <string>
#include <vector>

#include "ptransit/config.hpp"
#include "ptransit/models.hpp"

namespace ptransit {

// On-disk problem description: a single JSON document with complex numbers
// as [re, im] pairs, matrices row-major, polynomial coefficients lowest
// degree first.
struct ProblemSpec {
  PencilProblem problem;
  std::vector<double> hbars;
  Options options;
  std::string model_kind;    // "builtin" or "polynomial"
  std::string builtin_name;  // when builtin
};

ProblemSpec load_spec_file(const std::string& path);
ProblemSpec parse_spec_json(const std::string& text);

// Sample spec document for `example <name>`.
std::string example_spec_text(const std::string& name);

}  // namespace ptransit
