#pragma once

#include "lrt/problems.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace lrt {

enum class SolverKind { lowrank_unsplit, lowrank_split, fullgrid };

std::string to_string(SolverKind s);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A complete run. problem.tree follows the solver for the low-rank solvers;
// the full-grid solver keeps it because the WENO weights depend on the tree.
struct RunConfig {
  ProblemConfig problem;
  SolverKind solver = SolverKind::lowrank_unsplit;
  std::string output = "lrt_out";
  std::optional<double> slice_y;  // default: middle of the domain

  void validate() const;
};

// Flat text, one "key = value" per line, '#' starts a comment. Top-level keys
// configure the run; a "[name]" section holds the keys of problem "name".
// Several problem sections may coexist, only the selected one is applied (the
// others are still checked). A "[record]" section is skipped, it carries the
// facts a run manifest records about its outputs.
//
//   problem = manufactured
//   solver = lowrank-split
//   scheme = high-order
//   output = runs/m32
//   [manufactured]
//   eps = 0.01
//   n = 32
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// One override on an already chosen problem. Run keys and problem keys are
// both accepted; "problem" resets the problem knobs to that problem's defaults.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Every knob, exactly (doubles with 17 significant digits), so that parsing
// the output gives back the same configuration.
void write_config(const RunConfig& cfg, std::ostream& out);

ProblemKind parse_problem_kind(const std::string& s);
SolverKind parse_solver_kind(const std::string& s);
Scheme parse_scheme(const std::string& s);

}  // namespace lrt
