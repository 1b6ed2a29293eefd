#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>

#include "valign/builder.hpp"
#include "valign/model.hpp"
#include "valign/result.hpp"

namespace valign {

struct SolverLimits {
  double time_limit = 600.0;     // s
  double mip_gap = 0.01;         // relative
  double feasibility_tol = 1e-7; // absolute, a decade below the validator's 1e-6
};

enum class SolveStatus { optimal, feasible, infeasible, timeout, error };

std::string to_string(SolveStatus status);
SolveStatus solve_status_from_string(const std::string& text);
inline bool has_solution(SolveStatus s) { return s == SolveStatus::optimal || s == SolveStatus::feasible; }

/// Text layouts of solution files.
///  - cbc:   CBC `solu` output ("Optimal - objective value X" then
///           "idx name value reduced-cost" lines).
///  - pairs: "name value" lines with optional "solution status:" and
///           "objective value:" headers (SCIP style). Unlisted variables
///           are zero.
///  - xml:   CPLEX-style <header .../> and <variable name= value=/> tags.
enum class SolutionLayout { cbc, pairs, xml };

std::string to_string(SolutionLayout layout);
SolutionLayout solution_layout_from_string(const std::string& text);

struct SolverProfile {
  std::string name = "custom";
  /// Shell command with {mps}, {sol}, {timelimit}, {gap}, {feastol} and
  /// {sosopts} placeholders.
  std::string command;
  /// Replaces {sosopts} when the model has SOS sets, else it expands to "".
  std::string sos_options;
  SolutionLayout layout = SolutionLayout::cbc;
  bool supports_sos = true;
  double kill_grace = 5.0;  // s past time_limit before the process is killed
};

/// CBC binary at `executable` with all columns printed.
SolverProfile cbc_profile(const std::string& executable);

/// Guesses layout and SOS support from the command text.
SolverProfile profile_from_command(const std::string& command);

/// Profile from VALIGN_SOLVER_CMD (and optional VALIGN_SOLVER_FORMAT);
/// empty when the variable is unset.
std::optional<SolverProfile> profile_from_environment();

struct Solution {
  SolveStatus status = SolveStatus::error;
  double objective = 0.0;
  std::unordered_map<std::string, double> values;
  /// True when the layout omits zero-valued variables.
  bool sparse = false;
  double wall_time = 0.0;
  std::string solver_log_path;
  std::string message;
};

Solution parse_solution(std::istream& in, SolutionLayout layout);
Solution parse_solution_file(const std::filesystem::path& path, SolutionLayout layout);

/// Writes the model as MPS into `work_dir`, runs the solver command and
/// parses its solution file. The process group is killed once
/// time_limit + kill_grace has elapsed. Never throws for solver-side
/// failures; those come back as SolveStatus::error with a message.
Solution solve(const MilpModel& model, const SolverProfile& profile, const SolverLimits& limits,
               const std::filesystem::path& work_dir);

/// Adjusts a configuration to what the solver can express: SOS-based
/// volume and block techniques fall back to binaries when the solver has
/// no SOS support. `warning` receives a note when anything changed.
BuilderConfig adapt_to_solver(BuilderConfig config, const SolverProfile& profile, std::string* warning = nullptr);

/// Maps canonical variable names back to a structured result and checks
/// the recomputed objective against the solver's within 1e-5 relative.
/// Throws DecodeError on missing variables or an objective mismatch.
AlignmentResult decode(const Solution& solution, const RoadInstance& instance, const BuilderConfig& config);

}  // namespace valign
