#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "valign/builder.hpp"
#include "valign/instance.hpp"
#include "valign/solver.hpp"

namespace valign {

/// Parses an instance document. Omitted slope, hauls and materials take
/// the defaults (+-0.1 grade, short/middle/long hauls, materials M1..M4);
/// omitted segments mean one segment over all sections. Throws
/// InstanceError listing every problem with its field path.
RoadInstance parse_instance_text(const std::string& text);
RoadInstance parse_instance(const std::filesystem::path& path);

/// Canonical JSON with fixed key order and shortest round-trip numbers.
/// Throws Error on non-finite values.
std::string instance_to_json(const RoadInstance& instance);
void write_instance(const RoadInstance& instance, const std::filesystem::path& path);

/// Cost block alone: {"materials": [...], "hauls": [...]}.
CostModel parse_cost_model_text(const std::string& text);

/// Tool settings read from a JSON config file. Every key is optional:
/// solver {command, format, sos, kill_grace}, limits {time_limit, mip_gap,
/// feasibility_tol}, configs [names], workers.
struct ToolConfig {
  std::string solver_command;
  std::string solver_format;
  int solver_sos = -1;  // -1 unset, 0 no, 1 yes
  double kill_grace = -1.0;
  SolverLimits limits;
  std::vector<std::string> configs;
  int workers = 0;
};

ToolConfig parse_tool_config_text(const std::string& text);
ToolConfig parse_tool_config(const std::filesystem::path& path);

/// Result as JSON: spline coefficients, offsets, volumes, nonzero flows and
/// the removal schedule.
std::string result_to_json(const AlignmentResult& result);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace valign
