#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "valign/model.hpp"

namespace valign {

/// Writes free-format MPS. Output is a pure function of the model:
/// variables and rows in declaration order, numbers in shortest
/// round-trip form, binaries as BV bounds, SOS sets with their weights.
void write_mps(const MilpModel& model, std::ostream& out);
std::string to_mps(const MilpModel& model);

/// Lints the model first; throws Error on lint problems or I/O failure.
void emit_mps(const MilpModel& model, const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace valign
