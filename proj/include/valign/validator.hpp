#pragma once

#include <array>
#include <string>

#include "valign/builder.hpp"
#include "valign/instance.hpp"
#include "valign/result.hpp"

namespace valign {

enum class Family {
  conservation,
  balance,
  capacity,
  block_gating,
  removal_indicator,
  removal_monotonicity,
  removal_enforcement,
  continuity,
  slope,
  volume,
  bounds,
};

inline constexpr std::size_t kFamilyCount = 11;

std::string to_string(Family family);

struct FamilyStats {
  double worst = 0.0;  // largest violation seen
  int count = 0;       // rows above tolerance
};

struct ViolationReport {
  std::array<FamilyStats, kFamilyCount> families{};
  double tolerance = 1e-6;
  bool relative = false;

  const FamilyStats& operator[](Family f) const { return families[static_cast<std::size_t>(f)]; }
  FamilyStats& operator[](Family f) { return families[static_cast<std::size_t>(f)]; }
  bool passed() const;
  bool passed(Family f) const { return (*this)[f].worst <= tolerance; }
  /// One "family worst count PASS|FAIL" line per family.
  std::string summary() const;
};

struct ValidateOptions {
  double tolerance = 1e-6;
  /// Scale each row's violation by max(1, largest |term| in the row).
  bool relative = false;
};

/// Re-checks every constraint family from the instance data and the
/// decoded values alone.
ViolationReport validate(const RoadInstance& instance, const BuilderConfig& config, const AlignmentResult& result,
                         const ValidateOptions& options = {});

/// Total excavation, embankment, loading and hauling cost of a result.
double recompute_cost(const RoadInstance& instance, const BuilderConfig& config, const AlignmentResult& result);

}  // namespace valign
