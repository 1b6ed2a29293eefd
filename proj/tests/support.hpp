#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "valign/instance.hpp"
#include "valign/solver.hpp"

namespace valign::testing {

/// Evenly spaced sections on one segment, material M1, standard costs.
inline RoadInstance road(const std::vector<double>& ground, double spacing = 20.0, double area = 10.0,
                         double bound = 5.0) {
  RoadInstance inst;
  inst.name = "test";
  inst.costs = CostModel::standard();
  for (std::size_t i = 0; i < ground.size(); ++i) {
    Section s;
    s.index = static_cast<int>(i) + 1;
    s.station = spacing * static_cast<double>(i);
    s.ground_elevation = ground[i];
    s.area = area;
    s.offset_lo = -bound;
    s.offset_hi = bound;
    inst.sections.push_back(s);
  }
  inst.layout.segment_sizes = {static_cast<int>(ground.size())};
  return inst;
}

inline RoadInstance flat_road(int n, double height = 100.0) {
  return road(std::vector<double>(static_cast<std::size_t>(n), height));
}

/// Path of the CBC binary found at configure time, if any.
inline std::optional<std::string> cbc_path() {
#ifdef VALIGN_CBC
  const std::string p = VALIGN_CBC;
  if (!p.empty() && std::filesystem::exists(p)) return p;
#endif
  return std::nullopt;
}

inline std::optional<SolverProfile> test_solver() {
  if (auto p = cbc_path()) return cbc_profile(*p);
  return std::nullopt;
}

/// Fresh directory under the build tree's temp area.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("valign-test-" + std::to_string(::getpid())) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace valign::testing
