#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "valign/error.hpp"

namespace valign {

/// A cross-section of the road corridor. Offsets are ground minus road
/// elevation, so a positive offset means net excavation.
struct Section {
  int index = 0;                 // 1-based
  double station = 0.0;          // m from road start
  double ground_elevation = 0.0; // m
  double area = 0.0;             // m^2, converts offset to volume
  int material = 1;              // 1-based id into CostModel::materials
  double offset_lo = 0.0;        // m
  double offset_hi = 0.0;        // m

  bool operator==(const Section&) const = default;
};

/// Number of sections per spline segment. Segment g (1-based) covers
/// sections first_section(g) .. first_section(g) + size(g) - 1.
struct SegmentLayout {
  std::vector<int> segment_sizes;

  int segment_count() const { return static_cast<int>(segment_sizes.size()); }
  int section_count() const;
  int first_section(int segment) const;
  /// Maps the j-th section (1-based) of a segment to its road section index.
  int section_of(int segment, int j) const { return first_section(segment) + j - 1; }
  int segment_of(int section) const;

  bool operator==(const SegmentLayout&) const = default;
};

struct HaulClass {
  std::string name;
  double loading_cost = 0.0;   // $/m^3
  double unit_haul_cost = 0.0; // $/(m^3 m)

  bool operator==(const HaulClass&) const = default;
};

struct Material {
  std::string name;
  double excavation = 0.0; // $/m^3
  double embankment = 0.0; // $/m^3

  bool operator==(const Material&) const = default;
};

struct CostModel {
  std::vector<Material> materials;
  std::vector<HaulClass> hauls;

  /// Materials M1..M4 and the short/middle/long haul classes used in the
  /// industrial cost table.
  static CostModel standard();
  static std::vector<HaulClass> standard_hauls();
  static std::vector<Material> standard_materials();

  bool operator==(const CostModel&) const = default;
};

enum class PitKind { borrow, waste };

struct Pit {
  PitKind kind = PitKind::borrow;
  int attached_section = 0;
  double capacity = 0.0;  // m^3
  double dead_haul = 0.0; // m between the pit and its section

  bool operator==(const Pit&) const = default;
};

struct Block {
  int section = 0;
  bool operator==(const Block&) const = default;
};

struct AccessRoad {
  int section = 0;
  bool operator==(const AccessRoad&) const = default;
};

struct VolumePoint {
  double offset = 0.0;
  double cut = 0.0;
  double fill = 0.0;
  bool operator==(const VolumePoint&) const = default;
};

/// Piecewise-linear cut/fill volumes of one section as functions of offset.
struct VolumeCurve {
  int section = 0;
  std::vector<VolumePoint> points;
  bool operator==(const VolumeCurve&) const = default;
};

struct RoadInstance {
  std::string name;
  std::vector<Section> sections;
  SegmentLayout layout;
  CostModel costs;
  std::vector<Pit> borrow_pits;
  std::vector<Pit> waste_pits;
  std::vector<Block> blocks;
  std::vector<AccessRoad> access_roads;
  double slope_lo = -0.1;
  double slope_hi = 0.1;
  std::vector<VolumeCurve> volume_curves; // empty, or one per section

  int section_count() const { return static_cast<int>(sections.size()); }
  const Section& section(int index) const { return sections.at(static_cast<std::size_t>(index - 1)); }
  const Material& material_of(int section_index) const;
  bool has_volume_curves() const { return !volume_curves.empty(); }
  const VolumeCurve& volume_curve(int section_index) const;

  bool operator==(const RoadInstance&) const = default;
};

/// Every invariant violation of the instance, with field paths.
std::vector<Issue> check_instance(const RoadInstance& instance);

/// Throws InstanceError when check_instance reports anything.
void require_valid(const RoadInstance& instance);

/// Sorts blocks and access roads by section. Block k (1-based) of the
/// canonical instance is the k-th block from the road start.
RoadInstance canonicalize(RoadInstance instance);

// ---------------------------------------------------------------------------
// Spline geometry

/// Coefficients (c0, c1, c2) of one quadratic piece, in the segment-local
/// coordinate sigma = s - s_first(segment).
using SegmentCoeffs = std::array<double, 3>;

/// Segment start stations followed by the final station (size m + 1).
std::vector<double> segment_knots(const RoadInstance& instance);

/// Segment index (1-based) whose piece is used at `station`. Boundary
/// stations belong to the following segment.
int segment_at(std::span<const double> knots, double station);

/// Road elevation at `station`. Throws Error outside the road extent.
double evaluate_profile(std::span<const SegmentCoeffs> coeffs, std::span<const double> knots,
                        double station);

/// Road grade at `station`. Throws Error outside the road extent.
double evaluate_grade(std::span<const SegmentCoeffs> coeffs, std::span<const double> knots,
                      double station);

/// Value and derivative of one piece at a local coordinate.
inline double piece_value(const SegmentCoeffs& c, double sigma) {
  return c[0] + c[1] * sigma + c[2] * sigma * sigma;
}
inline double piece_slope(const SegmentCoeffs& c, double sigma) { return c[1] + 2.0 * c[2] * sigma; }

// ---------------------------------------------------------------------------
// Cost helpers

struct HaulChoice {
  int haul = 0;          // 0-based index into the haul list
  double unit_cost = 0.; // loading + haul cost per m^3
};

/// Cheapest haul class for moving one m^3 over `distance` metres. Ties go
/// to the lowest index.
HaulChoice cheapest_haul(std::span<const HaulClass> hauls, double distance);
HaulChoice cheapest_haul(const CostModel& costs, double distance);

// ---------------------------------------------------------------------------
// Blocks

/// Block-gated regions, expressed in block sections (sorted ascending).
struct BlockAccess {
  /// Consecutive blocks with no access road strictly between them.
  std::vector<std::pair<int, int>> pairs;
  /// Blocks with no access road strictly before them.
  std::vector<int> left;
  /// Blocks with no access road strictly after them.
  std::vector<int> right;

  bool operator==(const BlockAccess&) const = default;
};

BlockAccess block_access_sets(const RoadInstance& instance);

/// Sorted block sections; block k (1-based) is element k-1.
std::vector<int> block_sections(const RoadInstance& instance);

/// Largest cut or fill volume a section can produce.
double big_m(const RoadInstance& instance, int section);

/// Flow-gating constant: sum of section big-Ms plus total borrow capacity.
double global_big_m(const RoadInstance& instance);

/// Station distance between two sections.
inline double section_distance(const RoadInstance& instance, int a, int b) {
  const double d = instance.section(a).station - instance.section(b).station;
  return d < 0 ? -d : d;
}

/// Linear interpolation of a volume curve at `offset` (clamped is an error).
VolumePoint interpolate_volume(const VolumeCurve& curve, double offset);

}  // namespace valign
