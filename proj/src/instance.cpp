#include "valign/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace valign {

namespace {

std::string indexed(const std::string& field, std::size_t i) {
  std::ostringstream os;
  os << field << '[' << i << ']';
  return os.str();
}

std::string format_issues(const std::vector<Issue>& issues) {
  std::ostringstream os;
  os << "invalid instance (" << issues.size() << " issue" << (issues.size() == 1 ? "" : "s") << ")";
  for (const auto& issue : issues) os << "\n  " << issue.path << ": " << issue.message;
  return os.str();
}

}  // namespace

InstanceError::InstanceError(std::vector<Issue> issues)
    : Error(format_issues(issues)), issues_(std::move(issues)) {}

int SegmentLayout::section_count() const {
  int total = 0;
  for (int size : segment_sizes) total += size;
  return total;
}

int SegmentLayout::first_section(int segment) const {
  int first = 1;
  for (int g = 1; g < segment; ++g) first += segment_sizes.at(static_cast<std::size_t>(g - 1));
  return first;
}

int SegmentLayout::segment_of(int section) const {
  int last = 0;
  for (int g = 1; g <= segment_count(); ++g) {
    last += segment_sizes[static_cast<std::size_t>(g - 1)];
    if (section <= last) return g;
  }
  throw Error("section " + std::to_string(section) + " is past the last segment");
}

std::vector<HaulClass> CostModel::standard_hauls() {
  return {{"short", 0.0, 0.008}, {"middle", 0.6, 0.004}, {"long", 2.6, 0.002}};
}

std::vector<Material> CostModel::standard_materials() {
  return {{"M1", 4.0, 2.0}, {"M2", 4.0, 2.0}, {"M3", 20.0, 1.8}, {"M4", 4.0, 2.0}};
}

CostModel CostModel::standard() { return {standard_materials(), standard_hauls()}; }

const Material& RoadInstance::material_of(int section_index) const {
  return costs.materials.at(static_cast<std::size_t>(section(section_index).material - 1));
}

const VolumeCurve& RoadInstance::volume_curve(int section_index) const {
  return volume_curves.at(static_cast<std::size_t>(section_index - 1));
}

std::vector<Issue> check_instance(const RoadInstance& inst) {
  std::vector<Issue> issues;
  auto report = [&](std::string path, std::string message) {
    issues.push_back({std::move(path), std::move(message)});
  };
  const int n = inst.section_count();
  const int n_materials = static_cast<int>(inst.costs.materials.size());

  if (n == 0) report("sections", "at least one section is required");
  for (std::size_t i = 0; i < inst.sections.size(); ++i) {
    const Section& s = inst.sections[i];
    const std::string p = indexed("sections", i);
    if (s.index != static_cast<int>(i) + 1) report(p + ".index", "expected " + std::to_string(i + 1));
    if (!std::isfinite(s.station)) report(p + ".station", "must be finite");
    if (!std::isfinite(s.ground_elevation)) report(p + ".ground_elevation", "must be finite");
    if (!(std::isfinite(s.area) && s.area > 0)) report(p + ".area", "must be finite and > 0");
    if (s.material < 1 || s.material > n_materials)
      report(p + ".material", "material id " + std::to_string(s.material) + " out of range");
    if (!std::isfinite(s.offset_lo) || !std::isfinite(s.offset_hi))
      report(p + ".offset_lo", "offset bounds must be finite");
    else if (!(s.offset_lo < s.offset_hi))
      report(p + ".offset_lo", "offset_lo must be < offset_hi");
    if (i > 0 && !(s.station > inst.sections[i - 1].station))
      report(p + ".station", "stations must be strictly increasing");
  }

  if (inst.layout.segment_sizes.empty()) report("segments", "at least one segment is required");
  for (std::size_t g = 0; g < inst.layout.segment_sizes.size(); ++g)
    if (inst.layout.segment_sizes[g] < 1) report(indexed("segments", g), "segment size must be >= 1");
  if (!inst.layout.segment_sizes.empty() && inst.layout.section_count() != n)
    report("segments", "segment sizes sum to " + std::to_string(inst.layout.section_count()) +
                           " but there are " + std::to_string(n) + " sections");

  if (inst.costs.materials.empty()) report("materials", "at least one material is required");
  for (std::size_t m = 0; m < inst.costs.materials.size(); ++m) {
    const Material& mat = inst.costs.materials[m];
    if (!(std::isfinite(mat.excavation) && mat.excavation >= 0))
      report(indexed("materials", m) + ".excavation", "must be finite and >= 0");
    if (!(std::isfinite(mat.embankment) && mat.embankment >= 0))
      report(indexed("materials", m) + ".embankment", "must be finite and >= 0");
  }
  if (inst.costs.hauls.empty()) report("hauls", "at least one haul class is required");
  for (std::size_t h = 0; h < inst.costs.hauls.size(); ++h) {
    const HaulClass& haul = inst.costs.hauls[h];
    if (!(std::isfinite(haul.loading_cost) && haul.loading_cost >= 0))
      report(indexed("hauls", h) + ".loading_cost", "must be finite and >= 0");
    if (!(std::isfinite(haul.unit_haul_cost) && haul.unit_haul_cost > 0))
      report(indexed("hauls", h) + ".unit_haul_cost", "must be finite and > 0");
  }

  auto check_pits = [&](const std::vector<Pit>& pits, const char* field, PitKind kind) {
    for (std::size_t j = 0; j < pits.size(); ++j) {
      const Pit& pit = pits[j];
      const std::string p = indexed(field, j);
      if (pit.kind != kind) report(p, "pit kind does not match its list");
      if (pit.attached_section <= 1 || pit.attached_section >= n)
        report(p + ".section", "pit must attach to an interior section (2.." + std::to_string(n - 1) + ")");
      if (!(std::isfinite(pit.capacity) && pit.capacity >= 0)) report(p + ".capacity", "must be finite and >= 0");
      if (!(std::isfinite(pit.dead_haul) && pit.dead_haul >= 0)) report(p + ".dead_haul", "must be finite and >= 0");
    }
  };
  check_pits(inst.borrow_pits, "borrow_pits", PitKind::borrow);
  check_pits(inst.waste_pits, "waste_pits", PitKind::waste);

  std::set<int> seen_blocks;
  for (std::size_t k = 0; k < inst.blocks.size(); ++k) {
    const int s = inst.blocks[k].section;
    const std::string p = indexed("blocks", k) + ".section";
    if (s <= 1 || s >= n) report(p, "block must sit on an interior section (2.." + std::to_string(n - 1) + ")");
    if (!seen_blocks.insert(s).second) report(p, "duplicate block section " + std::to_string(s));
  }
  for (std::size_t r = 0; r < inst.access_roads.size(); ++r) {
    const int s = inst.access_roads[r].section;
    if (s < 1 || s > n) report(indexed("access_roads", r) + ".section", "section out of range");
  }

  if (!(std::isfinite(inst.slope_lo) && std::isfinite(inst.slope_hi) && inst.slope_lo < inst.slope_hi))
    report("slope", "slope.lo must be < slope.hi");

  if (!inst.volume_curves.empty()) {
    if (static_cast<int>(inst.volume_curves.size()) != n)
      report("volume_curves", "expected one curve per section");
    for (std::size_t c = 0; c < inst.volume_curves.size(); ++c) {
      const VolumeCurve& curve = inst.volume_curves[c];
      const std::string p = indexed("volume_curves", c);
      if (curve.section != static_cast<int>(c) + 1) report(p + ".section", "expected " + std::to_string(c + 1));
      if (curve.points.size() < 2) report(p + ".points", "at least two breakpoints are required");
      for (std::size_t b = 0; b < curve.points.size(); ++b) {
        const VolumePoint& pt = curve.points[b];
        const std::string pp = indexed(p + ".points", b);
        if (!std::isfinite(pt.offset) || !std::isfinite(pt.cut) || !std::isfinite(pt.fill))
          report(pp, "breakpoint values must be finite");
        if (pt.cut < 0 || pt.fill < 0) report(pp, "volumes must be >= 0");
        if (b > 0) {
          const VolumePoint& prev = curve.points[b - 1];
          if (!(pt.offset > prev.offset)) report(pp + ".offset", "offsets must be strictly increasing");
          if (pt.cut < prev.cut) report(pp + ".cut", "cut must be nondecreasing in offset");
          if (pt.fill > prev.fill) report(pp + ".fill", "fill must be nonincreasing in offset");
        }
      }
    }
  }
  return issues;
}

void require_valid(const RoadInstance& instance) {
  auto issues = check_instance(instance);
  if (!issues.empty()) throw InstanceError(std::move(issues));
}

RoadInstance canonicalize(RoadInstance instance) {
  auto by_section = [](const auto& a, const auto& b) { return a.section < b.section; };
  std::stable_sort(instance.blocks.begin(), instance.blocks.end(), by_section);
  std::stable_sort(instance.access_roads.begin(), instance.access_roads.end(), by_section);
  return instance;
}

std::vector<double> segment_knots(const RoadInstance& inst) {
  std::vector<double> knots;
  const int m = inst.layout.segment_count();
  knots.reserve(static_cast<std::size_t>(m) + 1);
  for (int g = 1; g <= m; ++g) knots.push_back(inst.section(inst.layout.first_section(g)).station);
  knots.push_back(inst.sections.back().station);
  return knots;
}

int segment_at(std::span<const double> knots, double station) {
  if (knots.size() < 2) throw Error("spline needs at least one segment");
  const double lo = knots.front();
  const double hi = knots.back();
  const double slack = 1e-9 * std::max(1.0, std::abs(hi - lo));
  if (!(station >= lo - slack && station <= hi + slack))
    throw Error("station " + std::to_string(station) + " outside road extent");
  const int m = static_cast<int>(knots.size()) - 1;
  int g = 1;
  while (g < m && station >= knots[static_cast<std::size_t>(g)]) ++g;
  return g;
}

double evaluate_profile(std::span<const SegmentCoeffs> coeffs, std::span<const double> knots, double station) {
  const int g = segment_at(knots, station);
  return piece_value(coeffs[static_cast<std::size_t>(g - 1)], station - knots[static_cast<std::size_t>(g - 1)]);
}

double evaluate_grade(std::span<const SegmentCoeffs> coeffs, std::span<const double> knots, double station) {
  const int g = segment_at(knots, station);
  return piece_slope(coeffs[static_cast<std::size_t>(g - 1)], station - knots[static_cast<std::size_t>(g - 1)]);
}

HaulChoice cheapest_haul(std::span<const HaulClass> hauls, double distance) {
  if (hauls.empty()) throw Error("no haul classes");
  std::vector<double> costs;
  costs.reserve(hauls.size());
  for (const auto& h : hauls) costs.push_back(h.loading_cost + h.unit_haul_cost * distance);
  const double best = *std::min_element(costs.begin(), costs.end());
  // Crossover distances evaluate to equal costs only up to rounding.
  const double tie = 1e-12 * std::max(1.0, std::abs(best));
  for (std::size_t h = 0; h < costs.size(); ++h)
    if (costs[h] <= best + tie) return {static_cast<int>(h), costs[h]};
  return {0, costs[0]};
}

HaulChoice cheapest_haul(const CostModel& costs, double distance) { return cheapest_haul(costs.hauls, distance); }

std::vector<int> block_sections(const RoadInstance& inst) {
  std::vector<int> out;
  for (const auto& b : inst.blocks) out.push_back(b.section);
  std::sort(out.begin(), out.end());
  return out;
}

BlockAccess block_access_sets(const RoadInstance& inst) {
  BlockAccess out;
  const auto blocks = block_sections(inst);
  std::vector<int> roads;
  for (const auto& r : inst.access_roads) roads.push_back(r.section);
  auto any_road = [&](int from, int to) {  // inclusive range
    return std::any_of(roads.begin(), roads.end(), [&](int s) { return s >= from && s <= to; });
  };
  const int n = inst.section_count();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k + 1 < blocks.size() && !any_road(blocks[k] + 1, blocks[k + 1] - 1))
      out.pairs.emplace_back(blocks[k], blocks[k + 1]);
    if (!any_road(1, blocks[k] - 1)) out.left.push_back(blocks[k]);
    if (!any_road(blocks[k] + 1, n)) out.right.push_back(blocks[k]);
  }
  return out;
}

double big_m(const RoadInstance& inst, int section) {
  if (inst.has_volume_curves()) {
    double m = 0.0;
    for (const auto& pt : inst.volume_curve(section).points) m = std::max({m, std::abs(pt.cut), std::abs(pt.fill)});
    return m;
  }
  const Section& s = inst.section(section);
  const double reach = std::max(std::abs(s.offset_lo), std::abs(s.offset_hi));
  if (!std::isfinite(reach) || !std::isfinite(s.area)) throw Error("unbounded offsets at section " + std::to_string(section));
  return s.area * reach;
}

double global_big_m(const RoadInstance& inst) {
  double m = 0.0;
  for (int i = 1; i <= inst.section_count(); ++i) m += big_m(inst, i);
  for (const auto& pit : inst.borrow_pits) m += pit.capacity;
  return m;
}

VolumePoint interpolate_volume(const VolumeCurve& curve, double offset) {
  const auto& pts = curve.points;
  if (pts.empty()) throw Error("empty volume curve");
  const double slack = 1e-9 * std::max(1.0, std::abs(pts.back().offset - pts.front().offset));
  if (offset < pts.front().offset - slack || offset > pts.back().offset + slack)
    throw Error("offset outside volume curve range at section " + std::to_string(curve.section));
  if (offset <= pts.front().offset) return {offset, pts.front().cut, pts.front().fill};
  for (std::size_t b = 1; b < pts.size(); ++b) {
    if (offset <= pts[b].offset) {
      const double w = (offset - pts[b - 1].offset) / (pts[b].offset - pts[b - 1].offset);
      return {offset, pts[b - 1].cut + w * (pts[b].cut - pts[b - 1].cut),
              pts[b - 1].fill + w * (pts[b].fill - pts[b - 1].fill)};
    }
  }
  return {offset, pts.back().cut, pts.back().fill};
}

}  // namespace valign
