#pragma once

#include <span>
#include <vector>

#include "valign/instance.hpp"

namespace valign {

/// Successive-shortest-path min-cost flow on real-valued capacities.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes);

  /// Returns the arc id.
  int add_arc(int from, int to, double capacity, double cost);

  struct Outcome {
    double flow = 0.0;
    double cost = 0.0;
  };
  /// Sends up to `limit` units from `source` to `sink` along cheapest paths.
  Outcome run(int source, int sink, double limit);

  double flow_on(int arc) const;

 private:
  struct Arc {
    int to;
    double capacity;
    double cost;
  };
  int n_;
  std::vector<Arc> arcs_;  // arc 2k and its reverse 2k+1
  std::vector<std::vector<int>> out_;
};

/// One end of a shipment. Positions are road stations; dead haul is added
/// to every distance touching the node.
struct TransportNode {
  int id = 0;              // caller's label, reported back in the plan
  double station = 0.0;
  double dead_haul = 0.0;
  double amount = 0.0;     // m^3 to ship, or capacity when optional
  double unit_cost = 0.0;  // excavation (supplies) or embankment (demands)
  bool optional = false;   // pits: anything from 0 to amount
};

struct TransportationProblem {
  std::vector<TransportNode> supplies;
  std::vector<TransportNode> demands;
  std::vector<HaulClass> hauls;
};

struct Shipment {
  int from = 0;  // TransportNode::id
  int to = 0;
  double volume = 0.0;
};

struct TransportPlan {
  std::vector<Shipment> shipments;
  double cost = 0.0;
};

/// Exact optimum; every mandatory supply and demand is met in full,
/// optional nodes within their capacity. Per-unit cost is
/// source cost + cheapest haul over the distance + sink cost; optional
/// supplies never ship to optional demands. Throws Error when the volumes
/// cannot be balanced.
TransportPlan solve_transportation(const TransportationProblem& problem);

/// Problem for given per-section cut and fill volumes (1-based, slot 0
/// unused) with the instance's pits. Node ids follow the builder's node
/// numbering.
TransportationProblem transportation_for(const RoadInstance& instance, std::span<const double> cut,
                                         std::span<const double> fill);

/// Earthwork cost of the alignment with the given offsets (one per section,
/// linear volumes). Throws Error when the volumes cannot be balanced.
double fixed_offset_cost(const RoadInstance& instance, std::span<const double> offsets);

struct EnumerationResult {
  bool feasible = false;
  std::vector<double> offsets;  // one per section
  double cost = 0.0;
  long combinations = 0;
  long feasible_combinations = 0;
};

/// Tries every combination of per-section offset candidates on a
/// block-free single-segment instance with at most 8 sections and 5
/// candidates each. A combination is kept when a quadratic fits the road
/// heights within 1e-6 and its end grades respect the slope bounds. Ties go
/// to the lexicographically smallest offsets.
EnumerationResult enumerate_optimal(const RoadInstance& instance, const std::vector<std::vector<double>>& grid);

/// Least-squares quadratic (in the local coordinate) through the given
/// heights; for one or two sections the lowest-degree interpolant.
SegmentCoeffs fit_quadratic(std::span<const double> sigma, std::span<const double> heights);

}  // namespace valign
