#pragma once

#include <string>
#include <vector>

#include "valign/builder.hpp"
#include "valign/instance.hpp"

namespace valign {

/// Flows of one (haul, time step). Section-indexed vectors have n+1 slots
/// and pit-indexed vectors count+1 slots; slot 0 is unused. "fwd" is the
/// chain carrying material toward increasing stations.
struct ChainFlows {
  std::vector<double> fwd_transit;   // i -> i+1
  std::vector<double> back_transit;  // i -> i-1
  std::vector<double> cut_fwd;       // cut of i put on the forward chain
  std::vector<double> cut_back;      // cut of i put on the backward chain
  std::vector<double> fill_fwd;      // fill of i taken from the forward chain
  std::vector<double> fill_back;     // fill of i taken from the backward chain
  std::vector<double> borrow_fwd, borrow_back;
  std::vector<double> waste_fwd, waste_back;
};

struct ArcFlow {
  int from = 0;  // node number (sections, then borrow pits, then waste pits)
  int to = 0;
  double volume = 0.0;
};

/// Structured view of a solved model.
struct AlignmentResult {
  std::string config_name;
  ModelKind model = ModelKind::mhqnf;
  std::vector<SegmentCoeffs> coeffs;  // one per segment
  std::vector<double> offsets;        // [1..n]
  std::vector<double> cut;            // [1..n]
  std::vector<double> fill;           // [1..n]
  std::vector<double> borrow_volume;  // [1..n_borrow]
  std::vector<double> waste_volume;   // [1..n_waste]
  int haul_count = 0;
  int step_count = 1;
  std::vector<ChainFlows> chains;             // [(h-1)*step_count + t], empty for CTG
  std::vector<ArcFlow> arcs;                  // CTG only
  std::vector<std::vector<double>> removal;   // [k-1][t]
  double objective = 0.0;                     // as reported by the solver

  ChainFlows& chain(int h, int t) { return chains[static_cast<std::size_t>((h - 1) * step_count + t)]; }
  const ChainFlows& chain(int h, int t) const { return chains[static_cast<std::size_t>((h - 1) * step_count + t)]; }
};

/// All-zero result shaped for the instance and configuration.
AlignmentResult empty_result(const RoadInstance& instance, const BuilderConfig& config);

}  // namespace valign
