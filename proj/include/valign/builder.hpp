#pragma once

#include <span>
#include <string>
#include <vector>

#include "valign/instance.hpp"
#include "valign/model.hpp"

namespace valign {

enum class ModelKind { mhqnf, qnf, ctg };
enum class BlockTechnique { basic, sos1 };
enum class VolumeMode { linear, piecewise_sos2, piecewise_binary };

struct BuilderConfig {
  std::string name = "MQN-B";
  ModelKind model = ModelKind::mhqnf;
  /// QNF: exactly one (pseudo) haul. MH-QNF: optional restriction of the
  /// instance's haul list; empty means all hauls.
  std::vector<HaulClass> haul_subset;
  BlockTechnique block_technique = BlockTechnique::basic;
  VolumeMode volume_mode = VolumeMode::linear;
};

/// Single-haul cost pairs used by the QNF variants: 'S' short, 'M' middle,
/// 'L' long, 'A' the rounded average of the three.
HaulClass qnf_pseudo_haul(char variant);

/// Parses names like MQN-B, MQN-S1, CTG-B, CTG-S1, QNS-B ... QNA-S1.
BuilderConfig config_from_name(const std::string& name);

/// The twelve named configurations, MH-QNF first.
std::vector<std::string> standard_config_names();

std::string to_string(ModelKind kind);
std::string to_string(BlockTechnique technique);
std::string to_string(VolumeMode mode);
VolumeMode volume_mode_from_string(const std::string& text);
BlockTechnique block_technique_from_string(const std::string& text);

/// Haul classes the built model actually uses.
std::vector<HaulClass> effective_hauls(const RoadInstance& instance, const BuilderConfig& config);

/// Size of the time-step set {0..n_b}.
inline int time_step_count(const RoadInstance& instance) { return static_cast<int>(instance.blocks.size()) + 1; }

/// Builds the configured model. Throws BuildError for inconsistent
/// configurations and InstanceError for invalid instances.
MilpModel build(const RoadInstance& instance, const BuilderConfig& config);

/// Block-free complete-transportation-graph model: one arc per useful
/// ordered node pair, priced with the cheapest haul.
MilpModel build_ctg(const RoadInstance& instance, VolumeMode volume_mode = VolumeMode::linear);

/// Ordered (from, to) node pairs that get a CTG arc: sections and borrow
/// pits to sections and waste pits, excluding self and pit-to-pit moves.
std::vector<std::pair<int, int>> ctg_arc_pairs(const RoadInstance& instance);

/// Adds rows pinning U_i to the given offsets (one per section, 1..n).
MilpModel fix_offsets(MilpModel model, std::span<const double> offsets);

/// Canonical variable names shared by the builder, MPS files and solution
/// parsing. Indices are 1-based except time steps, which start at 0.
namespace names {
std::string coeff(int segment, int k);
std::string offset(int section);
std::string cut(int node);
std::string fill(int node);
std::string transit(int h, int t, int from, int to);
std::string load(int h, int t, int from, int to);
std::string unload(int h, int t, int from, int to);
std::string borrow(int h, int t, int pit, int dir);
std::string waste(int h, int t, int pit, int dir);
std::string removed(int block, int t);
std::string arc(int from, int to);
}  // namespace names

/// Node numbering over sections, borrow pits and waste pits:
/// sections 1..n, borrow pits n+1..n+nb, waste pits after those.
inline int borrow_node(const RoadInstance& inst, int pit) { return inst.section_count() + pit; }
inline int waste_node(const RoadInstance& inst, int pit) {
  return inst.section_count() + static_cast<int>(inst.borrow_pits.size()) + pit;
}

}  // namespace valign
