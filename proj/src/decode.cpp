#include <cmath>

#include "valign/error.hpp"
#include "valign/result.hpp"
#include "valign/solver.hpp"
#include "valign/validator.hpp"

namespace valign {

AlignmentResult empty_result(const RoadInstance& inst, const BuilderConfig& config) {
  AlignmentResult r;
  r.config_name = config.name;
  r.model = config.model;
  const auto n1 = static_cast<std::size_t>(inst.section_count()) + 1;
  const auto nb1 = inst.borrow_pits.size() + 1;
  const auto nw1 = inst.waste_pits.size() + 1;
  r.coeffs.assign(static_cast<std::size_t>(inst.layout.segment_count()), SegmentCoeffs{0.0, 0.0, 0.0});
  r.offsets.assign(n1, 0.0);
  r.cut.assign(n1, 0.0);
  r.fill.assign(n1, 0.0);
  r.borrow_volume.assign(nb1, 0.0);
  r.waste_volume.assign(nw1, 0.0);
  if (config.model == ModelKind::ctg) {
    r.haul_count = 0;
    r.step_count = 1;
    for (const auto& [from, to] : ctg_arc_pairs(inst)) r.arcs.push_back({from, to, 0.0});
    return r;
  }
  r.haul_count = static_cast<int>(effective_hauls(inst, config).size());
  r.step_count = time_step_count(inst);
  ChainFlows proto;
  for (auto* v : {&proto.fwd_transit, &proto.back_transit, &proto.cut_fwd, &proto.cut_back, &proto.fill_fwd,
                  &proto.fill_back})
    v->assign(n1, 0.0);
  proto.borrow_fwd.assign(nb1, 0.0);
  proto.borrow_back.assign(nb1, 0.0);
  proto.waste_fwd.assign(nw1, 0.0);
  proto.waste_back.assign(nw1, 0.0);
  r.chains.assign(static_cast<std::size_t>(r.haul_count * r.step_count), proto);
  r.removal.assign(inst.blocks.size(), std::vector<double>(static_cast<std::size_t>(r.step_count), 0.0));
  return r;
}

AlignmentResult decode(const Solution& solution, const RoadInstance& inst, const BuilderConfig& config) {
  if (solution.values.empty()) throw DecodeError("solution has no values (status " + to_string(solution.status) + ")");
  AlignmentResult r = empty_result(inst, config);
  r.objective = solution.objective;

  auto get = [&](const std::string& name) {
    const auto it = solution.values.find(name);
    if (it != solution.values.end()) return it->second;
    if (solution.sparse) return 0.0;
    throw DecodeError("solution is missing variable " + name);
  };

  const int n = inst.section_count();
  const int nb = static_cast<int>(inst.borrow_pits.size());
  const int nw = static_cast<int>(inst.waste_pits.size());
  for (int g = 1; g <= inst.layout.segment_count(); ++g)
    for (int k = 1; k <= 3; ++k) r.coeffs[static_cast<std::size_t>(g - 1)][static_cast<std::size_t>(k - 1)] = get(names::coeff(g, k));
  for (int i = 1; i <= n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    r.offsets[si] = get(names::offset(i));
    r.cut[si] = get(names::cut(i));
    r.fill[si] = get(names::fill(i));
  }
  for (int j = 1; j <= nb; ++j) r.borrow_volume[static_cast<std::size_t>(j)] = get(names::cut(borrow_node(inst, j)));
  for (int k = 1; k <= nw; ++k) r.waste_volume[static_cast<std::size_t>(k)] = get(names::fill(waste_node(inst, k)));

  if (config.model == ModelKind::ctg) {
    for (ArcFlow& a : r.arcs) a.volume = get(names::arc(a.from, a.to));
  } else {
    for (int h = 1; h <= r.haul_count; ++h) {
      for (int t = 0; t < r.step_count; ++t) {
        ChainFlows& c = r.chain(h, t);
        for (int i = 1; i <= n; ++i) {
          const auto si = static_cast<std::size_t>(i);
          c.fwd_transit[si] = get(names::transit(h, t, i, i + 1));
          c.back_transit[si] = get(names::transit(h, t, i, i - 1));
          c.cut_fwd[si] = get(names::unload(h, t, i, i + 1));
          c.cut_back[si] = get(names::unload(h, t, i, i - 1));
          c.fill_fwd[si] = get(names::load(h, t, i - 1, i));
          c.fill_back[si] = get(names::load(h, t, i + 1, i));
        }
        for (int j = 1; j <= nb; ++j) {
          const int at = inst.borrow_pits[static_cast<std::size_t>(j - 1)].attached_section;
          c.borrow_fwd[static_cast<std::size_t>(j)] = get(names::borrow(h, t, j, at + 1));
          c.borrow_back[static_cast<std::size_t>(j)] = get(names::borrow(h, t, j, at - 1));
        }
        for (int k = 1; k <= nw; ++k) {
          const int at = inst.waste_pits[static_cast<std::size_t>(k - 1)].attached_section;
          c.waste_fwd[static_cast<std::size_t>(k)] = get(names::waste(h, t, k, at - 1));
          c.waste_back[static_cast<std::size_t>(k)] = get(names::waste(h, t, k, at + 1));
        }
      }
    }
    for (std::size_t k = 0; k < r.removal.size(); ++k)
      for (int t = 0; t < r.step_count; ++t)
        r.removal[k][static_cast<std::size_t>(t)] = get(names::removed(static_cast<int>(k) + 1, t));
  }

  const double cost = recompute_cost(inst, config, r);
  if (std::abs(cost - solution.objective) > 1e-5 * std::max(1.0, std::abs(solution.objective)))
    throw DecodeError("recomputed objective " + std::to_string(cost) + " differs from solver objective " +
                      std::to_string(solution.objective));
  return r;
}

}  // namespace valign
