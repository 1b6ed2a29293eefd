#include "valign/validator.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>

#include "valign/error.hpp"
#include "valign/mps.hpp"

namespace valign {

std::string to_string(Family family) {
  switch (family) {
    case Family::conservation: return "conservation";
    case Family::balance: return "balance";
    case Family::capacity: return "capacity";
    case Family::block_gating: return "block_gating";
    case Family::removal_indicator: return "removal_indicator";
    case Family::removal_monotonicity: return "removal_monotonicity";
    case Family::removal_enforcement: return "removal_enforcement";
    case Family::continuity: return "continuity";
    case Family::slope: return "slope";
    case Family::volume: return "volume";
    case Family::bounds: return "bounds";
  }
  return "?";
}

bool ViolationReport::passed() const {
  return std::all_of(families.begin(), families.end(), [&](const FamilyStats& f) { return f.worst <= tolerance; });
}

std::string ViolationReport::summary() const {
  std::ostringstream os;
  for (std::size_t f = 0; f < kFamilyCount; ++f) {
    const FamilyStats& s = families[f];
    os << to_string(static_cast<Family>(f)) << ' ' << format_number(s.worst) << ' ' << s.count << ' '
       << (s.worst <= tolerance ? "PASS" : "FAIL") << '\n';
  }
  os << "overall " << (passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

namespace {

class Checker {
 public:
  Checker(const RoadInstance& inst, const BuilderConfig& cfg, const AlignmentResult& r, const ValidateOptions& opt)
      : inst_(inst), cfg_(cfg), r_(r), opt_(opt) {
    report_.tolerance = opt.tolerance;
    report_.relative = opt.relative;
  }

  ViolationReport run() {
    check_shape();
    if (r_.model == ModelKind::ctg) {
      check_arcs();
    } else {
      check_chains();
      check_blocks();
    }
    check_pits();
    check_geometry();
    return report_;
  }

 private:
  /// Records a violation whose row has the given term magnitudes.
  void note(Family f, double violation, std::initializer_list<double> terms = {}) {
    if (!(violation > 0.0) && !std::isnan(violation)) violation = 0.0;
    if (opt_.relative) {
      double scale = 1.0;
      for (double t : terms) scale = std::max(scale, std::abs(t));
      violation /= scale;
    }
    if (std::isnan(violation)) violation = kInf;
    FamilyStats& s = report_[f];
    s.worst = std::max(s.worst, violation);
    if (violation > opt_.tolerance) ++s.count;
  }

  void nonneg(double x) { note(Family::bounds, -x, {x}); }

  void check_shape() {
    const auto n1 = static_cast<std::size_t>(inst_.section_count()) + 1;
    bool ok = r_.offsets.size() == n1 && r_.cut.size() == n1 && r_.fill.size() == n1 &&
              r_.coeffs.size() == static_cast<std::size_t>(inst_.layout.segment_count()) &&
              r_.borrow_volume.size() == inst_.borrow_pits.size() + 1 &&
              r_.waste_volume.size() == inst_.waste_pits.size() + 1;
    if (r_.model != ModelKind::ctg) {
      ok = ok && r_.step_count == time_step_count(inst_) &&
           r_.chains.size() == static_cast<std::size_t>(r_.haul_count * r_.step_count) &&
           r_.removal.size() == inst_.blocks.size();
      for (const auto& c : r_.chains)
        ok = ok && c.fwd_transit.size() == n1 && c.back_transit.size() == n1 && c.cut_fwd.size() == n1 &&
             c.cut_back.size() == n1 && c.fill_fwd.size() == n1 && c.fill_back.size() == n1 &&
             c.borrow_fwd.size() == inst_.borrow_pits.size() + 1 && c.borrow_back.size() == c.borrow_fwd.size() &&
             c.waste_fwd.size() == inst_.waste_pits.size() + 1 && c.waste_back.size() == c.waste_fwd.size();
      for (const auto& y : r_.removal) ok = ok && y.size() == static_cast<std::size_t>(r_.step_count);
    }
    if (!ok) throw Error("result shape does not match the instance");
  }

  void check_chains() {
    const int n = inst_.section_count();
    const auto& bp = inst_.borrow_pits;
    const auto& wp = inst_.waste_pits;
    for (const ChainFlows& c : r_.chains) {
      for (int i = 1; i <= n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        double fin = c.cut_fwd[si], fout = c.fwd_transit[si] + c.fill_fwd[si];
        double bin = c.cut_back[si], bout = c.back_transit[si] + c.fill_back[si];
        double scale_f = std::max({std::abs(c.cut_fwd[si]), std::abs(c.fwd_transit[si]), std::abs(c.fill_fwd[si])});
        double scale_b = std::max({std::abs(c.cut_back[si]), std::abs(c.back_transit[si]), std::abs(c.fill_back[si])});
        if (i > 1) {
          fin += c.fwd_transit[si - 1];
          scale_f = std::max(scale_f, std::abs(c.fwd_transit[si - 1]));
        }
        if (i < n) {
          bin += c.back_transit[si + 1];
          scale_b = std::max(scale_b, std::abs(c.back_transit[si + 1]));
        }
        for (std::size_t j = 0; j < bp.size(); ++j) {
          if (bp[j].attached_section != i) continue;
          fin += c.borrow_fwd[j + 1];
          bin += c.borrow_back[j + 1];
          scale_f = std::max(scale_f, std::abs(c.borrow_fwd[j + 1]));
          scale_b = std::max(scale_b, std::abs(c.borrow_back[j + 1]));
        }
        for (std::size_t k = 0; k < wp.size(); ++k) {
          if (wp[k].attached_section != i) continue;
          fout += c.waste_fwd[k + 1];
          bout += c.waste_back[k + 1];
          scale_f = std::max(scale_f, std::abs(c.waste_fwd[k + 1]));
          scale_b = std::max(scale_b, std::abs(c.waste_back[k + 1]));
        }
        note(Family::conservation, std::abs(fin - fout), {scale_f});
        note(Family::conservation, std::abs(bin - bout), {scale_b});

        for (double x : {c.fwd_transit[si], c.back_transit[si], c.cut_fwd[si], c.cut_back[si], c.fill_fwd[si],
                         c.fill_back[si]})
          nonneg(x);
      }
      // Flows that would leave the road must be zero.
      const auto sn = static_cast<std::size_t>(n);
      for (double x : {c.fwd_transit[sn], c.cut_fwd[sn], c.fill_back[sn], c.back_transit[1], c.cut_back[1], c.fill_fwd[1]})
        note(Family::bounds, std::abs(x), {x});
      for (std::size_t j = 1; j < c.borrow_fwd.size(); ++j) {
        nonneg(c.borrow_fwd[j]);
        nonneg(c.borrow_back[j]);
      }
      for (std::size_t k = 1; k < c.waste_fwd.size(); ++k) {
        nonneg(c.waste_fwd[k]);
        nonneg(c.waste_back[k]);
      }
    }

    for (int i = 1; i <= n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      double unload = 0.0, load = 0.0, su = std::abs(r_.cut[si]), sl = std::abs(r_.fill[si]);
      for (const ChainFlows& c : r_.chains) {
        unload += c.cut_fwd[si] + c.cut_back[si];
        load += c.fill_fwd[si] + c.fill_back[si];
        su = std::max({su, std::abs(c.cut_fwd[si]), std::abs(c.cut_back[si])});
        sl = std::max({sl, std::abs(c.fill_fwd[si]), std::abs(c.fill_back[si])});
      }
      note(Family::balance, std::abs(unload - r_.cut[si]), {su});
      note(Family::balance, std::abs(load - r_.fill[si]), {sl});
    }
    for (std::size_t j = 1; j < r_.borrow_volume.size(); ++j) {
      double total = 0.0, scale = std::abs(r_.borrow_volume[j]);
      for (const ChainFlows& c : r_.chains) {
        total += c.borrow_fwd[j] + c.borrow_back[j];
        scale = std::max({scale, std::abs(c.borrow_fwd[j]), std::abs(c.borrow_back[j])});
      }
      note(Family::balance, std::abs(total - r_.borrow_volume[j]), {scale});
    }
    for (std::size_t k = 1; k < r_.waste_volume.size(); ++k) {
      double total = 0.0, scale = std::abs(r_.waste_volume[k]);
      for (const ChainFlows& c : r_.chains) {
        total += c.waste_fwd[k] + c.waste_back[k];
        scale = std::max({scale, std::abs(c.waste_fwd[k]), std::abs(c.waste_back[k])});
      }
      note(Family::balance, std::abs(total - r_.waste_volume[k]), {scale});
    }
  }

  void check_arcs() {
    const int n = inst_.section_count();
    const int nb = static_cast<int>(inst_.borrow_pits.size());
    const std::size_t nodes = static_cast<std::size_t>(n + nb) + inst_.waste_pits.size() + 1;
    std::vector<double> out(nodes, 0.0), in(nodes, 0.0), scale_out(nodes, 0.0), scale_in(nodes, 0.0);
    for (const ArcFlow& a : r_.arcs) {
      if (a.from < 1 || a.to < 1 || static_cast<std::size_t>(a.from) >= nodes || static_cast<std::size_t>(a.to) >= nodes)
        throw Error("arc references an unknown node");
      nonneg(a.volume);
      out[static_cast<std::size_t>(a.from)] += a.volume;
      in[static_cast<std::size_t>(a.to)] += a.volume;
      scale_out[static_cast<std::size_t>(a.from)] = std::max(scale_out[static_cast<std::size_t>(a.from)], std::abs(a.volume));
      scale_in[static_cast<std::size_t>(a.to)] = std::max(scale_in[static_cast<std::size_t>(a.to)], std::abs(a.volume));
    }
    for (int i = 1; i <= n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      note(Family::balance, std::abs(out[si] - r_.cut[si]), {scale_out[si], r_.cut[si]});
      note(Family::balance, std::abs(in[si] - r_.fill[si]), {scale_in[si], r_.fill[si]});
    }
    for (int j = 1; j <= nb; ++j) {
      const auto node = static_cast<std::size_t>(borrow_node(inst_, j));
      note(Family::balance, std::abs(out[node] - r_.borrow_volume[static_cast<std::size_t>(j)]),
           {scale_out[node], r_.borrow_volume[static_cast<std::size_t>(j)]});
      note(Family::balance, in[node], {scale_in[node]});
    }
    for (std::size_t k = 1; k < r_.waste_volume.size(); ++k) {
      const auto node = static_cast<std::size_t>(waste_node(inst_, static_cast<int>(k)));
      note(Family::balance, std::abs(in[node] - r_.waste_volume[k]), {scale_in[node], r_.waste_volume[k]});
      note(Family::balance, out[node], {scale_out[node]});
    }
  }

  void check_pits() {
    for (std::size_t j = 1; j < r_.borrow_volume.size(); ++j) {
      const double v = r_.borrow_volume[j], cap = inst_.borrow_pits[j - 1].capacity;
      note(Family::capacity, v - cap, {v, cap});
      nonneg(v);
    }
    for (std::size_t k = 1; k < r_.waste_volume.size(); ++k) {
      const double v = r_.waste_volume[k], cap = inst_.waste_pits[k - 1].capacity;
      note(Family::capacity, v - cap, {v, cap});
      nonneg(v);
    }
  }

  double y(std::size_t k, int t) const { return t < 0 ? 0.0 : r_.removal[k][static_cast<std::size_t>(t)]; }

  void check_blocks() {
    const auto blocks = block_sections(inst_);
    if (blocks.empty()) return;
    const double big = global_big_m(inst_);
    const int steps = r_.step_count;

    for (std::size_t k = 0; k < blocks.size(); ++k) {
      for (int t = 0; t < steps; ++t) {
        const double v = y(k, t);
        note(Family::bounds, std::max(-v, v - 1.0), {v});
        note(Family::bounds, std::abs(v - std::round(v)), {1.0});
      }
    }

    // Block crossing: closed blocks pass no material in either chain.
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto g = static_cast<std::size_t>(blocks[k]);
      for (int h = 1; h <= r_.haul_count; ++h) {
        for (int t = 0; t < steps; ++t) {
          const ChainFlows& c = r_.chain(h, t);
          const double allow = big * y(k, t - 1);
          const std::pair<double, double> pairs[4] = {{c.fwd_transit[g - 1], c.fill_fwd[g]},
                                                      {c.fwd_transit[g], c.cut_fwd[g]},
                                                      {c.back_transit[g + 1], c.fill_back[g]},
                                                      {c.back_transit[g], c.cut_back[g]}};
          for (const auto& [flow, local] : pairs)
            note(Family::block_gating, std::abs(flow - local) - allow, {flow, local, allow});
        }
      }
    }

    // Regions reachable only through closed blocks.
    const BlockAccess access = block_access_sets(inst_);
    auto rank = [&](int section) {
      return static_cast<std::size_t>(std::find(blocks.begin(), blocks.end(), section) - blocks.begin());
    };
    auto gate = [&](int lo, int hi, std::initializer_list<std::size_t> keys) {
      for (int h = 1; h <= r_.haul_count; ++h) {
        for (int t = 0; t < steps; ++t) {
          double allow = 0.0;
          for (std::size_t k : keys) allow += big * y(k, t - 1);
          const ChainFlows& c = r_.chain(h, t);
          for (int i = lo; i + 1 <= hi; ++i) {
            note(Family::block_gating, c.fwd_transit[static_cast<std::size_t>(i)] - allow,
                 {c.fwd_transit[static_cast<std::size_t>(i)], allow});
            note(Family::block_gating, c.back_transit[static_cast<std::size_t>(i + 1)] - allow,
                 {c.back_transit[static_cast<std::size_t>(i + 1)], allow});
          }
          for (std::size_t j = 0; j < inst_.borrow_pits.size(); ++j) {
            const int at = inst_.borrow_pits[j].attached_section;
            if (lo <= at - 1 && at + 1 <= hi) {
              note(Family::block_gating, c.borrow_fwd[j + 1] - allow, {c.borrow_fwd[j + 1], allow});
              note(Family::block_gating, c.borrow_back[j + 1] - allow, {c.borrow_back[j + 1], allow});
            }
          }
          for (std::size_t j = 0; j < inst_.waste_pits.size(); ++j) {
            const int at = inst_.waste_pits[j].attached_section;
            if (lo <= at - 1 && at + 1 <= hi) {
              note(Family::block_gating, c.waste_fwd[j + 1] - allow, {c.waste_fwd[j + 1], allow});
              note(Family::block_gating, c.waste_back[j + 1] - allow, {c.waste_back[j + 1], allow});
            }
          }
        }
      }
    };
    for (const auto& [s1, s2] : access.pairs) gate(s1, s2, {rank(s1), rank(s2)});
    for (int s : access.left) gate(1, s, {rank(s)});
    for (int s : access.right) gate(s, inst_.section_count(), {rank(s)});

    // A removed block has had all of its own earthwork done.
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto g = static_cast<std::size_t>(blocks[k]);
      const double mg = big_m(inst_, blocks[k]);
      double cum_cut = 0.0, cum_fill = 0.0;
      for (int u = 0; u < steps; ++u) {
        for (int h = 1; h <= r_.haul_count; ++h) {
          cum_cut += r_.chain(h, u).cut_fwd[g] + r_.chain(h, u).cut_back[g];
          cum_fill += r_.chain(h, u).fill_fwd[g] + r_.chain(h, u).fill_back[g];
        }
        const double slack = mg * (1.0 - y(k, u));
        note(Family::removal_indicator, r_.cut[g] - cum_cut - slack, {r_.cut[g], cum_cut, slack});
        note(Family::removal_indicator, r_.fill[g] - cum_fill - slack, {r_.fill[g], cum_fill, slack});
      }
    }

    for (std::size_t k = 0; k < blocks.size(); ++k)
      for (int t = 1; t < steps; ++t) note(Family::removal_monotonicity, y(k, t - 1) - y(k, t), {1.0});

    for (int u = 0; u < steps; ++u) {
      double removed = 0.0;
      for (std::size_t k = 0; k < blocks.size(); ++k) removed += y(k, u);
      note(Family::removal_enforcement, static_cast<double>(u) - removed, {static_cast<double>(u)});
    }
  }

  void check_geometry() {
    const int n = inst_.section_count();
    const auto knots = segment_knots(inst_);
    const int m = inst_.layout.segment_count();
    auto len = [&](int g) { return knots[static_cast<std::size_t>(g)] - knots[static_cast<std::size_t>(g - 1)]; };
    auto coeffs = [&](int g) -> const SegmentCoeffs& { return r_.coeffs[static_cast<std::size_t>(g - 1)]; };

    for (int g = 2; g <= m; ++g) {
      const double l = len(g - 1);
      const double h0 = piece_value(coeffs(g - 1), l), h1 = piece_value(coeffs(g), 0.0);
      note(Family::continuity, std::abs(h0 - h1), {h0, h1, coeffs(g - 1)[2] * l * l});
      const double s0 = piece_slope(coeffs(g - 1), l), s1 = piece_slope(coeffs(g), 0.0);
      note(Family::continuity, std::abs(s0 - s1), {s0, s1, 2 * coeffs(g - 1)[2] * l});
    }

    for (int g = 1; g <= m; ++g) {
      std::vector<double> at{0.0};
      if (len(g) > 0) at.push_back(len(g));
      for (double sigma : at) {
        const double grade = piece_slope(coeffs(g), sigma);
        note(Family::slope, std::max(inst_.slope_lo - grade, grade - inst_.slope_hi),
             {grade, 2 * coeffs(g)[2] * sigma, inst_.slope_lo, inst_.slope_hi});
      }
    }

    for (int i = 1; i <= n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const Section& s = inst_.section(i);
      const double road = evaluate_profile(r_.coeffs, knots, s.station);
      const double u = r_.offsets[si];
      note(Family::volume, std::abs(u - (s.ground_elevation - road)), {u, s.ground_elevation, road});
      if (cfg_.volume_mode == VolumeMode::linear) {
        note(Family::volume, std::abs(r_.cut[si] - r_.fill[si] - s.area * u), {r_.cut[si], r_.fill[si], s.area * u});
      } else {
        const VolumeCurve& curve = inst_.volume_curve(i);
        const double lo = curve.points.front().offset, hi = curve.points.back().offset;
        note(Family::volume, std::max(lo - u, u - hi), {u, lo, hi});
        const VolumePoint p = interpolate_volume(curve, std::clamp(u, lo, hi));
        note(Family::volume, std::abs(r_.cut[si] - p.cut), {r_.cut[si], p.cut});
        note(Family::volume, std::abs(r_.fill[si] - p.fill), {r_.fill[si], p.fill});
      }
      const double mi = big_m(inst_, i);
      note(Family::bounds, std::max(s.offset_lo - u, u - s.offset_hi), {u, s.offset_lo, s.offset_hi});
      note(Family::bounds, std::max(-r_.cut[si], r_.cut[si] - mi), {r_.cut[si], mi});
      note(Family::bounds, std::max(-r_.fill[si], r_.fill[si] - mi), {r_.fill[si], mi});
    }
  }

  const RoadInstance& inst_;
  const BuilderConfig& cfg_;
  const AlignmentResult& r_;
  const ValidateOptions& opt_;
  ViolationReport report_;
};

}  // namespace

ViolationReport validate(const RoadInstance& instance, const BuilderConfig& config, const AlignmentResult& result,
                         const ValidateOptions& options) {
  return Checker(instance, config, result, options).run();
}

double recompute_cost(const RoadInstance& inst, const BuilderConfig& config, const AlignmentResult& r) {
  const int n = inst.section_count();
  double cost = 0.0;
  if (r.model == ModelKind::ctg) {
    const int nb = static_cast<int>(inst.borrow_pits.size());
    auto station = [&](int node) {
      if (node <= n) return inst.section(node).station;
      if (node <= n + nb) return inst.section(inst.borrow_pits[static_cast<std::size_t>(node - n - 1)].attached_section).station;
      return inst.section(inst.waste_pits[static_cast<std::size_t>(node - n - nb - 1)].attached_section).station;
    };
    auto dead = [&](int node) {
      if (node <= n) return 0.0;
      if (node <= n + nb) return inst.borrow_pits[static_cast<std::size_t>(node - n - 1)].dead_haul;
      return inst.waste_pits[static_cast<std::size_t>(node - n - nb - 1)].dead_haul;
    };
    auto excavation = [&](int node) {
      const int at = node <= n ? node : inst.borrow_pits[static_cast<std::size_t>(node - n - 1)].attached_section;
      return inst.material_of(at).excavation;
    };
    auto embankment = [&](int node) {
      const int at = node <= n ? node : inst.waste_pits[static_cast<std::size_t>(node - n - nb - 1)].attached_section;
      return inst.material_of(at).embankment;
    };
    for (const ArcFlow& a : r.arcs) {
      if (a.volume == 0.0) continue;
      const double d = std::abs(station(a.from) - station(a.to)) + dead(a.from) + dead(a.to);
      cost += a.volume * (excavation(a.from) + cheapest_haul(inst.costs, d).unit_cost + embankment(a.to));
    }
    return cost;
  }

  for (int i = 1; i <= n; ++i) {
    cost += inst.material_of(i).excavation * r.cut[static_cast<std::size_t>(i)];
    cost += inst.material_of(i).embankment * r.fill[static_cast<std::size_t>(i)];
  }
  const auto hauls = effective_hauls(inst, config);
  if (static_cast<int>(hauls.size()) != r.haul_count) throw Error("result haul count does not match the configuration");
  for (int h = 1; h <= r.haul_count; ++h) {
    const HaulClass& haul = hauls[static_cast<std::size_t>(h - 1)];
    for (int t = 0; t < r.step_count; ++t) {
      const ChainFlows& c = r.chain(h, t);
      for (int i = 1; i <= n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        cost += haul.loading_cost * (c.cut_fwd[si] + c.cut_back[si]);
        if (i < n) cost += haul.unit_haul_cost * section_distance(inst, i, i + 1) * c.fwd_transit[si];
        if (i > 1) cost += haul.unit_haul_cost * section_distance(inst, i, i - 1) * c.back_transit[si];
      }
      for (std::size_t j = 0; j < inst.borrow_pits.size(); ++j) {
        const Pit& p = inst.borrow_pits[j];
        const double unit = inst.material_of(p.attached_section).excavation + haul.loading_cost + haul.unit_haul_cost * p.dead_haul;
        cost += unit * (c.borrow_fwd[j + 1] + c.borrow_back[j + 1]);
      }
      for (std::size_t k = 0; k < inst.waste_pits.size(); ++k) {
        const Pit& p = inst.waste_pits[k];
        const double unit = inst.material_of(p.attached_section).embankment + haul.unit_haul_cost * p.dead_haul;
        cost += unit * (c.waste_fwd[k + 1] + c.waste_back[k + 1]);
      }
    }
  }
  return cost;
}

}  // namespace valign
