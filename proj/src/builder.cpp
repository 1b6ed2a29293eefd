#include "valign/builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace valign {

namespace names {

namespace {
std::string join(const char* prefix, std::initializer_list<int> parts) {
  std::string out = prefix;
  for (int p : parts) {
    out += '_';
    out += std::to_string(p);
  }
  return out;
}
}  // namespace

std::string coeff(int segment, int k) { return join("A", {segment, k}); }
std::string offset(int section) { return join("U", {section}); }
std::string cut(int node) { return join("VP", {node}); }
std::string fill(int node) { return join("VM", {node}); }
std::string transit(int h, int t, int from, int to) { return join("FR", {h, t, from, to}); }
std::string load(int h, int t, int from, int to) { return join("FL", {h, t, from, to}); }
std::string unload(int h, int t, int from, int to) { return join("FU", {h, t, from, to}); }
std::string borrow(int h, int t, int pit, int dir) { return join("FB", {h, t, pit, dir}); }
std::string waste(int h, int t, int pit, int dir) { return join("FW", {h, t, pit, dir}); }
std::string removed(int block, int t) { return join("Y", {block, t}); }
std::string arc(int from, int to) { return join("X", {from, to}); }

}  // namespace names

HaulClass qnf_pseudo_haul(char variant) {
  switch (variant) {
    case 'S': return {"short", 0.000, 0.008};
    case 'M': return {"middle", 0.600, 0.004};
    case 'L': return {"long", 2.600, 0.002};
    case 'A': return {"average", 1.067, 0.005};
    default: throw BuildError(std::string("unknown QNF variant '") + variant + "'");
  }
}

BuilderConfig config_from_name(const std::string& name) {
  const auto dash = name.find('-');
  if (dash == std::string::npos) throw BuildError("config name must look like MQN-B: " + name);
  const std::string family = name.substr(0, dash);
  const std::string technique = name.substr(dash + 1);
  BuilderConfig cfg;
  cfg.name = name;
  if (technique == "B")
    cfg.block_technique = BlockTechnique::basic;
  else if (technique == "S1")
    cfg.block_technique = BlockTechnique::sos1;
  else
    throw BuildError("unknown block technique in config " + name);

  if (family == "MQN") {
    cfg.model = ModelKind::mhqnf;
  } else if (family == "CTG") {
    cfg.model = ModelKind::ctg;
  } else if (family.size() == 3 && family.starts_with("QN") && std::string("SMLA").find(family[2]) != std::string::npos) {
    cfg.model = ModelKind::qnf;
    cfg.haul_subset = {qnf_pseudo_haul(family[2])};
  } else {
    throw BuildError("unknown model family in config " + name);
  }
  return cfg;
}

std::vector<std::string> standard_config_names() {
  std::vector<std::string> out;
  for (const char* technique : {"B", "S1"})
    for (const char* family : {"MQN", "CTG", "QNS", "QNM", "QNL", "QNA"}) out.push_back(std::string(family) + "-" + technique);
  return out;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mhqnf: return "mhqnf";
    case ModelKind::qnf: return "qnf";
    case ModelKind::ctg: return "ctg";
  }
  return "?";
}

std::string to_string(BlockTechnique technique) { return technique == BlockTechnique::basic ? "basic" : "sos1"; }

std::string to_string(VolumeMode mode) {
  switch (mode) {
    case VolumeMode::linear: return "linear";
    case VolumeMode::piecewise_sos2: return "sos2";
    case VolumeMode::piecewise_binary: return "binary";
  }
  return "?";
}

VolumeMode volume_mode_from_string(const std::string& text) {
  if (text == "linear") return VolumeMode::linear;
  if (text == "sos2" || text == "piecewise-sos2") return VolumeMode::piecewise_sos2;
  if (text == "binary" || text == "piecewise-binary") return VolumeMode::piecewise_binary;
  throw BuildError("unknown volume mode " + text);
}

BlockTechnique block_technique_from_string(const std::string& text) {
  if (text == "basic" || text == "B") return BlockTechnique::basic;
  if (text == "sos1" || text == "S1") return BlockTechnique::sos1;
  throw BuildError("unknown block technique " + text);
}

std::vector<HaulClass> effective_hauls(const RoadInstance& instance, const BuilderConfig& config) {
  if (config.model == ModelKind::qnf) {
    if (config.haul_subset.size() != 1) throw BuildError("QNF needs exactly one haul class");
    return config.haul_subset;
  }
  if (config.model == ModelKind::mhqnf && !config.haul_subset.empty()) return config.haul_subset;
  return instance.costs.hauls;
}

namespace {

void check_common(const RoadInstance& inst, VolumeMode mode) {
  require_valid(inst);
  if (mode != VolumeMode::linear && !inst.has_volume_curves())
    throw BuildError("piecewise volume mode needs volume curves in the instance");
  const auto knots = segment_knots(inst);
  if (inst.layout.segment_count() > 1)
    for (std::size_t g = 0; g + 1 < knots.size(); ++g)
      if (!(knots[g + 1] > knots[g]))
        throw BuildError("segment " + std::to_string(g + 1) + " has zero length");
}

/// Spline, offset, volume and slope rows shared by every model family.
class GeometryPart {
 public:
  GeometryPart(const RoadInstance& inst, VolumeMode mode, MilpModel& model) : inst_(inst), mode_(mode), model_(model) {}

  void declare() {
    const int m = inst_.layout.segment_count();
    for (int g = 1; g <= m; ++g)
      for (int k = 1; k <= 3; ++k) coeff_.push_back(model_.add_continuous(names::coeff(g, k), -kInf, kInf));
    const int n = inst_.section_count();
    for (int i = 1; i <= n; ++i) {
      const Section& s = inst_.section(i);
      offset_.push_back(model_.add_continuous(names::offset(i), s.offset_lo, s.offset_hi));
    }
    for (int i = 1; i <= n; ++i) cut_.push_back(model_.add_continuous(names::cut(i), 0.0, big_m(inst_, i)));
    for (int i = 1; i <= n; ++i) fill_.push_back(model_.add_continuous(names::fill(i), 0.0, big_m(inst_, i)));
  }

  void add_rows() {
    const int n = inst_.section_count();
    const int m = inst_.layout.segment_count();
    const auto knots = segment_knots(inst_);

    for (int i = 1; i <= n; ++i) {
      const Section& s = inst_.section(i);
      const int g = inst_.layout.segment_of(i);
      const double sigma = s.station - knots[static_cast<std::size_t>(g - 1)];
      // U_i + P(s_i) = E_i
      model_.add_constraint("OFF_" + std::to_string(i),
                            {{offset(i), 1.0}, {a(g, 1), 1.0}, {a(g, 2), sigma}, {a(g, 3), sigma * sigma}}, Sense::eq,
                            s.ground_elevation);
    }

    if (mode_ == VolumeMode::linear) {
      for (int i = 1; i <= n; ++i)
        model_.add_constraint("VOL_" + std::to_string(i),
                              {{cut(i), 1.0}, {fill(i), -1.0}, {offset(i), -inst_.section(i).area}}, Sense::eq, 0.0);
    } else {
      for (int i = 1; i <= n; ++i) add_piecewise(i);
    }

    for (int g = 2; g <= m; ++g) {
      const double len = knots[static_cast<std::size_t>(g - 1)] - knots[static_cast<std::size_t>(g - 2)];
      model_.add_constraint("C0_" + std::to_string(g),
                            {{a(g - 1, 1), 1.0}, {a(g - 1, 2), len}, {a(g - 1, 3), len * len}, {a(g, 1), -1.0}},
                            Sense::eq, 0.0);
      model_.add_constraint("C1_" + std::to_string(g), {{a(g - 1, 2), 1.0}, {a(g - 1, 3), 2.0 * len}, {a(g, 2), -1.0}},
                            Sense::eq, 0.0);
    }

    for (int g = 1; g <= m; ++g) {
      const double len = knots[static_cast<std::size_t>(g)] - knots[static_cast<std::size_t>(g - 1)];
      const std::string tag = std::to_string(g);
      model_.add_constraint("SLO_" + tag + "_S", {{a(g, 2), 1.0}}, Sense::ge, inst_.slope_lo);
      model_.add_constraint("SHI_" + tag + "_S", {{a(g, 2), 1.0}}, Sense::le, inst_.slope_hi);
      if (len > 0) {
        model_.add_constraint("SLO_" + tag + "_E", {{a(g, 2), 1.0}, {a(g, 3), 2.0 * len}}, Sense::ge, inst_.slope_lo);
        model_.add_constraint("SHI_" + tag + "_E", {{a(g, 2), 1.0}, {a(g, 3), 2.0 * len}}, Sense::le, inst_.slope_hi);
      }
    }
  }

  int a(int g, int k) const { return coeff_[static_cast<std::size_t>((g - 1) * 3 + (k - 1))]; }
  int offset(int i) const { return offset_[static_cast<std::size_t>(i - 1)]; }
  int cut(int i) const { return cut_[static_cast<std::size_t>(i - 1)]; }
  int fill(int i) const { return fill_[static_cast<std::size_t>(i - 1)]; }

 private:
  void add_piecewise(int i) {
    const auto& pts = inst_.volume_curve(i).points;
    const std::string tag = std::to_string(i);
    const int nb = static_cast<int>(pts.size());
    if (mode_ == VolumeMode::piecewise_sos2) {
      std::vector<int> lambda;
      std::vector<SosMember> members;
      for (int b = 1; b <= nb; ++b) {
        lambda.push_back(model_.add_continuous("LV_" + tag + "_" + std::to_string(b), 0.0, 1.0));
        members.push_back({lambda.back(), static_cast<double>(b)});
      }
      std::vector<Term> convex, u{{offset(i), 1.0}}, c{{cut(i), 1.0}}, f{{fill(i), 1.0}};
      for (int b = 0; b < nb; ++b) {
        const int v = lambda[static_cast<std::size_t>(b)];
        const auto& p = pts[static_cast<std::size_t>(b)];
        convex.push_back({v, 1.0});
        u.push_back({v, -p.offset});
        c.push_back({v, -p.cut});
        f.push_back({v, -p.fill});
      }
      model_.add_constraint("CVX_" + tag, convex, Sense::eq, 1.0);
      model_.add_constraint("PWU_" + tag, u, Sense::eq, 0.0);
      model_.add_constraint("PWC_" + tag, c, Sense::eq, 0.0);
      model_.add_constraint("PWF_" + tag, f, Sense::eq, 0.0);
      model_.add_sos("SV_" + tag, SosType::sos2, std::move(members));
      return;
    }
    // Incremental formulation: delta_b fills interval b only after
    // every earlier interval is full.
    std::vector<int> delta, z;
    for (int b = 1; b < nb; ++b) delta.push_back(model_.add_continuous("DV_" + tag + "_" + std::to_string(b), 0.0, 1.0));
    for (int b = 1; b + 1 < nb; ++b) z.push_back(model_.add_binary("ZV_" + tag + "_" + std::to_string(b)));
    std::vector<Term> u{{offset(i), 1.0}}, c{{cut(i), 1.0}}, f{{fill(i), 1.0}};
    for (int b = 1; b < nb; ++b) {
      const auto& lo = pts[static_cast<std::size_t>(b - 1)];
      const auto& hi = pts[static_cast<std::size_t>(b)];
      const int v = delta[static_cast<std::size_t>(b - 1)];
      u.push_back({v, -(hi.offset - lo.offset)});
      c.push_back({v, -(hi.cut - lo.cut)});
      f.push_back({v, -(hi.fill - lo.fill)});
    }
    model_.add_constraint("PWU_" + tag, u, Sense::eq, pts.front().offset);
    model_.add_constraint("PWC_" + tag, c, Sense::eq, pts.front().cut);
    model_.add_constraint("PWF_" + tag, f, Sense::eq, pts.front().fill);
    for (int b = 1; b + 1 < nb; ++b) {
      const std::string bt = tag + "_" + std::to_string(b);
      const int zb = z[static_cast<std::size_t>(b - 1)];
      model_.add_constraint("ZA_" + bt, {{delta[static_cast<std::size_t>(b)], 1.0}, {zb, -1.0}}, Sense::le, 0.0);
      model_.add_constraint("ZB_" + bt, {{zb, 1.0}, {delta[static_cast<std::size_t>(b - 1)], -1.0}}, Sense::le, 0.0);
    }
  }

  const RoadInstance& inst_;
  VolumeMode mode_;
  MilpModel& model_;
  std::vector<int> coeff_, offset_, cut_, fill_;
};

/// Flow variables of one (haul, time step) pair, indexed by section 1..n
/// (slot 0 unused) or pit 1..count (slot 0 unused).
struct ChainVars {
  std::vector<int> fwd_transit, back_transit, cut_fwd, cut_back, fill_fwd, fill_back;
  std::vector<int> borrow_fwd, borrow_back, waste_fwd, waste_back;
};

class QnfBuilder {
 public:
  QnfBuilder(const RoadInstance& inst, const BuilderConfig& cfg)
      : inst_(inst), cfg_(cfg), hauls_(effective_hauls(inst, cfg)), geo_(inst, cfg.volume_mode, model_) {}

  MilpModel run() {
    n_ = inst_.section_count();
    steps_ = time_step_count(inst_);
    blocks_ = block_sections(inst_);
    big_m_ = global_big_m(inst_);

    geo_.declare();
    declare_pits();
    declare_flows();
    declare_removal();
    geo_.add_rows();
    add_objective();
    add_conservation();
    add_balance();
    add_block_rows();
    add_gating_rows();
    add_removal_rows();
    model_.set_provenance(cfg_.name);
    return std::move(model_);
  }

 private:
  int nb() const { return static_cast<int>(inst_.borrow_pits.size()); }
  int nw() const { return static_cast<int>(inst_.waste_pits.size()); }
  int nh() const { return static_cast<int>(hauls_.size()); }
  ChainVars& chain(int h, int t) { return chains_[static_cast<std::size_t>((h - 1) * steps_ + t)]; }
  int y(int k, int t) const { return removed_[static_cast<std::size_t>((k - 1) * steps_ + t)]; }

  void declare_pits() {
    for (int j = 1; j <= nb(); ++j) borrow_vol_.push_back(model_.add_continuous(names::cut(borrow_node(inst_, j)), 0.0, big_m_));
    for (int k = 1; k <= nw(); ++k) waste_vol_.push_back(model_.add_continuous(names::fill(waste_node(inst_, k)), 0.0, big_m_));
  }

  void declare_flows() {
    chains_.resize(static_cast<std::size_t>(nh() * steps_));
    for (int h = 1; h <= nh(); ++h) {
      for (int t = 0; t < steps_; ++t) {
        ChainVars& c = chain(h, t);
        for (auto* v : {&c.fwd_transit, &c.back_transit, &c.cut_fwd, &c.cut_back, &c.fill_fwd, &c.fill_back})
          v->assign(static_cast<std::size_t>(n_) + 1, -1);
        for (int i = 1; i <= n_; ++i) {
          // Flows that would leave the road at either end are pinned to zero.
          const double up_fwd = i == n_ ? 0.0 : kInf;
          const double up_back = i == 1 ? 0.0 : kInf;
          const auto si = static_cast<std::size_t>(i);
          c.fwd_transit[si] = model_.add_continuous(names::transit(h, t, i, i + 1), 0.0, up_fwd);
          c.back_transit[si] = model_.add_continuous(names::transit(h, t, i, i - 1), 0.0, up_back);
          c.cut_fwd[si] = model_.add_continuous(names::unload(h, t, i, i + 1), 0.0, up_fwd);
          c.cut_back[si] = model_.add_continuous(names::unload(h, t, i, i - 1), 0.0, up_back);
          c.fill_fwd[si] = model_.add_continuous(names::load(h, t, i - 1, i), 0.0, up_back);
          c.fill_back[si] = model_.add_continuous(names::load(h, t, i + 1, i), 0.0, up_fwd);
        }
        c.borrow_fwd.assign(static_cast<std::size_t>(nb()) + 1, -1);
        c.borrow_back = c.borrow_fwd;
        for (int j = 1; j <= nb(); ++j) {
          const int at = inst_.borrow_pits[static_cast<std::size_t>(j - 1)].attached_section;
          c.borrow_fwd[static_cast<std::size_t>(j)] = model_.add_continuous(names::borrow(h, t, j, at + 1));
          c.borrow_back[static_cast<std::size_t>(j)] = model_.add_continuous(names::borrow(h, t, j, at - 1));
        }
        c.waste_fwd.assign(static_cast<std::size_t>(nw()) + 1, -1);
        c.waste_back = c.waste_fwd;
        for (int k = 1; k <= nw(); ++k) {
          const int at = inst_.waste_pits[static_cast<std::size_t>(k - 1)].attached_section;
          c.waste_fwd[static_cast<std::size_t>(k)] = model_.add_continuous(names::waste(h, t, k, at - 1));
          c.waste_back[static_cast<std::size_t>(k)] = model_.add_continuous(names::waste(h, t, k, at + 1));
        }
      }
    }
  }

  void declare_removal() {
    const int nk = static_cast<int>(blocks_.size());
    for (int k = 1; k <= nk; ++k)
      for (int t = 0; t < steps_; ++t) removed_.push_back(model_.add_binary(names::removed(k, t)));
    if (cfg_.block_technique == BlockTechnique::sos1) {
      // Complement 1 - y, needed as an SOS1 member.
      for (int k = 1; k <= nk; ++k) {
        for (int t = 0; t + 1 < steps_; ++t) {
          const int yc = model_.add_continuous("YC_" + std::to_string(k) + "_" + std::to_string(t), 0.0, 1.0);
          complement_[{k, t}] = yc;
        }
      }
    }
  }

  void add_objective() {
    for (int i = 1; i <= n_; ++i) {
      model_.add_objective(geo_.cut(i), inst_.material_of(i).excavation);
      model_.add_objective(geo_.fill(i), inst_.material_of(i).embankment);
    }
    for (int h = 1; h <= nh(); ++h) {
      const HaulClass& haul = hauls_[static_cast<std::size_t>(h - 1)];
      for (int t = 0; t < steps_; ++t) {
        ChainVars& c = chain(h, t);
        for (int i = 1; i <= n_; ++i) {
          const auto si = static_cast<std::size_t>(i);
          model_.add_objective(c.cut_fwd[si], haul.loading_cost);
          model_.add_objective(c.cut_back[si], haul.loading_cost);
          if (i < n_) model_.add_objective(c.fwd_transit[si], haul.unit_haul_cost * section_distance(inst_, i, i + 1));
          if (i > 1) model_.add_objective(c.back_transit[si], haul.unit_haul_cost * section_distance(inst_, i, i - 1));
        }
        for (int j = 1; j <= nb(); ++j) {
          const Pit& pit = inst_.borrow_pits[static_cast<std::size_t>(j - 1)];
          const double unit =
              inst_.material_of(pit.attached_section).excavation + haul.loading_cost + haul.unit_haul_cost * pit.dead_haul;
          model_.add_objective(c.borrow_fwd[static_cast<std::size_t>(j)], unit);
          model_.add_objective(c.borrow_back[static_cast<std::size_t>(j)], unit);
        }
        for (int k = 1; k <= nw(); ++k) {
          const Pit& pit = inst_.waste_pits[static_cast<std::size_t>(k - 1)];
          const double unit = inst_.material_of(pit.attached_section).embankment + haul.unit_haul_cost * pit.dead_haul;
          model_.add_objective(c.waste_fwd[static_cast<std::size_t>(k)], unit);
          model_.add_objective(c.waste_back[static_cast<std::size_t>(k)], unit);
        }
      }
    }
  }

  void add_conservation() {
    for (int h = 1; h <= nh(); ++h) {
      for (int t = 0; t < steps_; ++t) {
        ChainVars& c = chain(h, t);
        const std::string ht = std::to_string(h) + "_" + std::to_string(t) + "_";
        for (int i = 1; i <= n_; ++i) {
          const auto si = static_cast<std::size_t>(i);
          // Forward chain node: in = transit from i-1, cut of i, borrow at i;
          // out = transit to i+1, fill of i, waste at i.
          std::vector<Term> fwd{{c.cut_fwd[si], 1.0}, {c.fwd_transit[si], -1.0}, {c.fill_fwd[si], -1.0}};
          if (i > 1) fwd.push_back({c.fwd_transit[si - 1], 1.0});
          std::vector<Term> back{{c.cut_back[si], 1.0}, {c.back_transit[si], -1.0}, {c.fill_back[si], -1.0}};
          if (i < n_) back.push_back({c.back_transit[si + 1], 1.0});
          for (int j = 1; j <= nb(); ++j) {
            if (inst_.borrow_pits[static_cast<std::size_t>(j - 1)].attached_section != i) continue;
            fwd.push_back({c.borrow_fwd[static_cast<std::size_t>(j)], 1.0});
            back.push_back({c.borrow_back[static_cast<std::size_t>(j)], 1.0});
          }
          for (int k = 1; k <= nw(); ++k) {
            if (inst_.waste_pits[static_cast<std::size_t>(k - 1)].attached_section != i) continue;
            fwd.push_back({c.waste_fwd[static_cast<std::size_t>(k)], -1.0});
            back.push_back({c.waste_back[static_cast<std::size_t>(k)], -1.0});
          }
          model_.add_constraint("CF_" + ht + std::to_string(i), fwd, Sense::eq, 0.0);
          model_.add_constraint("CB_" + ht + std::to_string(i), back, Sense::eq, 0.0);
        }
      }
    }
  }

  void add_balance() {
    for (int i = 1; i <= n_; ++i) {
      const auto si = static_cast<std::size_t>(i);
      std::vector<Term> unload{{geo_.cut(i), -1.0}}, load{{geo_.fill(i), -1.0}};
      for (int h = 1; h <= nh(); ++h) {
        for (int t = 0; t < steps_; ++t) {
          ChainVars& c = chain(h, t);
          unload.push_back({c.cut_fwd[si], 1.0});
          unload.push_back({c.cut_back[si], 1.0});
          load.push_back({c.fill_fwd[si], 1.0});
          load.push_back({c.fill_back[si], 1.0});
        }
      }
      model_.add_constraint("BU_" + std::to_string(i), unload, Sense::eq, 0.0);
      model_.add_constraint("BL_" + std::to_string(i), load, Sense::eq, 0.0);
    }
    for (int j = 1; j <= nb(); ++j) {
      std::vector<Term> row{{borrow_vol_[static_cast<std::size_t>(j - 1)], -1.0}};
      for (int h = 1; h <= nh(); ++h)
        for (int t = 0; t < steps_; ++t) {
          row.push_back({chain(h, t).borrow_fwd[static_cast<std::size_t>(j)], 1.0});
          row.push_back({chain(h, t).borrow_back[static_cast<std::size_t>(j)], 1.0});
        }
      model_.add_constraint("BB_" + std::to_string(j), row, Sense::eq, 0.0);
      model_.add_constraint("KB_" + std::to_string(j), {{borrow_vol_[static_cast<std::size_t>(j - 1)], 1.0}}, Sense::le,
                            inst_.borrow_pits[static_cast<std::size_t>(j - 1)].capacity);
    }
    for (int k = 1; k <= nw(); ++k) {
      std::vector<Term> row{{waste_vol_[static_cast<std::size_t>(k - 1)], -1.0}};
      for (int h = 1; h <= nh(); ++h)
        for (int t = 0; t < steps_; ++t) {
          row.push_back({chain(h, t).waste_fwd[static_cast<std::size_t>(k)], 1.0});
          row.push_back({chain(h, t).waste_back[static_cast<std::size_t>(k)], 1.0});
        }
      model_.add_constraint("BW_" + std::to_string(k), row, Sense::eq, 0.0);
      model_.add_constraint("KW_" + std::to_string(k), {{waste_vol_[static_cast<std::size_t>(k - 1)], 1.0}}, Sense::le,
                            inst_.waste_pits[static_cast<std::size_t>(k - 1)].capacity);
    }
  }

  /// No flow crosses block k at time t unless it was removed by t-1.
  void add_block_rows() {
    for (std::size_t kk = 0; kk < blocks_.size(); ++kk) {
      const int k = static_cast<int>(kk) + 1;
      const auto g = static_cast<std::size_t>(blocks_[kk]);
      for (int h = 1; h <= nh(); ++h) {
        for (int t = 0; t < steps_; ++t) {
          ChainVars& c = chain(h, t);
          const std::pair<int, int> pairs[4] = {{c.fwd_transit[g - 1], c.fill_fwd[g]},
                                                {c.fwd_transit[g], c.cut_fwd[g]},
                                                {c.back_transit[g + 1], c.fill_back[g]},
                                                {c.back_transit[g], c.cut_back[g]}};
          const char* sides[4] = {"FIN", "FOUT", "BIN", "BOUT"};
          for (int q = 0; q < 4; ++q) {
            const auto [flow, local] = pairs[q];
            const std::string tag = std::string("BK") + sides[q] + "_" + std::to_string(k) + "_" + std::to_string(h) + "_" +
                                    std::to_string(t);
            if (t == 0) {
              model_.add_constraint(tag, {{flow, 1.0}, {local, -1.0}}, Sense::eq, 0.0);
            } else if (cfg_.block_technique == BlockTechnique::basic) {
              const int yp = y(k, t - 1);
              model_.add_constraint(tag + "_UP", {{flow, 1.0}, {local, -1.0}, {yp, -big_m_}}, Sense::le, 0.0);
              model_.add_constraint(tag + "_LO", {{flow, -1.0}, {local, 1.0}, {yp, -big_m_}}, Sense::le, 0.0);
            } else {
              const int slack = model_.add_continuous("S" + tag, 0.0, kInf);
              model_.add_constraint(tag + "_UP", {{flow, 1.0}, {local, -1.0}, {slack, -1.0}}, Sense::le, 0.0);
              model_.add_constraint(tag + "_LO", {{flow, -1.0}, {local, 1.0}, {slack, -1.0}}, Sense::le, 0.0);
              model_.add_sos("Q" + tag, SosType::sos1, {{slack, 1.0}, {complement_.at({k, t - 1}), 2.0}});
            }
          }
        }
      }
    }
    for (const auto& [key, yc] : complement_) {
      const auto [k, t] = key;
      model_.add_constraint("YC_" + std::to_string(k) + "_" + std::to_string(t), {{yc, 1.0}, {y(k, t), 1.0}}, Sense::eq,
                            1.0);
    }
  }

  int rank_of(int section) const {
    return static_cast<int>(std::find(blocks_.begin(), blocks_.end(), section) - blocks_.begin()) + 1;
  }

  /// Transit and pit flows inside a region [lo, hi] are zero until one of
  /// `keys` (block ranks) has been removed.
  void gate_region(const std::string& tag, int lo, int hi, const std::vector<int>& keys) {
    for (int h = 1; h <= nh(); ++h) {
      for (int t = 0; t < steps_; ++t) {
        ChainVars& c = chain(h, t);
        auto gate = [&](int var) {
          std::vector<Term> row{{var, 1.0}};
          if (t > 0)
            for (int k : keys) row.push_back({y(k, t - 1), -big_m_});
          model_.add_constraint("G" + tag + "_" + model_.variable(var).name, row, Sense::le, 0.0);
        };
        for (int i = lo; i + 1 <= hi; ++i) {
          gate(c.fwd_transit[static_cast<std::size_t>(i)]);
          gate(c.back_transit[static_cast<std::size_t>(i + 1)]);
        }
        for (int j = 1; j <= nb(); ++j) {
          const int at = inst_.borrow_pits[static_cast<std::size_t>(j - 1)].attached_section;
          if (lo <= at - 1 && at + 1 <= hi) {
            gate(c.borrow_fwd[static_cast<std::size_t>(j)]);
            gate(c.borrow_back[static_cast<std::size_t>(j)]);
          }
        }
        for (int k = 1; k <= nw(); ++k) {
          const int at = inst_.waste_pits[static_cast<std::size_t>(k - 1)].attached_section;
          if (lo <= at - 1 && at + 1 <= hi) {
            gate(c.waste_fwd[static_cast<std::size_t>(k)]);
            gate(c.waste_back[static_cast<std::size_t>(k)]);
          }
        }
      }
    }
  }

  void add_gating_rows() {
    const BlockAccess access = block_access_sets(inst_);
    for (const auto& [s1, s2] : access.pairs) {
      const int k1 = rank_of(s1), k2 = rank_of(s2);
      gate_region("P" + std::to_string(k1) + "_" + std::to_string(k2), s1, s2, {k1, k2});
    }
    for (int s : access.left) gate_region("L" + std::to_string(rank_of(s)), 1, s, {rank_of(s)});
    for (int s : access.right) gate_region("R" + std::to_string(rank_of(s)), s, n_, {rank_of(s)});
  }

  void add_removal_rows() {
    const int nk = static_cast<int>(blocks_.size());
    for (int k = 1; k <= nk; ++k) {
      const int g = blocks_[static_cast<std::size_t>(k - 1)];
      const auto sg = static_cast<std::size_t>(g);
      const double mg = big_m(inst_, g);
      for (int u = 0; u < steps_; ++u) {
        // Removed by u => all of the block section's cut and fill is done by u.
        std::vector<Term> cut_row{{geo_.cut(g), -1.0}, {y(k, u), -mg}};
        std::vector<Term> fill_row{{geo_.fill(g), -1.0}, {y(k, u), -mg}};
        for (int h = 1; h <= nh(); ++h)
          for (int t = 0; t <= u; ++t) {
            cut_row.push_back({chain(h, t).cut_fwd[sg], 1.0});
            cut_row.push_back({chain(h, t).cut_back[sg], 1.0});
            fill_row.push_back({chain(h, t).fill_fwd[sg], 1.0});
            fill_row.push_back({chain(h, t).fill_back[sg], 1.0});
          }
        const std::string tag = std::to_string(k) + "_" + std::to_string(u);
        model_.add_constraint("RIU_" + tag, cut_row, Sense::ge, -mg);
        model_.add_constraint("RIL_" + tag, fill_row, Sense::ge, -mg);
      }
    }
    if (nk == 0) return;
    for (int u = 0; u < steps_; ++u) {
      std::vector<Term> row;
      for (int k = 1; k <= nk; ++k) row.push_back({y(k, u), 1.0});
      model_.add_constraint("REN_" + std::to_string(u), row, Sense::ge, static_cast<double>(u));
    }
    for (int k = 1; k <= nk; ++k)
      for (int t = 1; t < steps_; ++t)
        model_.add_constraint("RMO_" + std::to_string(k) + "_" + std::to_string(t), {{y(k, t), 1.0}, {y(k, t - 1), -1.0}},
                              Sense::ge, 0.0);
  }

  const RoadInstance& inst_;
  const BuilderConfig& cfg_;
  std::vector<HaulClass> hauls_;
  MilpModel model_;
  GeometryPart geo_;
  int n_ = 0;
  int steps_ = 1;
  double big_m_ = 0.0;
  std::vector<int> blocks_;
  std::vector<ChainVars> chains_;
  std::vector<int> borrow_vol_, waste_vol_, removed_;
  std::map<std::pair<int, int>, int> complement_;
};

/// Position of a node along the road and its dead-haul distance.
struct NodePlace {
  double station;
  double dead_haul;
};

}  // namespace

std::vector<std::pair<int, int>> ctg_arc_pairs(const RoadInstance& inst) {
  const int n = inst.section_count();
  const int nb = static_cast<int>(inst.borrow_pits.size());
  const int nw = static_cast<int>(inst.waste_pits.size());
  std::vector<int> sources, sinks;
  for (int i = 1; i <= n; ++i) sources.push_back(i);
  for (int j = 1; j <= nb; ++j) sources.push_back(borrow_node(inst, j));
  for (int i = 1; i <= n; ++i) sinks.push_back(i);
  for (int k = 1; k <= nw; ++k) sinks.push_back(waste_node(inst, k));
  std::vector<std::pair<int, int>> out;
  for (int from : sources)
    for (int to : sinks) {
      if (from == to) continue;
      if (from > n && to > n) continue;
      out.emplace_back(from, to);
    }
  return out;
}

MilpModel build_ctg(const RoadInstance& inst, VolumeMode volume_mode) {
  check_common(inst, volume_mode);
  if (!inst.blocks.empty()) throw BuildError("CTG requires block-free instance");
  MilpModel model;
  GeometryPart geo(inst, volume_mode, model);
  geo.declare();
  const int n = inst.section_count();
  const int nb = static_cast<int>(inst.borrow_pits.size());
  const int nw = static_cast<int>(inst.waste_pits.size());
  std::vector<int> borrow_vol, waste_vol;
  for (int j = 1; j <= nb; ++j) borrow_vol.push_back(model.add_continuous(names::cut(borrow_node(inst, j)), 0.0, global_big_m(inst)));
  for (int k = 1; k <= nw; ++k) waste_vol.push_back(model.add_continuous(names::fill(waste_node(inst, k)), 0.0, global_big_m(inst)));

  auto place = [&](int node) -> NodePlace {
    if (node <= n) return {inst.section(node).station, 0.0};
    if (node <= n + nb) {
      const Pit& p = inst.borrow_pits[static_cast<std::size_t>(node - n - 1)];
      return {inst.section(p.attached_section).station, p.dead_haul};
    }
    const Pit& p = inst.waste_pits[static_cast<std::size_t>(node - n - nb - 1)];
    return {inst.section(p.attached_section).station, p.dead_haul};
  };
  auto source_cost = [&](int node) {
    if (node <= n) return inst.material_of(node).excavation;
    return inst.material_of(inst.borrow_pits[static_cast<std::size_t>(node - n - 1)].attached_section).excavation;
  };
  auto sink_cost = [&](int node) {
    if (node <= n) return inst.material_of(node).embankment;
    return inst.material_of(inst.waste_pits[static_cast<std::size_t>(node - n - nb - 1)].attached_section).embankment;
  };

  std::map<int, std::vector<Term>> out_rows, in_rows;
  for (const auto& [from, to] : ctg_arc_pairs(inst)) {
    const NodePlace a = place(from), b = place(to);
    const double distance = std::abs(a.station - b.station) + a.dead_haul + b.dead_haul;
    const int x = model.add_continuous(names::arc(from, to));
    model.add_objective(x, source_cost(from) + cheapest_haul(inst.costs, distance).unit_cost + sink_cost(to));
    out_rows[from].push_back({x, 1.0});
    in_rows[to].push_back({x, 1.0});
  }
  geo.add_rows();
  for (int i = 1; i <= n; ++i) {
    auto out = out_rows[i];
    out.push_back({geo.cut(i), -1.0});
    model.add_constraint("SUP_" + std::to_string(i), out, Sense::eq, 0.0);
    auto in = in_rows[i];
    in.push_back({geo.fill(i), -1.0});
    model.add_constraint("DEM_" + std::to_string(i), in, Sense::eq, 0.0);
  }
  for (int j = 1; j <= nb; ++j) {
    auto out = out_rows[borrow_node(inst, j)];
    out.push_back({borrow_vol[static_cast<std::size_t>(j - 1)], -1.0});
    model.add_constraint("BB_" + std::to_string(j), out, Sense::eq, 0.0);
    model.add_constraint("KB_" + std::to_string(j), {{borrow_vol[static_cast<std::size_t>(j - 1)], 1.0}}, Sense::le,
                         inst.borrow_pits[static_cast<std::size_t>(j - 1)].capacity);
  }
  for (int k = 1; k <= nw; ++k) {
    auto in = in_rows[waste_node(inst, k)];
    in.push_back({waste_vol[static_cast<std::size_t>(k - 1)], -1.0});
    model.add_constraint("BW_" + std::to_string(k), in, Sense::eq, 0.0);
    model.add_constraint("KW_" + std::to_string(k), {{waste_vol[static_cast<std::size_t>(k - 1)], 1.0}}, Sense::le,
                         inst.waste_pits[static_cast<std::size_t>(k - 1)].capacity);
  }
  model.set_provenance("CTG");
  return model;
}

MilpModel build(const RoadInstance& instance, const BuilderConfig& config) {
  if (config.model == ModelKind::ctg) {
    if (!instance.blocks.empty()) throw BuildError("CTG requires block-free instance");
    MilpModel model = build_ctg(instance, config.volume_mode);
    model.set_provenance(config.name);
    return model;
  }
  if (config.model == ModelKind::qnf && config.haul_subset.size() != 1)
    throw BuildError("QNF needs exactly one haul class");
  check_common(instance, config.volume_mode);
  return QnfBuilder(instance, config).run();
}

MilpModel fix_offsets(MilpModel model, std::span<const double> offsets) {
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const int section = static_cast<int>(i) + 1;
    const auto var = model.find(names::offset(section));
    if (!var) throw BuildError("model has no offset variable for section " + std::to_string(section));
    const Variable& v = model.variable(*var);
    const double slack = 1e-9 * std::max(1.0, std::abs(offsets[i]));
    if (offsets[i] < v.lower - slack || offsets[i] > v.upper + slack)
      throw BuildError("offset " + std::to_string(offsets[i]) + " outside bounds of section " + std::to_string(section));
    model.add_constraint("FIX_" + std::to_string(section), {{*var, 1.0}}, Sense::eq, offsets[i]);
  }
  if (model.find(names::offset(static_cast<int>(offsets.size()) + 1)))
    throw BuildError("fix_offsets needs one offset per section");
  return model;
}

}  // namespace valign
