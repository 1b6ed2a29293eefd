#include "valign/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "valign/error.hpp"

namespace valign {

using json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out.flush()) throw Error("failed writing " + path.string());
}

namespace {

std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }
std::string dot(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

/// Field access that records problems instead of stopping at the first one.
class Reader {
 public:
  std::vector<Issue> issues;

  void fail(const std::string& path, const std::string& message) { issues.push_back({path, message}); }

  void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) return;
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.contains(it.key())) fail(dot(path, it.key()), "unknown field");
  }

  bool object(const json& v, const std::string& path) {
    if (v.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  const json* array(const json& obj, const std::string& key, const std::string& path, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(dot(path, key), "missing required field");
      return nullptr;
    }
    const json& v = obj[key];
    if (!v.is_array()) {
      fail(dot(path, key), "expected an array");
      return nullptr;
    }
    return &v;
  }

  double number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      fail(dot(path, key), "missing required field");
      return 0.0;
    }
    const json& v = obj[key];
    if (!v.is_number()) {
      fail(dot(path, key), "expected a number");
      return 0.0;
    }
    return v.get<double>();
  }

  int integer(const json& obj, const std::string& key, const std::string& path, std::optional<int> fallback = {}) {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      fail(dot(path, key), "missing required field");
      return 0;
    }
    const json& v = obj[key];
    if (!v.is_number_integer()) {
      fail(dot(path, key), "expected an integer");
      return 0;
    }
    return v.get<int>();
  }

  std::string text(const json& obj, const std::string& key, const std::string& path, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj[key];
    if (!v.is_string()) {
      fail(dot(path, key), "expected a string");
      return fallback;
    }
    return v.get<std::string>();
  }
};

std::vector<Material> read_materials(Reader& r, const json& doc) {
  const json* arr = r.array(doc, "materials", "", false);
  if (arr == nullptr) return CostModel::standard_materials();
  std::vector<Material> out;
  for (std::size_t m = 0; m < arr->size(); ++m) {
    const json& e = (*arr)[m];
    const std::string p = at("materials", m);
    if (!r.object(e, p)) continue;
    r.only_keys(e, p, {"name", "excavation", "embankment"});
    out.push_back({r.text(e, "name", p, "M" + std::to_string(m + 1)), r.number(e, "excavation", p),
                   r.number(e, "embankment", p)});
  }
  return out;
}

std::vector<HaulClass> read_hauls(Reader& r, const json& doc) {
  const json* arr = r.array(doc, "hauls", "", false);
  if (arr == nullptr) return CostModel::standard_hauls();
  std::vector<HaulClass> out;
  for (std::size_t h = 0; h < arr->size(); ++h) {
    const json& e = (*arr)[h];
    const std::string p = at("hauls", h);
    if (!r.object(e, p)) continue;
    r.only_keys(e, p, {"name", "loading_cost", "unit_haul_cost"});
    out.push_back({r.text(e, "name", p, "haul" + std::to_string(h + 1)), r.number(e, "loading_cost", p),
                   r.number(e, "unit_haul_cost", p)});
  }
  return out;
}

std::vector<Pit> read_pits(Reader& r, const json& doc, const char* key, PitKind kind) {
  std::vector<Pit> out;
  const json* arr = r.array(doc, key, "", false);
  if (arr == nullptr) return out;
  for (std::size_t j = 0; j < arr->size(); ++j) {
    const json& e = (*arr)[j];
    const std::string p = at(key, j);
    if (!r.object(e, p)) continue;
    r.only_keys(e, p, {"section", "capacity", "dead_haul"});
    out.push_back({kind, r.integer(e, "section", p), r.number(e, "capacity", p), r.number(e, "dead_haul", p, 0.0)});
  }
  return out;
}

template <typename T>
std::vector<T> read_section_refs(Reader& r, const json& doc, const char* key) {
  std::vector<T> out;
  const json* arr = r.array(doc, key, "", false);
  if (arr == nullptr) return out;
  for (std::size_t k = 0; k < arr->size(); ++k) {
    const json& e = (*arr)[k];
    const std::string p = at(key, k);
    if (e.is_number_integer()) {
      out.push_back({e.get<int>()});
      continue;
    }
    if (!r.object(e, p)) continue;
    r.only_keys(e, p, {"section"});
    out.push_back({r.integer(e, "section", p)});
  }
  return out;
}

json finite(double v, const std::string& path) {
  if (!std::isfinite(v)) throw Error("cannot serialize non-finite value at " + path);
  return v;
}

}  // namespace

RoadInstance parse_instance_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError(std::vector<Issue>{{"", std::string("invalid JSON: ") + e.what()}});
  }
  Reader r;
  if (!r.object(doc, "")) throw InstanceError(r.issues);
  r.only_keys(doc, "", {"name", "sections", "segments", "materials", "hauls", "borrow_pits", "waste_pits", "blocks",
                        "access_roads", "slope", "volume_curves"});

  RoadInstance inst;
  inst.name = r.text(doc, "name", "", "");
  if (const json* arr = r.array(doc, "sections", "", true)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const json& e = (*arr)[i];
      const std::string p = at("sections", i);
      if (!r.object(e, p)) continue;
      r.only_keys(e, p, {"station", "ground_elevation", "area", "material", "offset_lo", "offset_hi"});
      Section s;
      s.index = static_cast<int>(i) + 1;
      s.station = r.number(e, "station", p);
      s.ground_elevation = r.number(e, "ground_elevation", p);
      s.area = r.number(e, "area", p);
      s.material = r.integer(e, "material", p, 1);
      s.offset_lo = r.number(e, "offset_lo", p);
      s.offset_hi = r.number(e, "offset_hi", p);
      inst.sections.push_back(s);
    }
  }
  if (const json* arr = r.array(doc, "segments", "", false)) {
    for (std::size_t g = 0; g < arr->size(); ++g) {
      const json& e = (*arr)[g];
      if (!e.is_number_integer())
        r.fail(at("segments", g), "expected an integer section count");
      else
        inst.layout.segment_sizes.push_back(e.get<int>());
    }
  } else {
    inst.layout.segment_sizes = {inst.section_count()};
  }
  inst.costs.materials = read_materials(r, doc);
  inst.costs.hauls = read_hauls(r, doc);
  inst.borrow_pits = read_pits(r, doc, "borrow_pits", PitKind::borrow);
  inst.waste_pits = read_pits(r, doc, "waste_pits", PitKind::waste);
  inst.blocks = read_section_refs<Block>(r, doc, "blocks");
  inst.access_roads = read_section_refs<AccessRoad>(r, doc, "access_roads");
  if (doc.contains("slope")) {
    const json& s = doc["slope"];
    if (r.object(s, "slope")) {
      r.only_keys(s, "slope", {"lo", "hi"});
      inst.slope_lo = r.number(s, "lo", "slope", -0.1);
      inst.slope_hi = r.number(s, "hi", "slope", 0.1);
    }
  }
  if (const json* arr = r.array(doc, "volume_curves", "", false)) {
    for (std::size_t c = 0; c < arr->size(); ++c) {
      const json& e = (*arr)[c];
      const std::string p = at("volume_curves", c);
      if (!r.object(e, p)) continue;
      r.only_keys(e, p, {"section", "points"});
      VolumeCurve curve;
      curve.section = r.integer(e, "section", p, static_cast<int>(c) + 1);
      if (const json* pts = r.array(e, "points", p, true)) {
        for (std::size_t b = 0; b < pts->size(); ++b) {
          const json& q = (*pts)[b];
          const std::string pp = at(p + ".points", b);
          if (q.is_array() && q.size() == 3 && q[0].is_number() && q[1].is_number() && q[2].is_number()) {
            curve.points.push_back({q[0].get<double>(), q[1].get<double>(), q[2].get<double>()});
            continue;
          }
          if (!r.object(q, pp)) continue;
          r.only_keys(q, pp, {"offset", "cut", "fill"});
          curve.points.push_back({r.number(q, "offset", pp), r.number(q, "cut", pp), r.number(q, "fill", pp)});
        }
      }
      inst.volume_curves.push_back(std::move(curve));
    }
  }

  for (auto& issue : check_instance(inst)) r.issues.push_back(std::move(issue));
  if (!r.issues.empty()) throw InstanceError(r.issues);
  return canonicalize(std::move(inst));
}

RoadInstance parse_instance(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw InstanceError(std::vector<Issue>{{"", e.what()}});
  }
  return parse_instance_text(text);
}

std::string instance_to_json(const RoadInstance& inst) {
  json doc = json::object();
  doc["name"] = inst.name;
  json sections = json::array();
  for (std::size_t i = 0; i < inst.sections.size(); ++i) {
    const Section& s = inst.sections[i];
    const std::string p = at("sections", i);
    json e = json::object();
    e["station"] = finite(s.station, p + ".station");
    e["ground_elevation"] = finite(s.ground_elevation, p + ".ground_elevation");
    e["area"] = finite(s.area, p + ".area");
    e["material"] = s.material;
    e["offset_lo"] = finite(s.offset_lo, p + ".offset_lo");
    e["offset_hi"] = finite(s.offset_hi, p + ".offset_hi");
    sections.push_back(std::move(e));
  }
  doc["sections"] = std::move(sections);
  doc["segments"] = inst.layout.segment_sizes;
  json materials = json::array();
  for (std::size_t m = 0; m < inst.costs.materials.size(); ++m) {
    const Material& mat = inst.costs.materials[m];
    materials.push_back({{"name", mat.name},
                         {"excavation", finite(mat.excavation, at("materials", m))},
                         {"embankment", finite(mat.embankment, at("materials", m))}});
  }
  doc["materials"] = std::move(materials);
  json hauls = json::array();
  for (std::size_t h = 0; h < inst.costs.hauls.size(); ++h) {
    const HaulClass& haul = inst.costs.hauls[h];
    hauls.push_back({{"name", haul.name},
                     {"loading_cost", finite(haul.loading_cost, at("hauls", h))},
                     {"unit_haul_cost", finite(haul.unit_haul_cost, at("hauls", h))}});
  }
  doc["hauls"] = std::move(hauls);
  auto pits = [&](const std::vector<Pit>& list, const char* key) {
    json arr = json::array();
    for (std::size_t j = 0; j < list.size(); ++j)
      arr.push_back({{"section", list[j].attached_section},
                     {"capacity", finite(list[j].capacity, at(key, j))},
                     {"dead_haul", finite(list[j].dead_haul, at(key, j))}});
    doc[key] = std::move(arr);
  };
  pits(inst.borrow_pits, "borrow_pits");
  pits(inst.waste_pits, "waste_pits");
  json blocks = json::array();
  for (const Block& b : inst.blocks) blocks.push_back({{"section", b.section}});
  doc["blocks"] = std::move(blocks);
  json roads = json::array();
  for (const AccessRoad& a : inst.access_roads) roads.push_back({{"section", a.section}});
  doc["access_roads"] = std::move(roads);
  doc["slope"] = {{"lo", finite(inst.slope_lo, "slope.lo")}, {"hi", finite(inst.slope_hi, "slope.hi")}};
  if (!inst.volume_curves.empty()) {
    json curves = json::array();
    for (std::size_t c = 0; c < inst.volume_curves.size(); ++c) {
      json pts = json::array();
      for (const VolumePoint& q : inst.volume_curves[c].points)
        pts.push_back({{"offset", finite(q.offset, at("volume_curves", c))},
                       {"cut", finite(q.cut, at("volume_curves", c))},
                       {"fill", finite(q.fill, at("volume_curves", c))}});
      curves.push_back({{"section", inst.volume_curves[c].section}, {"points", std::move(pts)}});
    }
    doc["volume_curves"] = std::move(curves);
  }
  return doc.dump(2) + "\n";
}

void write_instance(const RoadInstance& instance, const std::filesystem::path& path) {
  write_text_file(path, instance_to_json(instance));
}

CostModel parse_cost_model_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError(std::vector<Issue>{{"", std::string("invalid JSON: ") + e.what()}});
  }
  Reader r;
  if (!r.object(doc, "")) throw InstanceError(r.issues);
  r.only_keys(doc, "", {"materials", "hauls"});
  CostModel costs{read_materials(r, doc), read_hauls(r, doc)};
  if (!r.issues.empty()) throw InstanceError(r.issues);
  return costs;
}

ToolConfig parse_tool_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError(std::vector<Issue>{{"", std::string("invalid JSON: ") + e.what()}});
  }
  Reader r;
  ToolConfig cfg;
  if (!r.object(doc, "")) throw InstanceError(r.issues);
  r.only_keys(doc, "", {"solver", "limits", "configs", "workers"});
  if (doc.contains("solver") && r.object(doc["solver"], "solver")) {
    const json& s = doc["solver"];
    r.only_keys(s, "solver", {"command", "format", "sos", "kill_grace"});
    cfg.solver_command = r.text(s, "command", "solver", "");
    cfg.solver_format = r.text(s, "format", "solver", "");
    if (s.contains("sos")) {
      if (s["sos"].is_boolean())
        cfg.solver_sos = s["sos"].get<bool>() ? 1 : 0;
      else
        r.fail("solver.sos", "expected a boolean");
    }
    cfg.kill_grace = r.number(s, "kill_grace", "solver", -1.0);
  }
  if (doc.contains("limits") && r.object(doc["limits"], "limits")) {
    const json& l = doc["limits"];
    r.only_keys(l, "limits", {"time_limit", "mip_gap", "feasibility_tol"});
    cfg.limits.time_limit = r.number(l, "time_limit", "limits", cfg.limits.time_limit);
    cfg.limits.mip_gap = r.number(l, "mip_gap", "limits", cfg.limits.mip_gap);
    cfg.limits.feasibility_tol = r.number(l, "feasibility_tol", "limits", cfg.limits.feasibility_tol);
    if (!(cfg.limits.time_limit > 0)) r.fail("limits.time_limit", "must be > 0");
    if (!(cfg.limits.mip_gap > 0)) r.fail("limits.mip_gap", "must be > 0");
    if (!(cfg.limits.feasibility_tol > 0)) r.fail("limits.feasibility_tol", "must be > 0");
  }
  if (const json* arr = r.array(doc, "configs", "", false)) {
    for (std::size_t c = 0; c < arr->size(); ++c) {
      const json& e = (*arr)[c];
      if (!e.is_string()) {
        r.fail(at("configs", c), "expected a config name");
        continue;
      }
      try {
        config_from_name(e.get<std::string>());
        cfg.configs.push_back(e.get<std::string>());
      } catch (const Error& err) {
        r.fail(at("configs", c), err.what());
      }
    }
  }
  cfg.workers = r.integer(doc, "workers", "", 0);
  if (cfg.workers < 0) r.fail("workers", "must be >= 0");
  if (!r.issues.empty()) throw InstanceError(r.issues);
  return cfg;
}

ToolConfig parse_tool_config(const std::filesystem::path& path) { return parse_tool_config_text(read_text_file(path)); }

std::string result_to_json(const AlignmentResult& r) {
  json doc = json::object();
  doc["config"] = r.config_name;
  doc["model"] = to_string(r.model);
  doc["objective"] = r.objective;
  json coeffs = json::array();
  for (const auto& c : r.coeffs) coeffs.push_back({c[0], c[1], c[2]});
  doc["coefficients"] = std::move(coeffs);
  auto slots = [](const std::vector<double>& v) {
    return v.empty() ? std::vector<double>{} : std::vector<double>(v.begin() + 1, v.end());
  };
  doc["offsets"] = slots(r.offsets);
  doc["cut"] = slots(r.cut);
  doc["fill"] = slots(r.fill);
  doc["borrow_volume"] = slots(r.borrow_volume);
  doc["waste_volume"] = slots(r.waste_volume);
  json flows = json::array();
  auto emit = [&](const char* kind, int h, int t, int a, int b, double v) {
    if (v != 0.0) flows.push_back({{"kind", kind}, {"haul", h}, {"step", t}, {"from", a}, {"to", b}, {"volume", v}});
  };
  for (int h = 1; h <= r.haul_count; ++h) {
    for (int t = 0; t < r.step_count; ++t) {
      const ChainFlows& c = r.chain(h, t);
      for (std::size_t i = 1; i < c.fwd_transit.size(); ++i) {
        const int s = static_cast<int>(i);
        emit("transit", h, t, s, s + 1, c.fwd_transit[i]);
        emit("transit", h, t, s, s - 1, c.back_transit[i]);
        emit("unload", h, t, s, s + 1, c.cut_fwd[i]);
        emit("unload", h, t, s, s - 1, c.cut_back[i]);
        emit("load", h, t, s - 1, s, c.fill_fwd[i]);
        emit("load", h, t, s + 1, s, c.fill_back[i]);
      }
      for (std::size_t j = 1; j < c.borrow_fwd.size(); ++j) {
        emit("borrow_fwd", h, t, static_cast<int>(j), 0, c.borrow_fwd[j]);
        emit("borrow_back", h, t, static_cast<int>(j), 0, c.borrow_back[j]);
      }
      for (std::size_t k = 1; k < c.waste_fwd.size(); ++k) {
        emit("waste_fwd", h, t, 0, static_cast<int>(k), c.waste_fwd[k]);
        emit("waste_back", h, t, 0, static_cast<int>(k), c.waste_back[k]);
      }
    }
  }
  for (const ArcFlow& a : r.arcs)
    if (a.volume != 0.0) flows.push_back({{"kind", "arc"}, {"from", a.from}, {"to", a.to}, {"volume", a.volume}});
  doc["flows"] = std::move(flows);
  json removal = json::array();
  for (const auto& y : r.removal) removal.push_back(y);
  doc["removal"] = std::move(removal);
  return doc.dump(2) + "\n";
}

}  // namespace valign
