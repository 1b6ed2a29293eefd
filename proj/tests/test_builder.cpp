#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "support.hpp"
#include "valign/builder.hpp"
#include "valign/mps.hpp"

using namespace valign;
using valign::testing::flat_road;

namespace {

BuilderConfig single_haul(char variant, BlockTechnique tech = BlockTechnique::basic) {
  BuilderConfig cfg = config_from_name(tech == BlockTechnique::basic ? "MQN-B" : "MQN-S1");
  cfg.haul_subset = {qnf_pseudo_haul(variant)};
  return cfg;
}

std::string without_comments(const std::string& mps) {
  std::istringstream in(mps);
  std::string line, out;
  while (std::getline(in, line))
    if (!line.starts_with("*")) out += line + "\n";
  return out;
}

int count_prefix(const MilpModel& m, const std::string& prefix) {
  return static_cast<int>(std::count_if(m.variables().begin(), m.variables().end(),
                                        [&](const Variable& v) { return v.name.starts_with(prefix); }));
}

}  // namespace

TEST_CASE("configuration names") {
  const auto all = standard_config_names();
  CHECK(all.size() == 12);
  CHECK(all.front() == "MQN-B");
  for (const auto& name : all) CHECK(config_from_name(name).name == name);
  CHECK(config_from_name("QNA-S1").haul_subset == std::vector<HaulClass>{{"average", 1.067, 0.005}});
  CHECK(config_from_name("CTG-B").model == ModelKind::ctg);
  CHECK(config_from_name("MQN-S1").block_technique == BlockTechnique::sos1);
  CHECK_THROWS_AS(config_from_name("QNX-B"), BuildError);
  CHECK_THROWS_AS(config_from_name("MQN-X"), BuildError);
  CHECK_THROWS_AS(config_from_name("MQN"), BuildError);
}

TEST_CASE("variable counts on a three-section road") {
  const RoadInstance inst = flat_road(3);
  const MilpModel m = build(inst, single_haul('S'));
  CHECK(m.variables().size() == 30);
  CHECK(m.binary_count() == 0);
  CHECK(count_prefix(m, "FR_") + count_prefix(m, "FU_") + count_prefix(m, "FL_") == 18);
  CHECK(m.lint().empty());

  RoadInstance blocked = inst;
  blocked.blocks = {{2}};
  const MilpModel mb = build(blocked, single_haul('S'));
  CHECK(mb.binary_count() == 2);
  CHECK(count_prefix(mb, "FR_") + count_prefix(mb, "FU_") + count_prefix(mb, "FL_") == 36);
  CHECK(mb.lint().empty());
}

TEST_CASE("flows leaving the road are fixed at zero") {
  const MilpModel m = build(flat_road(3), single_haul('S'));
  for (const char* name : {"FR_1_0_3_4", "FU_1_0_3_4", "FL_1_0_4_3", "FR_1_0_1_0", "FU_1_0_1_0", "FL_1_0_0_1"}) {
    CAPTURE(name);
    const auto v = m.find(name);
    REQUIRE(v.has_value());
    CHECK(m.variable(*v).upper == 0.0);
  }
  CHECK(m.variable(m.index_of("FR_1_0_1_2")).upper == kInf);
}

TEST_CASE("CTG arc counts") {
  CHECK(count_prefix(build_ctg(flat_road(3)), "X_") == 6);
  CHECK(count_prefix(build_ctg(flat_road(50)), "X_") == 2450);
  const MilpModel mq = build(flat_road(50), config_from_name("MQN-B"));
  CHECK(count_prefix(mq, "FR_") + count_prefix(mq, "FU_") + count_prefix(mq, "FL_") == 900);
  CHECK(count_prefix(build_ctg(flat_road(1)), "X_") == 0);

  RoadInstance pits = flat_road(4);
  pits.borrow_pits.push_back({PitKind::borrow, 2, 100, 0});
  pits.waste_pits.push_back({PitKind::waste, 3, 100, 0});
  // 4 sections + 1 borrow as sources, 4 sections + 1 waste as sinks, minus
  // the 4 self pairs and the one pit-to-pit pair.
  CHECK(ctg_arc_pairs(pits).size() == 5 * 5 - 4 - 1);
}

TEST_CASE("CTG rejects blocks") {
  RoadInstance inst = flat_road(4);
  inst.blocks = {{2}};
  CHECK_THROWS_WITH_AS(build(inst, config_from_name("CTG-B")), doctest::Contains("CTG requires block-free"),
                       BuildError);
  CHECK_THROWS_AS(build_ctg(inst), BuildError);
}

TEST_CASE("build errors") {
  RoadInstance inst = flat_road(4);
  BuilderConfig cfg = config_from_name("MQN-B");
  cfg.volume_mode = VolumeMode::piecewise_sos2;
  CHECK_THROWS_AS(build(inst, cfg), BuildError);

  BuilderConfig two = config_from_name("QNS-B");
  two.haul_subset.push_back(qnf_pseudo_haul('L'));
  CHECK_THROWS_AS(build(inst, two), BuildError);

  inst.sections[1].area = -1;
  CHECK_THROWS_AS(build(inst, config_from_name("MQN-B")), InstanceError);
}

TEST_CASE("single-haul QNF equals MH-QNF restricted to that haul") {
  RoadInstance inst = flat_road(6);
  inst.sections[2].ground_elevation = 102;
  inst.blocks = {{3}, {5}};
  inst.access_roads = {{4}};
  inst.borrow_pits.push_back({PitKind::borrow, 2, 100, 30});
  inst.waste_pits.push_back({PitKind::waste, 4, 100, 60});
  for (char v : {'S', 'M', 'L', 'A'}) {
    for (auto tech : {BlockTechnique::basic, BlockTechnique::sos1}) {
      CAPTURE(v);
      const std::string qn = std::string("QN") + v + (tech == BlockTechnique::basic ? "-B" : "-S1");
      const std::string a = to_mps(build(inst, config_from_name(qn)));
      const std::string b = to_mps(build(inst, single_haul(v, tech)));
      CHECK(a != b);  // the config comment differs
      CHECK(without_comments(a) == without_comments(b));
    }
  }
}

TEST_CASE("block technique shapes") {
  RoadInstance inst = flat_road(5);
  inst.blocks = {{2}, {4}};
  const MilpModel basic = build(inst, config_from_name("MQN-B"));
  const MilpModel sos = build(inst, config_from_name("MQN-S1"));
  CHECK(basic.sos_sets().empty());
  CHECK_FALSE(sos.sos_sets().empty());
  for (const auto& s : sos.sos_sets()) {
    CHECK(s.type == SosType::sos1);
    CHECK(s.members.size() == 2);
  }
  CHECK(basic.lint().empty());
  CHECK(sos.lint().empty());
  int enforcement = 0;
  for (const auto& c : basic.constraints()) enforcement += c.name.starts_with("REN_") ? 1 : 0;
  CHECK(enforcement == 3);
}

TEST_CASE("piecewise volume modes") {
  RoadInstance inst = flat_road(3);
  for (const auto& s : inst.sections)
    inst.volume_curves.push_back({s.index, {{-5, 0, 60}, {0, 0, 0}, {5, 55, 0}}});
  BuilderConfig cfg = config_from_name("MQN-B");
  cfg.volume_mode = VolumeMode::piecewise_sos2;
  const MilpModel sos2 = build(inst, cfg);
  CHECK(std::any_of(sos2.sos_sets().begin(), sos2.sos_sets().end(),
                    [](const SosSet& s) { return s.type == SosType::sos2 && s.members.size() == 3; }));
  cfg.volume_mode = VolumeMode::piecewise_binary;
  const MilpModel bin = build(inst, cfg);
  CHECK(bin.sos_sets().empty());
  CHECK(bin.binary_count() > 0);
  CHECK(bin.lint().empty());
}

TEST_CASE("fix_offsets") {
  const MilpModel m = build(flat_road(3), config_from_name("MQN-B"));
  const std::vector<double> ok{1, 0, -1};
  const MilpModel f = fix_offsets(m, ok);
  CHECK(f.constraints().size() == m.constraints().size() + 3);
  const std::vector<double> far{6, 0, 0};
  CHECK_THROWS_AS(fix_offsets(m, far), BuildError);
  const std::vector<double> short_list{0, 0};
  CHECK_THROWS_AS(fix_offsets(m, short_list), BuildError);
}

TEST_CASE("objective coefficients follow the cost model") {
  RoadInstance inst = flat_road(3);
  inst.sections[2].material = 3;
  const MilpModel m = build(inst, config_from_name("MQN-B"));
  CHECK(m.objective_coef(m.index_of("VP_3")) == 20.0);
  CHECK(m.objective_coef(m.index_of("VM_3")) == 1.8);
  // haul 2 is "middle": loading on unload-to-chain flows, distance cost on transit
  CHECK(m.objective_coef(m.index_of("FU_2_0_1_2")) == 0.6);
  CHECK(m.objective_coef(m.index_of("FR_2_0_1_2")) == doctest::Approx(0.004 * 20));
  CHECK(m.objective_coef(m.index_of("FL_2_0_1_2")) == 0.0);
}
