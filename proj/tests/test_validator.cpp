#include <doctest.h>

#include "support.hpp"
#include "valign/validator.hpp"

using namespace valign;
using valign::testing::flat_road;

namespace {

/// The only families that fail in `r`.
std::vector<Family> failing(const ViolationReport& r) {
  std::vector<Family> out;
  for (std::size_t f = 0; f < kFamilyCount; ++f)
    if (!r.passed(static_cast<Family>(f))) out.push_back(static_cast<Family>(f));
  return out;
}

/// Cut 10 at section 1 carried forward on the short haul to fill section 3.
struct TwoNode {
  RoadInstance inst = flat_road(3);
  BuilderConfig cfg = config_from_name("MQN-B");
  AlignmentResult r;

  TwoNode() {
    r = empty_result(inst, cfg);
    r.coeffs[0] = {99, 0.05, 0};
    r.offsets = {0, 1, 0, -1};
    r.cut[1] = 10;
    r.fill[3] = 10;
    ChainFlows& c = r.chain(1, 0);
    c.cut_fwd[1] = 10;
    c.fwd_transit[1] = 10;
    c.fwd_transit[2] = 10;
    c.fill_fwd[3] = 10;
  }
};

/// Same movement across a block at section 2, done in step 1 after the
/// block was removed in step 0.
struct AcrossBlock {
  RoadInstance inst = flat_road(3);
  BuilderConfig cfg = config_from_name("MQN-B");
  AlignmentResult r;

  AcrossBlock() {
    inst.blocks = {{2}};
    inst.access_roads = {{1}};
    r = empty_result(inst, cfg);
    r.coeffs[0] = {99, 0.05, 0};
    r.offsets = {0, 1, 0, -1};
    r.cut[1] = 10;
    r.fill[3] = 10;
    ChainFlows& c = r.chain(1, 1);
    c.cut_fwd[1] = 10;
    c.fwd_transit[1] = 10;
    c.fwd_transit[2] = 10;
    c.fill_fwd[3] = 10;
    r.removal = {{1, 1}};
  }
};

/// Flat road, nothing moves, two blocks.
struct TwoBlocks {
  RoadInstance inst = flat_road(5);
  BuilderConfig cfg = config_from_name("MQN-B");
  AlignmentResult r;

  TwoBlocks() {
    inst.blocks = {{2}, {4}};
    r = empty_result(inst, cfg);
    r.coeffs[0] = {100, 0, 0};
    r.removal = {{0, 1, 1}, {0, 0, 1}};
  }
};

}  // namespace

TEST_CASE("all-zero result on a flat road") {
  const RoadInstance inst = flat_road(4);
  const BuilderConfig cfg = config_from_name("MQN-B");
  AlignmentResult r = empty_result(inst, cfg);
  r.coeffs[0] = {100, 0, 0};
  const ViolationReport rep = validate(inst, cfg, r);
  CHECK(rep.passed());
  CHECK(recompute_cost(inst, cfg, r) == 0.0);
  CHECK(rep.summary().find("overall PASS") != std::string::npos);
}

TEST_CASE("fixed two-node movement") {
  TwoNode t;
  CHECK(validate(t.inst, t.cfg, t.r).passed());
  CHECK(recompute_cost(t.inst, t.cfg, t.r) == doctest::Approx(63.2).epsilon(1e-12));
}

TEST_CASE("one extra unit of flow breaks conservation by exactly one") {
  TwoNode t;
  t.r.chain(1, 0).fwd_transit[2] += 1;
  const ViolationReport rep = validate(t.inst, t.cfg, t.r);
  CHECK(failing(rep) == std::vector<Family>{Family::conservation});
  CHECK(rep[Family::conservation].worst == doctest::Approx(1.0));
  CHECK(rep[Family::conservation].count == 2);
}

TEST_CASE("borrowed fill priced with dead haul and the chain hop") {
  RoadInstance inst = flat_road(3);
  inst.borrow_pits.push_back({PitKind::borrow, 2, 100, 50});
  const BuilderConfig cfg = config_from_name("MQN-B");
  AlignmentResult r = empty_result(inst, cfg);
  r.coeffs[0] = {101, -0.075, 0.00125};
  r.offsets = {0, -1, 0, 0};
  r.fill[1] = 10;
  r.borrow_volume[1] = 10;
  ChainFlows& c = r.chain(1, 0);
  c.borrow_back[1] = 10;
  c.back_transit[2] = 10;
  c.fill_back[1] = 10;
  CHECK(validate(inst, cfg, r).passed());
  CHECK(recompute_cost(inst, cfg, r) == doctest::Approx(65.6).epsilon(1e-12));

  inst.borrow_pits[0].capacity = 9;
  CHECK(failing(validate(inst, cfg, r)) == std::vector<Family>{Family::capacity});
}

TEST_CASE("CTG arc result") {
  const RoadInstance inst = flat_road(3);
  const BuilderConfig cfg = config_from_name("CTG-B");
  AlignmentResult r = empty_result(inst, cfg);
  REQUIRE(r.arcs.size() == 6);
  r.coeffs[0] = {99, 0.05, 0};
  r.offsets = {0, 1, 0, -1};
  r.cut[1] = 10;
  r.fill[3] = 10;
  for (auto& a : r.arcs)
    if (a.from == 1 && a.to == 3) a.volume = 10;
  CHECK(validate(inst, cfg, r).passed());
  CHECK(recompute_cost(inst, cfg, r) == doctest::Approx(63.2).epsilon(1e-12));
  for (auto& a : r.arcs)
    if (a.from == 1 && a.to == 2) a.volume = 1;
  CHECK(failing(validate(inst, cfg, r)) == std::vector<Family>{Family::balance});
}

TEST_CASE("geometry faults") {
  TwoNode t;
  SUBCASE("volume") {
    t.r.cut[1] = 11;
    t.r.chain(1, 0).cut_fwd[1] = 11;
    t.r.chain(1, 0).fwd_transit[1] = 11;
    t.r.chain(1, 0).fwd_transit[2] = 11;
    t.r.chain(1, 0).fill_fwd[3] = 11;
    t.r.fill[3] = 11;
    const auto rep = validate(t.inst, t.cfg, t.r);
    CHECK(failing(rep) == std::vector<Family>{Family::volume});
    CHECK(rep[Family::volume].worst == doctest::Approx(1.0));
  }
  SUBCASE("slope") {
    t.inst.slope_hi = 0.04;
    CHECK(failing(validate(t.inst, t.cfg, t.r)) == std::vector<Family>{Family::slope});
  }
  SUBCASE("continuity") {
    t.inst.layout.segment_sizes = {2, 1};
    AlignmentResult r = empty_result(t.inst, t.cfg);
    r.coeffs = {{{100, 0, 0}}, {{100.5, 0, 0}}};
    r.offsets = {0, 0, 0, -0.5};
    r.fill[3] = 5;
    const auto rep = validate(t.inst, t.cfg, r);
    CHECK(rep[Family::continuity].worst == doctest::Approx(0.5));
    CHECK_FALSE(rep.passed(Family::continuity));
  }
  SUBCASE("offset bounds") {
    t.inst.sections[0].offset_hi = 0.5;
    CHECK(failing(validate(t.inst, t.cfg, t.r)) == std::vector<Family>{Family::bounds});
  }
}

TEST_CASE("negative flows are bound violations") {
  TwoNode t;
  t.r.chain(2, 0).fwd_transit[1] = -1;
  t.r.chain(2, 0).fwd_transit[2] = -1;
  t.r.chain(2, 0).cut_fwd[1] = -1;
  t.r.chain(2, 0).fill_fwd[3] = -1;
  t.r.chain(1, 0).cut_fwd[1] = 11;
  t.r.chain(1, 0).fwd_transit[1] = 11;
  t.r.chain(1, 0).fwd_transit[2] = 11;
  t.r.chain(1, 0).fill_fwd[3] = 11;
  const auto rep = validate(t.inst, t.cfg, t.r);
  CHECK(failing(rep) == std::vector<Family>{Family::bounds});
}

TEST_CASE("block crossing after removal is valid") {
  AcrossBlock a;
  CHECK(validate(a.inst, a.cfg, a.r).passed());
  CHECK(recompute_cost(a.inst, a.cfg, a.r) == doctest::Approx(63.2).epsilon(1e-12));
}

TEST_CASE("injected fault: flow across a block before it is removed") {
  AcrossBlock a;
  std::swap(a.r.chain(1, 0), a.r.chain(1, 1));
  const auto rep = validate(a.inst, a.cfg, a.r);
  CHECK(failing(rep) == std::vector<Family>{Family::block_gating});
  CHECK(rep[Family::block_gating].worst == doctest::Approx(10.0));
}

TEST_CASE("two-block schedule baseline is valid") {
  TwoBlocks b;
  CHECK(validate(b.inst, b.cfg, b.r).passed());
}

TEST_CASE("injected fault: non-monotone removal") {
  TwoBlocks b;
  b.r.removal = {{1, 0, 1}, {0, 1, 1}};
  const auto rep = validate(b.inst, b.cfg, b.r);
  CHECK(failing(rep) == std::vector<Family>{Family::removal_monotonicity});
  CHECK(rep[Family::removal_monotonicity].count == 1);
}

TEST_CASE("injected fault: too few blocks removed") {
  TwoBlocks b;
  b.r.removal = {{0, 0, 1}, {0, 0, 1}};
  const auto rep = validate(b.inst, b.cfg, b.r);
  CHECK(failing(rep) == std::vector<Family>{Family::removal_enforcement});
  CHECK(rep[Family::removal_enforcement].worst == doctest::Approx(1.0));
}

TEST_CASE("block earthwork must be done before the block counts as removed") {
  RoadInstance inst = flat_road(3);
  inst.blocks = {{2}};
  inst.access_roads = {{3}};
  const BuilderConfig cfg = config_from_name("MQN-B");
  AlignmentResult r = empty_result(inst, cfg);
  r.coeffs[0] = {100, -0.0625, 0.001875};
  r.offsets = {0, 0, 0.5, -0.5};
  r.cut[2] = 5;
  r.fill[3] = 5;
  ChainFlows& c = r.chain(1, 1);
  c.cut_fwd[2] = 5;
  c.fwd_transit[2] = 5;
  c.fill_fwd[3] = 5;
  r.removal = {{0, 1}};
  CHECK(validate(inst, cfg, r).passed());

  r.removal = {{1, 1}};
  const auto rep = validate(inst, cfg, r);
  CHECK(failing(rep) == std::vector<Family>{Family::removal_indicator});
  CHECK(rep[Family::removal_indicator].worst == doctest::Approx(5.0));
}

TEST_CASE("fractional removal indicators are bound violations") {
  TwoBlocks b;
  b.r.removal = {{0, 1, 1}, {0, 0.5, 1}};
  const auto rep = validate(b.inst, b.cfg, b.r);
  CHECK_FALSE(rep.passed(Family::bounds));
}

TEST_CASE("relative scaling divides by the largest row term") {
  TwoNode t;
  for (double* v : {&t.r.cut[1], &t.r.fill[3], &t.r.chain(1, 0).cut_fwd[1], &t.r.chain(1, 0).fwd_transit[1],
                    &t.r.chain(1, 0).fwd_transit[2], &t.r.chain(1, 0).fill_fwd[3]})
    *v *= 1000;
  t.inst.sections[0].area = t.inst.sections[2].area = 10000;
  t.r.chain(1, 0).fwd_transit[2] += 1e-3;
  CHECK_FALSE(validate(t.inst, t.cfg, t.r, {1e-6, false}).passed());
  const auto rel = validate(t.inst, t.cfg, t.r, {1e-6, true});
  CHECK(rel.passed(Family::conservation));
  CHECK(rel[Family::conservation].worst == doctest::Approx(1e-7).epsilon(1e-3));
}

TEST_CASE("malformed result shapes are rejected") {
  TwoNode t;
  t.r.offsets.pop_back();
  CHECK_THROWS_AS(validate(t.inst, t.cfg, t.r), Error);
  TwoNode u;
  u.r.chains.pop_back();
  CHECK_THROWS_AS(validate(u.inst, u.cfg, u.r), Error);
}
