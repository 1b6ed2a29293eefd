// Randomised invariants. Seeds are fixed so failures reproduce.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"
#include "valign/benchmark.hpp"
#include "valign/builder.hpp"
#include "valign/instance_io.hpp"
#include "valign/oracle.hpp"
#include "valign/validator.hpp"

using namespace valign;
using valign::testing::uniform;

namespace {

/// Random single-segment road whose ground sits at `offsets` above a known
/// quadratic, with the offsets summing to zero so no pit is needed.
struct SplineRoad {
  RoadInstance inst;
  SegmentCoeffs coeffs{};
  std::vector<double> offsets;
};

SplineRoad spline_road(std::mt19937_64& rng, int n) {
  SplineRoad s;
  const double spacing = uniform(rng, 10, 40);
  s.coeffs = {uniform(rng, 50, 200), uniform(rng, -0.03, 0.03), uniform(rng, -1e-4, 1e-4)};
  s.offsets.resize(static_cast<std::size_t>(n));
  for (auto& u : s.offsets) u = uniform(rng, -1.5, 1.5);
  const double mean = std::accumulate(s.offsets.begin(), s.offsets.end(), 0.0) / n;
  for (auto& u : s.offsets) u -= mean;
  std::vector<double> ground;
  for (int i = 0; i < n; ++i) ground.push_back(piece_value(s.coeffs, spacing * i) + s.offsets[static_cast<std::size_t>(i)]);
  s.inst = valign::testing::road(ground, spacing, 10.0, 4.0);
  return s;
}

/// Turns an oracle plan between sections into MH-QNF chain flows, each
/// shipment on its cheapest haul in step 0.
AlignmentResult chain_result(const SplineRoad& s, const TransportPlan& plan, const BuilderConfig& cfg) {
  AlignmentResult r = empty_result(s.inst, cfg);
  r.coeffs[0] = s.coeffs;
  const int n = s.inst.section_count();
  for (int i = 1; i <= n; ++i) {
    const double u = s.offsets[static_cast<std::size_t>(i - 1)];
    r.offsets[static_cast<std::size_t>(i)] = u;
    r.cut[static_cast<std::size_t>(i)] = 10.0 * std::max(u, 0.0);
    r.fill[static_cast<std::size_t>(i)] = 10.0 * std::max(-u, 0.0);
  }
  for (const Shipment& sh : plan.shipments) {
    const double d = std::abs(s.inst.section(sh.from).station - s.inst.section(sh.to).station);
    ChainFlows& c = r.chain(cheapest_haul(s.inst.costs, d).haul + 1, 0);
    const auto a = static_cast<std::size_t>(sh.from), b = static_cast<std::size_t>(sh.to);
    if (sh.to > sh.from) {
      c.cut_fwd[a] += sh.volume;
      for (std::size_t i = a; i < b; ++i) c.fwd_transit[i] += sh.volume;
      c.fill_fwd[b] += sh.volume;
    } else {
      c.cut_back[a] += sh.volume;
      for (std::size_t i = a; i > b; --i) c.back_transit[i] += sh.volume;
      c.fill_back[b] += sh.volume;
    }
  }
  return r;
}

}  // namespace

TEST_CASE("property: instance JSON round-trips") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    GeneratorOptions opt;
    opt.seed = rng();
    opt.roads = std::string(1, static_cast<char>('A' + trial % 7));
    opt.max_sections = 30;
    opt.segment_size = 4 + trial % 7;
    opt.volume_curves = trial % 2 == 1;
    const RoadInstance inst = generate_suite(opt).front();
    const std::string once = instance_to_json(inst);
    const RoadInstance back = parse_instance_text(once);
    CHECK(back == inst);
    CHECK(instance_to_json(back) == once);
  }
}

TEST_CASE("property: cheapest haul is the minimum and never decreases with distance") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<HaulClass> hauls;
    const int k = 1 + trial % 4;
    for (int h = 0; h < k; ++h) hauls.push_back({"h" + std::to_string(h), uniform(rng, 0, 3), uniform(rng, 0.001, 0.01)});
    double last = -1.0;
    for (double d = 0; d <= 3000; d += uniform(rng, 1, 60)) {
      const HaulChoice c = cheapest_haul(hauls, d);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& h : hauls) best = std::min(best, h.loading_cost + h.unit_haul_cost * d);
      CHECK(c.unit_cost == doctest::Approx(best).epsilon(1e-12));
      const auto& chosen = hauls[static_cast<std::size_t>(c.haul)];
      CHECK(chosen.loading_cost + chosen.unit_haul_cost * d == doctest::Approx(c.unit_cost).epsilon(1e-12));
      CHECK(c.unit_cost >= last - 1e-12);
      last = c.unit_cost;
    }
  }
}

TEST_CASE("property: transportation optimum matches brute force on 2x2") {
  std::mt19937_64 rng(13);
  const auto hauls = CostModel::standard_hauls();
  for (int trial = 0; trial < 60; ++trial) {
    const double a1 = uniform(rng, 1, 50), a2 = uniform(rng, 1, 50);
    const double b1 = uniform(rng, 0, a1 + a2);
    const double b2 = a1 + a2 - b1;
    const TransportNode s1{1, uniform(rng, 0, 3000), 0, a1, uniform(rng, 1, 20), false};
    const TransportNode s2{2, uniform(rng, 0, 3000), 0, a2, uniform(rng, 1, 20), false};
    const TransportNode d1{3, uniform(rng, 0, 3000), 0, b1, uniform(rng, 1, 3), false};
    const TransportNode d2{4, uniform(rng, 0, 3000), 0, b2, uniform(rng, 1, 3), false};
    auto unit = [&](const TransportNode& s, const TransportNode& d) {
      return s.unit_cost + cheapest_haul(hauls, std::abs(s.station - d.station)).unit_cost + d.unit_cost;
    };
    // x = s1 -> d1; the cost is linear in x, so an endpoint is optimal
    const double lo = std::max(0.0, b1 - a2), hi = std::min(a1, b1);
    auto cost = [&](double x) {
      return x * unit(s1, d1) + (a1 - x) * unit(s1, d2) + (b1 - x) * unit(s2, d1) + (a2 - b1 + x) * unit(s2, d2);
    };
    const double brute = std::min(cost(lo), cost(hi));
    const TransportPlan plan = solve_transportation({{s1, s2}, {d1, d2}, hauls});
    CHECK(plan.cost == doctest::Approx(brute).epsilon(1e-9));
    double shipped = 0;
    for (const auto& s : plan.shipments) shipped += s.volume;
    CHECK(shipped == doctest::Approx(a1 + a2).epsilon(1e-12));
  }
}

TEST_CASE("property: oracle plans are valid MH-QNF and CTG results at the oracle's cost") {
  std::mt19937_64 rng(14);
  const BuilderConfig mqn = config_from_name("MQN-B");
  const BuilderConfig ctg = config_from_name("CTG-B");
  for (int trial = 0; trial < 25; ++trial) {
    const SplineRoad s = spline_road(rng, 3 + trial % 10);
    CAPTURE(trial);
    const double oracle = fixed_offset_cost(s.inst, s.offsets);
    std::vector<double> cut(static_cast<std::size_t>(s.inst.section_count()) + 1, 0.0), fill(cut.size(), 0.0);
    for (int i = 1; i <= s.inst.section_count(); ++i) {
      const double u = s.offsets[static_cast<std::size_t>(i - 1)];
      cut[static_cast<std::size_t>(i)] = 10.0 * std::max(u, 0.0);
      fill[static_cast<std::size_t>(i)] = 10.0 * std::max(-u, 0.0);
    }
    const TransportPlan plan = solve_transportation(transportation_for(s.inst, cut, fill));

    const AlignmentResult r = chain_result(s, plan, mqn);
    const ViolationReport rep = validate(s.inst, mqn, r);
    CHECK_MESSAGE(rep.passed(), rep.summary());
    CHECK(recompute_cost(s.inst, mqn, r) == doctest::Approx(oracle).epsilon(1e-9));

    AlignmentResult a = empty_result(s.inst, ctg);
    a.coeffs = r.coeffs;
    a.offsets = r.offsets;
    a.cut = r.cut;
    a.fill = r.fill;
    for (const Shipment& sh : plan.shipments)
      for (auto& arc : a.arcs)
        if (arc.from == sh.from && arc.to == sh.to) arc.volume += sh.volume;
    const ViolationReport arep = validate(s.inst, ctg, a);
    CHECK_MESSAGE(arep.passed(), arep.summary());
    CHECK(recompute_cost(s.inst, ctg, a) == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("property: perturbing a valid result is always caught") {
  std::mt19937_64 rng(15);
  const BuilderConfig mqn = config_from_name("MQN-B");
  for (int trial = 0; trial < 20; ++trial) {
    const SplineRoad s = spline_road(rng, 4 + trial % 6);
    std::vector<double> cut(static_cast<std::size_t>(s.inst.section_count()) + 1, 0.0), fill(cut.size(), 0.0);
    for (int i = 1; i <= s.inst.section_count(); ++i) {
      const double u = s.offsets[static_cast<std::size_t>(i - 1)];
      cut[static_cast<std::size_t>(i)] = 10.0 * std::max(u, 0.0);
      fill[static_cast<std::size_t>(i)] = 10.0 * std::max(-u, 0.0);
    }
    AlignmentResult r = chain_result(s, solve_transportation(transportation_for(s.inst, cut, fill)), mqn);
    const auto i = static_cast<std::size_t>(1 + trial % (s.inst.section_count() - 1));
    r.chain(1 + trial % 3, 0).fwd_transit[i] += 0.5;
    CHECK_FALSE(validate(s.inst, mqn, r).passed(Family::conservation));
  }
}

TEST_CASE("property: profile curves are monotone fractions") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t nc = 1 + static_cast<std::size_t>(trial % 4), np = 1 + static_cast<std::size_t>(trial % 7);
    std::vector<std::string> names;
    std::vector<std::vector<double>> times(nc, std::vector<double>(np));
    for (std::size_t c = 0; c < nc; ++c) {
      names.push_back("c" + std::to_string(c));
      for (auto& t : times[c]) t = uniform(rng, 0, 1) < 0.2 ? std::numeric_limits<double>::infinity() : uniform(rng, 0.01, 100);
    }
    times[0][0] = 1.0;
    const auto curves = performance_profile(names, times);
    for (std::size_t c = 0; c < nc; ++c) {
      double prev = 0.0;
      for (const auto& p : curves[c].points) {
        CHECK(p.rho >= prev);
        CHECK(p.rho <= 1.0);
        CHECK(p.alpha >= 1.0);
        prev = p.rho;
      }
      const double solved = static_cast<double>(std::count_if(times[c].begin(), times[c].end(),
                                                              [](double t) { return std::isfinite(t); }));
      CHECK(curves[c].rho_at(1e12) == doctest::Approx(solved / static_cast<double>(np)));
    }
    // at alpha = 1 the winners share every instance someone solved
    double at_one = 0;
    for (const auto& c : curves) at_one += c.rho_at(1.0);
    CHECK(at_one >= 1.0 / static_cast<double>(np) - 1e-12);
  }
}
