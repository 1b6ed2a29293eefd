#include "valign/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "valign/error.hpp"

namespace valign {

namespace {
constexpr double kFlowEps = 1e-12;
}

MinCostFlow::MinCostFlow(int nodes) : n_(nodes), out_(static_cast<std::size_t>(nodes)) {}

int MinCostFlow::add_arc(int from, int to, double capacity, double cost) {
  if (from < 0 || to < 0 || from >= n_ || to >= n_) throw Error("arc endpoint out of range");
  const int id = static_cast<int>(arcs_.size());
  arcs_.push_back({to, capacity, cost});
  arcs_.push_back({from, 0.0, -cost});
  out_[static_cast<std::size_t>(from)].push_back(id);
  out_[static_cast<std::size_t>(to)].push_back(id + 1);
  return id;
}

double MinCostFlow::flow_on(int arc) const { return arcs_[static_cast<std::size_t>(arc) + 1].capacity; }

MinCostFlow::Outcome MinCostFlow::run(int source, int sink, double limit) {
  Outcome result;
  const double inf = std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, limit);
  std::vector<double> dist(static_cast<std::size_t>(n_));
  std::vector<int> via(static_cast<std::size_t>(n_));
  std::vector<char> queued(static_cast<std::size_t>(n_));

  while (result.flow < limit - kFlowEps * scale) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(via.begin(), via.end(), -1);
    std::fill(queued.begin(), queued.end(), 0);
    std::deque<int> queue{source};
    dist[static_cast<std::size_t>(source)] = 0.0;
    queued[static_cast<std::size_t>(source)] = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      queued[static_cast<std::size_t>(u)] = 0;
      for (int a : out_[static_cast<std::size_t>(u)]) {
        const Arc& arc = arcs_[static_cast<std::size_t>(a)];
        if (arc.capacity <= kFlowEps * scale) continue;
        const double nd = dist[static_cast<std::size_t>(u)] + arc.cost;
        if (nd < dist[static_cast<std::size_t>(arc.to)] - 1e-12 * std::max(1.0, std::abs(nd))) {
          dist[static_cast<std::size_t>(arc.to)] = nd;
          via[static_cast<std::size_t>(arc.to)] = a;
          if (!queued[static_cast<std::size_t>(arc.to)]) {
            queued[static_cast<std::size_t>(arc.to)] = 1;
            queue.push_back(arc.to);
          }
        }
      }
    }
    if (dist[static_cast<std::size_t>(sink)] == inf) break;

    double push = limit - result.flow;
    for (int v = sink; v != source;) {
      const int a = via[static_cast<std::size_t>(v)];
      push = std::min(push, arcs_[static_cast<std::size_t>(a)].capacity);
      v = arcs_[static_cast<std::size_t>(a ^ 1)].to;
    }
    for (int v = sink; v != source;) {
      const int a = via[static_cast<std::size_t>(v)];
      arcs_[static_cast<std::size_t>(a)].capacity -= push;
      arcs_[static_cast<std::size_t>(a ^ 1)].capacity += push;
      v = arcs_[static_cast<std::size_t>(a ^ 1)].to;
    }
    result.flow += push;
    result.cost += push * dist[static_cast<std::size_t>(sink)];
  }
  return result;
}

TransportPlan solve_transportation(const TransportationProblem& p) {
  if (p.hauls.empty()) throw Error("transportation problem needs at least one haul class");
  double mandatory_supply = 0.0, mandatory_demand = 0.0, optional_supply = 0.0;
  for (const auto& s : p.supplies) {
    if (!(s.amount >= 0.0) || !std::isfinite(s.amount)) throw Error("supply amounts must be finite and nonnegative");
    (s.optional ? optional_supply : mandatory_supply) += s.amount;
  }
  for (const auto& d : p.demands) {
    if (!(d.amount >= 0.0) || !std::isfinite(d.amount)) throw Error("demand amounts must be finite and nonnegative");
    if (!d.optional) mandatory_demand += d.amount;
  }

  // Nodes: 0 source, 1 sink, 2 slack-in, 3 slack-out, then supplies, demands.
  const int ns = static_cast<int>(p.supplies.size());
  const int nd = static_cast<int>(p.demands.size());
  MinCostFlow mcf(4 + ns + nd);
  const int source = 0, sink = 1, slack_in = 2, slack_out = 3;
  const double total = mandatory_supply + optional_supply;
  const double surplus = total - mandatory_demand;
  if (surplus < -1e-9 * std::max(1.0, mandatory_demand))
    throw Error("demand exceeds supply plus borrow capacity");

  mcf.add_arc(source, slack_in, optional_supply, 0.0);
  mcf.add_arc(slack_in, slack_out, total, 0.0);
  mcf.add_arc(slack_out, sink, std::max(0.0, surplus), 0.0);
  for (int s = 0; s < ns; ++s) {
    const auto& node = p.supplies[static_cast<std::size_t>(s)];
    if (node.optional)
      mcf.add_arc(slack_in, 4 + s, node.amount, 0.0);
    else
      mcf.add_arc(source, 4 + s, node.amount, 0.0);
  }
  for (int d = 0; d < nd; ++d) {
    const auto& node = p.demands[static_cast<std::size_t>(d)];
    if (node.optional)
      mcf.add_arc(4 + ns + d, slack_out, node.amount, 0.0);
    else
      mcf.add_arc(4 + ns + d, sink, node.amount, 0.0);
  }
  struct Link {
    int arc, from, to;
  };
  std::vector<Link> links;
  for (int s = 0; s < ns; ++s) {
    const auto& a = p.supplies[static_cast<std::size_t>(s)];
    for (int d = 0; d < nd; ++d) {
      const auto& b = p.demands[static_cast<std::size_t>(d)];
      if (a.optional && b.optional) continue;
      const double distance = std::abs(a.station - b.station) + a.dead_haul + b.dead_haul;
      const double unit = a.unit_cost + cheapest_haul(p.hauls, distance).unit_cost + b.unit_cost;
      links.push_back({mcf.add_arc(4 + s, 4 + ns + d, total, unit), a.id, b.id});
    }
  }

  const auto outcome = mcf.run(source, sink, total);
  if (outcome.flow < total - 1e-9 * std::max(1.0, total)) throw Error("volumes cannot be balanced");
  TransportPlan plan;
  for (const Link& l : links) {
    const double v = mcf.flow_on(l.arc);
    if (v > 0.0) plan.shipments.push_back({l.from, l.to, v});
  }
  plan.cost = outcome.cost;
  return plan;
}

TransportationProblem transportation_for(const RoadInstance& inst, std::span<const double> cut,
                                         std::span<const double> fill) {
  const int n = inst.section_count();
  if (cut.size() != static_cast<std::size_t>(n) + 1 || fill.size() != cut.size())
    throw Error("cut and fill need n+1 slots");
  TransportationProblem p;
  p.hauls = inst.costs.hauls;
  for (int i = 1; i <= n; ++i) {
    const Section& s = inst.section(i);
    const auto si = static_cast<std::size_t>(i);
    if (cut[si] > 0.0) p.supplies.push_back({i, s.station, 0.0, cut[si], inst.material_of(i).excavation, false});
    if (fill[si] > 0.0) p.demands.push_back({i, s.station, 0.0, fill[si], inst.material_of(i).embankment, false});
  }
  for (std::size_t j = 0; j < inst.borrow_pits.size(); ++j) {
    const Pit& pit = inst.borrow_pits[j];
    p.supplies.push_back({inst.section_count() + static_cast<int>(j) + 1, inst.section(pit.attached_section).station,
                          pit.dead_haul, pit.capacity, inst.material_of(pit.attached_section).excavation, true});
  }
  for (std::size_t k = 0; k < inst.waste_pits.size(); ++k) {
    const Pit& pit = inst.waste_pits[k];
    p.demands.push_back({inst.section_count() + static_cast<int>(inst.borrow_pits.size() + k) + 1,
                         inst.section(pit.attached_section).station, pit.dead_haul, pit.capacity,
                         inst.material_of(pit.attached_section).embankment, true});
  }
  return p;
}

double fixed_offset_cost(const RoadInstance& inst, std::span<const double> offsets) {
  const int n = inst.section_count();
  if (offsets.size() != static_cast<std::size_t>(n)) throw Error("need one offset per section");
  std::vector<double> cut(static_cast<std::size_t>(n) + 1, 0.0), fill(cut.size(), 0.0);
  for (int i = 1; i <= n; ++i) {
    const double u = offsets[static_cast<std::size_t>(i - 1)];
    const double a = inst.section(i).area;
    cut[static_cast<std::size_t>(i)] = a * std::max(u, 0.0);
    fill[static_cast<std::size_t>(i)] = a * std::max(-u, 0.0);
  }
  return solve_transportation(transportation_for(inst, cut, fill)).cost;
}

SegmentCoeffs fit_quadratic(std::span<const double> sigma, std::span<const double> heights) {
  const std::size_t n = sigma.size();
  if (n == 0 || heights.size() != n) throw Error("fit needs matching nonempty inputs");
  if (n == 1) return {heights[0], 0.0, 0.0};
  if (n == 2) {
    const double slope = (heights[1] - heights[0]) / (sigma[1] - sigma[0]);
    return {heights[0] - slope * sigma[0], slope, 0.0};
  }
  // Normal equations on a centred, scaled abscissa.
  const double mid = 0.5 * (sigma.front() + sigma.back());
  const double half = std::max(1e-12, 0.5 * (sigma.back() - sigma.front()));
  double m[3][4] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (sigma[i] - mid) / half;
    const double row[3] = {1.0, x, x * x};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += row[r] * row[c];
      m[r][3] += row[r] * heights[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  const double b0 = m[0][3] / m[0][0], b1 = m[1][3] / m[1][1], b2 = m[2][3] / m[2][2];
  // Back to sigma: x = (sigma - mid) / half.
  const double c2 = b2 / (half * half);
  const double c1 = b1 / half - 2.0 * c2 * mid;
  const double c0 = b0 - b1 * mid / half + c2 * mid * mid;
  return {c0, c1, c2};
}

EnumerationResult enumerate_optimal(const RoadInstance& inst, const std::vector<std::vector<double>>& grid) {
  require_valid(inst);
  const int n = inst.section_count();
  if (n > 8) throw Error("enumeration is limited to 8 sections");
  if (!inst.blocks.empty()) throw Error("enumeration needs a block-free instance");
  if (inst.layout.segment_count() != 1) throw Error("enumeration needs a single segment");
  if (grid.size() != static_cast<std::size_t>(n)) throw Error("need one candidate list per section");
  for (int i = 1; i <= n; ++i) {
    const auto& g = grid[static_cast<std::size_t>(i - 1)];
    if (g.empty() || g.size() > 5) throw Error("each section needs 1 to 5 candidates");
    for (double u : g)
      if (u < inst.section(i).offset_lo || u > inst.section(i).offset_hi)
        throw Error("candidate offset outside bounds of section " + std::to_string(i));
  }

  const double s0 = inst.section(1).station;
  const double len = inst.section(n).station - s0;
  std::vector<double> sigma(static_cast<std::size_t>(n)), heights(sigma.size()), offsets(sigma.size());
  for (int i = 0; i < n; ++i) sigma[static_cast<std::size_t>(i)] = inst.sections[static_cast<std::size_t>(i)].station - s0;

  EnumerationResult best;
  std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
  for (;;) {
    ++best.combinations;
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      offsets[si] = grid[si][pick[si]];
      heights[si] = inst.sections[si].ground_elevation - offsets[si];
      scale = std::max(scale, std::abs(heights[si]));
    }
    const SegmentCoeffs c = fit_quadratic(sigma, heights);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      ok = std::abs(piece_value(c, sigma[static_cast<std::size_t>(i)]) - heights[static_cast<std::size_t>(i)]) <= 1e-6 * scale;
    for (double at : {0.0, len}) {
      const double grade = piece_slope(c, at);
      ok = ok && grade >= inst.slope_lo - 1e-9 && grade <= inst.slope_hi + 1e-9;
    }
    if (ok) {
      try {
        const double cost = fixed_offset_cost(inst, offsets);
        ++best.feasible_combinations;
        if (!best.feasible || cost < best.cost || (cost == best.cost && offsets < best.offsets)) {
          best.feasible = true;
          best.cost = cost;
          best.offsets = offsets;
        }
      } catch (const Error&) {
        // Unbalanced volumes: not a feasible combination.
      }
    }
    int i = n - 1;
    while (i >= 0 && ++pick[static_cast<std::size_t>(i)] == grid[static_cast<std::size_t>(i)].size()) {
      pick[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return best;
}

}  // namespace valign
