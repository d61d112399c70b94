#include "sgid/fixing.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace sgid {

namespace {

void require_cadmg(const MixedGraph& g) {
  if (g.count_edges(EdgeKind::undirected) > 0) {
    throw Error(ErrorCode::wrong_graph_class, "fixing is defined on CADMGs (no undirected edges)");
  }
}

Mask district_of(const MixedGraph& g, std::size_t v) {
  for (auto& d : component_masks(g, ComponentKind::district))
    if (d[v]) return d;
  return Mask(g.size());
}

}  // namespace

bool is_fixable(const MixedGraph& g, const std::string& v) {
  require_cadmg(g);
  const std::size_t i = g.index(v);
  if (g.is_fixed(i)) throw Error(ErrorCode::invalid_argument, v + " is already fixed");
  Mask self(g.size());
  self.set(i);
  const Mask both = relation(g, Relation::de, self) & district_of(g, i);
  return both == self;
}

MixedGraph fix_vertex(const MixedGraph& g, const std::string& v) {
  if (!is_fixable(g, v)) throw Error(ErrorCode::not_fixable, v);
  MixedGraph out;
  for (std::size_t i = 0; i < g.size(); ++i) out.add_vertex(g.name(i), g.is_fixed(i) || g.name(i) == v);
  for (const auto& e : g.edges()) {
    if (e.kind == EdgeKind::directed && e.b == v) continue;
    if (e.kind == EdgeKind::bidirected && (e.a == v || e.b == v)) continue;
    out.add_edge(e.kind, e.a, e.b);
  }
  return out;
}

FixOutcome fix_sequence(const MixedGraph& g, const VertexSet& s, const std::string& base) {
  require_cadmg(g);
  for (const auto& v : s)
    if (g.is_fixed(v)) throw Error(ErrorCode::invalid_argument, v + " is already fixed");
  MixedGraph cur = g;
  VertexSet remaining = g.ordered(s);
  VertexSet done;
  while (!remaining.empty()) {
    auto it = std::find_if(remaining.begin(), remaining.end(), [&](const std::string& v) { return is_fixable(cur, v); });
    if (it == remaining.end()) return FixOutcome{std::nullopt, remaining, cur};
    cur = fix_vertex(cur, *it);
    done.push_back(*it);
    remaining.erase(it);
  }
  return FixOutcome{FixProgram{base, done, cur}, {}, cur};
}

TabularDist fix_kernel(const TabularDist& q, const MixedGraph& g, const std::string& v, ZeroPolicy policy) {
  if (!is_fixable(g, v)) throw Error(ErrorCode::not_fixable, v);
  auto sorted = [](VertexSet x) {
    std::sort(x.begin(), x.end());
    return x;
  };
  if (sorted(q.random()) != sorted(g.random()) || sorted(q.conditioning()) != sorted(g.fixed())) {
    throw Error(ErrorCode::mismatch, "kernel variables do not match the CADMG's random and fixed sets");
  }
  const std::size_t i = g.index(v);
  Mask self(g.size());
  self.set(i);
  const Mask de = relation(g, Relation::de, self);
  const Mask random = g.random_mask();
  const Mask strict_de = de - self;
  const Mask nd_random = random - de;

  const TabularDist margin = q.marginalize(g.names(strict_de & random));
  const TabularDist conditional = margin.condition(g.names(nd_random), policy);
  return q.divide(conditional, policy);
}

TabularDist apply_fixing(const TabularDist& q, const MixedGraph& g, const VertexSet& sequence, ZeroPolicy policy) {
  TabularDist cur = q;
  MixedGraph graph = g;
  for (const auto& v : sequence) {
    cur = fix_kernel(cur, graph, v, policy);
    graph = fix_vertex(graph, v);
  }
  return cur;
}

std::vector<VertexSet> reachable_sets(const MixedGraph& g, std::size_t cap) {
  require_cadmg(g);
  const Mask random = g.random_mask();
  if (random.count() > cap) {
    throw Error(ErrorCode::cap_exceeded, std::to_string(random.count()) + " random vertices exceed the cap of " +
                                             std::to_string(cap));
  }
  std::vector<VertexSet> out;
  std::set<Mask> seen{random};
  std::deque<MixedGraph> queue{g};
  while (!queue.empty()) {
    MixedGraph cur = std::move(queue.front());
    queue.pop_front();
    out.push_back(cur.random());
    for (const auto& v : cur.random()) {
      if (!is_fixable(cur, v)) continue;
      MixedGraph next = fix_vertex(cur, v);
      if (seen.insert(next.random_mask()).second) queue.push_back(std::move(next));
    }
  }
  return out;
}

std::vector<VertexSet> intrinsic_sets(const MixedGraph& g, std::size_t cap) {
  std::vector<VertexSet> out;
  for (auto& r : reachable_sets(g, cap)) {
    if (r.empty()) continue;
    const MixedGraph sub = induced_subgraph(g, r);
    if (components(sub, ComponentKind::district).size() == 1) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sgid
