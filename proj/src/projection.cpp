#include "sgid/projection.hpp"

#include <array>
#include <deque>

namespace sgid {

namespace {

void check_hidden(const MixedGraph& g, const VertexSet& hidden) {
  for (const auto& h : hidden) {
    if (!g.contains(h)) throw Error(ErrorCode::unknown_vertex, h);
    if (g.is_fixed(h)) throw Error(ErrorCode::invalid_argument, "hidden vertex " + h + " is fixed");
  }
}

// Walk states while threading through hidden vertices. `up` means every edge
// so far was traversed against its arrow; `down_direct` means every edge was
// traversed along its arrow; `down_after_fork` means the walk went up and then
// turned down at a hidden fork. A walk arriving at a hidden vertex with an
// arrowhead may only continue downward, which keeps it collider-free.
enum State : std::size_t { up = 0, down_direct = 1, down_after_fork = 2 };

MixedGraph project(const MixedGraph& g, const VertexSet& hidden) {
  const Mask h = g.mask(hidden);
  MixedGraph out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!h[i]) out.add_vertex(g.name(i), g.is_fixed(i));
  for (const auto& e : g.edges())
    if (!h[g.index(e.a)] && !h[g.index(e.b)]) out.add_edge(e.kind, e.a, e.b);
  if (h.none()) return out;

  const std::size_t n = g.size();
  for (std::size_t v1 = 0; v1 < n; ++v1) {
    if (h[v1]) continue;
    std::vector<std::array<bool, 3>> seen(n, {false, false, false});
    std::deque<std::pair<std::size_t, State>> queue;
    Mask directed_to(n), bidirected_to(n);

    auto arrive = [&](std::size_t w, State s, bool into_w) {
      if (w == v1) return;
      if (!h[w]) {
        // Only walks ending with an arrowhead into w produce an edge from v1's
        // perspective; the reverse orientation is found from w's own search.
        if (!into_w) return;
        if (s == down_direct) directed_to.set(w);
        else bidirected_to.set(w);
        return;
      }
      if (!seen[w][s]) {
        seen[w][s] = true;
        queue.emplace_back(w, s);
      }
    };

    for (std::size_t c : g.children(v1))
      if (h[c]) arrive(c, down_direct, true);
    for (std::size_t p : g.parents(v1))
      if (h[p]) arrive(p, up, false);

    while (!queue.empty()) {
      auto [v, s] = queue.front();
      queue.pop_front();
      if (!g.neighbors(v).empty() || !g.siblings(v).empty()) {
        throw Error(ErrorCode::not_block_safe,
                    "hidden vertex " + g.name(v) + " has undirected or bidirected edges");
      }
      for (std::size_t c : g.children(v)) arrive(c, s == up ? down_after_fork : s, true);
      if (s == up) {
        for (std::size_t p : g.parents(v)) arrive(p, up, false);
      }
    }

    for (auto w = directed_to.find_first(); w != Mask::npos; w = directed_to.find_next(w)) {
      if (!out.has_edge(EdgeKind::directed, g.name(v1), g.name(w)))
        out.add_edge(EdgeKind::directed, g.name(v1), g.name(w));
    }
    for (auto w = bidirected_to.find_first(); w != Mask::npos; w = bidirected_to.find_next(w)) {
      if (!out.has_edge(EdgeKind::bidirected, g.name(v1), g.name(w)))
        out.add_edge(EdgeKind::bidirected, g.name(v1), g.name(w));
    }
  }
  return out;
}

}  // namespace

bool is_block_safe(const MixedGraph& g, const VertexSet& hidden) {
  if (!classify(g).is_cg) throw Error(ErrorCode::wrong_graph_class, "block-safety requires a chain graph");
  check_hidden(g, hidden);
  const Mask h = g.mask(hidden);
  for (const auto& block : component_masks(g, ComponentKind::nontrivial_block)) {
    const Mask closed = block | relation(g, Relation::pa, block);
    if (closed.intersects(h)) return false;
  }
  return true;
}

MixedGraph latent_projection(const MixedGraph& g, const VertexSet& hidden) {
  if (!classify(g).is_dag) throw Error(ErrorCode::wrong_graph_class, "latent projection requires a DAG");
  check_hidden(g, hidden);
  return project(g, hidden);
}

MixedGraph segregated_projection(const MixedGraph& g, const VertexSet& hidden) {
  // An empty hidden set is the identity on any SG, so a projection can be
  // projected again.
  if (hidden.empty() && classify(g).is_sg) return g;
  if (!is_block_safe(g, hidden)) throw Error(ErrorCode::not_block_safe, "hidden set touches a nontrivial block");
  MixedGraph out = project(g, hidden);
  if (!classify(out).is_sg) {
    throw Error(ErrorCode::wrong_graph_class, "projection is not a segregated graph");
  }
  return out;
}

}  // namespace sgid
