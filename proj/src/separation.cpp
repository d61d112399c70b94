#include "sgid/separation.hpp"

#include <deque>

namespace sgid {

bool m_separated(const MixedGraph& g, const Mask& x, const Mask& y, const Mask& z) {
  if (x.intersects(y) || x.intersects(z) || y.intersects(z)) {
    throw Error(ErrorCode::invalid_argument, "m-separation sets must be disjoint");
  }
  if (x.none() || y.none()) return true;

  const Mask keep = relation(g, Relation::ant, x | y | z);
  const std::size_t n = g.size();
  std::vector<Mask> adj(n, Mask(n));
  auto join = [&](std::size_t i, std::size_t j) {
    if (i == j) return;
    adj[i].set(j);
    adj[j].set(i);
  };
  auto complete = [&](const Mask& s) {
    for (auto i = s.find_first(); i != Mask::npos; i = s.find_next(i))
      for (auto j = s.find_next(i); j != Mask::npos; j = s.find_next(j)) join(i, j);
  };

  for (const auto& e : g.edges()) {
    const std::size_t a = g.index(e.a), b = g.index(e.b);
    if (keep[a] && keep[b]) join(a, b);
  }

  // Districts and blocks are taken in the anterior subgraph; its edges are
  // exactly those of g with both ends in `keep`, so masks can be computed on
  // the subgraph and mapped back by name.
  const MixedGraph sub = induced_subgraph(g, keep);
  auto lift = [&](const Mask& m) {
    Mask out(n);
    for (auto i = m.find_first(); i != Mask::npos; i = m.find_next(i)) out.set(g.index(sub.name(i)));
    return out;
  };
  for (const auto& d : component_masks(sub, ComponentKind::district)) {
    const Mask dm = lift(d);
    complete(dm | (relation(g, Relation::pa, dm) & keep));
  }
  for (const auto& b : component_masks(sub, ComponentKind::nontrivial_block)) {
    const Mask bm = lift(b);
    complete(relation(g, Relation::pa, bm) & (keep - bm));
  }

  Mask seen = x;
  std::deque<std::size_t> queue;
  for (auto i = x.find_first(); i != Mask::npos; i = x.find_next(i)) queue.push_back(i);
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    const Mask step = adj[v] - seen - z;
    for (auto w = step.find_first(); w != Mask::npos; w = step.find_next(w)) {
      if (y[w]) return false;
      seen.set(w);
      queue.push_back(w);
    }
  }
  return true;
}

bool m_separated(const MixedGraph& g, const VertexSet& x, const VertexSet& y, const VertexSet& z) {
  return m_separated(g, g.mask(x), g.mask(y), g.mask(z));
}

}  // namespace sgid
