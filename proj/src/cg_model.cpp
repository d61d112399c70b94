#include "sgid/cg_model.hpp"

#include <algorithm>

namespace sgid {

namespace {

VertexSet sorted(VertexSet s) {
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

void validate(const CgModel& m) {
  if (!classify(m.graph).is_cg) throw Error(ErrorCode::wrong_graph_class, "model graph is not a chain graph");
  const auto blocks = components(m.graph, ComponentKind::block);
  if (blocks.size() != m.factors.size()) {
    throw Error(ErrorCode::mismatch, "expected " + std::to_string(blocks.size()) + " block factors, got " +
                                         std::to_string(m.factors.size()));
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const TabularDist& f = m.factors[i];
    if (sorted(f.random()) != sorted(blocks[i]) ||
        sorted(f.conditioning()) != sorted(strict_parents(m.graph, blocks[i]))) {
      throw Error(ErrorCode::mismatch, "factor " + std::to_string(i) + " does not match its block and parents");
    }
  }
}

TabularDist joint_from_cg(const CgModel& m) {
  validate(m);
  TabularDist joint(Factor::constant(1.0), {});
  // Blocks in topological order keep every intermediate product a kernel.
  const auto order = topological_order(m.graph);
  const auto blocks = components(m.graph, ComponentKind::block);
  std::vector<std::size_t> block_rank(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    block_rank[b] = static_cast<std::size_t>(
        std::find(order.begin(), order.end(), m.graph.index(blocks[b].front())) - order.begin());
  }
  std::vector<std::size_t> idx(blocks.size());
  for (std::size_t b = 0; b < idx.size(); ++b) idx[b] = b;
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return block_rank[x] < block_rank[y]; });
  for (std::size_t b : idx) joint = m.factors[b].product(joint);
  return joint.reorder(m.graph.vertices());
}

TabularDist cg_truncated_oracle(const CgModel& m, const Assignment& a, const VertexSet& y, ZeroPolicy policy) {
  validate(m);
  for (const auto& [name, value] : a) {
    if (!m.graph.contains(name)) throw Error(ErrorCode::unknown_vertex, name);
    if (std::find(y.begin(), y.end(), name) != y.end())
      throw Error(ErrorCode::invalid_argument, name + " is both outcome and treatment");
    (void)value;
  }
  const auto blocks = components(m.graph, ComponentKind::block);
  Factor product = Factor::constant(1.0);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    VertexSet treated;
    for (const auto& v : blocks[b])
      if (a.count(v)) treated.push_back(v);
    const TabularDist truncated = m.factors[b].condition(treated, policy);
    product = multiply(product, truncated.factor());
  }
  TabularDist kernel(product, [&] {
    VertexSet cond;
    for (const auto& [name, value] : a) cond.push_back(name);
    return cond;
  }());
  TabularDist restricted = kernel.restrict(a);
  VertexSet drop;
  for (const auto& v : restricted.random())
    if (std::find(y.begin(), y.end(), v) == y.end()) drop.push_back(v);
  return restricted.marginalize(drop).reorder(m.graph.ordered(y));
}

}  // namespace sgid
