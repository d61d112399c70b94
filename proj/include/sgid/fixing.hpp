#pragma once

#include <optional>
#include <string>

#include "sgid/graph.hpp"
#include "sgid/tabular.hpp"

namespace sgid {

/// An ordered, valid fixing sequence applied to a base kernel.
struct FixProgram {
  std::string base = "p(V)";
  VertexSet sequence;
  MixedGraph graph;  ///< CADMG after applying `sequence`
};

/// Result of greedy fixing: either a program, or the residual subset of the
/// requested set that no longer has a fixable element.
struct FixOutcome {
  std::optional<FixProgram> program;
  VertexSet stuck;
  MixedGraph graph;  ///< CADMG reached when fixing stopped

  bool ok() const noexcept { return program.has_value(); }
};

/// de(v) ∩ dis(v) = {v} in a CADMG.
bool is_fixable(const MixedGraph& g, const std::string& v);
MixedGraph fix_vertex(const MixedGraph& g, const std::string& v);

/// Greedy fixing of `s`, always taking the lowest fixable vertex in insertion
/// order. Complete because fixing order does not affect the resulting CADMG.
FixOutcome fix_sequence(const MixedGraph& g, const VertexSet& s, const std::string& base = "p(V)");

/// q(V|W) / q(v | nd(v) ∩ V, W): the kernel obtained by fixing v.
TabularDist fix_kernel(const TabularDist& q, const MixedGraph& g, const std::string& v,
                       ZeroPolicy policy = ZeroPolicy::strict);

/// Applies every step of a fixing sequence to a kernel over g's vertices.
TabularDist apply_fixing(const TabularDist& q, const MixedGraph& g, const VertexSet& sequence,
                         ZeroPolicy policy = ZeroPolicy::strict);

inline constexpr std::size_t kDefaultReachableCap = 14;

/// Random-vertex sets C such that V \ C is fixable, in discovery order.
std::vector<VertexSet> reachable_sets(const MixedGraph& g, std::size_t cap = kDefaultReachableCap);
/// Reachable sets whose induced subgraph has a single district.
std::vector<VertexSet> intrinsic_sets(const MixedGraph& g, std::size_t cap = kDefaultReachableCap);

}  // namespace sgid
