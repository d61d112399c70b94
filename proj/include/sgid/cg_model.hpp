#pragma once

#include <vector>

#include "sgid/graph.hpp"
#include "sgid/tabular.hpp"

namespace sgid {

/// Chain-graph model over V ∪ H: one kernel p(B | pa(B)) per block, listed in
/// the order of components(graph, block).
struct CgModel {
  MixedGraph graph;
  std::vector<TabularDist> factors;
};

/// Checks that each factor is a kernel over its block given the block's parents.
void validate(const CgModel& m);

/// Π_B p(B | pa(B)) as a joint over every vertex.
TabularDist joint_from_cg(const CgModel& m);

/// Truncated chain-graph factorization Π_B p(B \ A | pa(B), B ∩ A) at A = a,
/// marginalized onto y.
TabularDist cg_truncated_oracle(const CgModel& m, const Assignment& a, const VertexSet& y,
                                ZeroPolicy policy = ZeroPolicy::strict);

}  // namespace sgid
