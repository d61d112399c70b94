#pragma once

#include "sgid/graph.hpp"

namespace sgid {

/// True iff no hidden vertex lies in B ∪ pa(B) for a nontrivial block B.
bool is_block_safe(const MixedGraph& g, const VertexSet& hidden);

/// Latent projection of a hidden-variable DAG onto its observed vertices.
MixedGraph latent_projection(const MixedGraph& g, const VertexSet& hidden);

/// Segregated projection of a hidden-variable chain graph. The hidden set must
/// be block-safe; the result is a segregated graph over the observed vertices.
/// With an empty hidden set any segregated graph is returned unchanged.
MixedGraph segregated_projection(const MixedGraph& g, const VertexSet& hidden);

}  // namespace sgid
