#pragma once

#include "sgid/graph.hpp"

namespace sgid {

/// m-separation of x and y given z in a segregated graph (fixed vertices are
/// treated as ordinary conditioning-eligible vertices). Uses undirected
/// separation in the augmented graph of the anterior closure of x ∪ y ∪ z.
bool m_separated(const MixedGraph& g, const VertexSet& x, const VertexSet& y, const VertexSet& z);
bool m_separated(const MixedGraph& g, const Mask& x, const Mask& y, const Mask& z);

}  // namespace sgid
