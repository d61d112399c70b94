#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "sgid/error.hpp"

namespace sgid {

/// Vertex names in graph insertion order. Every set-valued query returns its
/// result in this order so downstream output is reproducible.
using VertexSet = std::vector<std::string>;
using Mask = boost::dynamic_bitset<>;

enum class EdgeKind { directed, bidirected, undirected };

const char* to_string(EdgeKind kind);
EdgeKind parse_edge_kind(std::string_view text);

/// For directed edges `a` is the tail and `b` the head.
struct Edge {
  EdgeKind kind;
  std::string a;
  std::string b;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Mixed graph with directed, bidirected and undirected edges, optionally
/// partitioned into random and fixed vertices (CADMG / CCG role).
///
/// Invariants enforced on every mutation: unique names, no self-loops, at most
/// one edge of each kind per pair, no directed edge parallel to an undirected
/// one, and fixed vertices only carry outgoing directed edges.
class MixedGraph {
 public:
  MixedGraph() = default;

  std::size_t add_vertex(const std::string& name, bool fixed = false);
  void add_edge(EdgeKind kind, const std::string& a, const std::string& b);
  /// Moves a random vertex to the fixed set; it must have no arrowheads or
  /// undirected edges adjacent to it.
  void set_fixed(const std::string& name);

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  const std::vector<std::string>& vertices() const noexcept { return names_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool contains(std::string_view name) const;
  std::size_t index(std::string_view name) const;
  const std::string& name(std::size_t i) const { return names_[i]; }
  bool is_fixed(std::size_t i) const { return fixed_[i] != 0; }
  bool is_fixed(std::string_view name) const { return is_fixed(index(name)); }

  VertexSet random() const;
  VertexSet fixed() const;
  Mask random_mask() const;

  bool has_edge(EdgeKind kind, std::string_view a, std::string_view b) const;
  std::size_t count_edges(EdgeKind kind) const;

  // Index-level adjacency, sorted by vertex index.
  const std::vector<std::size_t>& parents(std::size_t i) const { return pa_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return ch_[i]; }
  const std::vector<std::size_t>& siblings(std::size_t i) const { return sib_[i]; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return nb_[i]; }

  Mask mask(const VertexSet& s) const;
  Mask empty_mask() const { return Mask(size()); }
  VertexSet names(const Mask& m) const;
  /// Reorders an arbitrary collection of member names into graph order.
  VertexSet ordered(const VertexSet& s) const;

  friend bool operator==(const MixedGraph& x, const MixedGraph& y);

 private:
  void check_vertex(std::string_view name) const;

  std::vector<std::string> names_;
  std::vector<char> fixed_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> pa_, ch_, sib_, nb_;
};

/// Edge-set equality ignoring insertion order of vertices and edges.
bool same_structure(const MixedGraph& x, const MixedGraph& y);

enum class Relation { pa, ch, sib, nb, an, de, nd, ant };

Relation parse_relation(std::string_view text);

/// Genealogic set of `s`, extended disjunctively. `an`, `de` and `ant` are
/// reflexive: each element of `s` belongs to its own result.
VertexSet relation(const MixedGraph& g, Relation kind, const VertexSet& s);
Mask relation(const MixedGraph& g, Relation kind, const Mask& s);
/// pa(s) \ s.
VertexSet strict_parents(const MixedGraph& g, const VertexSet& s);

enum class ComponentKind { district, block, nontrivial_block };

/// Districts and blocks range over random vertices. Vertices in a nontrivial
/// block belong to no district, so for a segregated graph districts and
/// nontrivial blocks partition the random vertices.
std::vector<VertexSet> components(const MixedGraph& g, ComponentKind kind);
std::vector<Mask> component_masks(const MixedGraph& g, ComponentKind kind);

/// Bron-Kerbosch with pivoting. Requires an undirected graph.
std::vector<VertexSet> maximal_cliques(const MixedGraph& g);

/// Augmented (moral) graph of a chain graph: adjacent pairs are joined and the
/// parents of every block are completed pairwise.
MixedGraph augment(const MixedGraph& g);

struct GraphClass {
  bool is_dag = false;
  bool is_ug = false;
  bool is_cg = false;
  bool is_admg = false;
  bool is_sg = false;

  friend bool operator==(const GraphClass&, const GraphClass&) = default;
};

GraphClass classify(const MixedGraph& g);
bool has_partially_directed_cycle(const MixedGraph& g);

MixedGraph induced_subgraph(const MixedGraph& g, const VertexSet& s);
MixedGraph induced_subgraph(const MixedGraph& g, const Mask& s);

/// Vertices of an SG in an order where every directed edge points forward and
/// each nontrivial block is contiguous. Ties are broken by insertion order.
std::vector<std::size_t> topological_order(const MixedGraph& g);

// Graph JSON / text forms.
MixedGraph parse_graph(std::string_view json_text);
MixedGraph parse_graph_text(std::string_view text);
std::string graph_to_json(const MixedGraph& g, int indent = 2);
std::string graph_to_text(const MixedGraph& g);

}  // namespace sgid
