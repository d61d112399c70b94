#pragma once

#include <optional>
#include <string>
#include <utility>

#include "sgid/expr.hpp"
#include "sgid/fixing.hpp"
#include "sgid/graph.hpp"
#include "sgid/tabular.hpp"

namespace sgid {

/// One factor per district D of the outcome-side CADMG: the kernel obtained by
/// fixing D* \ D in G^d starting from q(D* | pa^s(D*)).
struct DistrictTerm {
  VertexSet district;
  FixProgram program;
  VertexSet given;  ///< pa(D) \ D in G^d: the context the kernel depends on
  ExprPtr expr;     ///< symbolic form over p(V); may be null
};

/// p(target | given) for a nontrivial block B with B ∩ Y* ≠ ∅, where the
/// treated members of B stay in the conditioning set.
struct BlockTerm {
  VertexSet target;    ///< B ∩ Y*
  VertexSet given;     ///< (pa(B) ∪ (B ∩ A)) ∩ (Y* ∪ A)
  VertexSet averaged;  ///< parents of B outside Y* ∪ A; the term does not depend on them
  VertexSet summed;    ///< members of B outside Y* ∪ A, marginalized
  Assignment treated;  ///< B ∩ A with the intervention values
};

struct Functional {
  MixedGraph graph;  ///< the segregated graph the query was posed on
  MixedGraph cadmg;  ///< induced CADMG G^d
  VertexSet outcome;
  VertexSet treatment;
  Assignment restrict;
  VertexSet ystar;
  VertexSet sum_over;
  VertexSet base_random;               ///< D*
  VertexSet base_given;                ///< pa^s(D*)
  std::vector<VertexSet> base_blocks;  ///< nontrivial blocks divided out of p(V)
  std::vector<DistrictTerm> districts;
  std::vector<BlockTerm> blocks;
  bool simplified = false;
};

struct NotIdentified {
  VertexSet district;  ///< failing district D
  VertexSet stuck;     ///< members of D* \ D that could not be fixed
  VertexSet witness;   ///< random vertices of G^d when fixing stopped
};

struct IdResult {
  std::optional<Functional> functional;
  std::optional<NotIdentified> failure;

  bool identified() const noexcept { return functional.has_value(); }
};

struct IdOptions {
  bool build_expr = true;  ///< derive symbolic district terms
};

/// (G^d, G^b): CADMG over D* with pa^s(D*) fixed, and CCG over B* with
/// pa^s(B*) fixed.
std::pair<MixedGraph, MixedGraph> induced_cadmg_and_ccg(const MixedGraph& g);

IdResult identify(const MixedGraph& g, const VertexSet& outcome, const Assignment& treatment,
                  const IdOptions& options = {});

/// Symbolic district term for D derived from Π_{v∈D*} p(v | pre(v)); throws
/// if D is not reachable.
ExprPtr district_expression(const MixedGraph& g, const MixedGraph& gd, const VertexSet& district);

/// Prunes and rewrites the symbolic district terms.
Functional simplify(const Functional& f);

enum class DistrictPath { automatic, program, expr };

struct EvalOptions {
  ZeroPolicy policy = ZeroPolicy::strict;
  DistrictPath path = DistrictPath::automatic;  ///< automatic: expr once simplified
  bool reverse_terms = false;                   ///< evaluate district terms in reverse order
};

/// q(D* | pa^s(D*)) = p(V) / Π_B p(B | pa(B)).
TabularDist base_kernel(const Functional& f, const TabularDist& p, ZeroPolicy policy = ZeroPolicy::strict);

/// p(Y | do(A)) for every treatment value: random Y, context A.
TabularDist evaluate_kernel(const Functional& f, const TabularDist& p, const EvalOptions& options = {});
/// p(Y | do(a)) at the functional's treatment assignment.
TabularDist evaluate_functional(const Functional& f, const TabularDist& p, const EvalOptions& options = {});

std::string functional_to_json(const Functional& f, int indent = 2);
Functional parse_functional(std::string_view json_text);
std::string render_functional(const Functional& f);
std::string failure_to_json(const NotIdentified& w, int indent = 2);

/// Top-level factors of the product inside the outer sum: the factors of each
/// symbolic district term plus one conditional per block term. Empty when a
/// district term has no symbolic form.
std::vector<ExprPtr> functional_terms(const Functional& f);

}  // namespace sgid
