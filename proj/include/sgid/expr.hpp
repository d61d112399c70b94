#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sgid/graph.hpp"
#include "sgid/tabular.hpp"

namespace sgid {

/// Symbolic expression over conditionals of the observed distribution p(V).
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { one, cond, prod, sum, quot };

  Kind kind = Kind::one;
  VertexSet target;             // cond: p(target | given)
  VertexSet given;              // cond
  std::vector<ExprPtr> terms;   // prod
  VertexSet vars;               // sum: Σ_vars body
  ExprPtr body;                 // sum
  ExprPtr num, den;             // quot
};

/// Builders keep every vertex list in graph order.
class ExprBuilder {
 public:
  explicit ExprBuilder(const MixedGraph& g) : g_(g) {}

  ExprPtr one() const;
  ExprPtr cond(const VertexSet& target, const VertexSet& given) const;
  ExprPtr prod(std::vector<ExprPtr> terms) const;
  ExprPtr sum(const VertexSet& vars, ExprPtr body) const;
  ExprPtr quot(ExprPtr num, ExprPtr den) const;

  const MixedGraph& graph() const noexcept { return g_; }

 private:
  const MixedGraph& g_;
};

/// Canonical string used for structural equality; insensitive to product order.
std::string expr_key(const ExprPtr& e);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

VertexSet free_variables(const ExprPtr& e, const MixedGraph& g);
std::size_t cond_count(const ExprPtr& e);

/// Algebraic rewriting to a fixpoint: flatten products, eliminate summed
/// variables that occur only as a target of one conditional, pull constant
/// factors out of sums, and cancel common factors of quotients.
ExprPtr simplify_algebra(const ExprPtr& e, const MixedGraph& g);

/// Drops conditioning variables from every conditional when m-separation in g
/// licenses it (greedy, graph order).
ExprPtr prune_conditioning(const ExprPtr& e, const MixedGraph& g);

/// Alternates pruning and algebra until nothing changes.
ExprPtr simplify_expr(const ExprPtr& e, const MixedGraph& g);

/// Renders with Σ, products and conditionals. Free variables listed in
/// `lowered` are printed in lower case, standing for assigned values.
std::string render(const ExprPtr& e, const VertexSet& lowered = {});

/// Evaluates against a joint p(V) over the graph's random vertices.
class ExprEvaluator {
 public:
  ExprEvaluator(const TabularDist& joint, ZeroPolicy policy) : joint_(joint), policy_(policy) {}
  Factor operator()(const ExprPtr& e);

 private:
  const TabularDist& joint_;
  ZeroPolicy policy_;
  std::map<std::string, Factor> cache_;
};

}  // namespace sgid
