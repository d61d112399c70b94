#include "sgid/identify.hpp"

#include <algorithm>
#include <stdexcept>

namespace sgid {

namespace {

bool contains(const VertexSet& s, const std::string& x) { return std::find(s.begin(), s.end(), x) != s.end(); }

VertexSet minus(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  for (const auto& x : a)
    if (!contains(b, x)) out.push_back(x);
  return out;
}

VertexSet intersect(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  for (const auto& x : a)
    if (contains(b, x)) out.push_back(x);
  return out;
}

VertexSet unite(VertexSet a, const VertexSet& b) {
  for (const auto& x : b)
    if (!contains(a, x)) a.push_back(x);
  return a;
}

bool same_set(const VertexSet& a, const VertexSet& b) {
  return a.size() == b.size() && std::all_of(a.begin(), a.end(), [&](const std::string& x) { return contains(b, x); });
}

// Random vertices `members` plus their strict parents as fixed vertices;
// keeps edges among members and directed edges from the parents into them.
MixedGraph induced_kernel_graph(const MixedGraph& g, const Mask& members) {
  const Mask parents = relation(g, Relation::pa, members) - members;
  MixedGraph out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (members[i]) out.add_vertex(g.name(i), g.is_fixed(i));
    else if (parents[i]) out.add_vertex(g.name(i), true);
  }
  for (const auto& e : g.edges()) {
    const std::size_t a = g.index(e.a), b = g.index(e.b);
    if (members[a] && members[b]) out.add_edge(e.kind, e.a, e.b);
    else if (e.kind == EdgeKind::directed && parents[a] && members[b]) out.add_edge(e.kind, e.a, e.b);
  }
  return out;
}

}  // namespace

std::pair<MixedGraph, MixedGraph> induced_cadmg_and_ccg(const MixedGraph& g) {
  if (!classify(g).is_sg) throw Error(ErrorCode::wrong_graph_class, "input is not a segregated graph");
  Mask dstar(g.size()), bstar(g.size());
  for (const auto& d : component_masks(g, ComponentKind::district)) dstar |= d;
  for (const auto& b : component_masks(g, ComponentKind::nontrivial_block)) bstar |= b;
  return {induced_kernel_graph(g, dstar), induced_kernel_graph(g, bstar)};
}

ExprPtr district_expression(const MixedGraph& g, const MixedGraph& gd, const VertexSet& district) {
  const ExprBuilder b(g);
  const auto order = topological_order(g);
  const VertexSet dstar = gd.random();

  std::vector<ExprPtr> base;
  VertexSet before;
  for (std::size_t i : order) {
    if (contains(dstar, g.name(i))) base.push_back(b.cond({g.name(i)}, before));
    before.push_back(g.name(i));
  }
  ExprPtr q = simplify_algebra(b.prod(std::move(base)), g);
  VertexSet t = gd.ordered(dstar);
  VertexSet ordered_all;
  for (std::size_t i : order) ordered_all.push_back(g.name(i));

  for (;;) {
    if (same_set(t, district)) return q;
    const MixedGraph sub = induced_subgraph(gd, t);
    const VertexSet anc = relation(sub, Relation::an, district);
    if (anc.size() < t.size()) {
      q = simplify_algebra(b.sum(minus(t, anc), q), g);
      t = anc;
      continue;
    }
    VertexSet next;
    for (const auto& d : components(sub, ComponentKind::district))
      if (contains(d, district.front())) next = d;
    if (same_set(next, t)) {
      throw Error(ErrorCode::not_fixable, "district is not reachable from the base kernel");
    }
    // c-component factorization: Q[T'] = Π_{v∈T'} Q[T≤v] / Q[T<v].
    VertexSet t_order = intersect(ordered_all, t);
    std::vector<ExprPtr> factors;
    for (std::size_t i = 0; i < t_order.size(); ++i) {
      if (!contains(next, t_order[i])) continue;
      const VertexSet after(t_order.begin() + static_cast<std::ptrdiff_t>(i) + 1, t_order.end());
      const VertexSet from(t_order.begin() + static_cast<std::ptrdiff_t>(i), t_order.end());
      factors.push_back(b.quot(simplify_algebra(b.sum(after, q), g), simplify_algebra(b.sum(from, q), g)));
    }
    q = simplify_algebra(b.prod(std::move(factors)), g);
    t = gd.ordered(next);
  }
}

IdResult identify(const MixedGraph& g, const VertexSet& outcome, const Assignment& treatment,
                  const IdOptions& options) {
  if (!classify(g).is_sg) throw Error(ErrorCode::wrong_graph_class, "input is not a segregated graph");
  if (!g.fixed().empty()) throw Error(ErrorCode::invalid_argument, "identification expects a graph without fixed vertices");
  if (outcome.empty()) throw Error(ErrorCode::invalid_argument, "outcome set is empty");
  VertexSet a_vars;
  for (const auto& [name, value] : treatment) {
    if (!g.contains(name)) throw Error(ErrorCode::unknown_vertex, name);
    if (value < 0) throw Error(ErrorCode::invalid_argument, "negative treatment value for " + name);
    a_vars.push_back(name);
  }
  for (const auto& y : outcome) {
    if (!g.contains(y)) throw Error(ErrorCode::unknown_vertex, y);
    if (treatment.count(y)) throw Error(ErrorCode::invalid_argument, y + " is both outcome and treatment");
  }
  a_vars = g.ordered(a_vars);
  const VertexSet y = g.ordered(outcome);

  const MixedGraph g_not_a = induced_subgraph(g, minus(g.vertices(), a_vars));
  const VertexSet ystar = g.ordered(relation(g_not_a, Relation::ant, y));

  auto [gd, gb] = induced_cadmg_and_ccg(g);
  (void)gb;
  const VertexSet dstar = gd.random();

  Functional f;
  f.graph = g;
  f.cadmg = gd;
  f.outcome = y;
  f.treatment = a_vars;
  f.restrict = treatment;
  f.ystar = ystar;
  f.sum_over = minus(ystar, y);
  f.base_random = dstar;
  f.base_given = gd.fixed();
  f.base_blocks = components(g, ComponentKind::nontrivial_block);

  const MixedGraph outcome_side = induced_subgraph(g, intersect(ystar, dstar));
  for (const auto& d : components(outcome_side, ComponentKind::district)) {
    FixOutcome fo = fix_sequence(gd, minus(dstar, d), "qD");
    if (!fo.ok()) {
      IdResult r;
      r.failure = NotIdentified{d, fo.stuck, fo.graph.random()};
      return r;
    }
    DistrictTerm term;
    term.district = d;
    term.program = std::move(*fo.program);
    term.given = strict_parents(gd, d);
    if (options.build_expr) term.expr = district_expression(g, gd, d);
    f.districts.push_back(std::move(term));
  }

  const VertexSet kept = unite(ystar, a_vars);
  for (const auto& block : f.base_blocks) {
    const VertexSet target = intersect(block, ystar);
    if (target.empty()) continue;
    BlockTerm bt;
    bt.target = target;
    const VertexSet treated = intersect(block, a_vars);
    const VertexSet full_given = g.ordered(unite(strict_parents(g, block), treated));
    bt.given = intersect(full_given, kept);
    bt.averaged = minus(full_given, kept);
    bt.summed = minus(block, kept);
    for (const auto& a : treated) bt.treated[a] = treatment.at(a);
    f.blocks.push_back(std::move(bt));
  }

  IdResult r;
  r.functional = std::move(f);
  return r;
}

Functional simplify(const Functional& f) {
  Functional out = f;
  for (auto& d : out.districts) {
    if (!d.expr) d.expr = district_expression(f.graph, f.cadmg, d.district);
    d.expr = simplify_expr(d.expr, f.graph);
  }
  out.simplified = true;
  return out;
}

namespace {

TabularDist block_conditional(const TabularDist& p, const MixedGraph& g, const VertexSet& block,
                              const VertexSet& extra_given, ZeroPolicy policy) {
  const VertexSet parents = strict_parents(g, block);
  const VertexSet keep = unite(block, parents);
  const TabularDist margin = p.marginalize(minus(p.random(), keep));
  return margin.condition(g.ordered(unite(parents, extra_given)), policy);
}

void check_joint(const Functional& f, const TabularDist& p) {
  if (!p.conditioning().empty()) throw Error(ErrorCode::mismatch, "expected a joint distribution over the graph");
  VertexSet a = p.random(), b = f.graph.random();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw Error(ErrorCode::mismatch, "distribution variables do not match the graph's vertices");
}

std::string describe_set(const VertexSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + s[i];
  return out + "}";
}

}  // namespace

TabularDist base_kernel(const Functional& f, const TabularDist& p, ZeroPolicy policy) {
  check_joint(f, p);
  TabularDist q = p;
  for (const auto& block : f.base_blocks) q = q.divide(block_conditional(p, f.graph, block, {}, policy), policy);
  // What remains of the block variables in the context but outside pa^s(D*)
  // does not enter the kernel; average it away.
  const VertexSet extra = minus(q.conditioning(), f.base_given);
  return q.drop_context(extra);
}

TabularDist evaluate_kernel(const Functional& f, const TabularDist& p, const EvalOptions& options) {
  check_joint(f, p);
  const VertexSet kept = unite(f.ystar, f.treatment);
  const bool use_expr = options.path == DistrictPath::expr ||
                        (options.path == DistrictPath::automatic && f.simplified);

  std::vector<Factor> parts;
  std::optional<TabularDist> q;
  std::optional<ExprEvaluator> eval;
  std::vector<std::size_t> idx(f.districts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (options.reverse_terms) std::reverse(idx.begin(), idx.end());

  for (std::size_t i : idx) {
    const DistrictTerm& d = f.districts[i];
    try {
      if (use_expr && d.expr) {
        if (!eval) eval.emplace(p, options.policy);
        Factor t = (*eval)(d.expr);
        parts.push_back(t.average_out(minus(t.names(), kept)));
      } else {
        if (!q) q = base_kernel(f, p, options.policy);
        TabularDist k = apply_fixing(*q, f.cadmg, d.program.sequence, options.policy);
        k = k.drop_context(minus(k.conditioning(), d.given));
        parts.push_back(k.factor());
      }
    } catch (const Error& e) {
      throw Error(e.code(), "district term " + describe_set(d.district) + ": " + e.what());
    }
  }

  for (const auto& bt : f.blocks) {
    try {
      VertexSet treated;
      for (const auto& [a, v] : bt.treated) treated.push_back(a);
      const VertexSet block = f.graph.ordered(unite(unite(bt.target, bt.summed), treated));
      TabularDist k = block_conditional(p, f.graph, block, treated, options.policy);
      k = k.marginalize(bt.summed);
      k = k.drop_context(bt.averaged);
      parts.push_back(k.factor());
    } catch (const Error& e) {
      throw Error(e.code(), "block term " + describe_set(bt.target) + ": " + e.what());
    }
  }

  Factor joint = Factor::constant(1.0);
  for (const auto& part : parts) joint = multiply(joint, part);
  joint = joint.sum_out(intersect(joint.names(), f.sum_over));

  // Treatments that no term mentions do not affect the result; give them a
  // flat axis so the kernel is indexed by every treatment variable.
  std::vector<Variable> missing;
  for (const auto& a : f.treatment)
    if (!joint.has(a)) missing.push_back({a, p.factor().card(a)});
  if (!missing.empty()) {
    std::size_t cells = 1;
    for (const auto& v : missing) cells *= v.card;
    joint = multiply(joint, Factor(missing, std::vector<double>(cells, 1.0)));
  }
  for (const auto& v : joint.names())
    if (!contains(f.outcome, v) && !contains(f.treatment, v))
      throw std::logic_error("functional left free variable " + v);
  return TabularDist(joint.reorder(unite(f.outcome, f.treatment)), f.treatment);
}

TabularDist evaluate_functional(const Functional& f, const TabularDist& p, const EvalOptions& options) {
  return evaluate_kernel(f, p, options).restrict(f.restrict);
}

std::vector<ExprPtr> functional_terms(const Functional& f) {
  const ExprBuilder b(f.graph);
  std::vector<ExprPtr> out;
  for (const auto& bt : f.blocks) {
    out.push_back(b.cond(bt.target, bt.given));
  }
  for (const auto& d : f.districts) {
    if (!d.expr) return {};
    if (d.expr->kind == Expr::Kind::prod) out.insert(out.end(), d.expr->terms.begin(), d.expr->terms.end());
    else out.push_back(d.expr);
  }
  return out;
}

std::string render_functional(const Functional& f) {
  const VertexSet& lowered = f.treatment;
  std::string body;
  auto append = [&](const std::string& s) { body += (body.empty() ? "" : " ") + s; };
  const ExprBuilder b(f.graph);
  for (const auto& bt : f.blocks) append(render(b.cond(bt.target, bt.given), lowered));
  for (const auto& d : f.districts) {
    if (d.expr) {
      const std::string r = render(d.expr, lowered);
      append(d.expr->kind == Expr::Kind::sum ? "[" + r + "]" : r);
    } else {
      std::string seq;
      for (std::size_t i = 0; i < d.program.sequence.size(); ++i) seq += (i ? "," : "") + d.program.sequence[i];
      append("φ_{" + seq + "}(qD)[" + describe_set(d.district) + "]");
    }
  }
  if (body.empty()) body = "1";
  if (f.sum_over.empty()) return body;
  std::string vars;
  for (std::size_t i = 0; i < f.sum_over.size(); ++i) vars += (i ? "," : "") + f.sum_over[i];
  return "Σ_{" + vars + "} " + body;
}

}  // namespace sgid
