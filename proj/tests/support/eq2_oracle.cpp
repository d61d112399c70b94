#include "eq2_oracle.hpp"

#include <algorithm>
#include <set>

namespace sgid::testing {

namespace {

using Set = std::set<std::string>;

struct Admg {
  Set random;
  Set fixed;
  std::set<std::pair<std::string, std::string>> directed;
  std::set<std::pair<std::string, std::string>> bidirected;  // stored both ways

  Set children(const std::string& v) const {
    Set out;
    for (const auto& [a, b] : directed)
      if (a == v) out.insert(b);
    return out;
  }
  Set parents(const std::string& v) const {
    Set out;
    for (const auto& [a, b] : directed)
      if (b == v) out.insert(a);
    return out;
  }
  Set descendants(const std::string& v) const {
    Set out{v};
    for (std::vector<std::string> stack{v}; !stack.empty();) {
      const std::string x = stack.back();
      stack.pop_back();
      for (const auto& c : children(x))
        if (out.insert(c).second) stack.push_back(c);
    }
    return out;
  }
  Set district(const std::string& v) const {
    Set out{v};
    for (std::vector<std::string> stack{v}; !stack.empty();) {
      const std::string x = stack.back();
      stack.pop_back();
      for (const auto& [a, b] : bidirected)
        if (a == x && random.count(b) && out.insert(b).second) stack.push_back(b);
    }
    return out;
  }
  bool fixable(const std::string& v) const {
    const Set de = descendants(v), dis = district(v);
    for (const auto& x : de)
      if (x != v && dis.count(x)) return false;
    return true;
  }
  Admg fix(const std::string& v) const {
    Admg out = *this;
    out.random.erase(v);
    out.fixed.insert(v);
    std::erase_if(out.directed, [&](const auto& e) { return e.second == v; });
    std::erase_if(out.bidirected, [&](const auto& e) { return e.first == v || e.second == v; });
    return out;
  }
};

VertexSet to_vec(const Set& s) { return {s.begin(), s.end()}; }

// q / q(v | nd(v), W), all as factors over every variable of the model.
Factor fix_factor(const Factor& q, const Admg& g, const std::string& v) {
  const Set de = g.descendants(v);
  VertexSet drop_with_v, drop_without_v;
  for (const auto& x : g.random) {
    if (de.count(x) && x != v) drop_with_v.push_back(x);
    if (de.count(x)) drop_without_v.push_back(x);
  }
  const Factor num = q.sum_out(drop_with_v);
  const Factor den = q.sum_out(drop_without_v);
  const Factor conditional = divide(num, den, ZeroPolicy::strict);
  return divide(q, conditional, ZeroPolicy::strict);
}

}  // namespace

std::optional<Factor> eq2_identify(const MixedGraph& admg, const VertexSet& outcome, const Assignment& treatment,
                                   const TabularDist& p) {
  Admg g;
  for (const auto& v : admg.vertices()) g.random.insert(v);
  for (const auto& e : admg.edges()) {
    if (e.kind == EdgeKind::directed) g.directed.emplace(e.a, e.b);
    if (e.kind == EdgeKind::bidirected) {
      g.bidirected.emplace(e.a, e.b);
      g.bidirected.emplace(e.b, e.a);
    }
  }

  // Y*: ancestors of Y once the treatment vertices are removed.
  Set ystar(outcome.begin(), outcome.end());
  for (std::vector<std::string> stack(outcome.begin(), outcome.end()); !stack.empty();) {
    const std::string x = stack.back();
    stack.pop_back();
    for (const auto& w : g.parents(x))
      if (!treatment.count(w) && ystar.insert(w).second) stack.push_back(w);
  }

  // Districts of G_{Y*}.
  Admg sub;
  sub.random = ystar;
  for (const auto& e : g.bidirected)
    if (ystar.count(e.first) && ystar.count(e.second)) sub.bidirected.insert(e);
  std::vector<Set> districts;
  Set seen;
  for (const auto& v : ystar) {
    if (seen.count(v)) continue;
    const Set d = sub.district(v);
    seen.insert(d.begin(), d.end());
    districts.push_back(d);
  }

  Factor product = Factor::constant(1.0);
  for (const auto& d : districts) {
    Admg cur = g;
    Factor q = p.factor();
    for (bool progress = true; progress;) {
      progress = false;
      for (const auto& v : Set(cur.random)) {
        if (d.count(v) || !cur.fixable(v)) continue;
        q = fix_factor(q, cur, v);
        cur = cur.fix(v);
        progress = true;
      }
    }
    if (cur.random != d) return std::nullopt;
    // The kernel depends on the fixed context only through pa(D).
    Set keep = d;
    for (const auto& v : d)
      for (const auto& w : g.parents(v)) keep.insert(w);
    VertexSet irrelevant;
    for (const auto& v : cur.fixed)
      if (!keep.count(v)) irrelevant.push_back(v);
    product = multiply(product, q.average_out(irrelevant));
  }

  Assignment at;
  for (const auto& [name, value] : treatment)
    if (product.has(name)) at[name] = value;
  Factor restricted = product.restrict(at);
  VertexSet summed;
  for (const auto& v : ystar)
    if (std::find(outcome.begin(), outcome.end(), v) == outcome.end()) summed.push_back(v);
  return restricted.sum_out(summed).reorder(outcome);
}

}  // namespace sgid::testing
