#include "sgid/expr.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "sgid/separation.hpp"

namespace sgid {

namespace {

bool contains(const VertexSet& s, const std::string& x) { return std::find(s.begin(), s.end(), x) != s.end(); }

VertexSet minus(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  for (const auto& x : a)
    if (!contains(b, x)) out.push_back(x);
  return out;
}

bool same_set(const VertexSet& a, const VertexSet& b) {
  return a.size() == b.size() && std::all_of(a.begin(), a.end(), [&](const std::string& x) { return contains(b, x); });
}

std::string join(const VertexSet& s, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? sep : "") + s[i];
  return out;
}

std::vector<ExprPtr> factors_of(const ExprPtr& e) {
  if (e->kind == Expr::Kind::prod) return e->terms;
  if (e->kind == Expr::Kind::one) return {};
  return {e};
}

}  // namespace

ExprPtr ExprBuilder::one() const { return std::make_shared<Expr>(); }

ExprPtr ExprBuilder::cond(const VertexSet& target, const VertexSet& given) const {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::cond;
  e->target = g_.ordered(target);
  e->given = g_.ordered(minus(given, target));
  if (e->target.empty()) return one();
  return e;
}

ExprPtr ExprBuilder::prod(std::vector<ExprPtr> terms) const {
  std::vector<ExprPtr> flat;
  for (auto& t : terms) {
    if (t->kind == Expr::Kind::prod) flat.insert(flat.end(), t->terms.begin(), t->terms.end());
    else if (t->kind != Expr::Kind::one) flat.push_back(std::move(t));
  }
  if (flat.empty()) return one();
  if (flat.size() == 1) return flat.front();
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::prod;
  e->terms = std::move(flat);
  return e;
}

ExprPtr ExprBuilder::sum(const VertexSet& vars, ExprPtr body) const {
  if (vars.empty()) return body;
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::sum;
  e->vars = g_.ordered(vars);
  e->body = std::move(body);
  return e;
}

ExprPtr ExprBuilder::quot(ExprPtr num, ExprPtr den) const {
  if (den->kind == Expr::Kind::one) return num;
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::quot;
  e->num = std::move(num);
  e->den = std::move(den);
  return e;
}

std::string expr_key(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::one: return "1";
    case Expr::Kind::cond: return "p(" + join(e->target) + "|" + join(e->given) + ")";
    case Expr::Kind::prod: {
      std::vector<std::string> keys;
      for (const auto& t : e->terms) keys.push_back(expr_key(t));
      std::sort(keys.begin(), keys.end());
      std::string out = "*[";
      for (const auto& k : keys) out += k + ";";
      return out + "]";
    }
    case Expr::Kind::sum: return "S{" + join(e->vars) + "}(" + expr_key(e->body) + ")";
    case Expr::Kind::quot: return "(" + expr_key(e->num) + ")/(" + expr_key(e->den) + ")";
  }
  return "?";
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) { return expr_key(a) == expr_key(b); }

namespace {

void collect_free(const ExprPtr& e, VertexSet& out) {
  switch (e->kind) {
    case Expr::Kind::one: return;
    case Expr::Kind::cond:
      for (const auto& v : e->target)
        if (!contains(out, v)) out.push_back(v);
      for (const auto& v : e->given)
        if (!contains(out, v)) out.push_back(v);
      return;
    case Expr::Kind::prod:
      for (const auto& t : e->terms) collect_free(t, out);
      return;
    case Expr::Kind::sum: {
      VertexSet inner;
      collect_free(e->body, inner);
      for (const auto& v : inner)
        if (!contains(e->vars, v) && !contains(out, v)) out.push_back(v);
      return;
    }
    case Expr::Kind::quot:
      collect_free(e->num, out);
      collect_free(e->den, out);
      return;
  }
}

}  // namespace

VertexSet free_variables(const ExprPtr& e, const MixedGraph& g) {
  VertexSet out;
  collect_free(e, out);
  return g.ordered(out);
}

std::size_t cond_count(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::one: return 0;
    case Expr::Kind::cond: return 1;
    case Expr::Kind::prod: {
      std::size_t n = 0;
      for (const auto& t : e->terms) n += cond_count(t);
      return n;
    }
    case Expr::Kind::sum: return cond_count(e->body);
    case Expr::Kind::quot: return cond_count(e->num) + cond_count(e->den);
  }
  return 0;
}

namespace {

ExprPtr simplify_sum(const ExprBuilder& b, VertexSet vars, ExprPtr body) {
  if (body->kind == Expr::Kind::sum) {
    for (const auto& v : body->vars)
      if (!contains(vars, v)) vars.push_back(v);
    body = body->body;
  }
  std::vector<ExprPtr> factors = factors_of(body);

  // Σ_x p(x, T | G) = p(T | G) when no other factor mentions x.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = vars.begin(); it != vars.end(); ++it) {
      const std::string x = *it;
      std::vector<std::size_t> holders;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        VertexSet fv;
        collect_free(factors[i], fv);
        if (contains(fv, x)) holders.push_back(i);
      }
      if (holders.size() == 2) {
        // Chain rule: p(x | G) p(T | G, x) = p(x, T | G), after which x can be
        // summed out of the joint conditional.
        for (int flip = 0; flip < 2; ++flip) {
          const ExprPtr& first = factors[holders[flip]];
          const ExprPtr& second = factors[holders[1 - flip]];
          if (first->kind != Expr::Kind::cond || second->kind != Expr::Kind::cond) break;
          if (!contains(first->target, x) || contains(second->target, x)) continue;
          VertexSet joined = first->given;
          for (const auto& t : first->target) joined.push_back(t);
          if (!same_set(joined, second->given)) continue;
          VertexSet target = first->target;
          for (const auto& t : second->target) target.push_back(t);
          factors[holders[0]] = b.cond(target, first->given);
          factors.erase(factors.begin() + static_cast<std::ptrdiff_t>(holders[1]));
          holders.pop_back();
          break;
        }
      }
      if (holders.size() != 1) continue;
      const ExprPtr& h = factors[holders[0]];
      if (h->kind != Expr::Kind::cond || !contains(h->target, x)) continue;
      factors[holders[0]] = b.cond(minus(h->target, {x}), h->given);
      vars.erase(it);
      changed = true;
      break;
    }
  }

  std::vector<ExprPtr> outside, inside;
  for (auto& f : factors) {
    if (f->kind == Expr::Kind::one) continue;
    VertexSet fv;
    collect_free(f, fv);
    const bool touches = std::any_of(fv.begin(), fv.end(), [&](const std::string& v) { return contains(vars, v); });
    (touches ? inside : outside).push_back(f);
  }
  if (vars.empty()) {
    outside.insert(outside.end(), inside.begin(), inside.end());
    return b.prod(std::move(outside));
  }
  outside.push_back(b.sum(vars, b.prod(std::move(inside))));
  return b.prod(std::move(outside));
}

ExprPtr simplify_once(const ExprBuilder& b, const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::one:
    case Expr::Kind::cond: return e;
    case Expr::Kind::prod: {
      std::vector<ExprPtr> terms;
      for (const auto& t : e->terms) terms.push_back(simplify_once(b, t));
      return b.prod(std::move(terms));
    }
    case Expr::Kind::sum: return simplify_sum(b, e->vars, simplify_once(b, e->body));
    case Expr::Kind::quot: {
      auto nf = factors_of(simplify_once(b, e->num));
      auto df = factors_of(simplify_once(b, e->den));
      for (auto it = df.begin(); it != df.end();) {
        const std::string key = expr_key(*it);
        auto match = std::find_if(nf.begin(), nf.end(), [&](const ExprPtr& x) { return expr_key(x) == key; });
        if (match != nf.end()) {
          nf.erase(match);
          it = df.erase(it);
        } else {
          ++it;
        }
      }
      return b.quot(b.prod(std::move(nf)), b.prod(std::move(df)));
    }
  }
  return e;
}

ExprPtr prune_once(const ExprBuilder& b, const ExprPtr& e, const MixedGraph& g) {
  switch (e->kind) {
    case Expr::Kind::one: return e;
    case Expr::Kind::cond: {
      VertexSet removed;
      for (const auto& z : e->given) {
        VertexSet trial = removed;
        trial.push_back(z);
        if (m_separated(g, e->target, trial, minus(e->given, trial))) removed = std::move(trial);
      }
      return removed.empty() ? e : b.cond(e->target, minus(e->given, removed));
    }
    case Expr::Kind::prod: {
      std::vector<ExprPtr> terms;
      for (const auto& t : e->terms) terms.push_back(prune_once(b, t, g));
      return b.prod(std::move(terms));
    }
    case Expr::Kind::sum: return b.sum(e->vars, prune_once(b, e->body, g));
    case Expr::Kind::quot: return b.quot(prune_once(b, e->num, g), prune_once(b, e->den, g));
  }
  return e;
}

}  // namespace

ExprPtr simplify_algebra(const ExprPtr& e, const MixedGraph& g) {
  const ExprBuilder b(g);
  ExprPtr cur = e;
  for (;;) {
    ExprPtr next = simplify_once(b, cur);
    if (expr_key(next) == expr_key(cur)) return next;
    cur = next;
  }
}

ExprPtr prune_conditioning(const ExprPtr& e, const MixedGraph& g) { return prune_once(ExprBuilder(g), e, g); }

ExprPtr simplify_expr(const ExprPtr& e, const MixedGraph& g) {
  ExprPtr cur = simplify_algebra(e, g);
  for (;;) {
    ExprPtr next = simplify_algebra(prune_conditioning(cur, g), g);
    if (expr_key(next) == expr_key(cur)) return next;
    cur = next;
  }
}

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string render_rec(const ExprPtr& e, const VertexSet& lowered, bool nested) {
  auto name = [&](const std::string& v) { return contains(lowered, v) ? lower(v) : v; };
  auto names = [&](const VertexSet& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + name(s[i]);
    return out;
  };
  switch (e->kind) {
    case Expr::Kind::one: return "1";
    case Expr::Kind::cond:
      if (e->given.empty()) return "p(" + names(e->target) + ")";
      return "p(" + names(e->target) + " | " + names(e->given) + ")";
    case Expr::Kind::prod: {
      std::string out;
      for (std::size_t i = 0; i < e->terms.size(); ++i) out += (i ? " " : "") + render_rec(e->terms[i], lowered, true);
      return out;
    }
    case Expr::Kind::sum: {
      const VertexSet inner = minus(lowered, e->vars);
      std::string out = "Σ_{" + join(e->vars) + "} " + render_rec(e->body, inner, false);
      return nested ? "[" + out + "]" : out;
    }
    case Expr::Kind::quot:
      return "(" + render_rec(e->num, lowered, false) + ") / (" + render_rec(e->den, lowered, false) + ")";
  }
  return "?";
}

}  // namespace

std::string render(const ExprPtr& e, const VertexSet& lowered) { return render_rec(e, lowered, false); }

Factor ExprEvaluator::operator()(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::one: return Factor::constant(1.0);
    case Expr::Kind::cond: {
      const std::string key = expr_key(e);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
      VertexSet keep = e->target;
      keep.insert(keep.end(), e->given.begin(), e->given.end());
      const TabularDist margin = joint_.marginalize(minus(joint_.random(), keep));
      Factor f = margin.condition(e->given, policy_).factor();
      cache_.emplace(key, f);
      return f;
    }
    case Expr::Kind::prod: {
      Factor out = Factor::constant(1.0);
      for (const auto& t : e->terms) out = multiply(out, (*this)(t));
      return out;
    }
    case Expr::Kind::sum: {
      Factor body = (*this)(e->body);
      VertexSet present;
      double multiplicity = 1.0;
      for (const auto& v : e->vars) {
        if (body.has(v)) present.push_back(v);
        else multiplicity *= static_cast<double>(joint_.factor().card(v));
      }
      Factor out = body.sum_out(present);
      if (multiplicity != 1.0)
        for (double& x : out.mutable_table()) x *= multiplicity;
      return out;
    }
    case Expr::Kind::quot: return divide((*this)(e->num), (*this)(e->den), policy_);
  }
  return Factor::constant(1.0);
}

}  // namespace sgid
