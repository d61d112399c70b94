#include "sgid/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace sgid {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed: return "malformed";
    case ErrorCode::unknown_vertex: return "unknown vertex";
    case ErrorCode::duplicate_vertex: return "duplicate vertex";
    case ErrorCode::unknown_edge_kind: return "unknown edge kind";
    case ErrorCode::self_loop: return "self-loop";
    case ErrorCode::duplicate_edge: return "duplicate edge";
    case ErrorCode::fixed_incoming: return "fixed vertex with incoming edge";
    case ErrorCode::wrong_graph_class: return "wrong graph class";
    case ErrorCode::not_block_safe: return "hidden set not block-safe";
    case ErrorCode::not_fixable: return "not fixable";
    case ErrorCode::unknown_variable: return "unknown variable";
    case ErrorCode::positivity: return "positivity violation";
    case ErrorCode::mismatch: return "mismatch";
    case ErrorCode::cap_exceeded: return "cap exceeded";
    case ErrorCode::invalid_argument: return "invalid argument";
  }
  return "error";
}

const char* to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::directed: return "directed";
    case EdgeKind::bidirected: return "bidirected";
    case EdgeKind::undirected: return "undirected";
  }
  return "?";
}

EdgeKind parse_edge_kind(std::string_view text) {
  if (text == "directed" || text == "->") return EdgeKind::directed;
  if (text == "bidirected" || text == "<->") return EdgeKind::bidirected;
  if (text == "undirected" || text == "--") return EdgeKind::undirected;
  throw Error(ErrorCode::unknown_edge_kind, std::string(text));
}

namespace {

void insert_sorted(std::vector<std::size_t>& v, std::size_t x) {
  v.insert(std::upper_bound(v.begin(), v.end(), x), x);
}

bool holds(const std::vector<std::size_t>& v, std::size_t x) {
  return std::binary_search(v.begin(), v.end(), x);
}

}  // namespace

std::size_t MixedGraph::add_vertex(const std::string& name, bool fixed) {
  if (name.empty()) throw Error(ErrorCode::malformed, "empty vertex name");
  if (index_.count(name)) throw Error(ErrorCode::duplicate_vertex, name);
  const std::size_t i = names_.size();
  names_.push_back(name);
  fixed_.push_back(fixed ? 1 : 0);
  index_.emplace(name, i);
  pa_.emplace_back();
  ch_.emplace_back();
  sib_.emplace_back();
  nb_.emplace_back();
  return i;
}

void MixedGraph::check_vertex(std::string_view name) const {
  if (!contains(name)) throw Error(ErrorCode::unknown_vertex, std::string(name));
}

bool MixedGraph::contains(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

std::size_t MixedGraph::index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error(ErrorCode::unknown_vertex, std::string(name));
  return it->second;
}

void MixedGraph::add_edge(EdgeKind kind, const std::string& a, const std::string& b) {
  check_vertex(a);
  check_vertex(b);
  if (a == b) throw Error(ErrorCode::self_loop, a + " " + to_string(kind) + " " + b);
  const std::size_t i = index(a), j = index(b);
  const std::string desc = a + " " + to_string(kind) + " " + b;

  const bool directed_pair = holds(ch_[i], j) || holds(ch_[j], i);
  switch (kind) {
    case EdgeKind::directed:
      if (directed_pair) throw Error(ErrorCode::duplicate_edge, desc);
      if (holds(nb_[i], j)) {
        throw Error(ErrorCode::duplicate_edge, desc + " parallels an undirected edge");
      }
      if (fixed_[j]) throw Error(ErrorCode::fixed_incoming, desc);
      break;
    case EdgeKind::bidirected:
      if (holds(sib_[i], j)) throw Error(ErrorCode::duplicate_edge, desc);
      if (fixed_[i] || fixed_[j]) throw Error(ErrorCode::fixed_incoming, desc);
      break;
    case EdgeKind::undirected:
      if (holds(nb_[i], j)) throw Error(ErrorCode::duplicate_edge, desc);
      if (directed_pair) {
        throw Error(ErrorCode::duplicate_edge, desc + " parallels a directed edge");
      }
      if (fixed_[i] || fixed_[j]) throw Error(ErrorCode::fixed_incoming, desc);
      break;
  }

  switch (kind) {
    case EdgeKind::directed:
      insert_sorted(ch_[i], j);
      insert_sorted(pa_[j], i);
      break;
    case EdgeKind::bidirected:
      insert_sorted(sib_[i], j);
      insert_sorted(sib_[j], i);
      break;
    case EdgeKind::undirected:
      insert_sorted(nb_[i], j);
      insert_sorted(nb_[j], i);
      break;
  }
  edges_.push_back({kind, a, b});
}

void MixedGraph::set_fixed(const std::string& name) {
  const std::size_t i = index(name);
  if (!pa_[i].empty() || !sib_[i].empty() || !nb_[i].empty()) {
    throw Error(ErrorCode::fixed_incoming, name);
  }
  fixed_[i] = 1;
}

VertexSet MixedGraph::random() const {
  VertexSet out;
  for (std::size_t i = 0; i < size(); ++i)
    if (!fixed_[i]) out.push_back(names_[i]);
  return out;
}

VertexSet MixedGraph::fixed() const {
  VertexSet out;
  for (std::size_t i = 0; i < size(); ++i)
    if (fixed_[i]) out.push_back(names_[i]);
  return out;
}

Mask MixedGraph::random_mask() const {
  Mask m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = !fixed_[i];
  return m;
}

bool MixedGraph::has_edge(EdgeKind kind, std::string_view a, std::string_view b) const {
  if (!contains(a) || !contains(b)) return false;
  const std::size_t i = index(a), j = index(b);
  switch (kind) {
    case EdgeKind::directed: return holds(ch_[i], j);
    case EdgeKind::bidirected: return holds(sib_[i], j);
    case EdgeKind::undirected: return holds(nb_[i], j);
  }
  return false;
}

std::size_t MixedGraph::count_edges(EdgeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [&](const Edge& e) { return e.kind == kind; }));
}

Mask MixedGraph::mask(const VertexSet& s) const {
  Mask m(size());
  for (const auto& v : s) m.set(index(v));
  return m;
}

VertexSet MixedGraph::names(const Mask& m) const {
  VertexSet out;
  for (auto i = m.find_first(); i != Mask::npos; i = m.find_next(i)) out.push_back(names_[i]);
  return out;
}

VertexSet MixedGraph::ordered(const VertexSet& s) const { return names(mask(s)); }

namespace {

using EdgeKey = std::tuple<int, std::string, std::string>;

std::set<EdgeKey> edge_keys(const MixedGraph& g) {
  std::set<EdgeKey> keys;
  for (const auto& e : g.edges()) {
    std::string a = e.a, b = e.b;
    if (e.kind != EdgeKind::directed && b < a) std::swap(a, b);
    keys.emplace(static_cast<int>(e.kind), a, b);
  }
  return keys;
}

}  // namespace

bool operator==(const MixedGraph& x, const MixedGraph& y) {
  return x.names_ == y.names_ && x.fixed_ == y.fixed_ && edge_keys(x) == edge_keys(y);
}

bool same_structure(const MixedGraph& x, const MixedGraph& y) {
  auto sorted = [](VertexSet v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  return sorted(x.vertices()) == sorted(y.vertices()) && sorted(x.fixed()) == sorted(y.fixed()) &&
         edge_keys(x) == edge_keys(y);
}

Relation parse_relation(std::string_view text) {
  static const std::map<std::string, Relation, std::less<>> table{
      {"pa", Relation::pa}, {"ch", Relation::ch}, {"sib", Relation::sib}, {"nb", Relation::nb},
      {"an", Relation::an}, {"de", Relation::de}, {"nd", Relation::nd},   {"ant", Relation::ant}};
  auto it = table.find(text);
  if (it == table.end()) throw Error(ErrorCode::invalid_argument, "unknown relation " + std::string(text));
  return it->second;
}

namespace {

template <typename Step>
Mask closure(const Mask& s, Step step) {
  Mask seen = s;
  std::deque<std::size_t> queue;
  for (auto i = s.find_first(); i != Mask::npos; i = s.find_next(i)) queue.push_back(i);
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    step(v, [&](std::size_t w) {
      if (!seen[w]) {
        seen.set(w);
        queue.push_back(w);
      }
    });
  }
  return seen;
}

}  // namespace

Mask relation(const MixedGraph& g, Relation kind, const Mask& s) {
  Mask out(g.size());
  auto gather = [&](auto&& adjacency) {
    for (auto i = s.find_first(); i != Mask::npos; i = s.find_next(i))
      for (std::size_t w : adjacency(i)) out.set(w);
  };
  switch (kind) {
    case Relation::pa: gather([&](std::size_t i) -> const auto& { return g.parents(i); }); break;
    case Relation::ch: gather([&](std::size_t i) -> const auto& { return g.children(i); }); break;
    case Relation::sib: gather([&](std::size_t i) -> const auto& { return g.siblings(i); }); break;
    case Relation::nb: gather([&](std::size_t i) -> const auto& { return g.neighbors(i); }); break;
    case Relation::an:
      return closure(s, [&](std::size_t v, auto visit) {
        for (std::size_t w : g.parents(v)) visit(w);
      });
    case Relation::de:
      return closure(s, [&](std::size_t v, auto visit) {
        for (std::size_t w : g.children(v)) visit(w);
      });
    case Relation::nd: {
      Mask de = relation(g, Relation::de, s);
      return ~de;
    }
    case Relation::ant:
      return closure(s, [&](std::size_t v, auto visit) {
        for (std::size_t w : g.parents(v)) visit(w);
        for (std::size_t w : g.neighbors(v)) visit(w);
      });
  }
  return out;
}

VertexSet relation(const MixedGraph& g, Relation kind, const VertexSet& s) {
  return g.names(relation(g, kind, g.mask(s)));
}

VertexSet strict_parents(const MixedGraph& g, const VertexSet& s) {
  const Mask m = g.mask(s);
  return g.names(relation(g, Relation::pa, m) - m);
}

namespace {

std::vector<Mask> connected(const MixedGraph& g, const Mask& eligible,
                            const std::function<const std::vector<std::size_t>&(std::size_t)>& adj) {
  std::vector<Mask> out;
  Mask seen(g.size());
  for (auto i = eligible.find_first(); i != Mask::npos; i = eligible.find_next(i)) {
    if (seen[i]) continue;
    Mask comp(g.size());
    std::deque<std::size_t> queue{i};
    seen.set(i);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      comp.set(v);
      for (std::size_t w : adj(v)) {
        if (eligible[w] && !seen[w]) {
          seen.set(w);
          queue.push_back(w);
        }
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

std::vector<Mask> component_masks(const MixedGraph& g, ComponentKind kind) {
  const Mask random = g.random_mask();
  if (kind == ComponentKind::district) {
    Mask eligible = random;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g.neighbors(i).empty()) eligible.reset(i);
    return connected(g, eligible, [&](std::size_t v) -> const auto& { return g.siblings(v); });
  }
  auto blocks = connected(g, random, [&](std::size_t v) -> const auto& { return g.neighbors(v); });
  if (kind == ComponentKind::nontrivial_block) {
    std::erase_if(blocks, [](const Mask& b) { return b.count() < 2; });
  }
  return blocks;
}

std::vector<VertexSet> components(const MixedGraph& g, ComponentKind kind) {
  std::vector<VertexSet> out;
  for (const auto& m : component_masks(g, kind)) out.push_back(g.names(m));
  return out;
}

namespace {

void bron_kerbosch(const std::vector<Mask>& adj, Mask r, Mask p, Mask x, std::vector<Mask>& out) {
  if (p.none() && x.none()) {
    out.push_back(r);
    return;
  }
  // Pivot on the vertex of P ∪ X with the most neighbours in P.
  const Mask px = p | x;
  std::size_t pivot = px.find_first();
  std::size_t best = 0;
  for (auto u = px.find_first(); u != Mask::npos; u = px.find_next(u)) {
    const std::size_t c = (p & adj[u]).count();
    if (c >= best) {
      best = c;
      pivot = u;
    }
  }
  const Mask candidates = p - adj[pivot];
  for (auto v = candidates.find_first(); v != Mask::npos; v = candidates.find_next(v)) {
    Mask r2 = r;
    r2.set(v);
    bron_kerbosch(adj, r2, p & adj[v], x & adj[v], out);
    p.reset(v);
    x.set(v);
  }
}

}  // namespace

std::vector<VertexSet> maximal_cliques(const MixedGraph& g) {
  if (g.count_edges(EdgeKind::directed) + g.count_edges(EdgeKind::bidirected) > 0) {
    throw Error(ErrorCode::wrong_graph_class, "maximal_cliques requires an undirected graph");
  }
  std::vector<Mask> adj(g.size(), Mask(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j : g.neighbors(i)) adj[i].set(j);

  std::vector<Mask> found;
  Mask all(g.size());
  all.set();
  bron_kerbosch(adj, Mask(g.size()), all, Mask(g.size()), found);

  std::vector<std::vector<std::size_t>> keyed;
  for (const auto& m : found) {
    std::vector<std::size_t> idx;
    for (auto i = m.find_first(); i != Mask::npos; i = m.find_next(i)) idx.push_back(i);
    keyed.push_back(std::move(idx));
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<VertexSet> out;
  for (const auto& idx : keyed) {
    VertexSet c;
    for (std::size_t i : idx) c.push_back(g.name(i));
    out.push_back(std::move(c));
  }
  return out;
}

MixedGraph augment(const MixedGraph& g) {
  if (!classify(g).is_cg) throw Error(ErrorCode::wrong_graph_class, "augment requires a chain graph");
  MixedGraph out;
  for (const auto& v : g.vertices()) out.add_vertex(v);

  std::vector<Mask> adj(g.size(), Mask(g.size()));
  auto join = [&](std::size_t i, std::size_t j) {
    if (i == j) return;
    adj[i].set(j);
    adj[j].set(i);
  };
  for (const auto& e : g.edges()) join(g.index(e.a), g.index(e.b));

  // Blocks over all vertices, fixed ones included as singletons.
  Mask all(g.size());
  all.set();
  auto blocks = connected(g, all, [&](std::size_t v) -> const auto& { return g.neighbors(v); });
  for (const auto& block : blocks) {
    const Mask pa = relation(g, Relation::pa, block) - block;
    for (auto i = pa.find_first(); i != Mask::npos; i = pa.find_next(i))
      for (auto j = pa.find_next(i); j != Mask::npos; j = pa.find_next(j)) join(i, j);
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    for (auto j = adj[i].find_next(i); j != Mask::npos; j = adj[i].find_next(j))
      out.add_edge(EdgeKind::undirected, g.name(i), g.name(j));
  return out;
}

namespace {

// Undirected components over all vertices, then the induced quotient order.
// Returns false if a partially directed cycle exists.
bool unit_order(const MixedGraph& g, std::vector<std::size_t>* order) {
  const std::size_t n = g.size();
  Mask all(n);
  all.set();
  auto units = connected(g, all, [&](std::size_t v) -> const auto& { return g.neighbors(v); });
  std::vector<std::size_t> unit_of(n);
  for (std::size_t u = 0; u < units.size(); ++u)
    for (auto i = units[u].find_first(); i != Mask::npos; i = units[u].find_next(i)) unit_of[i] = u;

  std::vector<std::set<std::size_t>> succ(units.size());
  std::vector<std::size_t> indegree(units.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : g.children(i)) {
      if (unit_of[i] == unit_of[j]) return false;
      if (succ[unit_of[i]].insert(unit_of[j]).second) ++indegree[unit_of[j]];
    }
  }
  // Units are numbered by their smallest vertex, so the min-heap breaks ties
  // by insertion order.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t u = 0; u < units.size(); ++u)
    if (indegree[u] == 0) ready.push(u);
  std::size_t emitted = 0;
  while (!ready.empty()) {
    const std::size_t u = ready.top();
    ready.pop();
    ++emitted;
    if (order) {
      for (auto i = units[u].find_first(); i != Mask::npos; i = units[u].find_next(i))
        order->push_back(i);
    }
    for (std::size_t w : succ[u])
      if (--indegree[w] == 0) ready.push(w);
  }
  return emitted == units.size();
}

}  // namespace

bool has_partially_directed_cycle(const MixedGraph& g) { return !unit_order(g, nullptr); }

std::vector<std::size_t> topological_order(const MixedGraph& g) {
  std::vector<std::size_t> order;
  if (!unit_order(g, &order)) {
    throw Error(ErrorCode::wrong_graph_class, "graph has a partially directed cycle");
  }
  return order;
}

GraphClass classify(const MixedGraph& g) {
  GraphClass c;
  bool sib_and_nb = false;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!g.siblings(i).empty() && !g.neighbors(i).empty()) sib_and_nb = true;
  c.is_sg = !sib_and_nb && !has_partially_directed_cycle(g);
  const bool has_bi = g.count_edges(EdgeKind::bidirected) > 0;
  const bool has_un = g.count_edges(EdgeKind::undirected) > 0;
  const bool has_di = g.count_edges(EdgeKind::directed) > 0;
  c.is_cg = c.is_sg && !has_bi;
  c.is_admg = c.is_sg && !has_un;
  c.is_dag = c.is_sg && !has_bi && !has_un;
  c.is_ug = c.is_sg && !has_bi && !has_di;
  return c;
}

MixedGraph induced_subgraph(const MixedGraph& g, const Mask& s) {
  MixedGraph out;
  for (auto i = s.find_first(); i != Mask::npos; i = s.find_next(i)) out.add_vertex(g.name(i), g.is_fixed(i));
  for (const auto& e : g.edges())
    if (s[g.index(e.a)] && s[g.index(e.b)]) out.add_edge(e.kind, e.a, e.b);
  return out;
}

MixedGraph induced_subgraph(const MixedGraph& g, const VertexSet& s) {
  return induced_subgraph(g, g.mask(s));
}

MixedGraph parse_graph(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::malformed, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::malformed, "graph document must be an object");
  try {
    MixedGraph g;
    std::set<std::string> fixed;
    if (doc.contains("fixed")) {
      for (const auto& v : doc.at("fixed")) fixed.insert(v.get<std::string>());
    }
    for (const auto& v : doc.value("vertices", nlohmann::json::array())) {
      const auto name = v.get<std::string>();
      g.add_vertex(name, fixed.count(name) > 0);
    }
    for (const auto& f : fixed)
      if (!g.contains(f)) throw Error(ErrorCode::unknown_vertex, "fixed vertex " + f);
    for (const auto& e : doc.value("edges", nlohmann::json::array())) {
      g.add_edge(parse_edge_kind(e.at("kind").get<std::string>()), e.at("a").get<std::string>(),
                 e.at("b").get<std::string>());
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed, e.what());
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_names(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

MixedGraph parse_graph_text(std::string_view text) {
  MixedGraph g;
  std::vector<std::string> fixed_later;
  auto ensure = [&](const std::string& v) {
    if (!g.contains(v)) g.add_vertex(v);
  };
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.rfind("fixed:", 0) == 0) {
      for (auto& v : split_names(line.substr(6))) fixed_later.push_back(v);
      continue;
    }
    if (line.rfind("vertices:", 0) == 0) {
      for (auto& v : split_names(line.substr(9))) ensure(v);
      continue;
    }
    // Longest operator first so "<->" is not read as "->".
    std::size_t pos = std::string::npos;
    std::string op;
    for (const char* candidate : {"<->", "->", "--"}) {
      pos = line.find(candidate);
      if (pos != std::string::npos) {
        op = candidate;
        break;
      }
    }
    if (pos == std::string::npos) {
      for (auto& v : split_names(line)) ensure(v);
      continue;
    }
    const std::string a = trim(line.substr(0, pos));
    const std::string b = trim(line.substr(pos + op.size()));
    if (a.empty() || b.empty()) throw Error(ErrorCode::malformed, "bad edge line: " + line);
    ensure(a);
    ensure(b);
    // Fixed status must be known before edges are validated; defer edges by
    // rebuilding below.
    g.add_edge(parse_edge_kind(op), a, b);
  }
  if (fixed_later.empty()) return g;
  MixedGraph out;
  for (const auto& v : fixed_later) {
    if (!g.contains(v)) g.add_vertex(v);
  }
  for (const auto& v : g.vertices())
    out.add_vertex(v, std::find(fixed_later.begin(), fixed_later.end(), v) != fixed_later.end());
  for (const auto& e : g.edges()) out.add_edge(e.kind, e.a, e.b);
  return out;
}

std::string graph_to_json(const MixedGraph& g, int indent) {
  nlohmann::json doc;
  doc["vertices"] = g.vertices();
  doc["fixed"] = g.fixed();
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges()) doc["edges"].push_back({{"kind", to_string(e.kind)}, {"a", e.a}, {"b", e.b}});
  return doc.dump(indent);
}

std::string graph_to_text(const MixedGraph& g) {
  std::ostringstream out;
  out << "vertices:";
  for (const auto& v : g.vertices()) out << ' ' << v;
  out << '\n';
  const auto fixed = g.fixed();
  if (!fixed.empty()) {
    out << "fixed:";
    for (const auto& v : fixed) out << ' ' << v;
    out << '\n';
  }
  for (const auto& e : g.edges()) {
    const char* op = e.kind == EdgeKind::directed ? "->" : e.kind == EdgeKind::bidirected ? "<->" : "--";
    out << e.a << ' ' << op << ' ' << e.b << '\n';
  }
  return out.str();
}

}  // namespace sgid
