#include <memory>

#include "json.hpp"
#include "sgid/identify.hpp"

namespace sgid {

using nlohmann::json;

namespace {

json expr_json(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::one: return json{{"one", true}};
    case Expr::Kind::cond: return json{{"p", {{"target", e->target}, {"given", e->given}}}};
    case Expr::Kind::prod: {
      json terms = json::array();
      for (const auto& t : e->terms) terms.push_back(expr_json(t));
      return json{{"prod", terms}};
    }
    case Expr::Kind::sum: return json{{"sum", {{"vars", e->vars}, {"body", expr_json(e->body)}}}};
    case Expr::Kind::quot: return json{{"quot", {{"num", expr_json(e->num)}, {"den", expr_json(e->den)}}}};
  }
  return json();
}

ExprPtr expr_from(const json& j, const ExprBuilder& b) {
  if (j.contains("one")) return b.one();
  if (j.contains("p")) {
    return b.cond(j.at("p").at("target").get<VertexSet>(), j.at("p").value("given", VertexSet{}));
  }
  if (j.contains("prod")) {
    std::vector<ExprPtr> terms;
    for (const auto& t : j.at("prod")) terms.push_back(expr_from(t, b));
    return b.prod(std::move(terms));
  }
  if (j.contains("sum")) return b.sum(j.at("sum").at("vars").get<VertexSet>(), expr_from(j.at("sum").at("body"), b));
  if (j.contains("quot")) return b.quot(expr_from(j.at("quot").at("num"), b), expr_from(j.at("quot").at("den"), b));
  throw Error(ErrorCode::malformed, "unknown expression node " + j.dump());
}

void check_names(const MixedGraph& g, const VertexSet& s) {
  for (const auto& v : s)
    if (!g.contains(v)) throw Error(ErrorCode::unknown_vertex, v);
}

}  // namespace

std::string functional_to_json(const Functional& f, int indent) {
  json doc;
  doc["outcome"] = f.outcome;
  doc["treatment"] = f.treatment;
  doc["restrict"] = f.restrict;
  doc["ystar"] = f.ystar;
  doc["sum_over"] = f.sum_over;
  doc["simplified"] = f.simplified;
  doc["base_definition"] = {{"kernel", "qD"},
                            {"random", f.base_random},
                            {"given", f.base_given},
                            {"divided_blocks", f.base_blocks}};
  doc["districts"] = json::array();
  for (const auto& d : f.districts) {
    json t{{"district", d.district}, {"fix", d.program.sequence}, {"base", "qD"}, {"given", d.given}};
    if (d.expr) t["expr"] = expr_json(d.expr);
    doc["districts"].push_back(std::move(t));
  }
  doc["blocks"] = json::array();
  for (const auto& b : f.blocks) {
    doc["blocks"].push_back({{"target", b.target},
                             {"given", b.given},
                             {"averaged", b.averaged},
                             {"summed", b.summed},
                             {"treated", b.treated}});
  }
  doc["graph"] = json::parse(graph_to_json(f.graph, -1));
  doc["cadmg"] = json::parse(graph_to_json(f.cadmg, -1));
  doc["text"] = render_functional(f);
  return doc.dump(indent);
}

Functional parse_functional(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    Functional f;
    f.graph = parse_graph(doc.at("graph").dump());
    f.cadmg = parse_graph(doc.at("cadmg").dump());
    f.outcome = doc.at("outcome").get<VertexSet>();
    f.restrict = doc.at("restrict").get<Assignment>();
    for (const auto& [k, v] : f.restrict) f.treatment.push_back(k);
    f.treatment = f.graph.ordered(f.treatment);
    f.ystar = doc.at("ystar").get<VertexSet>();
    f.sum_over = doc.at("sum_over").get<VertexSet>();
    f.simplified = doc.value("simplified", false);
    const json& base = doc.at("base_definition");
    f.base_random = base.at("random").get<VertexSet>();
    f.base_given = base.at("given").get<VertexSet>();
    f.base_blocks = base.at("divided_blocks").get<std::vector<VertexSet>>();
    for (const auto* s : {&f.outcome, &f.ystar, &f.sum_over, &f.base_random, &f.base_given}) check_names(f.graph, *s);

    const ExprBuilder b(f.graph);
    for (const auto& t : doc.at("districts")) {
      DistrictTerm d;
      d.district = t.at("district").get<VertexSet>();
      d.given = t.at("given").get<VertexSet>();
      // Replaying the sequence validates it against the CADMG.
      const VertexSet seq = t.at("fix").get<VertexSet>();
      MixedGraph cur = f.cadmg;
      for (const auto& v : seq) cur = fix_vertex(cur, v);
      d.program = FixProgram{t.value("base", std::string("qD")), seq, cur};
      if (t.contains("expr")) d.expr = expr_from(t.at("expr"), b);
      f.districts.push_back(std::move(d));
    }
    for (const auto& t : doc.at("blocks")) {
      BlockTerm bt;
      bt.target = t.at("target").get<VertexSet>();
      bt.given = t.at("given").get<VertexSet>();
      bt.averaged = t.value("averaged", VertexSet{});
      bt.summed = t.value("summed", VertexSet{});
      bt.treated = t.value("treated", Assignment{});
      f.blocks.push_back(std::move(bt));
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::malformed, e.what());
  }
}

std::string failure_to_json(const NotIdentified& w, int indent) {
  json doc{{"identified", false}, {"district", w.district}, {"stuck", w.stuck}, {"witness", w.witness}};
  return doc.dump(indent);
}

}  // namespace sgid
