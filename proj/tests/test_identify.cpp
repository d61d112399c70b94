#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>

#include "eq2_oracle.hpp"
#include "fixtures.hpp"
#include "random_models.hpp"
#include "sgid/cg_model.hpp"
#include "sgid/identify.hpp"
#include "sgid/projection.hpp"
#include "sgid/separation.hpp"

using namespace sgid;
using sgid::testing::load_fixture;
using sgid::testing::Rng;

namespace {

std::set<std::string> as_set(const VertexSet& v) { return {v.begin(), v.end()}; }

double max_diff(const Factor& a, const Factor& b) {
  const Factor br = b.reorder(a.names());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.table()[i] - br.table()[i]));
  return d;
}

std::set<std::string> keys(const std::vector<ExprPtr>& terms) {
  std::set<std::string> out;
  for (const auto& t : terms) out.insert(expr_key(t));
  return out;
}

// Conditioning sets of every conditional whose target is exactly `target`.
void find_given(const ExprPtr& e, const VertexSet& target, std::vector<VertexSet>& out) {
  if (!e) return;
  switch (e->kind) {
    case Expr::Kind::cond:
      if (e->target == target) out.push_back(e->given);
      break;
    case Expr::Kind::prod:
      for (const auto& t : e->terms) find_given(t, target, out);
      break;
    case Expr::Kind::sum:
      find_given(e->body, target, out);
      break;
    case Expr::Kind::quot:
      find_given(e->num, target, out);
      find_given(e->den, target, out);
      break;
    case Expr::Kind::one:
      break;
  }
}

std::vector<VertexSet> given_sets(const Functional& f, const VertexSet& target) {
  std::vector<VertexSet> out;
  for (const auto& d : f.districts) find_given(d.expr, target, out);
  return out;
}

struct Instance {
  MixedGraph sg;
  CgModel model;
  TabularDist p;  ///< observed margin
};

Instance random_instance(Rng& rng, std::size_t observed, std::size_t hidden, std::size_t max_block) {
  const auto h = sgid::testing::random_hidden_cg(rng, observed, hidden, max_block);
  Instance out{segregated_projection(h.graph, h.hidden), sgid::testing::random_cg_model(rng, h.graph), {}};
  out.p = joint_from_cg(out.model).marginalize(h.hidden);
  return out;
}

// Every valid order of fixing `s`, stopping at the first that completes.
bool some_order_fixes(const MixedGraph& g, const std::set<std::string>& s) {
  if (s.empty()) return true;
  for (const auto& v : s) {
    if (!is_fixable(g, v)) continue;
    std::set<std::string> rest = s;
    rest.erase(v);
    if (some_order_fixes(fix_vertex(g, v), rest)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("induced CADMG and CCG of fig1c") {
  const auto [gd, gb] = induced_cadmg_and_ccg(load_fixture("fig1c.json"));
  CHECK(as_set(gd.fixed()) == std::set<std::string>{"M1", "M2"});
  CHECK(gd.random().size() == 6);
  CHECK(gd.count_edges(EdgeKind::bidirected) == 2);
  CHECK(gd.count_edges(EdgeKind::undirected) == 0);
  CHECK(as_set(gb.random()) == std::set<std::string>{"M1", "M2"});
  CHECK(as_set(gb.fixed()) ==
        std::set<std::string>{"A1", "A2", "C1", "C2"});
  CHECK(gb.count_edges(EdgeKind::undirected) == 1);

  const MixedGraph fd = load_fixture("frontdoor.json");
  const auto [fd_d, fd_b] = induced_cadmg_and_ccg(fd);
  CHECK(fd_d == fd);
  CHECK(fd_b.empty());

  const MixedGraph ug = parse_graph_text("X -- Y\nY -- Z\n");
  const auto [ug_d, ug_b] = induced_cadmg_and_ccg(ug);
  CHECK(ug_d.empty());
  CHECK(ug_b == ug);
}

TEST_CASE("fig1c: simplified functional has the four expected factors") {
  const auto start = std::chrono::steady_clock::now();
  const MixedGraph g = load_fixture("fig1c.json");
  const IdResult r = identify(g, {"Y2"}, {{"A1", 1}, {"A2", 1}});
  REQUIRE(r.identified());
  const Functional s = simplify(*r.functional);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 1.0);

  const ExprBuilder b(g);
  const std::vector<ExprPtr> expected{
      b.cond({"M1", "M2"}, {"A1", "A2", "C1", "C2"}),
      b.sum({"A2"}, b.prod({b.cond({"Y2"}, {"A1", "A2", "M2", "C2"}), b.cond({"A2"}, {"C2"})})),
      b.cond({"C1"}, {}),
      b.cond({"C2"}, {}),
  };
  CHECK(keys(functional_terms(s)) == keys(expected));
  CHECK(std::set<std::string>(s.sum_over.begin(), s.sum_over.end()) ==
        std::set<std::string>{"C1", "C2", "M1", "M2"});
  CHECK(render_functional(s) ==
        "Σ_{C1,M1,C2,M2} p(M1,M2 | C1,a1,C2,a2) p(C1) p(C2) [Σ_{A2} p(A2 | C2) p(Y2 | a1,C2,A2,M2)]");
}

TEST_CASE("fig1c: simplification drops M1 and C1 from the outcome conditional") {
  const MixedGraph g = load_fixture("fig1c.json");
  const Functional f = *identify(g, {"Y2"}, {{"A1", 1}, {"A2", 1}}).functional;
  const auto before = given_sets(f, {"Y2"});
  const auto after = given_sets(simplify(f), {"Y2"});
  REQUIRE(before.size() == 1);
  REQUIRE(after.size() == 1);
  const std::set<std::string> b(before[0].begin(), before[0].end());
  for (const char* v : {"A1", "A2", "M1", "M2", "C1", "C2"}) CHECK(b.count(v) == 1);
  CHECK(std::set<std::string>(after[0].begin(), after[0].end()) == std::set<std::string>{"A1", "A2", "M2", "C2"});
}

TEST_CASE("simplification is a fixpoint on already minimal functionals") {
  const MixedGraph g = load_fixture("fig1c.json");
  const Functional once = simplify(*identify(g, {"Y2"}, {{"A1", 1}, {"A2", 1}}).functional);
  const Functional twice = simplify(once);
  CHECK(keys(functional_terms(once)) == keys(functional_terms(twice)));
}

TEST_CASE("fig1c evaluates to the truncated factorization of the generating model") {
  Rng rng(1);
  const MixedGraph ga = load_fixture("fig1a.json");
  const MixedGraph g = load_fixture("fig1c.json");
  for (int t = 0; t < 10; ++t) {
    const CgModel m = sgid::testing::random_cg_model(rng, ga);
    const TabularDist p = joint_from_cg(m).marginalize({"U1", "U2"});
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int a2 = 0; a2 < 2; ++a2) {
        const Assignment a{{"A1", a1}, {"A2", a2}};
        const Functional f = *identify(g, {"Y2"}, a).functional;
        const Factor truth = cg_truncated_oracle(m, a, {"Y2"}).factor();
        CHECK(max_diff(truth, evaluate_functional(f, p).factor()) <= 1e-10);
        CHECK(max_diff(truth, evaluate_functional(simplify(f), p).factor()) <= 1e-10);
      }
    }
  }
}

TEST_CASE("the bow is not identified") {
  const IdResult r = identify(load_fixture("bow.json"), {"Y"}, {{"A", 1}});
  REQUIRE_FALSE(r.identified());
  CHECK(r.failure->district == VertexSet{"Y"});
  CHECK(std::set<std::string>(r.failure->witness.begin(), r.failure->witness.end()) ==
        std::set<std::string>{"A", "Y"});

  // Bow embedded in larger graphs.
  CHECK_FALSE(identify(parse_graph_text("C -> A\nA -> Y\nA <-> Y\nC -> Y\n"), {"Y"}, {{"A", 0}}).identified());
  CHECK_FALSE(identify(parse_graph_text("A -> M\nM -> Y\nA <-> M\n"), {"Y"}, {{"A", 1}}).identified());
}

TEST_CASE("front door matches the hand formula") {
  Rng rng(2);
  const MixedGraph fd = load_fixture("frontdoor.json");
  for (int t = 0; t < 30; ++t) {
    const TabularDist p = sgid::testing::random_joint(rng, {"A", "M", "Y"});
    const Factor& pf = p.factor();
    for (int a = 0; a < 2; ++a) {
      const Functional f = *identify(fd, {"Y"}, {{"A", a}}).functional;
      const Factor got = evaluate_functional(f, p).factor();
      double y1 = 0.0;
      for (int m = 0; m < 2; ++m) {
        const double p_m = pf.keep_only({"A", "M"}).at({{"A", a}, {"M", m}}) / pf.keep_only({"A"}).at({{"A", a}});
        double inner = 0.0;
        for (int ap = 0; ap < 2; ++ap) {
          inner += pf.at({{"A", ap}, {"M", m}, {"Y", 1}}) / pf.keep_only({"A", "M"}).at({{"A", ap}, {"M", m}}) *
                   pf.keep_only({"A"}).at({{"A", ap}});
        }
        y1 += p_m * inner;
      }
      CHECK(got.at({{"Y", 1}}) == doctest::Approx(y1).epsilon(1e-12));
      CHECK(got.at({{"Y", 0}}) == doctest::Approx(1.0 - y1).epsilon(1e-12));
    }
  }
}

TEST_CASE("identified random queries match the oracle along every evaluation path") {
  Rng rng(3);
  std::size_t identified = 0, refused = 0;
  for (int t = 0; t < 150; ++t) {
    const Instance inst = random_instance(rng, 3 + t % 5, 1 + t % 2, 3);
    const auto q = sgid::testing::random_query(rng, inst.sg.vertices());
    const IdResult r = identify(inst.sg, q.outcome, q.treatment);
    if (!r.identified()) {
      ++refused;
      continue;
    }
    ++identified;
    const Factor truth = cg_truncated_oracle(inst.model, q.treatment, q.outcome).factor();
    const Functional& f = *r.functional;
    const Functional s = simplify(f);
    EvalOptions program, expr, reversed;
    program.path = DistrictPath::program;
    expr.path = DistrictPath::expr;
    reversed.reverse_terms = true;
    const Factor base = evaluate_functional(f, inst.p, program).factor();
    CHECK(max_diff(truth, base) <= 1e-8);
    CHECK(max_diff(base, evaluate_functional(f, inst.p, expr).factor()) <= 1e-10);
    CHECK(max_diff(base, evaluate_functional(f, inst.p, reversed).factor()) <= 1e-10);
    CHECK(max_diff(base, evaluate_functional(s, inst.p).factor()) <= 1e-10);

    // Normalization for every treatment value.
    const TabularDist k = evaluate_kernel(s, inst.p);
    CHECK(k.normalization_error() <= 1e-10);
    for (double x : k.factor().table()) CHECK(x >= 0.0);

    // Every variable in a term lies in Y* ∪ A.
    VertexSet allowed = f.ystar;
    for (const auto& [v, value] : q.treatment) allowed.push_back(v);
    for (const auto& term : functional_terms(s))
      for (const auto& v : free_variables(term, inst.sg)) {
        INFO(graph_to_text(inst.sg) << "\nterm variable " << v << " in " << render_functional(s));
        CHECK(std::find(allowed.begin(), allowed.end(), v) != allowed.end());
      }
  }
  CHECK(identified > 30);
  CHECK(refused > 5);
}

TEST_CASE("witness districts are unreachable under every fixing order") {
  Rng rng(4);
  std::size_t seen = 0;
  for (int t = 0; t < 300 && seen < 40; ++t) {
    const Instance inst = random_instance(rng, 3 + t % 5, 1 + t % 2, 3);
    const auto q = sgid::testing::random_query(rng, inst.sg.vertices());
    const IdResult r = identify(inst.sg, q.outcome, q.treatment, {false});
    if (r.identified()) continue;
    ++seen;
    const MixedGraph gd = induced_cadmg_and_ccg(inst.sg).first;
    std::set<std::string> rest;
    for (const auto& v : gd.random())
      if (std::find(r.failure->district.begin(), r.failure->district.end(), v) == r.failure->district.end())
        rest.insert(v);
    CHECK_FALSE(some_order_fixes(gd, rest));
  }
  CHECK(seen > 10);
}

TEST_CASE("ADMG queries agree with a standalone implementation of the ADMG formula") {
  Rng rng(5);
  std::size_t identified = 0;
  for (int t = 0; t < 120; ++t) {
    const auto h = sgid::testing::random_hidden_dag(rng, 3 + t % 5, 1 + t % 2);
    const MixedGraph admg = latent_projection(h.graph, h.hidden);
    const TabularDist p = joint_from_cg(sgid::testing::random_cg_model(rng, h.graph)).marginalize(h.hidden);
    const auto q = sgid::testing::random_query(rng, admg.vertices());
    const IdResult r = identify(admg, q.outcome, q.treatment);
    const auto reference = sgid::testing::eq2_identify(admg, q.outcome, q.treatment, p);
    CHECK(r.identified() == reference.has_value());
    if (!r.identified() || !reference) continue;
    ++identified;
    CHECK(max_diff(*reference, evaluate_functional(*r.functional, p).factor()) <= 1e-10);
  }
  CHECK(identified > 30);
}

TEST_CASE("functional JSON round trip evaluates identically") {
  Rng rng(6);
  const MixedGraph g = load_fixture("fig1c.json");
  const CgModel m = sgid::testing::random_cg_model(rng, load_fixture("fig1a.json"));
  const TabularDist p = joint_from_cg(m).marginalize({"U1", "U2"});
  for (bool simp : {false, true}) {
    Functional f = *identify(g, {"Y2"}, {{"A1", 1}, {"A2", 0}}).functional;
    if (simp) f = simplify(f);
    const Functional back = parse_functional(functional_to_json(f));
    CHECK(back.simplified == f.simplified);
    CHECK(keys(functional_terms(back)) == keys(functional_terms(f)));
    CHECK(evaluate_functional(back, p).factor().table() == evaluate_functional(f, p).factor().table());
  }
  CHECK_THROWS_AS(parse_functional("{}"), Error);
}

TEST_CASE("degenerate point mass under the zero-tolerant policy") {
  const MixedGraph g = parse_graph_text("C -> A\nA -> Y\nC -> Y\n");
  std::vector<double> table(8, 0.0);
  table[7] = 1.0;  // C = A = Y = 1
  const TabularDist p(Factor({{"C", 2}, {"A", 2}, {"Y", 2}}, table), {});
  const Functional f = *identify(g, {"Y"}, {{"A", 1}}).functional;
  EvalOptions relaxed;
  relaxed.policy = ZeroPolicy::allow_zeros;
  const Factor r = evaluate_functional(f, p, relaxed).factor();
  CHECK(r.at({{"Y", 1}}) == 1.0);
  CHECK(r.at({{"Y", 0}}) == 0.0);
  CHECK_THROWS_AS(evaluate_functional(f, p), Error);
}

TEST_CASE("bad queries are rejected") {
  const MixedGraph g = load_fixture("fig1c.json");
  CHECK_THROWS_AS(identify(g, {"Y2"}, {{"Y2", 1}}), Error);
  CHECK_THROWS_AS(identify(g, {"Q"}, {{"A1", 1}}), Error);
  CHECK_THROWS_AS(identify(g, {}, {{"A1", 1}}), Error);
  CHECK_THROWS_AS(identify(parse_graph_text("X <-> Y\nY -- Z\n"), {"X"}, {{"Z", 1}}), Error);
}
