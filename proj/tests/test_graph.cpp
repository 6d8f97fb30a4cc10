#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "gevo/graph.hpp"

using namespace gevo;

namespace {

const char* kExprGrammar = R"(<start> ::= <expr>
<expr> ::= <number> "+" <expr> | <number>
<number> ::= "0" | <non_zero> <digit>*
<non_zero> ::= "1" | "2" | "3" | "4" | "5" | "6" | "7" | "8" | "9"
<digit> ::= "0" | <non_zero>
)";

GrammarGraph expr_graph() { return build_graph(parse_grammar(kExprGrammar)); }

}  // namespace

TEST_CASE("expr rule expands into the expected subgraph") {
  GrammarGraph g = expr_graph();
  // deterministic numbering: rule order, then pre-order within a rule
  CHECK(g.nodes[0].kind == NodeKind::Head);
  CHECK(g.nodes[0].rule == "start");
  auto expr_head = g.head_of("expr");
  REQUIRE(expr_head.has_value());
  CHECK(*expr_head == 1);

  // <expr> body: alternation of arity 2, variant 0 a concatenation of
  // <number> "+" <expr>
  const auto expr_kids = g.children(1);
  REQUIRE(expr_kids.size() == 1);
  const std::uint32_t alt = expr_kids[0];
  CHECK(g.nodes[alt].kind == NodeKind::Alt);
  const auto alt_kids = g.children(alt);
  REQUIRE(alt_kids.size() == 2);
  const std::uint32_t concat = alt_kids[0];
  CHECK(g.nodes[concat].kind == NodeKind::Concat);
  const auto concat_kids = g.children(concat);
  REQUIRE(concat_kids.size() == 3);
  CHECK(concat_kids[0] == *g.head_of("number"));
  CHECK(g.nodes[concat_kids[1]].kind == NodeKind::Terminal);
  CHECK(g.nodes[concat_kids[1]].literal == "+");
  CHECK(concat_kids[2] == 1);  // back to <expr>'s head
  CHECK(alt_kids[1] == *g.head_of("number"));
}

TEST_CASE("trivial grammar builds two nodes") {
  GrammarGraph g = build_graph(parse_grammar("<a> ::= \"x\"\n"));
  REQUIRE(g.nodes.size() == 2);
  CHECK(g.nodes[0].kind == NodeKind::Head);
  CHECK(g.nodes[1].kind == NodeKind::Terminal);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].index == 0);
}

TEST_CASE("full expr graph matches the merged-graph shape") {
  GrammarGraph g = expr_graph();
  // 5 heads, 4 alternations, 2 concats, 1 star, 12 terminals
  CHECK(g.nodes.size() == 24);
  std::size_t heads = 0, alts = 0, concats = 0, stars = 0, terms = 0;
  for (const auto& n : g.nodes) {
    switch (n.kind) {
      case NodeKind::Head: ++heads; break;
      case NodeKind::Alt: ++alts; break;
      case NodeKind::Concat: ++concats; break;
      case NodeKind::Star: ++stars; break;
      case NodeKind::Terminal: ++terms; break;
      default: break;
    }
  }
  CHECK(heads == 5);
  CHECK(alts == 4);
  CHECK(concats == 2);
  CHECK(stars == 1);
  CHECK(terms == 12);
  // contiguous child-index labels on every node's out-edges
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    const auto& out = g.nodes[i].out;
    for (std::uint32_t k = 0; k < out.size(); ++k) {
      CHECK(g.edges[out[k]].index == k);
    }
  }
}

TEST_CASE("indirection marks exactly the expr-recursion edge and the star edge") {
  GrammarGraph g = mark_indirection(expr_graph());
  std::set<std::pair<std::uint32_t, std::uint32_t>> indirect;
  for (const auto& e : g.edges) {
    if (e.indirect) indirect.insert({e.src, e.dst});
  }
  REQUIRE(indirect.size() == 2);
  // expr's concat (node 3) back to <expr> (node 1), carrying child index 2
  CHECK(indirect.count({3, 1}) == 1);
  for (const auto& e : g.edges) {
    if (e.src == 3 && e.dst == 1) CHECK(e.index == 2);
  }
  // the star's inner edge to <digit>
  const std::uint32_t digit = *g.head_of("digit");
  std::uint32_t star = 0;
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].kind == NodeKind::Star) star = i;
  }
  CHECK(indirect.count({star, digit}) == 1);
  CHECK(topo_order_direct(g).has_value());
}

TEST_CASE("acyclic grammars mark no non-repetition edges") {
  GrammarGraph g = mark_indirection(build_graph(parse_grammar("<a> ::= \"x\" | \"y\"\n")));
  for (const auto& e : g.edges) CHECK_FALSE(e.indirect);
}

TEST_CASE("mutual recursion marks exactly one non-repetition edge") {
  GrammarGraph g =
      mark_indirection(build_graph(parse_grammar("<a> ::= <b> \"x\" | \"y\"\n<b> ::= <a>\n")));
  std::size_t marked = 0;
  for (const auto& e : g.edges) marked += e.indirect;
  CHECK(marked == 1);
  CHECK(topo_order_direct(g).has_value());
  // deterministic across runs
  GrammarGraph g2 =
      mark_indirection(build_graph(parse_grammar("<a> ::= <b> \"x\" | \"y\"\n<b> ::= <a>\n")));
  CHECK(g == g2);
}

TEST_CASE("self loops are marked") {
  GrammarGraph g = mark_indirection(build_graph(parse_grammar("<a> ::= <a>\n")));
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].indirect);
  CHECK(topo_order_direct(g).has_value());
}

TEST_CASE("k-path enumeration on a tiny grammar") {
  GrammarGraph g = build_graph(parse_grammar("<a> ::= \"x\"\n"));
  auto paths = enumerate_k_paths(g, 2);
  // {[head], [terminal], [head, terminal]}
  REQUIRE(paths.size() == 3);
  std::set<std::vector<std::uint32_t>> set(paths.begin(), paths.end());
  CHECK(set.count({0}) == 1);
  CHECK(set.count({1}) == 1);
  CHECK(set.count({0, 1}) == 1);
}

TEST_CASE("k=1 gives one path per node; k=2 adds one per distinct edge pair") {
  GrammarGraph g = expr_graph();
  CHECK(enumerate_k_paths(g, 1).size() == g.nodes.size());

  // brute force: distinct (src,dst) pairs, excluding self loops
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& e : g.edges) {
    if (e.src != e.dst) pairs.insert({e.src, e.dst});
  }
  CHECK(enumerate_k_paths(g, 2).size() == g.nodes.size() + pairs.size());
}

TEST_CASE("k-path sets are monotone in k") {
  GrammarGraph g = expr_graph();
  std::size_t prev = 0;
  for (std::uint32_t k = 1; k <= 5; ++k) {
    auto paths = enumerate_k_paths(g, k);
    CHECK(paths.size() >= prev);
    prev = paths.size();
    for (const auto& p : paths) {
      CHECK(p.size() <= k);
      std::set<std::uint32_t> uniq(p.begin(), p.end());
      CHECK(uniq.size() == p.size());  // simple walks only
    }
  }
}

TEST_CASE("dot export styles indirect edges dashed") {
  GrammarGraph g = mark_indirection(expr_graph());
  const std::string dot = to_dot(g);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("style=dashed") != std::string::npos);
  CHECK(dot.find("0..") != std::string::npos);  // star edge label
}

TEST_CASE("graph construction is deterministic") {
  CHECK(expr_graph() == expr_graph());
}
