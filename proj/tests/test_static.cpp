#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gevo_gen/csv.gen.hpp>
#include <gevo_gen/expr.gen.hpp>

#include "gevo/backend.hpp"
#include "gevo/codegen.hpp"
#include "gevo/corpus.hpp"
#include "gevo/grammar.hpp"
#include "gevo/refparse.hpp"

using namespace gevo;
namespace ge = gevo_gen::expr;
namespace gc = gevo_gen::csv;

namespace {

std::string read_grammar(const std::string& name) {
  const char* dir = std::getenv("GEVO_GRAMMAR_DIR");
  REQUIRE(dir != nullptr);
  std::ifstream in(std::string(dir) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

template <class G>
typename G::Start scripted_tree(std::vector<std::uint32_t> alts, std::vector<std::uint32_t> reps) {
  ScriptedSampler s(std::move(alts), std::move(reps));
  std::tuple<> chain;
  auto r = gen_node<typename G::Start>(s, chain);
  REQUIRE(r.ok());
  REQUIRE(s.exhausted());
  return std::move(r).value();
}

}  // namespace

TEST_CASE("embedded graph equals the graph rebuilt from the grammar file") {
  GrammarGraph rebuilt = mark_indirection(build_graph(parse_grammar(read_grammar("expr.gbnf"))));
  CHECK(ge::Types::graph() == rebuilt);
  GrammarGraph csv_rebuilt =
      mark_indirection(build_graph(parse_grammar(read_grammar("csv.gbnf"))));
  CHECK(gc::Types::graph() == csv_rebuilt);
}

TEST_CASE("emission is deterministic and matches on a rebuilt graph") {
  GrammarGraph g1 = mark_indirection(build_graph(parse_grammar(read_grammar("expr.gbnf"))));
  GrammarGraph g2 = mark_indirection(build_graph(parse_grammar(read_grammar("expr.gbnf"))));
  EmitContext ctx{"expr", ""};
  CHECK(emit_header(g1, ctx) == emit_header(g2, ctx));
  CHECK(emit_types(g1, ctx) == emit_types(g2, ctx));
  CHECK(emit_opaque(g1, ctx) == emit_opaque(g2, ctx));
  CHECK(emit_node_contract(g1, ctx) == emit_node_contract(g2, ctx));
}

TEST_CASE("manifest lists type names against node ids") {
  GrammarGraph g = mark_indirection(build_graph(parse_grammar(read_grammar("expr.gbnf"))));
  const std::string manifest = emit_manifest(g, EmitContext{"expr", ""});
  CHECK(manifest.find("\"expr_alt_2\"") != std::string::npos);
  CHECK(manifest.find("\"digit_head_21\"") != std::string::npos);
  CHECK(manifest.find("\"start_node\": 0") != std::string::npos);
}

TEST_CASE("definition() exposes the grammar entry") {
  constexpr NodeDef plus = ge::expr_terminal_4::definition();
  CHECK(plus.kind == NodeKind::Terminal);
  CHECK(plus.literal == "+");
  CHECK(plus.rule == "expr");
  constexpr NodeDef alt = ge::expr_alt_2::definition();
  CHECK(alt.kind == NodeKind::Alt);
  CHECK(alt.arity == 2);
  constexpr NodeDef star = ge::number_star_9::definition();
  CHECK(star.rep_lo == 0);
  CHECK(star.rep_hi == 0);
}

TEST_CASE("scripted static generation mirrors the dynamic examples") {
  auto zero = scripted_tree<ge::Types>({1, 0}, {});
  CHECK(serialize_tree(SRef(&zero)) == "0");
  CHECK(count_symbol_nodes(SRef(&zero)) == 4);

  auto t = scripted_tree<ge::Types>({0, 1, 0, 1, 1, 1, 1, 2}, {1, 0});
  CHECK(serialize_tree(SRef(&t)) == "12+3");
}

TEST_CASE("opaque round trip: downcast(upcast(x)) == x, wrong type yields nothing") {
  auto t = scripted_tree<ge::Types>({0, 1, 0, 1, 1, 1, 1, 2}, {1, 0});
  // every node: downcasting its opaque view to its own type returns itself
  auto paths = all_node_paths(SRef(&t));
  for (const auto& p : paths) {
    auto at = resolve_path(SRef(&t), p);
    REQUIRE(at.ok());
    const ARef<ge::Types> ref = at.value();
    std::visit(
        [&](auto* ptr) {
          using X = std::remove_cvref_t<std::remove_pointer_t<decltype(ptr)>>;
          const X* back = ge::downcast<X>(ref);
          CHECK(back == ptr);
        },
        ref.raw());
  }
  // mismatched downcast yields nothing
  const ge::digit_head_21* digit = nullptr;
  for (const auto& p : paths) {
    auto at = resolve_path(SRef(&t), p);
    if (auto* d = ge::downcast<ge::digit_head_21>(at.value())) digit = d;
  }
  REQUIRE(digit != nullptr);
  ARef<ge::Types> as_opaque(digit->opaque());
  CHECK(ge::downcast<ge::expr_head_1>(as_opaque) == nullptr);
  CHECK(ge::downcast<ge::digit_head_21>(as_opaque) == digit);
}

TEST_CASE("mutate regenerates exactly the addressed subtree") {
  StaticBackend<ge::Types> backend;
  auto t = scripted_tree<ge::Types>({0, 1, 0, 1, 1, 1, 1, 2}, {1, 0});
  const std::uint32_t number = *ge::Types::graph().head_of("number");
  auto numbers = find_same_type_subtrees(SRef(&t), number);
  REQUIRE(numbers.size() == 2);
  // regenerate the second <number> as "7": variant 1, nonzero "7", empty star
  ScriptedSampler s({1, 6}, {0});
  REQUIRE(backend.mutate(t, numbers[1], s).ok());
  CHECK(serialize_tree(SRef(&t)) == "12+7");

  auto bad = backend.mutate(t, NodePath{9, 9}, s);
  CHECK(!bad.ok());
}

TEST_CASE("mutating the root is equivalent to fresh generation") {
  StaticBackend<ge::Types> backend;
  RandomSampler s1(77), s2(77);
  auto t = backend.generate(s1);
  REQUIRE(t.ok());
  // a fresh tree from the same seed state
  auto expect = backend.generate(s2);
  REQUIRE(expect.ok());
  RandomSampler s3(123), s4(123);
  REQUIRE(backend.mutate(t.value(), NodePath{}, s3).ok());
  auto fresh = backend.generate(s4);
  REQUIRE(fresh.ok());
  CHECK(StaticBackend<ge::Types>::serialize(t.value()) ==
        StaticBackend<ge::Types>::serialize(fresh.value()));
}

TEST_CASE("crossover swaps same-typed subtrees between parents") {
  StaticBackend<ge::Types> backend;
  // parents "1+2" and "3"
  auto p1 = scripted_tree<ge::Types>({0, 1, 0, 1, 1, 1}, {0, 0});
  CHECK(serialize_tree(SRef(&p1)) == "1+2");
  auto p2 = scripted_tree<ge::Types>({1, 1, 2}, {0});
  CHECK(serialize_tree(SRef(&p2)) == "3");

  const std::uint32_t number = *ge::Types::graph().head_of("number");
  auto numbers = find_same_type_subtrees(SRef(&p1), number);
  REQUIRE(numbers.size() == 2);
  ScriptedSampler pick({0}, {});  // one candidate in parent2; index 0
  auto res = backend.crossover(p1, numbers[0], p2, pick);
  REQUIRE(res.ok());
  CHECK(res.value().swapped);
  CHECK(serialize_tree(SRef(&p1)) == "3+2");
  CHECK(serialize_tree(SRef(&p2)) == "1");
}

TEST_CASE("crossover without a candidate leaves parents unchanged") {
  StaticBackend<ge::Types> backend;
  auto p1 = scripted_tree<ge::Types>({0, 1, 0, 1, 1, 1}, {0, 0});  // "1+2"
  auto p2 = scripted_tree<ge::Types>({1, 0}, {});                  // "0"
  // path to the "+" terminal: parent2 has no "+" node
  const std::uint32_t plus_id = ge::expr_terminal_4::definition().id;
  auto pluses = find_same_type_subtrees(SRef(&p1), plus_id);
  REQUIRE(pluses.size() == 1);
  ScriptedSampler none({}, {});
  auto res = backend.crossover(p1, pluses[0], p2, none);
  REQUIRE(res.ok());
  CHECK_FALSE(res.value().swapped);
  CHECK(serialize_tree(SRef(&p1)) == "1+2");
  CHECK(serialize_tree(SRef(&p2)) == "0");
}

TEST_CASE("crossover at the root swaps whole trees") {
  StaticBackend<ge::Types> backend;
  auto p1 = scripted_tree<ge::Types>({1, 0}, {});      // "0"
  auto p2 = scripted_tree<ge::Types>({1, 1, 4}, {0});  // "5"
  ScriptedSampler pick({0}, {});
  auto res = backend.crossover(p1, NodePath{}, p2, pick);
  REQUIRE(res.ok());
  CHECK(res.value().swapped);
  CHECK(serialize_tree(SRef(&p1)) == "5");
  CHECK(serialize_tree(SRef(&p2)) == "0");
}

TEST_CASE("static and dynamic backends agree on 500 seeds for expr and csv") {
  {
    StaticBackend<ge::Types> st;
    DynBackend dy(ge::Types::graph());
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      RandomSampler s1(seed), s2(seed);
      auto a = st.generate(s1);
      auto b = dy.generate(s2);
      REQUIRE(a.ok());
      REQUIRE(b.ok());
      REQUIRE(StaticBackend<ge::Types>::serialize(a.value()) == dyn_serialize(b.value()));
    }
  }
  {
    StaticBackend<gc::Types> st;
    DynBackend dy(gc::Types::graph());
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      RandomSampler s1(seed), s2(seed);
      auto a = st.generate(s1);
      auto b = dy.generate(s2);
      REQUIRE(a.ok());
      REQUIRE(b.ok());
      REQUIRE(StaticBackend<gc::Types>::serialize(a.value()) == dyn_serialize(b.value()));
    }
  }
}

TEST_CASE("every generated static tree re-parses under its grammar") {
  RefParser parser(gc::Types::graph());
  StaticBackend<gc::Types> backend;
  RandomSampler s(31337);
  for (int i = 0; i < 300; ++i) {
    auto t = backend.generate(s);
    REQUIRE(t.ok());
    CHECK(parser.accepts(StaticBackend<gc::Types>::serialize(t.value())));
  }
}

TEST_CASE("mutated and crossed static trees re-parse (closure, unit scale)") {
  RefParser parser(ge::Types::graph());
  StaticBackend<ge::Types> backend;
  RandomSampler s(8);
  SplitMix64 rng(9);
  auto a = backend.generate(s);
  auto b = backend.generate(s);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  for (int i = 0; i < 500; ++i) {
    auto paths = all_node_paths(SRef(&a.value()));
    const NodePath& path = paths[rng.below(static_cast<std::uint32_t>(paths.size()))];
    REQUIRE(backend.mutate(a.value(), path, s).ok());
    auto res = backend.crossover(a.value(), path, b.value(), s);
    REQUIRE(res.ok());
    CHECK(parser.accepts(StaticBackend<ge::Types>::serialize(a.value())));
    CHECK(parser.accepts(StaticBackend<ge::Types>::serialize(b.value())));
  }
}

TEST_CASE("corpus registry matches grammars structurally") {
  const auto& entries = corpus();
  REQUIRE(entries.size() == 4);
  GrammarGraph g = mark_indirection(build_graph(parse_grammar(read_grammar("expr.gbnf"))));
  const CorpusOps* entry = match_corpus(entries, g);
  REQUIRE(entry != nullptr);
  CHECK(entry->name == "expr");
  // a different grammar does not match
  GrammarGraph other = mark_indirection(build_graph(parse_grammar("<a> ::= \"x\"\n")));
  CHECK(match_corpus(entries, other) == nullptr);

  auto r = entry->generate_at(GenRequest{g.start_node, 12345, {}});
  REQUIRE(r.ok());
  RandomSampler s(12345);
  DynBackend dy(g);
  auto d = dy.generate(s);
  REQUIRE(d.ok());
  CHECK(r.value() == dyn_serialize(d.value()));
}
