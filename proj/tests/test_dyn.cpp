#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "gevo/backend.hpp"
#include "gevo/gen.hpp"
#include "gevo/grammar.hpp"
#include "gevo/visit.hpp"

using namespace gevo;

namespace {

const char* kExprGrammar = R"(<start> ::= <expr>
<expr> ::= <number> "+" <expr> | <number>
<number> ::= "0" | <non_zero> <digit>*
<non_zero> ::= "1" | "2" | "3" | "4" | "5" | "6" | "7" | "8" | "9"
<digit> ::= "0" | <non_zero>
)";

const char* kCsvGrammar = R"(<start> ::= <csv_file>
<csv_file> ::= <csv_records>
<csv_records> ::= <csv_record> <csv_records> | ""
<csv_record> ::= <csv_string_list> "\n"
<csv_string_list> ::= <raw_field> | <raw_field> ";" <csv_string_list>
<raw_field> ::= <field_char>*
<field_char> ::= "a" | "b" | "c" | "1" | "2" | "3"
)";

struct Height {
  std::size_t max = 0;
  std::size_t cur = 0;
  using Break = NoBreak;
  using Error = NoError;
  template <class View>
  VisitNext<Height> visit(View n, std::size_t) && {
    ++cur;
    max = std::max(max, cur);
    auto res = n.visit_each(std::move(*this));
    Height self = std::move(res).take_continue();
    --self.cur;
    return visit_continue(std::move(self));
  }
};

template <class View>
std::size_t tree_height(View root) {
  auto h = Height{}.visit(root, 0);
  return std::move(h).take_continue().max;
}

struct IndexProbe {
  bool* ok;
  std::size_t* next;
  using Break = NoBreak;
  using Error = NoError;
  template <class View>
  VisitNext<IndexProbe> visit(View, std::size_t idx) && {
    if (idx != *next) *ok = false;
    ++*next;
    return visit_continue(std::move(*this));
  }
};

struct OrderCheck {
  bool* ok;
  using Break = NoBreak;
  using Error = NoError;
  template <class View>
  VisitNext<OrderCheck> visit(View n, std::size_t) && {
    std::size_t next = 0;
    (void)n.visit_each(IndexProbe{ok, &next});
    return n.visit_each(std::move(*this));
  }
};

struct Fixture {
  GrammarGraph graph;
  std::shared_ptr<const GenTables> tables;

  explicit Fixture(const char* text)
      : graph(mark_indirection(build_graph(parse_grammar(text)))),
        tables(GenTables::build(graph)) {}

  DynTree scripted(std::vector<std::uint32_t> alts, std::vector<std::uint32_t> reps,
                   std::uint32_t from_node = 0) {
    ScriptedSampler s(std::move(alts), std::move(reps));
    std::tuple<> chain;
    auto r = dyn_generate_node(graph, from_node, s, chain);
    REQUIRE(r.ok());
    REQUIRE(s.exhausted());
    return DynTree{std::move(r).value(), &graph};
  }
};

}  // namespace

TEST_CASE("scripted generation resolves the spec's hand-walked trees") {
  Fixture f(kExprGrammar);

  // alt=1 at <expr>, alt=0 at <number> serializes to "0"
  DynTree zero = f.scripted({1, 0}, {});
  CHECK(dyn_serialize(zero) == "0");
  CHECK(dyn_validate(zero));

  // "12+3"
  DynTree t = f.scripted({0, 1, 0, 1, 1, 1, 1, 2}, {1, 0});
  CHECK(dyn_serialize(t) == "12+3");
  CHECK(dyn_validate(t));
}

TEST_CASE("single-terminal grammar generates with zero sampler calls") {
  Fixture f("<a> ::= \"x\"\n");
  DynTree t = f.scripted({}, {});
  CHECK(dyn_serialize(t) == "x");
}

TEST_CASE("empty star under number's nonzero variant serializes just the nonzero") {
  Fixture f(kExprGrammar);
  const std::uint32_t number = *f.graph.head_of("number");
  DynTree t = f.scripted({1, 6}, {0}, number);
  CHECK(dyn_serialize(t) == "7");
}

TEST_CASE("empty terminal serializes to nothing") {
  Fixture f("<a> ::= \"\"\n");
  DynTree t = f.scripted({}, {});
  CHECK(dyn_serialize(t).empty());
  CHECK(count_symbol_nodes(dyn_view(t)) == 2);
}

TEST_CASE("depth limiter: generous cap leaves behavior unconstrained") {
  Fixture f(kExprGrammar);
  ChainConfig cfg;
  cfg.max_depth = 64;
  auto chain = make_chain(f.graph, f.tables, cfg);
  REQUIRE(chain.ok());
  auto bare = std::tuple<>();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomSampler s1(seed), s2(seed);
    auto limited = dyn_generate_node(f.graph, 0, s1, chain.value());
    auto free_gen = dyn_generate_node(f.graph, 0, s2, bare);
    REQUIRE(limited.ok());
    REQUIRE(free_gen.ok());
    DynTree a{std::move(limited).value(), &f.graph};
    DynTree b{std::move(free_gen).value(), &f.graph};
    CHECK(dyn_serialize(a) == dyn_serialize(b));
  }
}

TEST_CASE("depth limiter: minimal budget forces the minimal completion") {
  Fixture f(kExprGrammar);
  // minimum derivation of the start symbol: start expr alt number alt "0"
  CHECK(f.tables->min_depth[0] == 6);
  ChainConfig cfg;
  cfg.max_depth = 6;
  auto chain = make_chain(f.graph, f.tables, cfg);
  REQUIRE(chain.ok());
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomSampler s(seed);
    auto r = dyn_generate(f.graph, 0, s, chain.value());
    REQUIRE(r.ok());
    CHECK(dyn_serialize(r.value()) == "0");
  }
}

TEST_CASE("depth limiter: trees never exceed the cap") {
  Fixture f(kExprGrammar);
  for (std::uint32_t cap : {6u, 8u, 12u}) {
    ChainConfig cfg;
    cfg.max_depth = cap;
    auto chain = make_chain(f.graph, f.tables, cfg);
    REQUIRE(chain.ok());
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      RandomSampler s(seed);
      auto r = dyn_generate(f.graph, 0, s, chain.value());
      REQUIRE(r.ok());
      CHECK(tree_height(dyn_view(r.value())) <= cap);
    }
  }
}

TEST_CASE("infinite recursion reports DepthExceeded at any cap") {
  Fixture f("<a> ::= <a>\n");
  CHECK(f.tables->min_depth[0] == GenTables::kInf);
  for (std::uint32_t cap : {1u, 16u, 64u}) {
    ChainConfig cfg;
    cfg.max_depth = cap;
    auto chain = make_chain(f.graph, f.tables, cfg);
    REQUIRE(chain.ok());
    RandomSampler s(1);
    auto r = dyn_generate(f.graph, 0, s, chain.value());
    REQUIRE(!r.ok());
    CHECK(r.error() == GenErr::DepthExceeded);
  }
}

TEST_CASE("flattener over digit precomputes the ten choice stacks") {
  Fixture f(kExprGrammar);
  const std::uint32_t digit = *f.graph.head_of("digit");
  auto fl = flattener_for(f.graph, digit);
  REQUIRE(fl.ok());
  const auto& stacks = fl.value().stacks_for(digit);
  REQUIRE(stacks.size() == 10);
  CHECK(stacks[0] == std::vector<std::uint32_t>{0});
  for (std::uint32_t k = 1; k < 10; ++k) {
    CHECK(stacks[k] == (std::vector<std::uint32_t>{1, k - 1}));
  }

  // replaying stack 7 resolves the "7" terminal, and the flattener
  // notifies the outer sampler of the effective arity
  struct Notified : ScriptedSampler {
    using ScriptedSampler::ScriptedSampler;
    std::map<std::uint32_t, std::uint32_t> seen;
    void effective_arity(std::uint32_t node, std::uint32_t arity) override { seen[node] = arity; }
  };
  Notified s({7}, {});
  auto chain = std::make_tuple(fl.value());
  auto r = dyn_generate_node(f.graph, digit, s, chain);
  REQUIRE(r.ok());
  CHECK(dyn_serialize(DynTree{std::move(r).value(), &f.graph}) == "7");
  CHECK(s.seen[digit] == 10);
}

TEST_CASE("flattener over a single-variant alternation has one stack") {
  Fixture f("<a> ::= <b>\n<b> ::= \"x\" \"y\"\n");
  auto fl = flattener_for(f.graph, 0);
  REQUIRE(fl.ok());
  CHECK(fl.value().stacks_for(0).size() == 1);
  ScriptedSampler s({0}, {});
  auto chain = std::make_tuple(fl.value());
  auto r = dyn_generate_node(f.graph, 0, s, chain);
  REQUIRE(r.ok());
}

TEST_CASE("cyclic alternation closures are rejected") {
  Fixture f("<a> ::= <a> | \"x\"\n");
  auto fl = flattener_for(f.graph, 0);
  REQUIRE(!fl.ok());
  CHECK(fl.error() == GenErr::CyclicAlternation);
}

TEST_CASE("unflattened digit places '0' at one half, flattened at one tenth") {
  Fixture f(kExprGrammar);
  const std::uint32_t digit = *f.graph.head_of("digit");
  std::map<std::string, int> plain, flat;
  auto fl = flattener_for(f.graph, digit);
  REQUIRE(fl.ok());
  const int n = 20000;
  {
    RandomSampler s(42);
    std::tuple<> chain;
    for (int i = 0; i < n; ++i) {
      auto r = dyn_generate_node(f.graph, digit, s, chain);
      ++plain[dyn_serialize(DynTree{std::move(r).value(), &f.graph})];
    }
  }
  {
    RandomSampler s(43);
    auto chain = std::make_tuple(fl.value());
    for (int i = 0; i < n; ++i) {
      auto r = dyn_generate_node(f.graph, digit, s, chain);
      ++flat[dyn_serialize(DynTree{std::move(r).value(), &f.graph})];
    }
  }
  CHECK(plain["0"] > n * 0.47);
  CHECK(plain["0"] < n * 0.53);
  for (int d = 0; d < 10; ++d) {
    const int c = flat[std::string(1, char('0' + d))];
    CHECK(c > n * 0.07);
    CHECK(c < n * 0.13);
  }
}

TEST_CASE("write_tree counts bytes and forwards sink failures") {
  Fixture f(kCsvGrammar);
  DynTree rec = f.scripted({0, 1, 3, 0, 4, 1}, {1, 1});
  CHECK(dyn_serialize(rec) == "1;2\n");
  StringSink ok_sink;
  auto n = write_tree(dyn_view(rec), ok_sink);
  REQUIRE(n.ok());
  CHECK(n.value() == 4);

  TruncatingSink failing{1};
  auto r = write_tree(dyn_view(rec), failing);
  CHECK(!r.ok());
  CHECK(failing.data == "1");  // partial output is allowed
}

TEST_CASE("symbol-node counting matches the hand counts") {
  Fixture expr(kExprGrammar);
  DynTree zero = expr.scripted({1, 0}, {});
  CHECK(count_symbol_nodes(dyn_view(zero)) == 4);  // start, expr, number heads + "0"
  CHECK(count_symbol_nodes(dyn_view(zero)) <= count_all_nodes(dyn_view(zero)));

  Fixture tiny("<a> ::= \"x\"\n");
  DynTree t = tiny.scripted({}, {});
  CHECK(count_symbol_nodes(dyn_view(t)) == 2);
}

TEST_CASE("collect_paths, resolve_path, and find_same_type_subtrees") {
  Fixture f(kCsvGrammar);
  // "a;b" record
  DynTree rec = f.scripted({0, 1, 0, 0, 1, 1}, {1, 1});
  CHECK(dyn_serialize(rec) == "a;b\n");
  const std::uint32_t raw_field = *f.graph.head_of("raw_field");
  auto fields = collect_paths(dyn_view(rec),
                              [raw_field](const NodeDef& d) { return d.id == raw_field; });
  REQUIRE(fields.size() == 2);
  auto first = resolve_path(dyn_view(rec), fields[0]);
  REQUIRE(first.ok());
  CHECK(serialize_tree(first.value()) == "a");
  auto second = resolve_path(dyn_view(rec), fields[1]);
  CHECK(serialize_tree(second.value()) == "b");

  CHECK(collect_paths(dyn_view(rec), [](const NodeDef&) { return false; }).empty());
  auto all = collect_paths(dyn_view(rec), [](const NodeDef&) { return true; });
  CHECK(all.size() == count_all_nodes(dyn_view(rec)));
  CHECK(all.front().empty());  // pre-order starts at the root

  // resolve_path edge cases
  auto root = resolve_path(dyn_view(rec), {});
  REQUIRE(root.ok());
  CHECK(root.value().definition().id == 0);
  auto bad = resolve_path(dyn_view(rec), {0, 9});
  REQUIRE(!bad.ok());
  CHECK(bad.error().index == 9);
  CHECK(bad.error().depth == 1);

  // find_same_type: absent type and root type
  CHECK(find_same_type_subtrees(dyn_view(rec), raw_field).size() == 2);
  CHECK(find_same_type_subtrees(dyn_view(rec), 0).size() == 1);
  CHECK(find_same_type_subtrees(dyn_view(rec), 0).front().empty());
}

TEST_CASE("digit paths in '12+3' point at the star's children") {
  Fixture f(kExprGrammar);
  DynTree t = f.scripted({0, 1, 0, 1, 1, 1, 1, 2}, {1, 0});
  const std::uint32_t digit = *f.graph.head_of("digit");
  auto digits = find_same_type_subtrees(dyn_view(t), digit);
  REQUIRE(digits.size() == 1);
  auto at = resolve_path(dyn_view(t), digits[0]);
  CHECK(serialize_tree(at.value()) == "2");
  // first <number> of the tree serializes to "12"
  const std::uint32_t number = *f.graph.head_of("number");
  auto numbers = find_same_type_subtrees(dyn_view(t), number);
  REQUIRE(numbers.size() == 2);
  CHECK(serialize_tree(resolve_path(dyn_view(t), numbers[0]).value()) == "12");
  CHECK(serialize_tree(resolve_path(dyn_view(t), numbers[1]).value()) == "3");
}

TEST_CASE("write_tree equals terminal-path concatenation (oracle equivalence)") {
  Fixture f(kCsvGrammar);
  ChainConfig cfg;
  auto chain = make_chain(f.graph, f.tables, cfg);
  REQUIRE(chain.ok());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomSampler s(seed);
    auto r = dyn_generate(f.graph, 0, s, chain.value());
    REQUIRE(r.ok());
    const DynTree& t = r.value();
    auto terminals = collect_paths(
        dyn_view(t), [](const NodeDef& d) { return d.kind == NodeKind::Terminal; });
    std::string assembled;
    for (const auto& p : terminals) {
      assembled += std::string(resolve_path(dyn_view(t), p).value().definition().literal);
    }
    CHECK(assembled == dyn_serialize(t));
  }
}

TEST_CASE("built-in traversal visits children in strictly increasing index order") {
  Fixture f(kCsvGrammar);
  ChainConfig cfg;
  auto chain = make_chain(f.graph, f.tables, cfg);
  REQUIRE(chain.ok());
  RandomSampler s(5);
  auto r = dyn_generate(f.graph, 0, s, chain.value());
  REQUIRE(r.ok());
  bool ok = true;
  (void)OrderCheck{&ok}.visit(dyn_view(r.value()), 0);
  CHECK(ok);
}

TEST_CASE("dynamic backend mutate and crossover keep trees valid") {
  Fixture f(kExprGrammar);
  DynBackend backend(f.graph);
  RandomSampler s(11);
  SplitMix64 rng(3);
  for (int round = 0; round < 100; ++round) {
    auto a = backend.generate(s);
    auto b = backend.generate(s);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    DynTree ta = std::move(a).value();
    DynTree tb = std::move(b).value();
    auto paths = all_node_paths(dyn_view(ta));
    const NodePath& path = paths[rng.below(static_cast<std::uint32_t>(paths.size()))];
    REQUIRE(backend.mutate(ta, path, s).ok());
    CHECK(dyn_validate(ta));
    auto res = backend.crossover(ta, path, tb, s);
    REQUIRE(res.ok());
    if (res.value().swapped) {
      CHECK(dyn_validate(ta));
      CHECK(dyn_validate(tb));
    }
  }
}

TEST_CASE("generation is deterministic per seed") {
  Fixture f(kCsvGrammar);
  DynBackend b1(f.graph), b2(f.graph);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomSampler s1(seed), s2(seed);
    auto r1 = b1.generate(s1);
    auto r2 = b2.generate(s2);
    REQUIRE(r1.ok());
    REQUIRE(r2.ok());
    CHECK(dyn_serialize(r1.value()) == dyn_serialize(r2.value()));
  }
}

namespace {

// user generator that offers the start node but never succeeds
struct AlwaysFailing {
  bool offered(std::uint32_t id) const { return id == 0; }
  template <class T, class S, class Chain>
  T generate_value(S&, Chain&) {
    throw GenAbort{GenErr::RetryExhausted};
  }
  template <class S, class Chain>
  DynNode generate_dyn_value(const GrammarGraph&, std::uint32_t, S&, Chain&) {
    throw GenAbort{GenErr::RetryExhausted};
  }
};

}  // namespace

TEST_CASE("a generator that keeps failing exhausts the retry budget") {
  Fixture f("<a> ::= \"x\"\n");
  auto chain = std::make_tuple(AlwaysFailing{});
  RandomSampler s(1);
  auto r = dyn_generate(f.graph, 0, s, chain);
  REQUIRE(!r.ok());
  CHECK(r.error() == GenErr::RetryExhausted);
}

TEST_CASE("unbounded repetitions are capped") {
  Fixture f("<a> ::= \"x\"*\n");
  RandomSampler s(9);
  std::tuple<> chain;
  for (int i = 0; i < 200; ++i) {
    auto r = dyn_generate_node(f.graph, 0, s, chain);
    REQUIRE(r.ok());
    CHECK(dyn_serialize(DynTree{std::move(r).value(), &f.graph}).size() <= RandomSampler::kRepCap);
  }
}
