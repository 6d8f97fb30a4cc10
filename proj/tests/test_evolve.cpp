#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include <gevo_gen/csv.gen.hpp>

#include "gevo/backend.hpp"
#include "gevo/constraints.hpp"
#include "gevo/evolve.hpp"
#include "gevo/grammar.hpp"
#include "gevo/refparse.hpp"

using namespace gevo;
namespace gc = gevo_gen::csv;

namespace {

// Brute-force domination oracle: repeatedly peel the set of members not
// dominated by any remaining member.
std::vector<std::vector<std::size_t>> brute_fronts(const std::vector<ObjectiveVector>& scores) {
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<bool> taken(scores.size(), false);
  std::size_t remaining = scores.size();
  while (remaining > 0) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (taken[i]) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < scores.size() && !dominated; ++j) {
        if (!taken[j] && j != i && dominates(scores[j], scores[i])) dominated = true;
      }
      if (!dominated) front.push_back(i);
    }
    for (std::size_t i : front) taken[i] = true;
    remaining -= front.size();
    fronts.push_back(std::move(front));
  }
  return fronts;
}

DynTree parse_csv(const RefParser& p, const std::string& text) {
  auto t = p.parse(text);
  REQUIRE(t.ok());
  return std::move(t).value();
}

std::vector<std::unique_ptr<Constraint<DynBackend>>> csv_fig2(const GrammarGraph& g) {
  std::vector<std::unique_ptr<Constraint<DynBackend>>> cs;
  cs.push_back(std::make_unique<CardinalityEqual<DynBackend>>(resolve_rule(g, "csv_record"),
                                                              resolve_rule(g, "raw_field")));
  return cs;
}

// test-only objective: reward occurrences of one byte in the serialization
struct ByteGoal : Constraint<DynBackend> {
  char byte;
  double target;
  ByteGoal(char b, double t) : byte(b), target(t) {}
  std::string_view name() const override { return "byte_goal"; }
  CheckResult evaluate(const DynTree& tree) const override {
    const std::string bytes = dyn_serialize(tree);
    const auto n = static_cast<double>(std::count(bytes.begin(), bytes.end(), byte));
    CheckResult r;
    r.score = std::min(n / target, 1.0);
    if (r.score < 1.0) r.violations.push_back(NodePath{});
    return r;
  }
};

}  // namespace

TEST_CASE("domination is >= everywhere and > somewhere") {
  CHECK(dominates({1, 1}, {1, 0}));
  CHECK_FALSE(dominates({1, 0}, {1, 0}));
  CHECK_FALSE(dominates({1, 0}, {0, 1}));
  CHECK_THROWS_AS(dominates({1}, {1, 0}), DimensionMismatch);
}

TEST_CASE("single objective sorts into equal-score groups in descending order") {
  std::vector<ObjectiveVector> scores = {{0.5}, {1.0}, {0.5}, {0.1}, {1.0}};
  auto fronts = nondominated_sort(scores);
  REQUIRE(fronts.size() == 3);
  CHECK(fronts[0] == std::vector<std::size_t>{1, 4});
  CHECK(fronts[1] == std::vector<std::size_t>{0, 2});
  CHECK(fronts[2] == std::vector<std::size_t>{3});
}

TEST_CASE("mutually non-dominating vectors share one front") {
  std::vector<ObjectiveVector> scores = {{1, 0}, {0, 1}, {0.5, 0.5}};
  auto fronts = nondominated_sort(scores);
  REQUIRE(fronts.size() == 1);
  CHECK(fronts[0].size() == 3);
}

TEST_CASE("fast non-dominated sorting matches the brute-force oracle") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(64);
    const std::size_t d = 1 + rng.below(4);
    std::vector<ObjectiveVector> scores(n);
    for (auto& v : scores) {
      v.resize(d);
      // coarse grid to force ties and duplicates
      for (auto& x : v) x = double(rng.below(5)) / 4.0;
    }
    auto fast = nondominated_sort(scores);
    auto brute = brute_fronts(scores);
    REQUIRE(fast.size() == brute.size());
    for (std::size_t f = 0; f < fast.size(); ++f) {
      auto a = fast[f];
      auto b = brute[f];
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
  }
}

TEST_CASE("fronts partition the population and front 0 is undominated") {
  SplitMix64 rng(7);
  std::vector<ObjectiveVector> scores(40);
  for (auto& v : scores) v = {double(rng.below(10)) / 9.0, double(rng.below(10)) / 9.0};
  auto fronts = nondominated_sort(scores);
  std::set<std::size_t> seen;
  for (const auto& f : fronts) {
    for (std::size_t i : f) CHECK(seen.insert(i).second);
  }
  CHECK(seen.size() == scores.size());
  for (std::size_t i : fronts[0]) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      CHECK_FALSE(dominates(scores[j], scores[i]));
    }
  }
}

TEST_CASE("crowding distance ranks boundary points first") {
  std::vector<ObjectiveVector> scores = {{0.0, 1.0}, {0.4, 0.6}, {0.5, 0.5}, {1.0, 0.0}};
  std::vector<std::size_t> front = {0, 1, 2, 3};
  auto order = crowding_order(scores, front);
  REQUIRE(order.size() == 4);
  std::set<std::size_t> first_two(order.begin(), order.begin() + 2);
  CHECK(first_two.count(0) == 1);
  CHECK(first_two.count(3) == 1);
}

TEST_CASE("nsga2 selection with one objective equals elitist top-p selection") {
  SplitMix64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ObjectiveVector> pool(30);
    for (auto& v : pool) v = {double(rng.below(8)) / 7.0};
    const std::size_t p = 10;
    auto selected = nsga2_select(pool, p, {});
    std::multiset<double> got;
    for (std::size_t i : selected) got.insert(pool[i][0]);
    std::vector<double> all;
    for (const auto& v : pool) all.push_back(v[0]);
    std::sort(all.rbegin(), all.rend());
    std::multiset<double> want(all.begin(), all.begin() + p);
    CHECK(got == want);
  }
}

TEST_CASE("the niching override controls the partially consumed front exactly") {
  // one front of four, room for two: the override's first two win
  std::vector<ObjectiveVector> pool = {{1, 0}, {0, 1}, {0.5, 0.5}, {0.6, 0.4}};
  NichingSorter reversed = [](const std::vector<ObjectiveVector>&,
                              const std::vector<std::size_t>& front) {
    std::vector<std::size_t> order(front.rbegin(), front.rend());
    return order;
  };
  auto selected = nsga2_select(pool, 2, reversed);
  CHECK(selected == std::vector<std::size_t>{3, 2});
}

TEST_CASE("constraint scores on hand-built CSV trees") {
  GrammarGraph g = gc::Types::graph();
  RefParser parser(g);
  auto cs = csv_fig2(g);

  DynTree ok = parse_csv(parser, "a;b\nc;1\n");
  auto [ok_scores, ok_viol] = check<DynBackend>(ok, cs);
  REQUIRE(ok_scores.size() == 1);
  CHECK(ok_scores[0] == 1.0);
  CHECK(ok_viol[0].empty());

  DynTree bad = parse_csv(parser, "a;b\nc\n");
  auto [bad_scores, bad_viol] = check<DynBackend>(bad, cs);
  CHECK(bad_scores[0] < 1.0);
  REQUIRE(bad_viol[0].size() >= 1);
  // the violation points at a record whose field count differs from the mode
  auto at = resolve_path(dyn_view(bad), bad_viol[0][0]);
  REQUIRE(at.ok());
  CHECK(at.value().definition().rule == "csv_record");

  // empty constraint list gives an empty vector
  std::vector<std::unique_ptr<Constraint<DynBackend>>> none;
  auto [empty_scores, empty_viol] = check<DynBackend>(ok, none);
  CHECK(empty_scores.empty());
  CHECK(empty_viol.empty());
}

TEST_CASE("built-in constraint shaping") {
  GrammarGraph g = gc::Types::graph();
  RefParser parser(g);

  CardinalityEqK<DynBackend> three(resolve_rule(g, "csv_record"), resolve_rule(g, "raw_field"), 3);
  DynTree t3 = parse_csv(parser, "a;b;c\n");
  CHECK(three.evaluate(t3).score == 1.0);
  DynTree t1 = parse_csv(parser, "a\n");
  CHECK(three.evaluate(t1).score == doctest::Approx(1.0 / 3.0));

  NodeGoal<DynBackend> goal(500);
  DynTree small = parse_csv(parser, "a\n");
  const std::size_t n = DynBackend::symbol_count(small);
  CHECK(goal.evaluate(small).score == doctest::Approx(double(n) / 500.0));
  CHECK_FALSE(goal.evaluate(small).violations.empty());

  CardinalityEqual<DynBackend> equal(resolve_rule(g, "csv_record"), resolve_rule(g, "raw_field"));
  CHECK(equal.evaluate(t1).score == 1.0);  // single record: vacuous

  CountBound<DynBackend> bound(resolve_rule(g, "raw_field"), 1, 2);
  CHECK(bound.evaluate(t1).score == 1.0);
  CHECK(bound.evaluate(t3).score == doctest::Approx(0.5));
  CHECK(bound.evaluate(t3).violations.size() == 1);

  CHECK_THROWS_AS(resolve_rule(g, "nonexistent"), UnknownSelector);
}

TEST_CASE("check is pure: serialization identical before and after") {
  GrammarGraph g = gc::Types::graph();
  RefParser parser(g);
  DynTree t = parse_csv(parser, "a;b\nc\n");
  const std::string before = dyn_serialize(t);
  auto cs = csv_fig2(g);
  (void)check<DynBackend>(t, cs);
  CHECK(dyn_serialize(t) == before);
}

TEST_CASE("constraint registry builds from spec items") {
  GrammarGraph g = gc::Types::graph();
  ConstraintRegistry<DynBackend> registry;
  ConstraintSpecItem item;
  item.type = "cardinality_eq_k";
  item.strs["over"] = "csv_record";
  item.strs["count"] = "raw_field";
  item.nums["k"] = 3;
  auto list = registry.make_list(g, {item});
  REQUIRE(list.size() == 1);
  CHECK(list[0]->name() == "cardinality_eq_k");

  ConstraintSpecItem unknown;
  unknown.type = "no_such_constraint";
  CHECK_THROWS(registry.make_list(g, {unknown}));
}

TEST_CASE("ga params are validated") {
  GaParams p;
  p.population = 10;
  p.elites = 11;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.elites = 2;
  p.candidates = 4;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // c < p - e
  p.candidates = 8;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("zero constraints terminate at generation 1 with the initial population") {
  DynBackend backend(gc::Types::graph());
  std::vector<std::unique_ptr<Constraint<DynBackend>>> none;
  GaParams params;
  params.population = 12;
  params.elites = 2;
  params.candidates = 12;
  params.max_iterations = 50;
  auto r = fandango_ga(backend, none, params, 5);
  CHECK(r.all_satisfied);
  CHECK(r.generations == 1);
  CHECK(r.population.size() == 12);
  auto r2 = nsga2(backend, none, params, 5);
  CHECK(r2.all_satisfied);
  CHECK(r2.generations == 1);
}

TEST_CASE("fitness is the sum of scores and best fitness never decreases") {
  GrammarGraph g = gc::Types::graph();
  DynBackend backend(g);
  std::vector<std::unique_ptr<Constraint<DynBackend>>> cs;
  cs.push_back(std::make_unique<CardinalityEqual<DynBackend>>(resolve_rule(g, "csv_record"),
                                                              resolve_rule(g, "raw_field")));
  cs.push_back(std::make_unique<NodeGoal<DynBackend>>(60));
  GaParams params;
  params.population = 20;
  params.elites = 4;
  params.candidates = 30;
  params.max_iterations = 15;

  GenerationHook<DynBackend> verify = [&](const GenerationStats&,
                                          const std::vector<Member<DynBackend>>& pop) {
    for (const auto& m : pop) {
      double sum = 0;
      for (double s : m.scores) sum += s;
      CHECK(m.fitness == doctest::Approx(sum));
      auto [scores, viol] = check<DynBackend>(m.tree, cs);
      (void)viol;
      REQUIRE(scores.size() == m.scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) {
        CHECK(scores[i] == doctest::Approx(m.scores[i]));
      }
    }
  };
  auto r = fandango_ga(backend, cs, params, 42, verify);
  double prev = -1;
  for (const auto& st : r.stats) {
    CHECK(st.best_fitness >= prev - 1e-12);
    prev = st.best_fitness;
  }
}

TEST_CASE("evolution closure: every member of every generation re-parses") {
  GrammarGraph g = gc::Types::graph();
  RefParser parser(g);
  DynBackend backend(g);
  std::vector<std::unique_ptr<Constraint<DynBackend>>> cs;
  cs.push_back(std::make_unique<CardinalityEqK<DynBackend>>(resolve_rule(g, "csv_record"),
                                                            resolve_rule(g, "raw_field"), 2));
  GaParams params;
  params.population = 16;
  params.elites = 3;
  params.candidates = 24;
  params.max_iterations = 12;

  std::size_t checked = 0;
  GenerationHook<DynBackend> closure = [&](const GenerationStats&,
                                           const std::vector<Member<DynBackend>>& pop) {
    for (const auto& m : pop) {
      CHECK(parser.accepts(dyn_serialize(m.tree)));
      ++checked;
    }
  };
  (void)fandango_ga(backend, cs, params, 3, closure);
  (void)nsga2(backend, cs, params, 3, {}, closure);
  CHECK(checked >= 32);
}

TEST_CASE("nsga2 front-0 score vectors are never dominated generation-over-generation") {
  GrammarGraph g = gc::Types::graph();
  DynBackend backend(g);
  std::vector<std::unique_ptr<Constraint<DynBackend>>> cs;
  cs.push_back(std::make_unique<ByteGoal>('a', 6));
  cs.push_back(std::make_unique<ByteGoal>('b', 6));
  GaParams params;
  params.population = 24;
  params.elites = 4;
  params.candidates = 36;
  params.max_iterations = 12;

  std::vector<ObjectiveVector> prev_front;
  GenerationHook<DynBackend> monotone = [&](const GenerationStats&,
                                            const std::vector<Member<DynBackend>>& pop) {
    std::vector<ObjectiveVector> scores;
    for (const auto& m : pop) scores.push_back(m.scores);
    auto fronts = nondominated_sort(scores);
    std::vector<ObjectiveVector> front0;
    for (std::size_t i : fronts[0]) front0.push_back(scores[i]);
    for (const auto& now : front0) {
      for (const auto& old : prev_front) {
        CHECK_FALSE(dominates(old, now));
      }
    }
    prev_front = front0;
  };
  (void)nsga2(backend, cs, params, 11, {}, monotone);
}

TEST_CASE("conflicting objectives keep a diverse trade-off front") {
  GrammarGraph g = gc::Types::graph();
  DynBackend backend(g);
  std::vector<std::unique_ptr<Constraint<DynBackend>>> cs;
  cs.push_back(std::make_unique<ByteGoal>('a', 12));
  cs.push_back(std::make_unique<ByteGoal>('b', 12));
  // a size squeeze makes the two byte goals compete
  cs.push_back(std::make_unique<CountBound<DynBackend>>(resolve_rule(g, "field_char"), 0, 14));
  GaParams params;
  params.population = 100;
  params.elites = 10;
  params.candidates = 150;
  params.max_iterations = 25;
  auto r = nsga2(backend, cs, params, 7);
  std::vector<ObjectiveVector> scores;
  for (const auto& m : r.population) scores.push_back(m.scores);
  auto fronts = nondominated_sort(scores);
  std::set<ObjectiveVector> distinct;
  for (std::size_t i : fronts[0]) distinct.insert(scores[i]);
  CHECK(distinct.size() >= 3);
}

TEST_CASE("runs are deterministic given a seed") {
  GrammarGraph g = gc::Types::graph();
  std::vector<std::string> first, second;
  for (int run = 0; run < 2; ++run) {
    DynBackend backend(g);
    std::vector<std::unique_ptr<Constraint<DynBackend>>> cs;
    cs.push_back(std::make_unique<CardinalityEqK<DynBackend>>(resolve_rule(g, "csv_record"),
                                                              resolve_rule(g, "raw_field"), 2));
    GaParams params;
    params.population = 15;
    params.elites = 3;
    params.candidates = 20;
    params.max_iterations = 8;
    auto r = nsga2(backend, cs, params, 99);
    auto& out = run == 0 ? first : second;
    for (const auto& m : r.population) out.push_back(dyn_serialize(m.tree));
  }
  CHECK(first == second);
}

TEST_CASE("static backend evolution behaves identically in kind") {
  StaticBackend<gc::Types> backend;
  GrammarGraph g = gc::Types::graph();
  std::vector<std::unique_ptr<Constraint<StaticBackend<gc::Types>>>> cs;
  cs.push_back(std::make_unique<CardinalityEqK<StaticBackend<gc::Types>>>(
      resolve_rule(g, "csv_record"), resolve_rule(g, "raw_field"), 2));
  GaParams params;
  params.population = 20;
  params.elites = 4;
  params.candidates = 30;
  params.max_iterations = 40;
  auto r = nsga2(backend, cs, params, 17);
  RefParser parser(g);
  for (const auto& m : r.population) {
    CHECK(parser.accepts(StaticBackend<gc::Types>::serialize(m.tree)));
  }
  CHECK(r.stats.size() == r.generations);
}
