#pragma once

// Instantiation helpers for compiled-in grammars. Each corpus translation
// unit includes its generated header and calls make_corpus_ops<Types>().

#include <memory>

#include "gevo/backend.hpp"
#include "gevo/corpus.hpp"

namespace gevo {

template <class B>
SolveOutcome solve_impl(B& backend, const GrammarGraph& g, const SolveRequest& rq) {
  ConstraintRegistry<B> registry;
  auto constraints = registry.make_list(g, rq.constraints);
  GenerationHook<B> hook;
  if (rq.on_stats || rq.on_population) {
    hook = [&rq](const GenerationStats& st, const std::vector<Member<B>>& pop) {
      if (rq.on_stats) rq.on_stats(st);
      if (rq.on_population) {
        std::vector<std::string> bytes;
        bytes.reserve(pop.size());
        for (const auto& m : pop) bytes.push_back(B::serialize(m.tree));
        rq.on_population(st.generation, bytes);
      }
    };
  }
  EvoResult<B> r = rq.algo == "fandango"
                       ? fandango_ga(backend, constraints, rq.params, rq.seed, hook, rq.jobs)
                       : nsga2(backend, constraints, rq.params, rq.seed, {}, hook, rq.jobs);
  SolveOutcome out;
  out.all_satisfied = r.all_satisfied;
  out.generations = r.generations;
  out.population.reserve(r.population.size());
  for (auto& m : r.population) {
    out.population.push_back(
        SolveMemberOut{B::serialize(m.tree), objective_satisfied(m.scores), m.fitness});
  }
  return out;
}

namespace detail {

template <class G>
struct GenDispatch {
  using Fn = Expected<std::string, GenErr> (*)(RandomSampler&, StdChain&);
  std::vector<Fn> table;

  GenDispatch() {
    table.assign(std::tuple_size_v<typename G::AllTypes>, nullptr);
    init(std::make_index_sequence<std::tuple_size_v<typename G::AllTypes>>{});
  }

  template <std::size_t... I>
  void init(std::index_sequence<I...>) {
    ((table[std::tuple_element_t<I, typename G::AllTypes>::definition().id] =
          &run<std::tuple_element_t<I, typename G::AllTypes>>),
     ...);
  }

  template <class T>
  static Expected<std::string, GenErr> run(RandomSampler& s, StdChain& chain) {
    auto r = with_retries([&] { return gen_node<T>(s, chain); });
    if (!r.ok()) return unexpected(r.error());
    return serialize_tree(SRef<T>(&r.value()));
  }
};

template <class G>
std::shared_ptr<const GenTables> shared_tables() {
  static const std::shared_ptr<const GenTables> tables = GenTables::build(G::graph());
  return tables;
}

}  // namespace detail

template <class G>
CorpusOps make_corpus_ops(std::string name) {
  CorpusOps ops;
  ops.name = std::move(name);
  ops.graph = &G::graph();
  ops.generate_at = [](const GenRequest& rq) -> Expected<std::string, GenErr> {
    static const detail::GenDispatch<G> dispatch;
    auto chain = make_chain(G::graph(), detail::shared_tables<G>(), rq.chain);
    if (!chain.ok()) return unexpected(chain.error());
    RandomSampler sampler(rq.seed);
    return dispatch.table[rq.node](sampler, chain.value());
  };
  ops.solve = [](const SolveRequest& rq) {
    StaticBackend<G> backend(rq.chain);
    return solve_impl(backend, G::graph(), rq);
  };
  ops.bench = [](const BenchJob& job) {
    StaticBackend<G> backend(job.chain);
    ConstraintRegistry<StaticBackend<G>> registry;
    auto constraints = registry.make_list(G::graph(), job.constraints);
    return run_bench(backend, constraints, job.request);
  };
  return ops;
}

}  // namespace gevo
