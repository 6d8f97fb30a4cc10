#pragma once

#include <cassert>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gevo/dyn.hpp"
#include "gevo/gen.hpp"
#include "gevo/staticrt.hpp"
#include "gevo/visit.hpp"

namespace gevo {

// Mutation/crossover/check run against this uniform backend surface, so the
// two backends cannot diverge in behavior, only in performance.

struct CrossoverOutcome {
  bool swapped = false;   // false: NoCandidate, parents unchanged
  NodePath path2;         // chosen subtree in the second parent
};

using MutateError = std::variant<InvalidPath, GenErr>;

namespace detail {

inline StdChain make_chain_or_throw(const GrammarGraph& g, std::shared_ptr<const GenTables> t,
                                    const ChainConfig& cfg) {
  auto c = make_chain(g, std::move(t), cfg);
  if (!c.ok()) throw std::runtime_error("backend: cyclic alternation in flatten set");
  return std::move(c).value();
}

}  // namespace detail

template <class G>
struct StaticBackend {
  using Tree = typename G::Start;
  using Grammar = G;

  std::shared_ptr<const GenTables> tables;
  ChainConfig chain_cfg;
  // reused across operations: the limiter's depth counter always returns to
  // zero, so no per-op copy is needed
  StdChain chain;

  explicit StaticBackend(ChainConfig cfg = {})
      : tables(GenTables::build(G::graph())),
        chain_cfg(cfg),
        chain(detail::make_chain_or_throw(G::graph(), tables, cfg)) {}

  const GrammarGraph& graph() const { return G::graph(); }
  std::uint32_t start_node() const { return G::start_node; }

  static SRef<Tree> view(const Tree& t) { return SRef<Tree>(&t); }
  static SMut<Tree> mut(Tree& t) { return SMut<Tree>(&t); }

  template <class S>
  Expected<Tree, GenErr> generate(S& s) {
    return with_retries([&] { return gen_node<Tree>(s, chain); });
  }

  static std::string serialize(const Tree& t) { return serialize_tree(view(t)); }
  static std::size_t symbol_count(const Tree& t) { return count_symbol_nodes(view(t)); }

  template <class S>
  Expected<void, MutateError> mutate(Tree& t, const NodePath& path, S& s) {
    auto at = resolve_path_mut(mut(t), path);
    if (!at.ok()) return unexpected(MutateError(at.error()));
    AMut<G> target = at.value();
    auto r = with_retries([&]() -> Expected<std::monostate, GenErr> {
      auto g = regenerate(target, s, chain);
      if (!g.ok()) return unexpected(g.error());
      return std::monostate{};
    });
    if (!r.ok()) return unexpected(MutateError(r.error()));
    return {};
  }

  template <class S>
  Expected<CrossoverOutcome, InvalidPath> crossover(Tree& a, const NodePath& path_a, Tree& b,
                                                    S& s) {
    auto at = resolve_path_mut(mut(a), path_a);
    if (!at.ok()) return unexpected(at.error());
    const std::uint32_t type_id = at.value().node_id();
    std::vector<NodePath> candidates = find_same_type_subtrees(view(b), type_id);
    if (candidates.empty()) return CrossoverOutcome{};
    const std::uint32_t pick =
        s.sample_alt(static_cast<std::uint32_t>(candidates.size()), type_id);
    auto bt = resolve_path_mut(mut(b), candidates[pick]);
    assert(bt.ok());
    const bool ok = swap_same_type(at.value(), bt.value());
    assert(ok);
    (void)ok;
    return CrossoverOutcome{true, std::move(candidates[pick])};
  }
};

struct DynBackend {
  using Tree = DynTree;

  const GrammarGraph* g;
  std::uint32_t start;
  std::shared_ptr<const GenTables> tables;
  ChainConfig chain_cfg;
  StdChain chain;

  explicit DynBackend(const GrammarGraph& graph_, ChainConfig cfg = {})
      : g(&graph_),
        start(graph_.start_node),
        tables(GenTables::build(graph_)),
        chain_cfg(cfg),
        chain(detail::make_chain_or_throw(graph_, tables, cfg)) {}

  const GrammarGraph& graph() const { return *g; }
  std::uint32_t start_node() const { return start; }

  static DynView view(const Tree& t) { return dyn_view(t); }
  static DynMut mut(Tree& t) { return dyn_mut(t); }

  template <class S>
  Expected<Tree, GenErr> generate(S& s) {
    return dyn_generate(*g, start, s, chain);
  }

  static std::string serialize(const Tree& t) { return dyn_serialize(t); }
  static std::size_t symbol_count(const Tree& t) { return count_symbol_nodes(view(t)); }

  template <class S>
  Expected<void, MutateError> mutate(Tree& t, const NodePath& path, S& s) {
    auto at = resolve_path_mut(mut(t), path);
    if (!at.ok()) return unexpected(MutateError(at.error()));
    DynMut target = at.value();
    auto r = with_retries([&]() -> Expected<std::monostate, GenErr> {
      auto fresh = dyn_generate_node(*g, target.node_id(), s, chain);
      if (!fresh.ok()) return unexpected(fresh.error());
      *target.raw() = std::move(fresh).value();
      return std::monostate{};
    });
    if (!r.ok()) return unexpected(MutateError(r.error()));
    return {};
  }

  template <class S>
  Expected<CrossoverOutcome, InvalidPath> crossover(Tree& a, const NodePath& path_a, Tree& b,
                                                    S& s) {
    auto at = resolve_path_mut(mut(a), path_a);
    if (!at.ok()) return unexpected(at.error());
    const std::uint32_t type_id = at.value().node_id();
    std::vector<NodePath> candidates = find_same_type_subtrees(view(b), type_id);
    if (candidates.empty()) return CrossoverOutcome{};
    const std::uint32_t pick =
        s.sample_alt(static_cast<std::uint32_t>(candidates.size()), type_id);
    auto bt = resolve_path_mut(mut(b), candidates[pick]);
    assert(bt.ok());
    if (at.value().raw() != bt.value().raw()) {
      std::swap(*at.value().raw(), *bt.value().raw());
    }
    return CrossoverOutcome{true, std::move(candidates[pick])};
  }
};

}  // namespace gevo
