#pragma once

#include <cstdint>
#include <memory>
#include <tuple>
#include <vector>

#include "gevo/dyn.hpp"
#include "gevo/graph.hpp"
#include "gevo/sampler.hpp"
#include "gevo/util.hpp"

namespace gevo {

enum class GenErr : std::uint8_t {
  DepthExceeded,
  RetryExhausted,
  CyclicAlternation,
};

template <class T>
using GenResult = Expected<T, GenErr>;

// Thrown inside the generation hot path; converted to GenResult at the API
// boundary. Failure is rare (a subtree-root feasibility check or a failing
// user generator), so trees build with zero error-channel cost.
struct GenAbort {
  GenErr err;
};

// Dispatch tag for the generating constructors of emitted node types.
struct GenInPlace {};

// Per-graph tables shared by the built-in generators.
struct GenTables {
  static constexpr std::uint32_t kInf = 0xffffffffu;

  // Minimum derivation depth to termination, in levels, counting the node
  // itself; kInf when no finite derivation exists.
  std::vector<std::uint32_t> min_depth;
  std::vector<std::vector<std::uint32_t>> children;  // edge destinations per node
  std::vector<NodeKind> kinds;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> bounds;  // rep lo/hi
  // Largest finite min_depth; below max_depth - max_min_depth no choice can
  // overrun the budget, so the limiter skips its filter entirely.
  std::uint32_t max_min_depth = 1;

  static std::shared_ptr<const GenTables> build(const GrammarGraph& g);
};

// Wraps the user's sampler for one node's own choices; below the depth cap
// the choice is snapped onto the minimal-depth completion when the sampled
// one cannot terminate in the remaining budget. Exactly one inner sampler
// call is consumed per choice either way.
class DepthFilterSampler final : public Sampler {
 public:
  DepthFilterSampler(Sampler& inner, const GenTables& t, std::uint32_t own_node,
                     std::uint32_t depth, std::uint32_t max_depth)
      : inner_(inner), t_(t), own_(own_node), depth_(depth), max_depth_(max_depth) {}

  std::uint32_t sample_alt(std::uint32_t arity, std::uint32_t node) override {
    if (node != own_) return inner_.sample_alt(arity, node);
    const std::uint32_t pick = inner_.sample_alt(arity, node);
    const auto& kids = t_.children[own_];
    if (fits(kids[pick])) return pick;
    std::uint32_t best = arity;
    std::uint32_t best_md = GenTables::kInf;
    for (std::uint32_t i = 0; i < arity; ++i) {
      if (fits(kids[i]) && t_.min_depth[kids[i]] < best_md) {
        best = i;
        best_md = t_.min_depth[kids[i]];
      }
    }
    return best < arity ? best : pick;
  }

  std::uint32_t sample_rep(std::uint32_t lo, std::uint32_t hi, std::uint32_t node) override {
    if (node != own_) return inner_.sample_rep(lo, hi, node);
    const auto& kids = t_.children[own_];
    if (!kids.empty() && !fits(kids[0])) return lo;  // only reachable with lo == 0
    return inner_.sample_rep(lo, hi, node);
  }

  void effective_arity(std::uint32_t node, std::uint32_t arity) override {
    inner_.effective_arity(node, arity);
  }

 private:
  // A child placed one level below `depth_` can terminate within budget.
  bool fits(std::uint32_t child) const {
    const std::uint32_t md = t_.min_depth[child];
    return md != GenTables::kInf && depth_ + md <= max_depth_;
  }

  Sampler& inner_;
  const GenTables& t_;
  std::uint32_t own_;
  std::uint32_t depth_;
  std::uint32_t max_depth_;
};

// --- generator consultation ----------------------------------------------

template <class S, class Chain>
DynNode dyn_generate_value(const GrammarGraph& g, std::uint32_t id, S& s, Chain& chain);

template <class T, class S, class Chain>
T gen_value(S& s, Chain& chain);

// The sampler's concrete type threads through generation so its choice
// methods devirtualize; wrappers re-erase only on the cold paths. Results
// are built in place: prvalues flow into member initializers under
// guaranteed copy elision, and failures unwind as GenAbort.
template <class S, class Chain>
DynNode dyn_generate_default(const GrammarGraph& g, std::uint32_t id, S& s, Chain& chain) {
  const GraphNode& n = g.nodes[id];
  // array-indexed child lookups; no per-node scratch
  const auto kid = [&](std::size_t slot) { return g.edges[n.out[slot]].dst; };
  switch (n.kind) {
    case NodeKind::Terminal:
      return DynNode{id, DynNode::TerminalLeaf{}};
    case NodeKind::Head:
      return DynNode{id, DynNode::RefChild{Box<DynNode>::make_with(
                             [&] { return dyn_generate_value(g, kid(0), s, chain); })}};
    case NodeKind::Alt: {
      const std::uint32_t pick = s.sample_alt(static_cast<std::uint32_t>(n.out.size()), id);
      return DynNode{id, DynNode::VariantChoice{pick, Box<DynNode>::make_with([&] {
                                                  return dyn_generate_value(g, kid(pick), s, chain);
                                                })}};
    }
    case NodeKind::Concat: {
      DynNode::ConcatChildren cc;
      cc.children.reserve(n.out.size());
      for (std::size_t i = 0; i < n.out.size(); ++i) {
        cc.children.push_back(dyn_generate_value(g, kid(i), s, chain));
      }
      return DynNode{id, std::move(cc)};
    }
    case NodeKind::Star:
    case NodeKind::Plus:
    case NodeKind::Range: {
      const std::uint32_t count = s.sample_rep(n.rep_lo, n.rep_hi, id);
      DynNode::RepChildren rc;
      rc.children.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        rc.children.push_back(dyn_generate_value(g, kid(0), s, chain));
      }
      return DynNode{id, std::move(rc)};
    }
    case NodeKind::Option: {
      const std::uint32_t present = s.sample_rep(0, 2, id);
      if (!present) return DynNode{id, DynNode::OptionalChild{std::nullopt}};
      return DynNode{id, DynNode::OptionalChild{Box<DynNode>::make_with(
                             [&] { return dyn_generate_value(g, kid(0), s, chain); })}};
    }
  }
  throw GenAbort{GenErr::RetryExhausted};
}

// --- built-in generators ---------------------------------------------------

// Makes every stop node reachable through alternation-only chains from a
// flattened node equally likely, by replaying precomputed choice stacks.
class FlattenerSet {
 public:
  FlattenerSet() = default;

  // `targets` name graph nodes to flatten (typically rule heads). Fails with
  // CyclicAlternation when a target's alternation closure is cyclic.
  static Expected<FlattenerSet, GenErr> make(const GrammarGraph& g,
                                             const std::vector<std::uint32_t>& targets);

  bool offered(std::uint32_t node) const {
    return any_ && node < data_->offered.size() && data_->offered[node];
  }

  const std::vector<std::vector<std::uint32_t>>& stacks_for(std::uint32_t node) const {
    return data_->stacks[node];
  }

  template <class T, class S, class Chain>
  T generate_value(S& s, Chain& chain) {
    constexpr std::uint32_t id = T::definition().id;
    const auto& stacks = stacks_for(id);
    s.effective_arity(id, static_cast<std::uint32_t>(stacks.size()));
    const std::uint32_t pick = s.sample_alt(static_cast<std::uint32_t>(stacks.size()), id);
    ReplaySampler replay(stacks[pick], s);
    return T(GenInPlace{}, replay, chain);
  }

  template <class S, class Chain>
  DynNode generate_dyn_value(const GrammarGraph& g, std::uint32_t id, S& s, Chain& chain) {
    const auto& stacks = stacks_for(id);
    s.effective_arity(id, static_cast<std::uint32_t>(stacks.size()));
    const std::uint32_t pick = s.sample_alt(static_cast<std::uint32_t>(stacks.size()), id);
    ReplaySampler replay(stacks[pick], s);
    return dyn_generate_default(g, id, replay, chain);
  }

 private:
  struct Data {
    std::vector<bool> offered;
    std::vector<std::vector<std::vector<std::uint32_t>>> stacks;
  };
  std::shared_ptr<const Data> data_;
  bool any_ = false;
};

inline Expected<FlattenerSet, GenErr> flattener_for(const GrammarGraph& g, std::uint32_t node) {
  return FlattenerSet::make(g, {node});
}

// Tracks generation depth and steers choices so the tree never exceeds
// max_depth levels when a finite completion exists.
class DepthLimiter {
 public:
  DepthLimiter(std::shared_ptr<const GenTables> tables, std::uint32_t max_depth)
      : owner_(std::move(tables)), t_(owner_.get()), max_depth_(max_depth) {}
  DepthLimiter(const DepthLimiter& o)
      : owner_(o.owner_), t_(owner_.get()), max_depth_(o.max_depth_), depth_(o.depth_) {}
  DepthLimiter& operator=(const DepthLimiter& o) {
    owner_ = o.owner_;
    t_ = owner_.get();
    max_depth_ = o.max_depth_;
    depth_ = o.depth_;
    return *this;
  }

  bool offered(std::uint32_t) const { return true; }

  template <class T, class S, class Chain>
  T generate_value(S& s, Chain& chain) {
    constexpr std::uint32_t id = T::definition().id;
    if (!enter(id)) throw GenAbort{GenErr::DepthExceeded};
    const LeaveGuard guard{this};
    if (slack()) return T(GenInPlace{}, s, chain);
    return generate_steered_impl<T>(s, chain);
  }

  template <class S, class Chain>
  DynNode generate_dyn_value(const GrammarGraph& g, std::uint32_t id, S& s, Chain& chain) {
    if (!enter(id)) throw GenAbort{GenErr::DepthExceeded};
    const LeaveGuard guard{this};
    if (slack()) return dyn_generate_default(g, id, s, chain);
    return generate_dyn_steered(g, id, s, chain);
  }

  std::uint32_t max_depth() const { return max_depth_; }

 private:
  struct LeaveGuard {
    DepthLimiter* l;
    ~LeaveGuard() { --l->depth_; }
  };

  template <class T, class Chain>
  [[gnu::noinline]] T generate_steered_impl(Sampler& s, Chain& chain) {
    DepthFilterSampler filtered(s, *t_, T::definition().id, depth_, max_depth_);
    return T(GenInPlace{}, filtered, chain);
  }
  template <class Chain>
  [[gnu::noinline]] DynNode generate_dyn_steered(const GrammarGraph& g, std::uint32_t id,
                                                 Sampler& s, Chain& chain) {
    DepthFilterSampler filtered(s, *t_, id, depth_, max_depth_);
    return dyn_generate_default(g, id, filtered, chain);
  }

  bool enter(std::uint32_t id) {
    const std::uint32_t md = t_->min_depth[id];
    if (md == GenTables::kInf || depth_ + md > max_depth_) return false;
    ++depth_;
    return true;
  }
  // True when every possible child still has room for its minimal
  // completion, so no steering can trigger.
  bool slack() const { return depth_ + t_->max_min_depth <= max_depth_; }

  std::shared_ptr<const GenTables> owner_;
  const GenTables* t_ = nullptr;
  std::uint32_t max_depth_;
  std::uint32_t depth_ = 0;
};

// --- consultation order ----------------------------------------------------

namespace detail {

template <class T, class S, class Chain, std::size_t I = 0>
T consult_value(S& s, Chain& chain) {
  if constexpr (I == std::tuple_size_v<Chain>) {
    return T(GenInPlace{}, s, chain);
  } else {
    auto& gen = std::get<I>(chain);
    if (gen.offered(T::definition().id)) return gen.template generate_value<T>(s, chain);
    return consult_value<T, S, Chain, I + 1>(s, chain);
  }
}

template <class S, class Chain, std::size_t I = 0>
DynNode consult_dyn_value(const GrammarGraph& g, std::uint32_t id, S& s, Chain& chain) {
  if constexpr (I == std::tuple_size_v<Chain>) {
    return dyn_generate_default(g, id, s, chain);
  } else {
    auto& gen = std::get<I>(chain);
    if (gen.offered(id)) return gen.generate_dyn_value(g, id, s, chain);
    return consult_dyn_value<S, Chain, I + 1>(g, id, s, chain);
  }
}

}  // namespace detail

// Generators are consulted in chain order; the first offering one wins,
// default generation otherwise. The value forms throw GenAbort; the
// GenResult forms are the non-throwing API boundary.
template <class T, class S, class Chain>
T gen_value(S& s, Chain& chain) {
  return detail::consult_value<T, S, Chain>(s, chain);
}

template <class S, class Chain>
DynNode dyn_generate_value(const GrammarGraph& g, std::uint32_t id, S& s, Chain& chain) {
  return detail::consult_dyn_value<S, Chain>(g, id, s, chain);
}

template <class T, class S, class Chain>
GenResult<T> gen_node(S& s, Chain& chain) {
  try {
    return gen_value<T>(s, chain);
  } catch (const GenAbort& a) {
    return unexpected(a.err);
  }
}

template <class S, class Chain>
GenResult<DynNode> dyn_generate_node(const GrammarGraph& g, std::uint32_t id, S& s, Chain& chain) {
  try {
    return dyn_generate_value(g, id, s, chain);
  } catch (const GenAbort& a) {
    return unexpected(a.err);
  }
}

// --- retries and standard chain --------------------------------------------

constexpr int kRetryBudget = 8;

// Retries a failing generation a bounded number of times. Failures that are
// all DepthExceeded stay DepthExceeded (the condition is deterministic);
// mixed or other failures surface as RetryExhausted.
template <class F>
auto with_retries(F&& attempt) -> decltype(attempt()) {
  bool all_depth = true;
  for (int i = 0; i < kRetryBudget; ++i) {
    auto r = attempt();
    if (r.ok()) return r;
    if (r.error() != GenErr::DepthExceeded) all_depth = false;
  }
  return unexpected(all_depth ? GenErr::DepthExceeded : GenErr::RetryExhausted);
}

using StdChain = std::tuple<FlattenerSet, DepthLimiter>;

struct ChainConfig {
  std::uint32_t max_depth = 64;
  std::vector<std::uint32_t> flatten_nodes;
};

// Cheap to copy: the flattener and the tables are shared, only the depth
// counter is per-chain state.
Expected<StdChain, GenErr> make_chain(const GrammarGraph& g,
                                      std::shared_ptr<const GenTables> tables,
                                      const ChainConfig& cfg);

template <class S, class Chain>
Expected<DynTree, GenErr> dyn_generate(const GrammarGraph& g, std::uint32_t start, S& s,
                                       Chain& chain) {
  auto r = with_retries([&] { return dyn_generate_node(g, start, s, chain); });
  if (!r.ok()) return unexpected(r.error());
  return DynTree{std::move(r).value(), &g};
}

}  // namespace gevo
