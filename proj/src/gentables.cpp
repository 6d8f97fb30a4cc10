#include <algorithm>

#include "gevo/gen.hpp"

namespace gevo {

namespace {

std::uint32_t sat_add(std::uint32_t a, std::uint32_t b) {
  if (a == GenTables::kInf || b == GenTables::kInf) return GenTables::kInf;
  const std::uint64_t s = std::uint64_t(a) + b;
  return s >= GenTables::kInf ? GenTables::kInf : static_cast<std::uint32_t>(s);
}

}  // namespace

std::shared_ptr<const GenTables> GenTables::build(const GrammarGraph& g) {
  auto t = std::make_shared<GenTables>();
  const std::size_t n = g.nodes.size();
  t->min_depth.assign(n, kInf);
  t->children.resize(n);
  t->kinds.resize(n);
  t->bounds.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    t->children[i] = g.children(i);
    t->kinds[i] = g.nodes[i].kind;
    t->bounds[i] = {g.nodes[i].rep_lo, g.nodes[i].rep_hi};
  }
  // Knuth-style fixpoint over node depths.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto& kids = t->children[i];
      std::uint32_t md = kInf;
      switch (t->kinds[i]) {
        case NodeKind::Terminal:
          md = 1;
          break;
        case NodeKind::Head:
          md = sat_add(1, t->min_depth[kids[0]]);
          break;
        case NodeKind::Alt: {
          std::uint32_t best = kInf;
          for (std::uint32_t c : kids) best = std::min(best, t->min_depth[c]);
          md = sat_add(1, best);
          break;
        }
        case NodeKind::Concat: {
          std::uint32_t worst = 0;
          for (std::uint32_t c : kids) worst = std::max(worst, t->min_depth[c]);
          md = sat_add(1, worst);
          break;
        }
        case NodeKind::Star:
        case NodeKind::Option:
          md = 1;  // zero elements terminate immediately
          break;
        case NodeKind::Plus:
          md = sat_add(1, t->min_depth[kids[0]]);
          break;
        case NodeKind::Range:
          md = t->bounds[i].first == 0 ? 1 : sat_add(1, t->min_depth[kids[0]]);
          break;
      }
      if (md < t->min_depth[i]) {
        t->min_depth[i] = md;
        changed = true;
      }
    }
  }
  t->max_min_depth = 1;
  for (std::uint32_t md : t->min_depth) {
    if (md != kInf) t->max_min_depth = std::max(t->max_min_depth, md);
  }
  return t;
}

Expected<FlattenerSet, GenErr> FlattenerSet::make(const GrammarGraph& g,
                                                  const std::vector<std::uint32_t>& targets) {
  FlattenerSet f;
  auto data = std::make_shared<Data>();
  data->offered.assign(g.nodes.size(), false);
  data->stacks.resize(g.nodes.size());

  for (std::uint32_t target : targets) {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> stack;
    std::vector<bool> on_walk(g.nodes.size(), false);
    bool cyclic = false;
    // Flattening traverses heads silently and records a pick per
    // alternation; anything else stops the chain.
    auto walk = [&](std::uint32_t id, auto&& self) -> void {
      if (cyclic) return;
      if (on_walk[id]) {
        cyclic = true;
        return;
      }
      const NodeKind k = g.nodes[id].kind;
      if (k == NodeKind::Head) {
        on_walk[id] = true;
        self(g.children(id)[0], self);
        on_walk[id] = false;
        return;
      }
      if (k == NodeKind::Alt) {
        on_walk[id] = true;
        const auto kids = g.children(id);
        for (std::uint32_t i = 0; i < kids.size(); ++i) {
          stack.push_back(i);
          self(kids[i], self);
          stack.pop_back();
        }
        on_walk[id] = false;
        return;
      }
      out.push_back(stack);
    };
    walk(target, walk);
    if (cyclic) return unexpected(GenErr::CyclicAlternation);
    data->stacks[target] = std::move(out);
    data->offered[target] = true;
    f.any_ = true;
  }
  f.data_ = std::move(data);
  return f;
}

Expected<StdChain, GenErr> make_chain(const GrammarGraph& g,
                                      std::shared_ptr<const GenTables> tables,
                                      const ChainConfig& cfg) {
  auto flattener = FlattenerSet::make(g, cfg.flatten_nodes);
  if (!flattener.ok()) return unexpected(flattener.error());
  return StdChain{std::move(flattener).value(), DepthLimiter(std::move(tables), cfg.max_depth)};
}

}  // namespace gevo
