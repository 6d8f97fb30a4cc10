#include "gevo/refparse.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>
#include <unordered_set>

namespace gevo {

namespace {

struct Prod {
  std::uint32_t lhs;
  std::vector<std::uint32_t> rhs;
};

struct Item {
  std::uint32_t prod;
  std::uint32_t dot;
  std::uint32_t origin;
};

std::uint64_t item_key(const Item& it) {
  return (std::uint64_t(it.prod) << 40) ^ (std::uint64_t(it.dot) << 32) ^ it.origin;
}

std::uint64_t span_key(std::uint32_t sym, std::uint32_t i) {
  return (std::uint64_t(sym) << 32) | i;
}

struct Key3 {
  std::uint32_t a, b, c;
  bool operator==(const Key3& o) const { return a == o.a && b == o.b && c == o.c; }
};

struct Key3Hash {
  std::size_t operator()(const Key3& k) const {
    std::uint64_t h = k.a;
    h = h * 0x9e3779b97f4a7c15ull + k.b;
    h = h * 0x9e3779b97f4a7c15ull + k.c;
    h ^= h >> 29;
    return static_cast<std::size_t>(h * 0xbf58476d1ce4e5b9ull);
  }
};

struct Key4 {
  std::uint32_t a, b, c, d;
  bool operator==(const Key4& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
};

struct Key4Hash {
  std::size_t operator()(const Key4& k) const {
    std::uint64_t h = k.a;
    h = h * 0x9e3779b97f4a7c15ull + k.b;
    h = h * 0x9e3779b97f4a7c15ull + k.c;
    h = h * 0x9e3779b97f4a7c15ull + k.d;
    h ^= h >> 29;
    return static_cast<std::size_t>(h * 0x94d049bb133111ebull);
  }
};

}  // namespace

struct RefParser::Impl {
  const GrammarGraph* g;
  std::vector<Prod> prods;
  std::vector<std::vector<std::uint32_t>> prods_of;  // per symbol
  std::vector<bool> nullable;
  std::vector<std::vector<std::uint32_t>> kids;  // cached children per node

  explicit Impl(const GrammarGraph& graph) : g(&graph) {
    const std::size_t n = graph.nodes.size();
    prods_of.resize(n);
    kids.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) kids[i] = graph.children(i);
    for (std::uint32_t i = 0; i < n; ++i) {
      const GraphNode& node = graph.nodes[i];
      switch (node.kind) {
        case NodeKind::Terminal:
          break;  // scanned, not predicted
        case NodeKind::Head:
          add_prod(i, {kids[i][0]});
          break;
        case NodeKind::Alt:
          for (std::uint32_t c : kids[i]) add_prod(i, {c});
          break;
        case NodeKind::Concat:
          add_prod(i, kids[i]);
          break;
        case NodeKind::Star:
          add_prod(i, {});
          add_prod(i, {kids[i][0], i});
          break;
        case NodeKind::Plus:
          add_prod(i, {kids[i][0]});
          add_prod(i, {kids[i][0], i});
          break;
        case NodeKind::Range:
          for (std::uint32_t cnt = node.rep_lo; cnt < node.rep_hi; ++cnt) {
            add_prod(i, std::vector<std::uint32_t>(cnt, kids[i][0]));
          }
          break;
        case NodeKind::Option:
          add_prod(i, {});
          add_prod(i, {kids[i][0]});
          break;
      }
    }
    compute_nullable();
  }

  void add_prod(std::uint32_t lhs, std::vector<std::uint32_t> rhs) {
    prods_of[lhs].push_back(static_cast<std::uint32_t>(prods.size()));
    prods.push_back(Prod{lhs, std::move(rhs)});
  }

  bool is_terminal(std::uint32_t sym) const { return g->nodes[sym].kind == NodeKind::Terminal; }

  void compute_nullable() {
    nullable.assign(g->nodes.size(), false);
    for (std::uint32_t i = 0; i < g->nodes.size(); ++i) {
      if (is_terminal(i) && g->nodes[i].literal.empty()) nullable[i] = true;
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Prod& p : prods) {
        if (nullable[p.lhs]) continue;
        bool all = true;
        for (std::uint32_t s : p.rhs) {
          if (!nullable[s]) {
            all = false;
            break;
          }
        }
        if (all) {
          nullable[p.lhs] = true;
          changed = true;
        }
      }
    }
  }

  // --- recognition ---------------------------------------------------------

  struct Chart {
    struct Set {
      std::vector<Item> items;
      std::unordered_set<std::uint64_t> seen;
      std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> waiting;
    };
    std::vector<Set> sets;
    // completed spans: (sym, origin) -> sorted end positions
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> ends;
    std::unordered_set<std::uint64_t> done;  // dedupe of (sym, origin, end)
    std::size_t frontier = 0;                // farthest position with activity

    static std::uint64_t done_key(std::uint32_t sym, std::uint32_t i, std::uint32_t j) {
      return (std::uint64_t(sym) * 0x100000001b3ull) ^ (std::uint64_t(i) << 32) ^ j;
    }

    bool completed(std::uint32_t sym, std::uint32_t i, std::uint32_t j) const {
      return done.count(done_key(sym, i, j)) != 0;
    }
  };

  void add_item(Chart& chart, std::uint32_t set, Item it) const {
    auto& s = chart.sets[set];
    if (!s.seen.insert(item_key(it)).second) return;
    const Prod& p = prods[it.prod];
    if (it.dot < p.rhs.size() && !is_terminal(p.rhs[it.dot])) {
      s.waiting[p.rhs[it.dot]].push_back(static_cast<std::uint32_t>(s.items.size()));
    }
    s.items.push_back(it);
    chart.frontier = std::max(chart.frontier, static_cast<std::size_t>(set));
  }

  Chart run_chart(std::string_view input) const {
    Chart chart;
    chart.sets.resize(input.size() + 1);
    const std::uint32_t start = g->start_node;
    for (std::uint32_t p : prods_of[start]) add_item(chart, 0, Item{p, 0, 0});
    for (std::uint32_t j = 0; j <= input.size(); ++j) {
      auto& set = chart.sets[j];
      for (std::size_t idx = 0; idx < set.items.size(); ++idx) {
        const Item it = set.items[idx];
        const Prod& p = prods[it.prod];
        if (it.dot < p.rhs.size()) {
          const std::uint32_t sym = p.rhs[it.dot];
          if (is_terminal(sym)) {
            const std::string& lit = g->nodes[sym].literal;
            if (input.compare(j, lit.size(), lit) == 0 && j + lit.size() <= input.size()) {
              add_item(chart, j + static_cast<std::uint32_t>(lit.size()),
                       Item{it.prod, it.dot + 1, it.origin});
            }
          } else {
            for (std::uint32_t q : prods_of[sym]) add_item(chart, j, Item{q, 0, j});
            if (nullable[sym]) add_item(chart, j, Item{it.prod, it.dot + 1, it.origin});
          }
        } else {
          // complete
          if (chart.done.insert(Chart::done_key(p.lhs, it.origin, j)).second) {
            chart.ends[span_key(p.lhs, it.origin)].push_back(j);
            const auto& origin_set = chart.sets[it.origin];
            auto w = origin_set.waiting.find(p.lhs);
            if (w != origin_set.waiting.end()) {
              // note: completions into the current set may grow `waiting`
              // while we iterate; index-based loop over a copy of the size
              for (std::size_t wi = 0; wi < w->second.size(); ++wi) {
                const Item& parent = chart.sets[it.origin].items[w->second[wi]];
                add_item(chart, j, Item{parent.prod, parent.dot + 1, parent.origin});
              }
            }
          }
        }
      }
    }
    for (auto& [k, v] : chart.ends) std::sort(v.begin(), v.end());
    return chart;
  }

  // --- derivation ------------------------------------------------------------

  struct Deriver {
    const Impl& self;
    const Chart& chart;
    std::string_view input;
    std::unordered_set<Key3, Key3Hash> on_stack;
    std::unordered_set<Key3, Key3Hash> failed;
    std::unordered_set<Key4, Key4Hash> seq_failed;

    bool parseable(std::uint32_t sym, std::uint32_t i, std::uint32_t j) const {
      if (self.is_terminal(sym)) {
        const std::string& lit = self.g->nodes[sym].literal;
        return j - i == lit.size() && input.compare(i, lit.size(), lit) == 0;
      }
      return chart.completed(sym, i, j);
    }

    std::vector<std::uint32_t> ends_of(std::uint32_t sym, std::uint32_t i) const {
      if (self.is_terminal(sym)) {
        const std::string& lit = self.g->nodes[sym].literal;
        if (input.compare(i, lit.size(), lit) == 0 && i + lit.size() <= input.size()) {
          return {i + static_cast<std::uint32_t>(lit.size())};
        }
        return {};
      }
      auto it = chart.ends.find(span_key(sym, i));
      return it == chart.ends.end() ? std::vector<std::uint32_t>{} : it->second;
    }

    std::optional<DynNode> derive(std::uint32_t sym, std::uint32_t i, std::uint32_t j) {
      const Key3 key{sym, i, j};
      if (failed.count(key) || on_stack.count(key)) return std::nullopt;
      on_stack.insert(key);
      std::optional<DynNode> out = derive_inner(sym, i, j);
      on_stack.erase(key);
      if (!out) failed.insert(key);
      return out;
    }

    std::optional<DynNode> derive_inner(std::uint32_t sym, std::uint32_t i, std::uint32_t j) {
      const GraphNode& node = self.g->nodes[sym];
      const auto& kids = self.kids[sym];
      switch (node.kind) {
        case NodeKind::Terminal:
          return DynNode{sym, DynNode::TerminalLeaf{}};
        case NodeKind::Head: {
          if (!parseable(kids[0], i, j)) return std::nullopt;
          auto c = derive(kids[0], i, j);
          if (!c) return std::nullopt;
          return DynNode{sym, DynNode::RefChild{Box<DynNode>(std::move(*c))}};
        }
        case NodeKind::Alt: {
          for (std::uint32_t v = 0; v < kids.size(); ++v) {
            if (!parseable(kids[v], i, j)) continue;
            auto c = derive(kids[v], i, j);
            if (c) return DynNode{sym, DynNode::VariantChoice{v, Box<DynNode>(std::move(*c))}};
          }
          return std::nullopt;
        }
        case NodeKind::Concat: {
          auto children = derive_seq(sym, kids, 0, i, j);
          if (!children) return std::nullopt;
          return DynNode{sym, DynNode::ConcatChildren{std::move(*children)}};
        }
        case NodeKind::Star:
        case NodeKind::Plus: {
          auto elems = derive_rep(sym, kids[0], i, j, node.kind == NodeKind::Plus);
          if (!elems) return std::nullopt;
          return DynNode{sym, DynNode::RepChildren{std::move(*elems)}};
        }
        case NodeKind::Range: {
          for (std::uint32_t cnt = node.rep_lo; cnt < node.rep_hi; ++cnt) {
            auto elems = derive_rep_n(kids[0], i, j, cnt);
            if (elems) return DynNode{sym, DynNode::RepChildren{std::move(*elems)}};
          }
          return std::nullopt;
        }
        case NodeKind::Option: {
          if (i == j) return DynNode{sym, DynNode::OptionalChild{std::nullopt}};
          auto c = derive(kids[0], i, j);
          if (!c) return std::nullopt;
          return DynNode{sym, DynNode::OptionalChild{Box<DynNode>(std::move(*c))}};
        }
      }
      return std::nullopt;
    }

    // Leftmost split of rhs[idx..] over [pos, j).
    std::optional<std::vector<DynNode>> derive_seq(std::uint32_t sym,
                                                   const std::vector<std::uint32_t>& rhs,
                                                   std::uint32_t idx, std::uint32_t pos,
                                                   std::uint32_t j) {
      if (idx == rhs.size()) {
        if (pos == j) return std::vector<DynNode>{};
        return std::nullopt;
      }
      const Key4 key{sym, idx, pos, j};
      if (seq_failed.count(key)) return std::nullopt;
      for (std::uint32_t m : ends_of(rhs[idx], pos)) {
        if (m > j) break;
        // children after this one must cover [m, j)
        auto rest = derive_seq(sym, rhs, idx + 1, m, j);
        if (!rest) continue;
        auto first = derive(rhs[idx], pos, m);
        if (!first) continue;
        rest->insert(rest->begin(), std::move(*first));
        return rest;
      }
      seq_failed.insert(key);
      return std::nullopt;
    }

    // Star/Plus element list over [i, j); empty elements are only produced
    // for a fully empty match.
    std::optional<std::vector<DynNode>> derive_rep(std::uint32_t rep_sym, std::uint32_t inner,
                                                   std::uint32_t i, std::uint32_t j,
                                                   bool at_least_one) {
      if (i == j) {
        if (!at_least_one) return std::vector<DynNode>{};
        auto only = derive(inner, i, j);
        if (!only) return std::nullopt;
        std::vector<DynNode> out;
        out.push_back(std::move(*only));
        return out;
      }
      const Key4 key{rep_sym, 0x7fffffffu, i, j};
      if (seq_failed.count(key)) return std::nullopt;
      for (std::uint32_t m : ends_of(inner, i)) {
        if (m <= i || m > j) continue;  // strict progress
        if (m < j) {
          auto rest = derive_rep(rep_sym, inner, m, j, false);
          if (!rest) continue;
          auto first = derive(inner, i, m);
          if (!first) continue;
          rest->insert(rest->begin(), std::move(*first));
          return rest;
        }
        auto only = derive(inner, i, j);
        if (only) {
          std::vector<DynNode> out;
          out.push_back(std::move(*only));
          return out;
        }
      }
      seq_failed.insert(key);
      return std::nullopt;
    }

    std::optional<std::vector<DynNode>> derive_rep_n(std::uint32_t inner, std::uint32_t i,
                                                     std::uint32_t j, std::uint32_t n) {
      if (n == 0) {
        if (i == j) return std::vector<DynNode>{};
        return std::nullopt;
      }
      for (std::uint32_t m : ends_of(inner, i)) {
        if (m > j) break;
        auto rest = derive_rep_n(inner, m, j, n - 1);
        if (!rest) continue;
        auto first = derive(inner, i, m);
        if (!first) continue;
        rest->insert(rest->begin(), std::move(*first));
        return rest;
      }
      return std::nullopt;
    }
  };
};

RefParser::RefParser(const GrammarGraph& g) : impl_(std::make_unique<Impl>(g)) {}
RefParser::~RefParser() = default;
RefParser::RefParser(RefParser&&) noexcept = default;
RefParser& RefParser::operator=(RefParser&&) noexcept = default;

const GrammarGraph& RefParser::graph() const { return *impl_->g; }

bool RefParser::accepts(std::string_view input) const {
  Impl::Chart chart = impl_->run_chart(input);
  return chart.completed(impl_->g->start_node, 0, static_cast<std::uint32_t>(input.size()));
}

Expected<DynTree, ParseError> RefParser::parse(std::string_view input) const {
  Impl::Chart chart = impl_->run_chart(input);
  const auto n = static_cast<std::uint32_t>(input.size());
  if (!chart.completed(impl_->g->start_node, 0, n)) {
    return unexpected(ParseError{chart.frontier, "input not derivable from grammar"});
  }
  Impl::Deriver d{*impl_, chart, input, {}, {}, {}};
  auto root = d.derive(impl_->g->start_node, 0, n);
  if (!root) {
    return unexpected(ParseError{0, "derivation extraction failed"});
  }
  return DynTree{std::move(*root), impl_->g};
}

}  // namespace gevo
