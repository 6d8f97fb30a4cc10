#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "gevo/graph.hpp"
#include "gevo/visit.hpp"

namespace gevo {

struct KPathReport {
  std::uint32_t k = 0;
  std::size_t covered = 0;
  std::size_t total = 0;
  double percent = 0.0;  // 0..100
};

class GrammarMismatch : public std::runtime_error {
 public:
  GrammarMismatch() : std::runtime_error("tree does not belong to this grammar graph") {}
};

namespace detail {

inline std::string pack_chain(const std::uint32_t* ids, std::size_t len) {
  std::string key(len * 4, '\0');
  for (std::size_t i = 0; i < len; ++i) {
    const std::uint32_t v = ids[i];
    key[i * 4 + 0] = static_cast<char>(v & 0xff);
    key[i * 4 + 1] = static_cast<char>((v >> 8) & 0xff);
    key[i * 4 + 2] = static_cast<char>((v >> 16) & 0xff);
    key[i * 4 + 3] = static_cast<char>((v >> 24) & 0xff);
  }
  return key;
}

// Records every ancestor chain of length <= k ending at the visited node;
// chains revisiting a graph node are excluded to match the static
// denominator's simple-walk definition.
struct ChainCollector {
  ChainCollector(std::uint32_t k_, std::unordered_set<std::string>* out_) : k(k_), out(out_) {}
  std::uint32_t k;
  std::unordered_set<std::string>* out;
  std::vector<std::uint32_t> stack;

  using Break = NoBreak;
  using Error = NoError;

  template <class View>
  VisitNext<ChainCollector> visit(View node, std::size_t) && {
    stack.push_back(node.definition().id);
    const std::size_t depth = stack.size();
    const std::size_t max_len = std::min<std::size_t>(k, depth);
    for (std::size_t len = 1; len <= max_len; ++len) {
      const std::uint32_t* first = stack.data() + (depth - len);
      bool simple = true;
      for (std::size_t a = 0; a < len && simple; ++a) {
        for (std::size_t b = a + 1; b < len; ++b) {
          if (first[a] == first[b]) {
            simple = false;
            break;
          }
        }
      }
      if (simple) out->insert(pack_chain(first, len));
    }
    auto r = node.visit_each(std::move(*this));
    if (!r.is_continue()) return r;
    ChainCollector self = std::move(r).take_continue();
    self.stack.pop_back();
    return visit_continue(std::move(self));
  }
};

}  // namespace detail

template <class View>
void collect_kpath_chains(View root, std::uint32_t k, std::unordered_set<std::string>& out) {
  (void)detail::ChainCollector(k, &out).visit(root, 0);
}

// Checks that a (sub)tree structurally belongs to the graph: node ids exist,
// descriptors agree, and every child follows a graph edge.
template <class View>
bool tree_matches_graph(View node, const GrammarGraph& g) {
  const NodeDef d = node.definition();
  if (d.id >= g.nodes.size()) return false;
  const NodeDef gd = g.def(d.id);
  if (d.kind != gd.kind || d.rule != gd.rule || d.literal != gd.literal ||
      d.rep_lo != gd.rep_lo || d.rep_hi != gd.rep_hi) {
    return false;
  }
  const std::vector<std::uint32_t> kids = g.children(d.id);
  std::size_t count = 0;
  for (std::size_t i = 0;; ++i) {
    auto child = nth_child(node, i);
    if (!child) break;
    ++count;
    const std::uint32_t cid = child->definition().id;
    bool edge_ok = false;
    switch (d.kind) {
      case NodeKind::Concat:
        edge_ok = i < kids.size() && cid == kids[i];
        break;
      case NodeKind::Alt:
        edge_ok = std::find(kids.begin(), kids.end(), cid) != kids.end();
        break;
      default:
        edge_ok = !kids.empty() && cid == kids[0];
    }
    if (!edge_ok || !tree_matches_graph(*child, g)) return false;
  }
  switch (d.kind) {
    case NodeKind::Terminal: return count == 0;
    case NodeKind::Head: return count == 1;
    case NodeKind::Alt: return count == 1;
    case NodeKind::Concat: return count == kids.size();
    case NodeKind::Option: return count <= 1;
    case NodeKind::Star:
    case NodeKind::Plus:
    case NodeKind::Range:
      return count >= d.rep_lo && (d.rep_hi == 0 || count < d.rep_hi);
  }
  return false;
}

// Denominator from enumerate_k_paths, packed for intersection.
std::unordered_set<std::string> kpath_denominator(const GrammarGraph& g, std::uint32_t k);

KPathReport kpath_report(const std::unordered_set<std::string>& observed, const GrammarGraph& g,
                         std::uint32_t k);

// Scores a forest of trees against the grammar graph. Throws GrammarMismatch
// when a tree's node ids do not belong to the graph.
template <class Backend>
KPathReport kpath_cover(const Backend& backend, const std::vector<typename Backend::Tree>& forest,
                        const GrammarGraph& g, std::uint32_t k) {
  std::unordered_set<std::string> observed;
  for (const auto& tree : forest) {
    auto root = Backend::view(tree);
    if (!tree_matches_graph(root, g)) throw GrammarMismatch();
    collect_kpath_chains(root, k, observed);
  }
  return kpath_report(observed, g, k);
}

}  // namespace gevo
