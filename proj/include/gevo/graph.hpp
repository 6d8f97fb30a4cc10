#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gevo/grammar.hpp"

namespace gevo {

enum class NodeKind : std::uint8_t {
  Head,      // one per rule; single outgoing edge to the body
  Alt,
  Concat,
  Star,
  Plus,
  Range,
  Option,
  Terminal,
};

std::string_view node_kind_name(NodeKind k);

// Lightweight descriptor of a graph node; generated node types return the
// same shape from their constexpr definition().
struct NodeDef {
  std::uint32_t id = 0;
  NodeKind kind = NodeKind::Terminal;
  std::uint32_t arity = 0;   // Alt/Concat: child count; Head/reps: 1; Terminal: 0
  std::uint32_t rep_lo = 0;  // Star: 0, Plus: 1, Option: 0, Range: lo
  std::uint32_t rep_hi = 0;  // 0 = unbounded; Option: 2, Range: hi
  std::string_view literal;  // Terminal bytes
  std::string_view rule;     // owning rule name
};

struct GraphEdge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t index = 0;  // child slot; contiguous 0..k-1 on Alt/Concat
  bool indirect = false;
};

struct GraphNode {
  NodeKind kind = NodeKind::Terminal;
  std::uint32_t rep_lo = 0;
  std::uint32_t rep_hi = 0;
  std::string rule;     // owning rule
  std::string literal;  // Terminal only
  std::vector<std::uint32_t> out;  // edge ids in child-index order
  SourceSpan span;

  bool operator==(const GraphNode& o) const {
    return kind == o.kind && rep_lo == o.rep_lo && rep_hi == o.rep_hi && rule == o.rule &&
           literal == o.literal && out == o.out;
  }
};

struct GrammarGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::uint32_t start_node = 0;
  std::vector<std::pair<std::string, std::uint32_t>> rule_heads;  // rule order

  NodeDef def(std::uint32_t id) const;
  // Head node id for a rule name, or nullopt.
  std::optional<std::uint32_t> head_of(std::string_view rule) const;
  // Destination node ids of `id`'s outgoing edges, in child-index order.
  std::vector<std::uint32_t> children(std::uint32_t id) const;

  bool operator==(const GrammarGraph& o) const;
};

// Expands every rule into its subgraph and merges at the nonterminals.
// Node numbering is deterministic: rule order, then pre-order within a rule;
// references become edges to the target rule's head and add no node.
GrammarGraph build_graph(const GrammarAst& ast);

// Marks repetition->inner edges (plus self loops) indirect, then a feedback
// arc set of the remaining graph, computed with the Eades-Lin-Smyth greedy
// heuristic (deterministic, lowest node id on ties). Afterwards the subgraph
// of non-indirect edges is acyclic.
GrammarGraph mark_indirection(GrammarGraph g);

// Topological order of nodes over non-indirect edges; nullopt if cyclic.
std::optional<std::vector<std::uint32_t>> topo_order_direct(const GrammarGraph& g);

// All directed walks of <= k nodes that visit no node twice, sorted.
std::vector<std::vector<std::uint32_t>> enumerate_k_paths(const GrammarGraph& g, std::uint32_t k);

// Graphviz export; indirect edges are dashed.
std::string to_dot(const GrammarGraph& g);

}  // namespace gevo
