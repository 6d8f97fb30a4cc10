#include "gevo/graph.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>

#include "gevo/util.hpp"

namespace gevo {

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Head: return "head";
    case NodeKind::Alt: return "alt";
    case NodeKind::Concat: return "concat";
    case NodeKind::Star: return "star";
    case NodeKind::Plus: return "plus";
    case NodeKind::Range: return "range";
    case NodeKind::Option: return "option";
    case NodeKind::Terminal: return "terminal";
  }
  return "?";
}

NodeDef GrammarGraph::def(std::uint32_t id) const {
  const GraphNode& n = nodes[id];
  NodeDef d;
  d.id = id;
  d.kind = n.kind;
  d.arity = static_cast<std::uint32_t>(n.out.size());
  d.rep_lo = n.rep_lo;
  d.rep_hi = n.rep_hi;
  d.literal = n.literal;
  d.rule = n.rule;
  return d;
}

std::optional<std::uint32_t> GrammarGraph::head_of(std::string_view rule) const {
  for (const auto& [name, id] : rule_heads) {
    if (name == rule) return id;
  }
  return std::nullopt;
}

std::vector<std::uint32_t> GrammarGraph::children(std::uint32_t id) const {
  std::vector<std::uint32_t> out;
  out.reserve(nodes[id].out.size());
  for (std::uint32_t e : nodes[id].out) out.push_back(edges[e].dst);
  return out;
}

bool GrammarGraph::operator==(const GrammarGraph& o) const {
  auto edge_eq = [](const GraphEdge& a, const GraphEdge& b) {
    return a.src == b.src && a.dst == b.dst && a.index == b.index && a.indirect == b.indirect;
  };
  if (nodes != o.nodes || edges.size() != o.edges.size() || start_node != o.start_node ||
      rule_heads != o.rule_heads) {
    return false;
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!edge_eq(edges[i], o.edges[i])) return false;
  }
  return true;
}

namespace {

// Number of graph nodes an expression expands to (references become edges).
std::uint32_t expr_node_count(const Expr& e) {
  if (e.kind == Expr::Kind::Reference) return 0;
  std::uint32_t n = 1;
  for (const Expr& c : e.children) n += expr_node_count(c);
  return n;
}

struct GraphBuilder {
  const GrammarAst& ast;
  GrammarGraph g;
  std::map<std::string_view, std::uint32_t> heads;

  explicit GraphBuilder(const GrammarAst& a) : ast(a) {}

  void add_edge(std::uint32_t src, std::uint32_t index, std::uint32_t dst) {
    g.nodes[src].out.push_back(static_cast<std::uint32_t>(g.edges.size()));
    g.edges.push_back(GraphEdge{src, dst, index, false});
  }

  std::uint32_t add_node(NodeKind kind, const std::string& rule, const SourceSpan& span) {
    GraphNode n;
    n.kind = kind;
    n.rule = rule;
    n.span = span;
    g.nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(g.nodes.size() - 1);
  }

  // Builds the subgraph for `e` and returns the node the parent should point
  // at: for references that is the target rule's head.
  std::uint32_t build_expr(const Expr& e, const std::string& rule) {
    switch (e.kind) {
      case Expr::Kind::Reference:
        return heads.at(e.text);
      case Expr::Kind::Terminal: {
        std::uint32_t id = add_node(NodeKind::Terminal, rule, e.span);
        g.nodes[id].literal = e.text;
        return id;
      }
      case Expr::Kind::Concat:
      case Expr::Kind::Alt: {
        std::uint32_t id =
            add_node(e.kind == Expr::Kind::Concat ? NodeKind::Concat : NodeKind::Alt, rule, e.span);
        for (std::uint32_t i = 0; i < e.children.size(); ++i) {
          std::uint32_t child = build_expr(e.children[i], rule);
          add_edge(id, i, child);
        }
        return id;
      }
      case Expr::Kind::Star:
      case Expr::Kind::Plus:
      case Expr::Kind::Range:
      case Expr::Kind::Option: {
        NodeKind k = e.kind == Expr::Kind::Star     ? NodeKind::Star
                     : e.kind == Expr::Kind::Plus   ? NodeKind::Plus
                     : e.kind == Expr::Kind::Range  ? NodeKind::Range
                                                    : NodeKind::Option;
        std::uint32_t id = add_node(k, rule, e.span);
        switch (k) {
          case NodeKind::Star: g.nodes[id].rep_lo = 0; g.nodes[id].rep_hi = 0; break;
          case NodeKind::Plus: g.nodes[id].rep_lo = 1; g.nodes[id].rep_hi = 0; break;
          case NodeKind::Range: g.nodes[id].rep_lo = e.lo; g.nodes[id].rep_hi = e.hi; break;
          default: g.nodes[id].rep_lo = 0; g.nodes[id].rep_hi = 2; break;
        }
        std::uint32_t child = build_expr(e.children[0], rule);
        add_edge(id, 0, child);
        return id;
      }
    }
    assert(false);
    return 0;
  }

  GrammarGraph run() {
    // Head ids are fixed up front so forward references resolve.
    std::uint32_t next_id = 0;
    for (const Rule& r : ast.rules) {
      heads[r.name] = next_id;
      next_id += 1 + expr_node_count(r.body);
    }
    for (const Rule& r : ast.rules) {
      std::uint32_t head = add_node(NodeKind::Head, r.name, r.span);
      assert(head == heads[r.name]);
      (void)head;
      g.rule_heads.emplace_back(r.name, heads[r.name]);
      std::uint32_t body = build_expr(r.body, r.name);
      add_edge(heads[r.name], 0, body);
    }
    g.start_node = heads.at(ast.start);
    return std::move(g);
  }
};

// Eades-Lin-Smyth greedy vertex sequence. Edges running from a later to an
// earlier sequence position form the feedback arc set.
std::vector<std::uint32_t> els_sequence(std::uint32_t n,
                                        const std::vector<std::pair<std::uint32_t, std::uint32_t>>& arcs) {
  std::vector<int> outdeg(n, 0), indeg(n, 0);
  std::vector<bool> removed(n, false);
  // multiplicity-aware adjacency
  std::vector<std::vector<std::uint32_t>> out_adj(n), in_adj(n);
  for (auto [u, v] : arcs) {
    ++outdeg[u];
    ++indeg[v];
    out_adj[u].push_back(v);
    in_adj[v].push_back(u);
  }
  std::vector<std::uint32_t> s1, s2;  // s2 collected in removal order, reversed at the end
  std::uint32_t remaining = n;

  auto remove_vertex = [&](std::uint32_t v) {
    removed[v] = true;
    --remaining;
    for (std::uint32_t w : out_adj[v]) {
      if (!removed[w]) --indeg[w];
    }
    for (std::uint32_t w : in_adj[v]) {
      if (!removed[w]) --outdeg[w];
    }
  };

  while (remaining > 0) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::uint32_t v = 0; v < n; ++v) {
        if (!removed[v] && outdeg[v] == 0) {
          remove_vertex(v);
          s2.push_back(v);
          progress = true;
        }
      }
    }
    progress = true;
    while (progress) {
      progress = false;
      for (std::uint32_t v = 0; v < n; ++v) {
        if (!removed[v] && outdeg[v] != 0 && indeg[v] == 0) {
          remove_vertex(v);
          s1.push_back(v);
          progress = true;
        }
      }
    }
    if (remaining == 0) break;
    std::uint32_t best = n;
    int best_delta = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (removed[v]) continue;
      int delta = outdeg[v] - indeg[v];
      if (best == n || delta > best_delta) {
        best = v;
        best_delta = delta;
      }
    }
    if (best == n) break;
    remove_vertex(best);
    s1.push_back(best);
  }
  s1.insert(s1.end(), s2.rbegin(), s2.rend());
  return s1;
}

}  // namespace

GrammarGraph build_graph(const GrammarAst& ast) {
  return GraphBuilder(ast).run();
}

GrammarGraph mark_indirection(GrammarGraph g) {
  // Repetition containers already imply a separate allocation; their edges
  // (and self loops) are removed before the feedback arc set is computed.
  for (GraphEdge& e : g.edges) {
    NodeKind k = g.nodes[e.src].kind;
    if (k == NodeKind::Star || k == NodeKind::Plus || k == NodeKind::Range ||
        k == NodeKind::Option || e.src == e.dst) {
      e.indirect = true;
    }
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
  for (const GraphEdge& e : g.edges) {
    if (!e.indirect) arcs.emplace_back(e.src, e.dst);
  }
  std::vector<std::uint32_t> seq = els_sequence(static_cast<std::uint32_t>(g.nodes.size()), arcs);
  std::vector<std::uint32_t> pos(g.nodes.size());
  for (std::uint32_t i = 0; i < seq.size(); ++i) pos[seq[i]] = i;
  for (GraphEdge& e : g.edges) {
    if (!e.indirect && pos[e.src] > pos[e.dst]) e.indirect = true;
  }
  assert(topo_order_direct(g).has_value());
  return g;
}

std::optional<std::vector<std::uint32_t>> topo_order_direct(const GrammarGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<int> indeg(n, 0);
  for (const GraphEdge& e : g.edges) {
    if (!e.indirect) ++indeg[e.dst];
  }
  std::vector<std::uint32_t> order;
  std::vector<bool> done(n, false);
  for (;;) {
    bool progress = false;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (done[v] || indeg[v] != 0) continue;
      done[v] = true;
      order.push_back(v);
      for (std::uint32_t eid : g.nodes[v].out) {
        if (!g.edges[eid].indirect) --indeg[g.edges[eid].dst];
      }
      progress = true;
    }
    if (!progress) break;
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

std::vector<std::vector<std::uint32_t>> enumerate_k_paths(const GrammarGraph& g, std::uint32_t k) {
  std::set<std::vector<std::uint32_t>> paths;
  std::vector<std::uint32_t> walk;
  std::vector<bool> on_walk(g.nodes.size(), false);
  auto dfs = [&](std::uint32_t v, auto&& self) -> void {
    walk.push_back(v);
    on_walk[v] = true;
    paths.insert(walk);
    if (walk.size() < k) {
      for (std::uint32_t c : g.children(v)) {
        if (!on_walk[c]) self(c, self);
      }
    }
    on_walk[v] = false;
    walk.pop_back();
  };
  for (std::uint32_t v = 0; v < g.nodes.size(); ++v) dfs(v, dfs);
  return std::vector<std::vector<std::uint32_t>>(paths.begin(), paths.end());
}

std::string to_dot(const GrammarGraph& g) {
  std::string out = "digraph grammar {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    const GraphNode& n = g.nodes[i];
    std::string label;
    switch (n.kind) {
      case NodeKind::Head: label = "<" + n.rule + ">"; break;
      case NodeKind::Alt: label = "|"; break;
      case NodeKind::Concat: label = "~"; break;
      case NodeKind::Star: label = "*"; break;
      case NodeKind::Plus: label = "+"; break;
      case NodeKind::Range:
        label = "{" + std::to_string(n.rep_lo) + "," + std::to_string(n.rep_hi) + "}";
        break;
      case NodeKind::Option: label = "?"; break;
      case NodeKind::Terminal: label = "\\\"" + escape_bytes(n.literal, true) + "\\\""; break;
    }
    std::string escaped;
    for (char c : label) {
      if (c == '"') escaped += "\\\"";
      else escaped += c;
    }
    out += "  n" + std::to_string(i) + " [label=\"" + escaped + "\"];\n";
  }
  for (const GraphEdge& e : g.edges) {
    const GraphNode& src = g.nodes[e.src];
    std::string label;
    switch (src.kind) {
      case NodeKind::Star: label = "0.."; break;
      case NodeKind::Plus: label = "1.."; break;
      case NodeKind::Range:
        label = std::to_string(src.rep_lo) + ".." + std::to_string(src.rep_hi);
        break;
      case NodeKind::Option: label = "0..1"; break;
      default: label = std::to_string(e.index);
    }
    out += "  n" + std::to_string(e.src) + " -> n" + std::to_string(e.dst) + " [label=\"" + label +
           "\"" + (e.indirect ? ", style=dashed" : "") + "];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace gevo
