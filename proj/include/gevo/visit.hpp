#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gevo/graph.hpp"
#include "gevo/util.hpp"

namespace gevo {

// Child indices from the root. An alternation or head contributes index 0
// for its single tree child; concatenations and repetitions contribute the
// child's position.
using NodePath = std::vector<std::uint32_t>;

struct NoBreak {};
struct NoError {};
struct SinkError {};

struct InvalidPath {
  std::uint32_t index;
  std::uint32_t depth;
};

// Outcome of one visit: either the threaded visitor state (Continue), a
// Break value that aborts the traversal, or an Error. Visitor state moves
// linearly: a Continue value is consumed at most once.
template <class V>
class VisitNext {
  struct Brk {
    typename V::Break value;
  };
  struct Err {
    typename V::Error value;
  };

 public:
  static VisitNext cont(V v) { return VisitNext(Repr(std::in_place_index<0>, std::move(v))); }
  static VisitNext brk(typename V::Break b) {
    return VisitNext(Repr(std::in_place_index<1>, Brk{std::move(b)}));
  }
  static VisitNext err(typename V::Error e) {
    return VisitNext(Repr(std::in_place_index<2>, Err{std::move(e)}));
  }

  bool is_continue() const { return v_.index() == 0; }
  bool is_break() const { return v_.index() == 1; }
  bool is_error() const { return v_.index() == 2; }

  V take_continue() && { return std::get<0>(std::move(v_)); }
  typename V::Break take_break() && { return std::get<1>(std::move(v_)).value; }
  typename V::Error take_error() && { return std::get<2>(std::move(v_)).value; }

 private:
  using Repr = std::variant<V, Brk, Err>;
  explicit VisitNext(Repr v) : v_(std::move(v)) {}
  Repr v_;
};

template <class V>
VisitNext<V> visit_continue(V v) {
  return VisitNext<V>::cont(std::move(v));
}

template <class V>
VisitNext<V> visit_break(typename V::Break b) {
  return VisitNext<V>::brk(std::move(b));
}

template <class V>
VisitNext<V> visit_error(typename V::Error e) {
  return VisitNext<V>::err(std::move(e));
}

template <class V, class ChildView>
VisitNext<V> visit_child(V v, ChildView child, std::size_t idx) {
  return std::move(v).visit(child, idx);
}

// --- byte sinks ---------------------------------------------------------

struct StringSink {
  std::string data;
  bool write(std::string_view bytes) {
    data.append(bytes);
    return true;
  }
};

// Fails after `limit` bytes; for exercising error forwarding.
struct TruncatingSink {
  std::size_t limit;
  std::string data;
  bool write(std::string_view b) {
    if (data.size() + b.size() > limit) {
      data.append(b.substr(0, limit - data.size()));
      return false;
    }
    data.append(b);
    return true;
  }
};

// --- built-in visitors ---------------------------------------------------

// Serializes a tree by concatenating terminal bytes in leaf order.
template <class SinkT>
struct TreeWriter {
  explicit TreeWriter(SinkT* s) : sink(s) {}
  SinkT* sink;
  std::size_t written = 0;

  using Break = NoBreak;
  using Error = SinkError;

  template <class View>
  VisitNext<TreeWriter> visit(View node, std::size_t) && {
    const NodeDef def = node.definition();
    if (def.kind == NodeKind::Terminal) {
      if (!sink->write(def.literal)) return visit_error<TreeWriter>(SinkError{});
      written += def.literal.size();
      return visit_continue(std::move(*this));
    }
    return node.visit_each(std::move(*this));
  }
};

template <class View, class SinkT>
Expected<std::size_t, SinkError> write_tree(View root, SinkT& sink) {
  auto r = TreeWriter<SinkT>(&sink).visit(root, 0);
  if (r.is_continue()) return std::move(r).take_continue().written;
  return unexpected(SinkError{});
}

template <class View>
std::string serialize_tree(View root) {
  StringSink sink;
  (void)write_tree(root, sink);
  return std::move(sink.data);
}

// Nonterminal heads plus terminals; structural intermediaries are skipped.
struct SymbolCounter {
  std::size_t count = 0;

  using Break = NoBreak;
  using Error = NoError;

  template <class View>
  VisitNext<SymbolCounter> visit(View node, std::size_t) && {
    const NodeDef def = node.definition();
    if (def.kind == NodeKind::Head || def.kind == NodeKind::Terminal) ++count;
    return node.visit_each(std::move(*this));
  }
};

template <class View>
std::size_t count_symbol_nodes(View root) {
  auto r = SymbolCounter{}.visit(root, 0);
  return std::move(r).take_continue().count;
}

struct TotalCounter {
  std::size_t count = 0;
  using Break = NoBreak;
  using Error = NoError;
  template <class View>
  VisitNext<TotalCounter> visit(View node, std::size_t) && {
    ++count;
    return node.visit_each(std::move(*this));
  }
};

template <class View>
std::size_t count_all_nodes(View root) {
  auto r = TotalCounter{}.visit(root, 0);
  return std::move(r).take_continue().count;
}

template <class Pred>
struct PathCollector {
  explicit PathCollector(Pred p) : pred(std::move(p)) {}
  Pred pred;
  std::vector<NodePath> out;
  NodePath cur;
  std::size_t depth = 0;

  using Break = NoBreak;
  using Error = NoError;

  template <class View>
  VisitNext<PathCollector> visit(View node, std::size_t idx) && {
    if (depth > 0) cur.push_back(static_cast<std::uint32_t>(idx));
    ++depth;
    if (pred(node.definition())) out.push_back(cur);
    auto r = node.visit_each(std::move(*this));
    if (!r.is_continue()) return r;
    PathCollector self = std::move(r).take_continue();
    --self.depth;
    if (self.depth > 0) self.cur.pop_back();
    return visit_continue(std::move(self));
  }
};

// Pre-order paths of nodes whose descriptor satisfies `pred`.
template <class View, class Pred>
std::vector<NodePath> collect_paths(View root, Pred pred) {
  auto r = PathCollector<Pred>(std::move(pred)).visit(root, 0);
  return std::move(r).take_continue().out;
}

// All and only paths whose node has the given graph-node type, pre-order.
template <class View>
std::vector<NodePath> find_same_type_subtrees(View root, std::uint32_t node_id) {
  return collect_paths(root, [node_id](const NodeDef& d) { return d.id == node_id; });
}

template <class View>
std::vector<NodePath> all_node_paths(View root) {
  return collect_paths(root, [](const NodeDef&) { return true; });
}

// --- path resolution ------------------------------------------------------

template <class AnyRefT>
struct NthChild {
  std::size_t want;

  using Break = AnyRefT;
  using Error = NoError;

  template <class View>
  VisitNext<NthChild> visit(View node, std::size_t idx) && {
    if (idx == want) return visit_break<NthChild>(node.any_ref());
    return visit_continue(std::move(*this));
  }
};

template <class View>
std::optional<typename View::AnyRefT> nth_child(View parent, std::size_t i) {
  auto r = parent.visit_each(NthChild<typename View::AnyRefT>{i});
  if (r.is_break()) return std::move(r).take_break();
  return std::nullopt;
}

template <class View>
Expected<typename View::AnyRefT, InvalidPath> resolve_path(View root, const NodePath& path) {
  typename View::AnyRefT cur = root.any_ref();
  for (std::size_t d = 0; d < path.size(); ++d) {
    auto c = nth_child(cur, path[d]);
    if (!c) return unexpected(InvalidPath{path[d], static_cast<std::uint32_t>(d)});
    cur = std::move(*c);
  }
  return cur;
}

template <class AnyMutT>
struct NthChildMut {
  std::size_t want;

  using Break = AnyMutT;
  using Error = NoError;

  template <class MutView>
  VisitNext<NthChildMut> visit(MutView node, std::size_t idx) && {
    if (idx == want) return visit_break<NthChildMut>(node.any_mut());
    return visit_continue(std::move(*this));
  }
};

template <class MutView>
std::optional<typename MutView::AnyMutT> nth_child_mut(MutView parent, std::size_t i) {
  auto r = parent.visit_each_mut(NthChildMut<typename MutView::AnyMutT>{i});
  if (r.is_break()) return std::move(r).take_break();
  return std::nullopt;
}

template <class MutView>
Expected<typename MutView::AnyMutT, InvalidPath> resolve_path_mut(MutView root, const NodePath& path) {
  typename MutView::AnyMutT cur = root.any_mut();
  for (std::size_t d = 0; d < path.size(); ++d) {
    auto c = nth_child_mut(cur, path[d]);
    if (!c) return unexpected(InvalidPath{path[d], static_cast<std::uint32_t>(d)});
    cur = std::move(*c);
  }
  return cur;
}

}  // namespace gevo
