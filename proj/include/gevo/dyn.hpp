#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gevo/graph.hpp"
#include "gevo/util.hpp"
#include "gevo/visit.hpp"

namespace gevo {

// One uniform node type interpreting the grammar graph. The payload shape
// always matches the kind of `graph_node`; children reference the edge
// destinations of the graph.
struct DynNode {
  struct TerminalLeaf {};
  struct RefChild {
    Box<DynNode> child;
  };
  struct VariantChoice {
    std::uint32_t index;
    Box<DynNode> child;
  };
  struct ConcatChildren {
    std::vector<DynNode> children;
  };
  struct RepChildren {
    std::vector<DynNode> children;
  };
  struct OptionalChild {
    std::optional<Box<DynNode>> child;
  };
  using Payload =
      std::variant<TerminalLeaf, RefChild, VariantChoice, ConcatChildren, RepChildren, OptionalChild>;

  std::uint32_t graph_node = 0;
  Payload payload;
};

struct DynTree {
  DynNode root;
  const GrammarGraph* graph = nullptr;
};

namespace detail {

template <class V, class ViewT>
VisitNext<V> visit_dyn_seq(V v, const GrammarGraph* g, const std::vector<DynNode>& children) {
  std::optional<V> cur(std::move(v));
  for (std::size_t i = 0; i < children.size(); ++i) {
    auto r = std::move(*cur).visit(ViewT(g, &children[i]), i);
    if (!r.is_continue()) return r;
    cur.emplace(std::move(r).take_continue());
  }
  return visit_continue(std::move(*cur));
}

template <class V, class ViewT>
VisitNext<V> visit_dyn_seq_mut(V v, const GrammarGraph* g, std::vector<DynNode>& children) {
  std::optional<V> cur(std::move(v));
  for (std::size_t i = 0; i < children.size(); ++i) {
    auto r = std::move(*cur).visit(ViewT(g, &children[i]), i);
    if (!r.is_continue()) return r;
    cur.emplace(std::move(r).take_continue());
  }
  return visit_continue(std::move(*cur));
}

}  // namespace detail

class DynView {
 public:
  using AnyRefT = DynView;

  DynView(const GrammarGraph* g, const DynNode* n) : g_(g), n_(n) {}

  NodeDef definition() const { return g_->def(n_->graph_node); }
  std::uint32_t node_id() const { return n_->graph_node; }
  DynView any_ref() const { return *this; }
  const DynNode* raw() const { return n_; }
  const GrammarGraph* graph() const { return g_; }

  template <class V>
  VisitNext<V> visit_each(V v) const {
    const DynNode::Payload& p = n_->payload;
    if (std::holds_alternative<DynNode::TerminalLeaf>(p)) return visit_continue(std::move(v));
    if (const auto* r = std::get_if<DynNode::RefChild>(&p)) {
      return std::move(v).visit(DynView(g_, &*r->child), 0);
    }
    if (const auto* a = std::get_if<DynNode::VariantChoice>(&p)) {
      return std::move(v).visit(DynView(g_, &*a->child), 0);
    }
    if (const auto* c = std::get_if<DynNode::ConcatChildren>(&p)) {
      return detail::visit_dyn_seq<V, DynView>(std::move(v), g_, c->children);
    }
    if (const auto* rep = std::get_if<DynNode::RepChildren>(&p)) {
      return detail::visit_dyn_seq<V, DynView>(std::move(v), g_, rep->children);
    }
    const auto& opt = std::get<DynNode::OptionalChild>(p);
    if (opt.child) return std::move(v).visit(DynView(g_, &**opt.child), 0);
    return visit_continue(std::move(v));
  }

 private:
  const GrammarGraph* g_;
  const DynNode* n_;
};

class DynMut {
 public:
  using AnyMutT = DynMut;

  DynMut(const GrammarGraph* g, DynNode* n) : g_(g), n_(n) {}

  NodeDef definition() const { return g_->def(n_->graph_node); }
  std::uint32_t node_id() const { return n_->graph_node; }
  DynMut any_mut() const { return *this; }
  DynNode* raw() const { return n_; }
  const GrammarGraph* graph() const { return g_; }
  DynView as_view() const { return DynView(g_, n_); }

  template <class V>
  VisitNext<V> visit_each_mut(V v) const {
    DynNode::Payload& p = n_->payload;
    if (std::holds_alternative<DynNode::TerminalLeaf>(p)) return visit_continue(std::move(v));
    if (auto* r = std::get_if<DynNode::RefChild>(&p)) {
      return std::move(v).visit(DynMut(g_, &*r->child), 0);
    }
    if (auto* a = std::get_if<DynNode::VariantChoice>(&p)) {
      return std::move(v).visit(DynMut(g_, &*a->child), 0);
    }
    if (auto* c = std::get_if<DynNode::ConcatChildren>(&p)) {
      return detail::visit_dyn_seq_mut<V, DynMut>(std::move(v), g_, c->children);
    }
    if (auto* rep = std::get_if<DynNode::RepChildren>(&p)) {
      return detail::visit_dyn_seq_mut<V, DynMut>(std::move(v), g_, rep->children);
    }
    auto& opt = std::get<DynNode::OptionalChild>(p);
    if (opt.child) return std::move(v).visit(DynMut(g_, &**opt.child), 0);
    return visit_continue(std::move(v));
  }

 private:
  const GrammarGraph* g_;
  DynNode* n_;
};

inline DynView dyn_view(const DynTree& t) { return DynView(t.graph, &t.root); }
inline DynMut dyn_mut(DynTree& t) { return DynMut(t.graph, &t.root); }

inline std::string dyn_serialize(const DynTree& t) { return serialize_tree(dyn_view(t)); }

// Structural validity of a dynamic tree against its graph: payload shapes
// match node kinds, child node ids follow the edges, repetition counts are
// within bounds, and variant indices are within arity.
bool dyn_validate(const DynNode& node, const GrammarGraph& g, std::uint32_t expected_id);
inline bool dyn_validate(const DynTree& t) {
  return t.graph && dyn_validate(t.root, *t.graph, t.root.graph_node);
}

}  // namespace gevo
