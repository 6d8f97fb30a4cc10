#include "gevo/dyn.hpp"

namespace gevo {

bool dyn_validate(const DynNode& node, const GrammarGraph& g, std::uint32_t expected_id) {
  if (node.graph_node != expected_id || expected_id >= g.nodes.size()) return false;
  const GraphNode& gn = g.nodes[expected_id];
  const std::vector<std::uint32_t> kids = g.children(expected_id);
  switch (gn.kind) {
    case NodeKind::Terminal:
      return std::holds_alternative<DynNode::TerminalLeaf>(node.payload);
    case NodeKind::Head: {
      const auto* r = std::get_if<DynNode::RefChild>(&node.payload);
      return r && kids.size() == 1 && dyn_validate(*r->child, g, kids[0]);
    }
    case NodeKind::Alt: {
      const auto* a = std::get_if<DynNode::VariantChoice>(&node.payload);
      return a && a->index < kids.size() && dyn_validate(*a->child, g, kids[a->index]);
    }
    case NodeKind::Concat: {
      const auto* c = std::get_if<DynNode::ConcatChildren>(&node.payload);
      if (!c || c->children.size() != kids.size()) return false;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (!dyn_validate(c->children[i], g, kids[i])) return false;
      }
      return true;
    }
    case NodeKind::Star:
    case NodeKind::Plus:
    case NodeKind::Range: {
      const auto* r = std::get_if<DynNode::RepChildren>(&node.payload);
      if (!r || kids.size() != 1) return false;
      const std::size_t n = r->children.size();
      if (n < gn.rep_lo) return false;
      if (gn.rep_hi != 0 && n >= gn.rep_hi) return false;
      for (const DynNode& c : r->children) {
        if (!dyn_validate(c, g, kids[0])) return false;
      }
      return true;
    }
    case NodeKind::Option: {
      const auto* o = std::get_if<DynNode::OptionalChild>(&node.payload);
      if (!o || kids.size() != 1) return false;
      return !o->child || dyn_validate(**o->child, g, kids[0]);
    }
  }
  return false;
}

}  // namespace gevo
