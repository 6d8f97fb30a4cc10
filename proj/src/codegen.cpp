#include "gevo/codegen.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gevo {

namespace {

// Every byte as raw printable ASCII or a 3-digit octal escape, so escapes
// can never merge with a following character.
std::string cxx_string_literal(std::string_view bytes) {
  std::string out = "\"";
  for (unsigned char c : bytes) {
    if (c >= 0x20 && c < 0x7f && c != '"' && c != '\\' && c != '?') {
      out += static_cast<char>(c);
    } else {
      char buf[6];
      std::snprintf(buf, sizeof buf, "\\%03o", c);
      out += buf;
    }
  }
  out += '"';
  return out;
}

std::string sv_literal(std::string_view bytes) {
  return "std::string_view(" + cxx_string_literal(bytes) + ", " + std::to_string(bytes.size()) +
         ")";
}

std::string_view kind_token(NodeKind k) {
  switch (k) {
    case NodeKind::Head: return "Head";
    case NodeKind::Alt: return "Alt";
    case NodeKind::Concat: return "Concat";
    case NodeKind::Star: return "Star";
    case NodeKind::Plus: return "Plus";
    case NodeKind::Range: return "Range";
    case NodeKind::Option: return "Option";
    case NodeKind::Terminal: return "Terminal";
  }
  return "?";
}

struct ChildSlot {
  std::uint32_t dst;
  bool indirect;
  std::string type;  // child type name
};

struct Plan {
  const GrammarGraph& g;
  EmitContext ctx;
  std::vector<std::string> names;
  std::vector<std::vector<ChildSlot>> slots;
  std::vector<std::uint32_t> emit_order;  // children before parents

  Plan(const GrammarGraph& graph, EmitContext context) : g(graph), ctx(std::move(context)) {
    names.reserve(g.nodes.size());
    for (std::uint32_t i = 0; i < g.nodes.size(); ++i) names.push_back(emit_type_name(g, i));
    // internal assertion: ids make names collision-free by construction
    assert(std::set<std::string>(names.begin(), names.end()).size() == names.size());
    slots.resize(g.nodes.size());
    for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
      for (std::uint32_t eid : g.nodes[i].out) {
        const GraphEdge& e = g.edges[eid];
        slots[i].push_back(ChildSlot{e.dst, e.indirect, names[e.dst]});
      }
    }
    auto topo = topo_order_direct(g);
    if (!topo) throw std::logic_error("emit requires indirection to be marked (graph is cyclic)");
    emit_order.assign(topo->rbegin(), topo->rend());
  }

  std::string doc_for(std::uint32_t id) const {
    const GraphNode& n = g.nodes[id];
    if (ctx.source.empty() || n.span.end <= n.span.begin || n.span.end > ctx.source.size()) {
      return {};
    }
    std::string slice = ctx.source.substr(n.span.begin, n.span.end - n.span.begin);
    if (slice.size() > 60) slice = slice.substr(0, 57) + "...";
    std::string printable;
    for (char c : slice) printable += (c == '\n' || c == '\r') ? ' ' : c;
    return "/// `" + printable + "` (" + ctx.grammar_name + ".gbnf line " +
           std::to_string(n.span.line) + ", col " + std::to_string(n.span.column) + ")\n";
  }
};

void emit_struct(const Plan& p, std::uint32_t id, std::string& out) {
  const GraphNode& n = p.g.nodes[id];
  const std::string& name = p.names[id];
  const auto& slots = p.slots[id];

  if (n.kind == NodeKind::Head || n.kind == NodeKind::Alt) out += p.doc_for(id);
  out += "struct " + name + " {\n";
  // children first, in child order: the generating constructor's member
  // initializers must run left to right
  if (n.kind == NodeKind::Head || n.kind == NodeKind::Concat) {
    bool is_public = true;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!slots[i].indirect) {
        if (!is_public) {
          out += "\n public:\n";
          is_public = true;
        }
        out += "  " + slots[i].type + " child_" + std::to_string(i) + ";\n";
      } else {
        if (is_public) {
          out += "\n private:\n";
          is_public = false;
        }
        out += "  gevo::Box<" + slots[i].type + "> child_" + std::to_string(i) + "_;\n";
      }
    }
    if (!is_public) out += "\n public:\n";
  }
  out += "  using Grammar = Types;\n";
  out += "  static constexpr gevo::NodeDef definition() {\n";
  out += "    return gevo::NodeDef{" + std::to_string(id) + ", gevo::NodeKind::" +
         std::string(kind_token(n.kind)) + ", " + std::to_string(slots.size()) + ", " +
         std::to_string(n.rep_lo) + ", " + std::to_string(n.rep_hi) + ", " +
         sv_literal(n.literal) + ", " + sv_literal(n.rule) + "};\n";
  out += "  }\n";

  switch (n.kind) {
    case NodeKind::Terminal:
      out += "  " + name + "() = default;\n";
      break;
    case NodeKind::Head:
    case NodeKind::Concat: {
      std::string params;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i) params += ", ";
        params += slots[i].type + " c" + std::to_string(i);
      }
      out += "  explicit " + name + "(" + params + ");\n";
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].indirect) {
          out += "  const " + slots[i].type + "& child_" + std::to_string(i) + "() const;\n";
          out += "  " + slots[i].type + "& child_" + std::to_string(i) + "();\n";
        }
      }
      break;
    }
    case NodeKind::Alt: {
      for (std::size_t i = 0; i < slots.size(); ++i) {
        out += "  static " + name + " make_" + std::to_string(i) + "(" + slots[i].type + " v);\n";
      }
      out += "  std::size_t variant_index() const;\n";
      out += "  " + name + "(const " + name + "& o);\n";
      out += "  " + name + "(" + name + "&& o) noexcept;\n";
      out += "  " + name + "& operator=(const " + name + "& o);\n";
      out += "  " + name + "& operator=(" + name + "&& o) noexcept;\n";
      out += "  ~" + name + "();\n";
      break;
    }
    case NodeKind::Star:
    case NodeKind::Plus:
    case NodeKind::Range: {
      out += "  explicit " + name + "(std::vector<" + slots[0].type + "> items);\n";
      out += "  const std::vector<" + slots[0].type + ">& items() const;\n";
      out += "  std::vector<" + slots[0].type + ">& items();\n";
      break;
    }
    case NodeKind::Option: {
      out += "  static " + name + " make_empty();\n";
      out += "  static " + name + " make_present(" + slots[0].type + " v);\n";
      out += "  bool has_inner() const;\n";
      out += "  const " + slots[0].type + "* inner() const;\n";
      out += "  " + slots[0].type + "* inner();\n";
      break;
    }
  }

  out += "  template <class V> gevo::VisitNext<V> visit_children(V v) const;\n";
  out += "  template <class V> gevo::VisitNext<V> visit_children_mut(V v);\n";
  out += "  // builds this node in place via the choice protocol\n";
  out += "  template <class S, class Chain> " + name + "(gevo::GenInPlace, S& s, Chain& chain);\n";
  out += "  template <class S, class Chain> static gevo::GenResult<" + name +
         "> generate(S& s, Chain& chain);\n";
  out += "  Types::Ref opaque() const;\n";
  out += "  Types::Mut opaque_mut();\n";

  // private cells behind the accessors above
  switch (n.kind) {
    case NodeKind::Head:
    case NodeKind::Concat:
      break;
    case NodeKind::Alt: {
      // tagged union; moves and destroys compile to plain switches
      out += "\n private:\n";
      out += "  " + name + "();\n";
      out += "  union {\n";
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const std::string member =
            slots[i].indirect ? "gevo::Box<" + slots[i].type + ">" : slots[i].type;
        out += "    " + member + " v" + std::to_string(i) + "_;\n";
      }
      out += "  };\n";
      out += "  std::uint8_t tag_;\n";
      break;
    }
    case NodeKind::Star:
    case NodeKind::Plus:
    case NodeKind::Range:
      out += "\n private:\n";
      out += "  std::vector<" + slots[0].type + "> items_;\n";
      break;
    case NodeKind::Option:
      out += "\n private:\n";
      out += "  " + name + "() = default;\n";
      out += "  std::optional<gevo::Box<" + slots[0].type + ">> cell_;\n";
      break;
    case NodeKind::Terminal:
      break;
  }
  out += "};\n\n";
}

// child access expression for visit_children (const or mutable)
std::string child_expr(const Plan& p, std::uint32_t id, std::size_t slot_idx) {
  const auto& s = p.slots[id][slot_idx];
  const std::string field = "child_" + std::to_string(slot_idx);
  return s.indirect ? "&*" + field + "_" : "&" + field;
}

void emit_visit_steps(const std::string& name, const std::vector<std::string>& exprs,
                      const std::vector<std::string>& types, bool mut, std::string& out) {
  const char* view = mut ? "gevo::SMut" : "gevo::SRef";
  const char* fn = mut ? "visit_children_mut" : "visit_children";
  const char* cv = mut ? "" : " const";
  out += "template <class V>\ngevo::VisitNext<V> " + name + "::" + fn + "(V v)" + cv + " {\n";
  if (exprs.size() == 1) {
    out += "  return std::move(v).visit(" + std::string(view) + "<" + types[0] + ">(" + exprs[0] +
           "), 0);\n}\n\n";
    return;
  }
  out += "  std::optional<V> cur(std::move(v));\n";
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    out += "  {\n    auto r = std::move(*cur).visit(" + std::string(view) + "<" + types[i] + ">(" +
           exprs[i] + "), " + std::to_string(i) + ");\n";
    if (i + 1 == exprs.size()) {
      out += "    return r;\n  }\n";
    } else {
      out += "    if (!r.is_continue()) return r;\n    cur.emplace(std::move(r).take_continue());\n  }\n";
    }
  }
  out += "}\n\n";
}

void emit_contract_for(const Plan& p, std::uint32_t id, std::string& out) {
  const GraphNode& n = p.g.nodes[id];
  const std::string& name = p.names[id];
  const auto& slots = p.slots[id];
  const std::string id_str = std::to_string(id);

  // constructors, factories, accessors
  switch (n.kind) {
    case NodeKind::Terminal:
      break;
    case NodeKind::Head:
    case NodeKind::Concat: {
      std::string params, inits;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i) {
          params += ", ";
          inits += ", ";
        }
        params += slots[i].type + " c" + std::to_string(i);
        if (slots[i].indirect) {
          inits += "child_" + std::to_string(i) + "_(gevo::Box<" + slots[i].type + ">(std::move(c" +
                   std::to_string(i) + ")))";
        } else {
          inits += "child_" + std::to_string(i) + "(std::move(c" + std::to_string(i) + "))";
        }
      }
      out += "inline " + name + "::" + name + "(" + params + ") : " + inits + " {}\n";
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].indirect) {
          const std::string idx = std::to_string(i);
          out += "inline const " + slots[i].type + "& " + name + "::child_" + idx +
                 "() const { return *child_" + idx + "_; }\n";
          out += "inline " + slots[i].type + "& " + name + "::child_" + idx +
                 "() { return *child_" + idx + "_; }\n";
        }
      }
      break;
    }
    case NodeKind::Alt: {
      auto member = [&](std::size_t i) { return "v" + std::to_string(i) + "_"; };
      auto emit_switch = [&](const std::string& head, const std::string& source,
                             bool move_from) {
        out += head + " : tag_(o.tag_) {\n  switch (tag_) {\n";
        for (std::size_t i = 0; i < slots.size(); ++i) {
          const std::string access =
              move_from ? "std::move(" + source + "." + member(i) + ")" : source + "." + member(i);
          out += "    case " + std::to_string(i) + ": std::construct_at(&" + member(i) + ", " +
                 access + "); break;\n";
        }
        out += "    default: break;\n  }\n}\n";
      };
      out += "inline " + name + "::" + name + "() : tag_(0xff) {}\n";
      out += "inline " + name + "::~" + name + "() {\n  switch (tag_) {\n";
      for (std::size_t i = 0; i < slots.size(); ++i) {
        out += "    case " + std::to_string(i) + ": std::destroy_at(&" + member(i) + "); break;\n";
      }
      out += "    default: break;\n  }\n}\n";
      emit_switch("inline " + name + "::" + name + "(const " + name + "& o)", "o", false);
      emit_switch("inline " + name + "::" + name + "(" + name + "&& o) noexcept", "o", true);
      out += "inline " + name + "& " + name + "::operator=(const " + name +
             "& o) {\n  if (this != &o) {\n    " + name +
             " tmp(o);\n    std::destroy_at(this);\n    std::construct_at(this, "
             "std::move(tmp));\n  }\n  return *this;\n}\n";
      out += "inline " + name + "& " + name + "::operator=(" + name +
             "&& o) noexcept {\n  if (this != &o) {\n    std::destroy_at(this);\n    "
             "std::construct_at(this, std::move(o));\n  }\n  return *this;\n}\n";
      out += "inline std::size_t " + name + "::variant_index() const { return tag_; }\n";
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const std::string idx = std::to_string(i);
        out += "inline " + name + " " + name + "::make_" + idx + "(" + slots[i].type +
               " v) {\n  " + name + " x;\n  std::construct_at(&x." + member(i) + ", ";
        out += slots[i].indirect ? "gevo::Box<" + slots[i].type + ">(std::move(v))" : "std::move(v)";
        out += ");\n  x.tag_ = " + idx + ";\n  return x;\n}\n";
      }
      break;
    }
    case NodeKind::Star:
    case NodeKind::Plus:
    case NodeKind::Range: {
      out += "inline " + name + "::" + name + "(std::vector<" + slots[0].type +
             "> items) : items_(std::move(items)) {}\n";
      out += "inline const std::vector<" + slots[0].type + ">& " + name +
             "::items() const { return items_; }\n";
      out += "inline std::vector<" + slots[0].type + ">& " + name + "::items() { return items_; }\n";
      break;
    }
    case NodeKind::Option: {
      out += "inline " + name + " " + name + "::make_empty() { return " + name + "(); }\n";
      out += "inline " + name + " " + name + "::make_present(" + slots[0].type + " v) {\n  " +
             name + " x;\n  x.cell_.emplace(gevo::Box<" + slots[0].type +
             ">(std::move(v)));\n  return x;\n}\n";
      out += "inline bool " + name + "::has_inner() const { return cell_.has_value(); }\n";
      out += "inline const " + slots[0].type + "* " + name +
             "::inner() const { return cell_ ? &**cell_ : nullptr; }\n";
      out += "inline " + slots[0].type + "* " + name +
             "::inner() { return cell_ ? &**cell_ : nullptr; }\n";
      break;
    }
  }

  // visit_children / visit_children_mut
  switch (n.kind) {
    case NodeKind::Terminal: {
      out += "template <class V>\ngevo::VisitNext<V> " + name +
             "::visit_children(V v) const { return gevo::visit_continue(std::move(v)); }\n";
      out += "template <class V>\ngevo::VisitNext<V> " + name +
             "::visit_children_mut(V v) { return gevo::visit_continue(std::move(v)); }\n\n";
      break;
    }
    case NodeKind::Head:
    case NodeKind::Concat: {
      std::vector<std::string> exprs, types;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        exprs.push_back(child_expr(p, id, i));
        types.push_back(slots[i].type);
      }
      emit_visit_steps(name, exprs, types, false, out);
      emit_visit_steps(name, exprs, types, true, out);
      break;
    }
    case NodeKind::Alt: {
      for (int mut = 0; mut < 2; ++mut) {
        const char* view = mut ? "gevo::SMut" : "gevo::SRef";
        const char* fn = mut ? "visit_children_mut" : "visit_children";
        const char* cv = mut ? "" : " const";
        out += "template <class V>\ngevo::VisitNext<V> " + name + "::" + fn + "(V v)" + cv +
               " {\n  switch (tag_) {\n";
        for (std::size_t i = 0; i < slots.size(); ++i) {
          const std::string idx = std::to_string(i);
          const std::string access =
              slots[i].indirect ? "&*v" + idx + "_" : "&v" + idx + "_";
          out += "    case " + idx + ": return std::move(v).visit(" + std::string(view) + "<" +
                 slots[i].type + ">(" + access + "), 0);\n";
        }
        out += "  }\n  return gevo::visit_continue(std::move(v));\n}\n";
      }
      out += "\n";
      break;
    }
    case NodeKind::Star:
    case NodeKind::Plus:
    case NodeKind::Range: {
      for (int mut = 0; mut < 2; ++mut) {
        const char* view = mut ? "gevo::SMut" : "gevo::SRef";
        const char* fn = mut ? "visit_children_mut" : "visit_children";
        const char* cv = mut ? "" : " const";
        out += "template <class V>\ngevo::VisitNext<V> " + name + "::" + fn + "(V v)" + cv +
               " {\n  std::optional<V> cur(std::move(v));\n"
               "  for (std::size_t i = 0; i < items_.size(); ++i) {\n    auto r = "
               "std::move(*cur).visit(" +
               std::string(view) + "<" + slots[0].type +
               ">(&items_[i]), i);\n    if (!r.is_continue()) return r;\n    "
               "cur.emplace(std::move(r).take_continue());\n  }\n  return "
               "gevo::visit_continue(std::move(*cur));\n}\n";
      }
      out += "\n";
      break;
    }
    case NodeKind::Option: {
      for (int mut = 0; mut < 2; ++mut) {
        const char* view = mut ? "gevo::SMut" : "gevo::SRef";
        const char* fn = mut ? "visit_children_mut" : "visit_children";
        const char* cv = mut ? "" : " const";
        out += "template <class V>\ngevo::VisitNext<V> " + name + "::" + fn + "(V v)" + cv +
               " {\n  if (cell_) return std::move(v).visit(" + std::string(view) + "<" +
               slots[0].type +
               ">(&**cell_), 0);\n  return gevo::visit_continue(std::move(v));\n}\n";
      }
      out += "\n";
      break;
    }
  }

  // generating constructor: children are built in place, left to right
  switch (n.kind) {
    case NodeKind::Terminal:
      out += "template <class S, class Chain>\n" + name + "::" + name +
             "(gevo::GenInPlace, S&, Chain&) {}\n";
      break;
    case NodeKind::Head:
    case NodeKind::Concat: {
      std::string inits;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i) inits += ",\n      ";
        const std::string value = "gevo::gen_value<" + slots[i].type + ">(s, chain)";
        if (slots[i].indirect) {
          inits += "child_" + std::to_string(i) + "_(gevo::Box<" + slots[i].type +
                   ">::make_with([&] { return " + value + "; }))";
        } else {
          inits += "child_" + std::to_string(i) + "(" + value + ")";
        }
      }
      out += "template <class S, class Chain>\n" + name + "::" + name +
             "(gevo::GenInPlace, S& s, Chain& chain)\n    : " + inits + " {}\n";
      break;
    }
    case NodeKind::Alt: {
      out += "template <class S, class Chain>\n" + name + "::" + name +
             "(gevo::GenInPlace, S& s, Chain& chain) : tag_(0xff) {\n";
      out += "  switch (s.sample_alt(" + std::to_string(slots.size()) + ", " + id_str + ")) {\n";
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const std::string idx = std::to_string(i);
        const std::string value = "gevo::gen_value<" + slots[i].type + ">(s, chain)";
        out += "    case " + idx + ": ::new (static_cast<void*>(&v" + idx + "_)) ";
        out += slots[i].indirect
                   ? "gevo::Box<" + slots[i].type + ">(gevo::Box<" + slots[i].type +
                         ">::make_with([&] { return " + value + "; }))"
                   : slots[i].type + "(" + value + ")";
        out += "; tag_ = " + idx + "; break;\n";
      }
      out += "    default: throw gevo::GenAbort{gevo::GenErr::RetryExhausted};\n  }\n}\n";
      break;
    }
    case NodeKind::Star:
    case NodeKind::Plus:
    case NodeKind::Range: {
      out += "template <class S, class Chain>\n" + name + "::" + name +
             "(gevo::GenInPlace, S& s, Chain& chain) {\n";
      out += "  const std::uint32_t count = s.sample_rep(" + std::to_string(n.rep_lo) + ", " +
             std::to_string(n.rep_hi) + ", " + id_str + ");\n";
      out += "  items_.reserve(count);\n";
      out += "  for (std::uint32_t i = 0; i < count; ++i) {\n";
      out += "    items_.push_back(gevo::gen_value<" + slots[0].type + ">(s, chain));\n  }\n}\n";
      break;
    }
    case NodeKind::Option: {
      out += "template <class S, class Chain>\n" + name + "::" + name +
             "(gevo::GenInPlace, S& s, Chain& chain) {\n";
      out += "  if (s.sample_rep(0, 2, " + id_str + ") != 0) {\n";
      out += "    cell_.emplace(gevo::Box<" + slots[0].type + ">::make_with([&] { return "
             "gevo::gen_value<" + slots[0].type + ">(s, chain); }));\n  }\n}\n";
      break;
    }
  }

  out += "template <class S, class Chain>\ngevo::GenResult<" + name + "> " + name +
         "::generate(S& s, Chain& chain) { return gevo::gen_node<" + name +
         ">(s, chain); }\n";
  out += "inline Types::Ref " + name +
         "::opaque() const { return Types::Ref(std::in_place_type<const " + name +
         "*>, this); }\n";
  out += "inline Types::Mut " + name + "::opaque_mut() { return Types::Mut(std::in_place_type<" +
         name + "*>, this); }\n\n";
}

std::string emit_graph_data(const Plan& p) {
  const GrammarGraph& g = p.g;
  std::string out;
  out += "inline const gevo::GrammarGraph& Types::graph() {\n";
  out += "  static const gevo::GrammarGraph instance = [] {\n";
  out += "    gevo::GrammarGraph g;\n";
  out += "    g.nodes.resize(" + std::to_string(g.nodes.size()) + ");\n";
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    const GraphNode& n = g.nodes[i];
    const std::string v = "g.nodes[" + std::to_string(i) + "]";
    out += "    " + v + ".kind = gevo::NodeKind::" + std::string(kind_token(n.kind)) + "; " + v +
           ".rule = " + cxx_string_literal(n.rule) + ";";
    if (!n.literal.empty() || n.kind == NodeKind::Terminal) {
      out += " " + v + ".literal = std::string(" + cxx_string_literal(n.literal) + ", " +
             std::to_string(n.literal.size()) + ");";
    }
    if (n.rep_lo || n.rep_hi) {
      out += " " + v + ".rep_lo = " + std::to_string(n.rep_lo) + "; " + v +
             ".rep_hi = " + std::to_string(n.rep_hi) + ";";
    }
    if (!n.out.empty()) {
      out += " " + v + ".out = {";
      for (std::size_t k = 0; k < n.out.size(); ++k) {
        if (k) out += ", ";
        out += std::to_string(n.out[k]);
      }
      out += "};";
    }
    out += "\n";
  }
  out += "    g.edges = {\n";
  for (const GraphEdge& e : g.edges) {
    out += "        {" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ", " +
           std::to_string(e.index) + ", " + (e.indirect ? "true" : "false") + "},\n";
  }
  out += "    };\n";
  out += "    g.start_node = " + std::to_string(g.start_node) + ";\n";
  out += "    g.rule_heads = {";
  for (std::size_t i = 0; i < g.rule_heads.size(); ++i) {
    if (i) out += ", ";
    out += "{" + cxx_string_literal(g.rule_heads[i].first) + ", " +
           std::to_string(g.rule_heads[i].second) + "}";
  }
  out += "};\n";
  out += "    return g;\n  }();\n  return instance;\n}\n";
  return out;
}

}  // namespace

std::string emit_type_name(const GrammarGraph& g, std::uint32_t id) {
  const GraphNode& n = g.nodes[id];
  return n.rule + "_" + std::string(node_kind_name(n.kind)) + "_" + std::to_string(id);
}

std::string emit_types(const GrammarGraph& g, const EmitContext& ctx) {
  Plan p(g, ctx);
  std::string out;
  for (std::uint32_t id : p.emit_order) emit_struct(p, id, out);
  return out;
}

std::string emit_opaque(const GrammarGraph& g, const EmitContext& ctx) {
  Plan p(g, ctx);
  std::string out;
  out += "struct Types {\n  using Ref = std::variant<";
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    if (i) out += ", ";
    out += "const " + p.names[i] + "*";
  }
  out += ">;\n  using Mut = std::variant<";
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    if (i) out += ", ";
    out += p.names[i] + "*";
  }
  out += ">;\n";
  out += "  using AnyRefT = gevo::ARef<Types>;\n";
  out += "  using AnyMutT = gevo::AMut<Types>;\n";
  out += "  using Start = " + p.names[g.start_node] + ";\n";
  out += "  using AllTypes = std::tuple<";
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    if (i) out += ", ";
    out += p.names[i];
  }
  out += ">;\n";
  out += "  static constexpr std::string_view name{" + cxx_string_literal(ctx.grammar_name) +
         "};\n";
  out += "  static constexpr std::uint32_t start_node = " + std::to_string(g.start_node) + ";\n";
  out += "  static const gevo::GrammarGraph& graph();\n";
  out += "};\n\n";
  out += "// Checked downcasts from the opaque views; empty when the contained\n";
  out += "// type is not the requested one.\n";
  out += "template <class X>\nconst X* downcast(const Types::AnyRefT& r) { return "
         "gevo::downcast<X>(r); }\n";
  out += "template <class X>\nX* downcast_mut(const Types::AnyMutT& m) { return "
         "gevo::downcast_mut<X>(m); }\n\n";
  return out;
}

std::string emit_node_contract(const GrammarGraph& g, const EmitContext& ctx) {
  Plan p(g, ctx);
  std::string out;
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) emit_contract_for(p, i, out);
  return out;
}

std::string emit_header(const GrammarGraph& g, const EmitContext& ctx) {
  Plan p(g, ctx);
  std::string out;
  out += "// Generated by gevo transpile from " + ctx.grammar_name + ".gbnf. Do not edit.\n";
  out += "#pragma once\n\n";
  out += "#include <cstdint>\n#include <memory>\n#include <optional>\n#include <string_view>\n";
  out += "#include <tuple>\n#include <variant>\n#include <vector>\n\n";
  out += "#include <gevo/runtime.hpp>\n\n";
  out += "namespace gevo_gen::" + ctx.grammar_name + " {\n\n";
  for (const std::string& name : p.names) out += "struct " + name + ";\n";
  out += "\n";
  out += emit_opaque(g, ctx);
  out += emit_types(g, ctx);
  out += emit_node_contract(g, ctx);
  out += emit_graph_data(p);
  out += "\n}  // namespace gevo_gen::" + ctx.grammar_name + "\n";
  return out;
}

std::string emit_manifest(const GrammarGraph& g, const EmitContext& ctx) {
  nlohmann::json doc;
  doc["grammar"] = ctx.grammar_name;
  doc["namespace"] = "gevo_gen::" + ctx.grammar_name;
  doc["start_node"] = g.start_node;
  nlohmann::json types = nlohmann::json::array();
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    nlohmann::json t;
    t["id"] = i;
    t["name"] = emit_type_name(g, i);
    t["kind"] = std::string(node_kind_name(g.nodes[i].kind));
    t["rule"] = g.nodes[i].rule;
    types.push_back(std::move(t));
  }
  doc["types"] = std::move(types);
  return doc.dump(2) + "\n";
}

}  // namespace gevo
