#pragma once

#include <string>
#include <string_view>

#include "gevo/graph.hpp"

namespace gevo {

struct EmitContext {
  std::string grammar_name = "grammar";  // namespace / file stem
  std::string source;                    // grammar text for doc comments (optional)
};

// Generated-code sections. emit_header assembles a complete self-contained
// C++ header from them; all output is deterministic for a given graph.
std::string emit_types(const GrammarGraph& g, const EmitContext& ctx = {});
std::string emit_opaque(const GrammarGraph& g, const EmitContext& ctx = {});
std::string emit_node_contract(const GrammarGraph& g, const EmitContext& ctx = {});

std::string emit_header(const GrammarGraph& g, const EmitContext& ctx);

// JSON mapping of type names to graph node ids for tooling.
std::string emit_manifest(const GrammarGraph& g, const EmitContext& ctx);

// Deterministic type name for a node: <rule>_<kind>_<id>.
std::string emit_type_name(const GrammarGraph& g, std::uint32_t id);

}  // namespace gevo
