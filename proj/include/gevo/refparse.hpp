#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gevo/dyn.hpp"
#include "gevo/graph.hpp"
#include "gevo/util.hpp"

namespace gevo {

struct ParseError {
  std::size_t position = 0;
  std::string message;
};

// Reference parser: Earley recognition over the grammar graph, independent
// of the generation path. Used as the validity oracle and to re-derive
// trees from text for coverage scoring. Derivations are canonical: lowest
// alternation variant first, leftmost splits.
class RefParser {
 public:
  explicit RefParser(const GrammarGraph& g);
  ~RefParser();
  RefParser(RefParser&&) noexcept;
  RefParser& operator=(RefParser&&) noexcept;

  // Recognizer only; cheaper than parse().
  bool accepts(std::string_view input) const;

  // Full derivation rooted at the grammar's start node.
  Expected<DynTree, ParseError> parse(std::string_view input) const;

  const GrammarGraph& graph() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gevo
