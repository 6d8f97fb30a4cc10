#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gevo {

struct SourceSpan {
  std::uint32_t line = 0;    // 1-based
  std::uint32_t column = 0;  // 1-based
  std::uint32_t begin = 0;   // byte offset into the grammar source
  std::uint32_t end = 0;     // one past the last byte
};

// One expression of a rule body. Terminal bytes are raw (an \xNN escape may
// produce non-UTF-8 content); Range bounds are half-open [lo, hi).
struct Expr {
  enum class Kind : std::uint8_t {
    Reference,
    Terminal,
    Concat,
    Alt,
    Star,
    Plus,
    Range,
    Option,
  };

  Kind kind = Kind::Terminal;
  std::string text;            // Reference: rule name; Terminal: bytes
  std::vector<Expr> children;  // Concat/Alt: >= 2; Star/Plus/Range/Option: 1
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  SourceSpan span;

  static Expr reference(std::string name);
  static Expr terminal(std::string bytes);
  static Expr concat(std::vector<Expr> parts);
  static Expr alt(std::vector<Expr> parts);
  static Expr star(Expr inner);
  static Expr plus(Expr inner);
  static Expr range(Expr inner, std::uint32_t lo, std::uint32_t hi);
  static Expr option(Expr inner);

  // Structural equality; source spans are ignored.
  bool operator==(const Expr& o) const;
};

struct Rule {
  std::string name;
  Expr body;
  SourceSpan span;
};

struct GrammarAst {
  std::vector<Rule> rules;  // in source order
  std::string start;
  std::string source;  // original grammar text, kept for generated docs

  const Rule* find(std::string_view name) const;
  bool operator==(const GrammarAst& o) const;
};

class GrammarError : public std::runtime_error {
 public:
  GrammarError(std::string msg, std::uint32_t line, std::uint32_t column)
      : std::runtime_error(std::move(msg)), line(line), column(column) {}
  std::uint32_t line;
  std::uint32_t column;
};

class SyntaxError : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

class UndefinedNonterminal : public GrammarError {
 public:
  UndefinedNonterminal(std::string name, std::uint32_t line, std::uint32_t column)
      : GrammarError("undefined nonterminal <" + name + ">", line, column),
        name(std::move(name)) {}
  std::string name;
};

class DuplicateRule : public GrammarError {
 public:
  DuplicateRule(std::string name, std::uint32_t line, std::uint32_t column)
      : GrammarError("duplicate rule <" + name + ">", line, column), name(std::move(name)) {}
  std::string name;
};

class EmptyAlternation : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

class EmptyConcat : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

// Parses the textual grammar format. Throws the errors above on malformed
// input; on success the returned ast satisfies all GrammarAst invariants and
// preserves rule order.
GrammarAst parse_grammar(std::string_view text);

// Warnings (one per rule) for rules unreachable from the start rule.
std::vector<std::string> validate_reachability(const GrammarAst& ast);

// Canonical pretty-printer; parse_grammar(to_text(ast)) == ast.
std::string to_text(const GrammarAst& ast);

}  // namespace gevo
