#include "gevo/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "gevo/util.hpp"

namespace gevo {

std::string escape_bytes(std::string_view bytes, bool quote_for_terminal) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size());
  for (unsigned char c : bytes) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      case '"':
        if (quote_for_terminal) {
          out += "\\\"";
        } else {
          out += '"';
        }
        break;
      default:
        if (c < 0x20 || c >= 0x7f) {
          out += "\\x";
          out += hex[c >> 4];
          out += hex[c & 0xf];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

Expr Expr::reference(std::string name) {
  Expr e;
  e.kind = Kind::Reference;
  e.text = std::move(name);
  return e;
}

Expr Expr::terminal(std::string bytes) {
  Expr e;
  e.kind = Kind::Terminal;
  e.text = std::move(bytes);
  return e;
}

Expr Expr::concat(std::vector<Expr> parts) {
  Expr e;
  e.kind = Kind::Concat;
  e.children = std::move(parts);
  return e;
}

Expr Expr::alt(std::vector<Expr> parts) {
  Expr e;
  e.kind = Kind::Alt;
  e.children = std::move(parts);
  return e;
}

Expr Expr::star(Expr inner) {
  Expr e;
  e.kind = Kind::Star;
  e.children.push_back(std::move(inner));
  return e;
}

Expr Expr::plus(Expr inner) {
  Expr e;
  e.kind = Kind::Plus;
  e.children.push_back(std::move(inner));
  return e;
}

Expr Expr::range(Expr inner, std::uint32_t lo, std::uint32_t hi) {
  Expr e;
  e.kind = Kind::Range;
  e.children.push_back(std::move(inner));
  e.lo = lo;
  e.hi = hi;
  return e;
}

Expr Expr::option(Expr inner) {
  Expr e;
  e.kind = Kind::Option;
  e.children.push_back(std::move(inner));
  return e;
}

bool Expr::operator==(const Expr& o) const {
  return kind == o.kind && text == o.text && lo == o.lo && hi == o.hi &&
         children == o.children;
}

const Rule* GrammarAst::find(std::string_view name) const {
  for (const Rule& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

bool GrammarAst::operator==(const GrammarAst& o) const {
  if (start != o.start || rules.size() != o.rules.size()) return false;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].name != o.rules[i].name || !(rules[i].body == o.rules[i].body)) return false;
  }
  return true;
}

namespace {

enum class Tok : std::uint8_t {
  Nonterm,   // <name>
  Ident,     // bare identifier (start directive)
  Assign,    // ::=
  Equals,    // =
  Pipe,
  Star,
  Plus,
  Question,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Int,
  String,
  Newline,
  End,
};

struct Token {
  Tok kind;
  std::string text;  // name / bytes / digits
  std::uint32_t line;
  std::uint32_t column;
  std::uint32_t begin;
  std::uint32_t end;
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, line_, col_); }

  char peek(std::size_t d = 0) const {
    return pos_ + d < text_.size() ? text_[pos_ + d] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Token make(Tok k, std::uint32_t line, std::uint32_t col, std::uint32_t begin,
             std::string text = {}) {
    return Token{k, std::move(text), line, col, begin, static_cast<std::uint32_t>(pos_)};
  }

  Token next() {
    // skip spaces and comments; newlines are significant
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (peek() && peek() != '\n') advance();
      } else {
        break;
      }
    }
    const std::uint32_t line = line_, col = col_;
    const auto begin = static_cast<std::uint32_t>(pos_);
    char c = peek();
    if (c == '\0') return make(Tok::End, line, col, begin);
    if (c == '\n') {
      advance();
      return make(Tok::Newline, line, col, begin);
    }
    if (c == '<') {
      advance();
      if (!is_name_start(peek())) fail("expected rule name after '<'");
      std::string name;
      while (is_name_char(peek())) {
        name += peek();
        advance();
      }
      if (peek() != '>') fail("expected '>' after rule name");
      advance();
      return make(Tok::Nonterm, line, col, begin, std::move(name));
    }
    if (c == ':') {
      if (peek(1) == ':' && peek(2) == '=') {
        advance();
        advance();
        advance();
        return make(Tok::Assign, line, col, begin);
      }
      fail("expected '::='");
    }
    if (c == '"') return lex_string(line, col, begin);
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        digits += peek();
        advance();
      }
      return make(Tok::Int, line, col, begin, std::move(digits));
    }
    if (is_name_start(c)) {
      std::string name;
      while (is_name_char(peek())) {
        name += peek();
        advance();
      }
      return make(Tok::Ident, line, col, begin, std::move(name));
    }
    advance();
    switch (c) {
      case '=': return make(Tok::Equals, line, col, begin);
      case '|': return make(Tok::Pipe, line, col, begin);
      case '*': return make(Tok::Star, line, col, begin);
      case '+': return make(Tok::Plus, line, col, begin);
      case '?': return make(Tok::Question, line, col, begin);
      case '(': return make(Tok::LParen, line, col, begin);
      case ')': return make(Tok::RParen, line, col, begin);
      case '{': return make(Tok::LBrace, line, col, begin);
      case '}': return make(Tok::RBrace, line, col, begin);
      case ',': return make(Tok::Comma, line, col, begin);
      default: fail(std::string("unexpected character '") + c + "'");
    }
  }

  Token lex_string(std::uint32_t line, std::uint32_t col, std::uint32_t begin) {
    advance();  // opening quote
    std::string bytes;
    for (;;) {
      char c = peek();
      if (c == '\0' || c == '\n') fail("unterminated string literal");
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        char e = peek();
        switch (e) {
          case 'n': bytes += '\n'; advance(); break;
          case 't': bytes += '\t'; advance(); break;
          case 'r': bytes += '\r'; advance(); break;
          case '\\': bytes += '\\'; advance(); break;
          case '"': bytes += '"'; advance(); break;
          case 'x': {
            advance();
            int v = 0;
            for (int i = 0; i < 2; ++i) {
              char h = peek();
              int d;
              if (h >= '0' && h <= '9') d = h - '0';
              else if (h >= 'a' && h <= 'f') d = h - 'a' + 10;
              else if (h >= 'A' && h <= 'F') d = h - 'A' + 10;
              else fail("expected two hex digits after \\x");
              v = v * 16 + d;
              advance();
            }
            bytes += static_cast<char>(v);
            break;
          }
          default: fail(std::string("unknown escape '\\") + e + "'");
        }
      } else {
        bytes += c;
        advance();
      }
    }
    return make(Tok::String, line, col, begin, std::move(bytes));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

  GrammarAst run(std::string_view source) {
    GrammarAst ast;
    ast.source = std::string(source);
    std::string start_directive;
    std::uint32_t directive_line = 0, directive_col = 0;
    for (;;) {
      skip_newlines();
      const Token& t = peek();
      if (t.kind == Tok::End) break;
      if (t.kind == Tok::Ident && t.text == "start") {
        next();
        expect(Tok::Equals, "expected '=' after 'start'");
        const Token& name = expect(Tok::Nonterm, "expected <name> after 'start ='");
        if (!start_directive.empty()) throw SyntaxError("duplicate start directive", name.line, name.column);
        start_directive = name.text;
        directive_line = name.line;
        directive_col = name.column;
        end_of_rule();
        continue;
      }
      if (t.kind != Tok::Nonterm) {
        throw SyntaxError("expected rule definition '<name> ::= ...'", t.line, t.column);
      }
      Token name = next();
      for (const Rule& r : ast.rules) {
        if (r.name == name.text) throw DuplicateRule(name.text, name.line, name.column);
      }
      expect(Tok::Assign, "expected '::=' after rule name");
      Rule rule;
      rule.name = name.text;
      rule.span = SourceSpan{name.line, name.column, name.begin, 0};
      rule.body = parse_alt();
      rule.span.end = prev_end_;
      end_of_rule();
      ast.rules.push_back(std::move(rule));
    }
    if (ast.rules.empty()) throw SyntaxError("grammar has no rules", 1, 1);
    ast.start = start_directive.empty() ? ast.rules.front().name : start_directive;
    if (!ast.find(ast.start)) throw UndefinedNonterminal(ast.start, directive_line, directive_col);
    check_references(ast);
    return ast;
  }

 private:
  const Token& peek(std::size_t d = 0) const {
    return toks_[std::min(pos_ + d, toks_.size() - 1)];
  }

  Token next() {
    Token t = toks_[std::min(pos_, toks_.size() - 1)];
    if (pos_ < toks_.size() - 1) ++pos_;
    prev_end_ = t.end;
    return t;
  }

  const Token& expect(Tok k, const char* msg) {
    if (peek().kind != k) throw SyntaxError(msg, peek().line, peek().column);
    const Token& t = toks_[pos_];
    next();
    return t;
  }

  void skip_newlines() {
    while (peek().kind == Tok::Newline) next();
  }

  void end_of_rule() {
    const Token& t = peek();
    if (t.kind == Tok::Newline) {
      next();
      return;
    }
    if (t.kind == Tok::End) return;
    throw SyntaxError("expected end of rule", t.line, t.column);
  }

  // Newlines inside parentheses are insignificant; at depth 0 a newline ends
  // the rule unless the next significant token is '|' (continuation line).
  bool at_pipe() {
    if (depth_ > 0) {
      std::size_t d = 0;
      while (peek(d).kind == Tok::Newline) ++d;
      if (peek(d).kind == Tok::Pipe) {
        for (std::size_t i = 0; i <= d; ++i) next();
        return true;
      }
      return false;
    }
    if (peek().kind == Tok::Pipe) {
      next();
      return true;
    }
    std::size_t d = 0;
    while (peek(d).kind == Tok::Newline) ++d;
    if (d > 0 && peek(d).kind == Tok::Pipe) {
      for (std::size_t i = 0; i <= d; ++i) next();
      return true;
    }
    return false;
  }

  bool starts_primary() {
    if (depth_ > 0) {
      while (peek().kind == Tok::Newline) next();
    }
    Tok k = peek().kind;
    return k == Tok::Nonterm || k == Tok::String || k == Tok::LParen;
  }

  Expr parse_alt() {
    const Token& at = peek();
    if (!starts_primary()) {
      throw EmptyAlternation("empty rule body", at.line, at.column);
    }
    std::vector<Expr> parts;
    parts.push_back(parse_concat());
    while (at_pipe()) parts.push_back(parse_concat());
    if (parts.size() == 1) return std::move(parts.front());
    Expr e = Expr::alt(std::move(parts));
    e.span = e.children.front().span;
    e.span.end = e.children.back().span.end;
    return e;
  }

  Expr parse_concat() {
    if (!starts_primary()) {
      throw EmptyConcat("empty alternation branch", peek().line, peek().column);
    }
    std::vector<Expr> parts;
    while (starts_primary()) parts.push_back(parse_postfix());
    if (parts.size() == 1) return std::move(parts.front());
    Expr e = Expr::concat(std::move(parts));
    e.span = e.children.front().span;
    e.span.end = e.children.back().span.end;
    return e;
  }

  Expr parse_postfix() {
    Expr e = parse_primary();
    for (;;) {
      Tok k = peek().kind;
      if (k == Tok::Star) {
        Token t = next();
        SourceSpan s = e.span;
        e = Expr::star(std::move(e));
        e.span = s;
        e.span.end = t.end;
      } else if (k == Tok::Plus) {
        Token t = next();
        SourceSpan s = e.span;
        e = Expr::plus(std::move(e));
        e.span = s;
        e.span.end = t.end;
      } else if (k == Tok::Question) {
        Token t = next();
        SourceSpan s = e.span;
        e = Expr::option(std::move(e));
        e.span = s;
        e.span.end = t.end;
      } else if (k == Tok::LBrace) {
        next();
        const Token& lo_tok = expect(Tok::Int, "expected repetition count");
        std::uint32_t lo = static_cast<std::uint32_t>(std::stoul(lo_tok.text));
        std::uint32_t hi;
        if (peek().kind == Tok::Comma) {
          next();
          const Token& hi_tok = expect(Tok::Int, "expected upper repetition bound");
          hi = static_cast<std::uint32_t>(std::stoul(hi_tok.text));
          if (hi <= lo) throw SyntaxError("repetition range requires hi > lo", hi_tok.line, hi_tok.column);
        } else {
          hi = lo + 1;  // {n} means {n,n+1}
        }
        Token t = expect(Tok::RBrace, "expected '}'");
        SourceSpan s = e.span;
        e = Expr::range(std::move(e), lo, hi);
        e.span = s;
        e.span.end = t.end;
      } else {
        break;
      }
    }
    return e;
  }

  Expr parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Nonterm) {
      Token tok = next();
      Expr e = Expr::reference(tok.text);
      e.span = SourceSpan{tok.line, tok.column, tok.begin, tok.end};
      return e;
    }
    if (t.kind == Tok::String) {
      Token tok = next();
      Expr e = Expr::terminal(tok.text);
      e.span = SourceSpan{tok.line, tok.column, tok.begin, tok.end};
      return e;
    }
    if (t.kind == Tok::LParen) {
      Token open = next();
      ++depth_;
      Expr e = parse_alt();
      --depth_;
      if (depth_ == 0) {
        while (peek().kind == Tok::Newline) next();
      }
      Token close = expect(Tok::RParen, "expected ')'");
      e.span.begin = open.begin;
      e.span.line = open.line;
      e.span.column = open.column;
      e.span.end = close.end;
      return e;
    }
    throw SyntaxError("expected '<name>', string, or '('", t.line, t.column);
  }

  static void check_references(const GrammarAst& ast) {
    std::set<std::string_view> defined;
    for (const Rule& r : ast.rules) defined.insert(r.name);
    for (const Rule& r : ast.rules) {
      check_expr_refs(r.body, defined);
    }
  }

  static void check_expr_refs(const Expr& e, const std::set<std::string_view>& defined) {
    if (e.kind == Expr::Kind::Reference && !defined.count(e.text)) {
      throw UndefinedNonterminal(e.text, e.span.line, e.span.column);
    }
    for (const Expr& c : e.children) check_expr_refs(c, defined);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::uint32_t prev_end_ = 0;
};

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Alt: return 0;
    case Expr::Kind::Concat: return 1;
    default: return 2;
  }
}

void print_expr(const Expr& e, int parent_prec, std::string& out) {
  const int prec = precedence(e.kind);
  const bool parens = prec < parent_prec;
  if (parens) out += '(';
  switch (e.kind) {
    case Expr::Kind::Reference:
      out += '<';
      out += e.text;
      out += '>';
      break;
    case Expr::Kind::Terminal:
      out += '"';
      out += escape_bytes(e.text, true);
      out += '"';
      break;
    case Expr::Kind::Concat:
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += ' ';
        print_expr(e.children[i], 2, out);
      }
      break;
    case Expr::Kind::Alt:
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += " | ";
        print_expr(e.children[i], 1, out);
      }
      break;
    case Expr::Kind::Star:
      print_expr(e.children[0], 3, out);
      out += '*';
      break;
    case Expr::Kind::Plus:
      print_expr(e.children[0], 3, out);
      out += '+';
      break;
    case Expr::Kind::Option:
      print_expr(e.children[0], 3, out);
      out += '?';
      break;
    case Expr::Kind::Range:
      print_expr(e.children[0], 3, out);
      out += '{';
      out += std::to_string(e.lo);
      out += ',';
      out += std::to_string(e.hi);
      out += '}';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

GrammarAst parse_grammar(std::string_view text) {
  return Parser(text).run(text);
}

std::vector<std::string> validate_reachability(const GrammarAst& ast) {
  std::set<std::string_view> reachable;
  std::vector<std::string_view> work{ast.start};
  reachable.insert(ast.start);
  auto visit = [&](const Expr& e, auto&& self) -> void {
    if (e.kind == Expr::Kind::Reference && reachable.insert(e.text).second) {
      work.push_back(e.text);
    }
    for (const Expr& c : e.children) self(c, self);
  };
  while (!work.empty()) {
    std::string_view name = work.back();
    work.pop_back();
    if (const Rule* r = ast.find(name)) visit(r->body, visit);
  }
  std::vector<std::string> warnings;
  for (const Rule& r : ast.rules) {
    if (!reachable.count(r.name)) {
      warnings.push_back("rule <" + r.name + "> is unreachable from <" + ast.start + ">");
    }
  }
  return warnings;
}

std::string to_text(const GrammarAst& ast) {
  std::string out;
  if (!ast.rules.empty() && ast.start != ast.rules.front().name) {
    out += "start = <" + ast.start + ">\n\n";
  }
  for (std::size_t i = 0; i < ast.rules.size(); ++i) {
    if (i) out += '\n';
    out += '<';
    out += ast.rules[i].name;
    out += "> ::= ";
    print_expr(ast.rules[i].body, 0, out);
    out += '\n';
  }
  return out;
}

}  // namespace gevo
