#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gevo/backend.hpp"
#include "gevo/visit.hpp"

namespace gevo {

struct CheckResult {
  double score = 1.0;  // in [0,1]; 1 iff violations empty
  std::vector<NodePath> violations;
};

class UnknownSelector : public std::runtime_error {
 public:
  explicit UnknownSelector(const std::string& name)
      : std::runtime_error("unknown selector: no rule named <" + name + ">") {}
};

class ConstraintError : public std::runtime_error {
 public:
  ConstraintError(std::size_t index, const std::string& what)
      : std::runtime_error("constraint #" + std::to_string(index) + ": " + what), index(index) {}
  std::size_t index;
};

template <class B>
class Constraint {
 public:
  virtual ~Constraint() = default;
  virtual std::string_view name() const = 0;
  // Pure: must not mutate the tree.
  virtual CheckResult evaluate(const typename B::Tree& tree) const = 0;
};

using ObjectiveVector = std::vector<double>;

// Applies each constraint independently; errors are tagged with the
// constraint's index.
template <class B>
std::pair<ObjectiveVector, std::vector<std::vector<NodePath>>> check(
    const typename B::Tree& tree, const std::vector<std::unique_ptr<Constraint<B>>>& constraints) {
  ObjectiveVector scores;
  std::vector<std::vector<NodePath>> violations;
  scores.reserve(constraints.size());
  violations.reserve(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    try {
      CheckResult r = constraints[i]->evaluate(tree);
      scores.push_back(r.score);
      violations.push_back(std::move(r.violations));
    } catch (const std::exception& e) {
      throw ConstraintError(i, e.what());
    }
  }
  return {std::move(scores), std::move(violations)};
}

inline std::uint32_t resolve_rule(const GrammarGraph& g, const std::string& rule) {
  auto id = g.head_of(rule);
  if (!id) throw UnknownSelector(rule);
  return *id;
}

namespace detail {

inline bool path_prefix(const NodePath& q, const NodePath& a) {
  return q.size() < a.size() && std::equal(q.begin(), q.end(), a.begin());
}

// Number of `a` paths strictly inside each `q` path.
inline std::vector<std::size_t> counts_under(const std::vector<NodePath>& qs,
                                             const std::vector<NodePath>& as) {
  std::vector<std::size_t> counts(qs.size(), 0);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (const NodePath& a : as) {
      if (path_prefix(qs[i], a)) ++counts[i];
    }
  }
  return counts;
}

template <class B>
std::string text_at(const typename B::Tree& tree, const NodePath& path) {
  auto at = resolve_path(B::view(tree), path);
  StringSink sink;
  (void)write_tree(at.value(), sink);
  return std::move(sink.data);
}

}  // namespace detail

// |q1..a| == |q2..a| for every pair of q instances (equality of counts
// across siblings). Count equality scores 1/(1+|a-b|), averaged over pairs.
template <class B>
class CardinalityEqual : public Constraint<B> {
 public:
  CardinalityEqual(std::uint32_t q_id, std::uint32_t a_id) : q_(q_id), a_(a_id) {}
  std::string_view name() const override { return "cardinality_equal"; }

  CheckResult evaluate(const typename B::Tree& tree) const override {
    auto root = B::view(tree);
    const auto qs = find_same_type_subtrees(root, q_);
    const auto as = find_same_type_subtrees(root, a_);
    const auto counts = detail::counts_under(qs, as);
    CheckResult out;
    if (counts.size() < 2) return out;
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      for (std::size_t j = i + 1; j < counts.size(); ++j) {
        const double d = counts[i] > counts[j] ? double(counts[i] - counts[j])
                                               : double(counts[j] - counts[i]);
        sum += 1.0 / (1.0 + d);
        ++pairs;
      }
    }
    out.score = sum / static_cast<double>(pairs);
    // violators: instances whose count differs from the modal count
    std::map<std::size_t, std::size_t> freq;
    for (std::size_t c : counts) ++freq[c];
    std::size_t mode = counts[0], best = 0;
    for (const auto& [value, n] : freq) {
      if (n > best) {
        best = n;
        mode = value;
      }
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] != mode) out.violations.push_back(qs[i]);
    }
    return out;
  }

 private:
  std::uint32_t q_;
  std::uint32_t a_;
};

// |q..a| == k for every q instance.
template <class B>
class CardinalityEqK : public Constraint<B> {
 public:
  CardinalityEqK(std::uint32_t q_id, std::uint32_t a_id, std::size_t k)
      : q_(q_id), a_(a_id), k_(k) {}
  std::string_view name() const override { return "cardinality_eq_k"; }

  CheckResult evaluate(const typename B::Tree& tree) const override {
    auto root = B::view(tree);
    const auto qs = find_same_type_subtrees(root, q_);
    const auto as = find_same_type_subtrees(root, a_);
    const auto counts = detail::counts_under(qs, as);
    CheckResult out;
    if (qs.empty()) return out;
    double sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double d =
          counts[i] > k_ ? double(counts[i] - k_) : double(k_ - counts[i]);
      sum += 1.0 / (1.0 + d);
      if (counts[i] != k_) out.violations.push_back(qs[i]);
    }
    out.score = sum / static_cast<double>(counts.size());
    return out;
  }

 private:
  std::uint32_t q_;
  std::uint32_t a_;
  std::size_t k_;
};

// At least `target` symbol nodes (nonterminal heads + terminals) in the tree.
template <class B>
class NodeGoal : public Constraint<B> {
 public:
  explicit NodeGoal(std::size_t target) : target_(target) {}
  std::string_view name() const override { return "node_goal"; }

  CheckResult evaluate(const typename B::Tree& tree) const override {
    const std::size_t n = B::symbol_count(tree);
    CheckResult out;
    if (target_ == 0 || n >= target_) return out;
    out.score = static_cast<double>(n) / static_cast<double>(target_);
    out.violations.push_back(NodePath{});  // the root fails the goal
    return out;
  }

 private:
  std::size_t target_;
};

// min <= |tree..a| <= max (inclusive).
template <class B>
class CountBound : public Constraint<B> {
 public:
  CountBound(std::uint32_t a_id, std::size_t min, std::size_t max)
      : a_(a_id), min_(min), max_(max) {}
  std::string_view name() const override { return "count_bound"; }

  CheckResult evaluate(const typename B::Tree& tree) const override {
    const auto as = find_same_type_subtrees(B::view(tree), a_);
    const std::size_t c = as.size();
    CheckResult out;
    if (c >= min_ && c <= max_) return out;
    if (c < min_) {
      out.score = 1.0 / (1.0 + double(min_ - c));
      out.violations.push_back(NodePath{});
    } else {
      out.score = 1.0 / (1.0 + double(c - max_));
      for (std::size_t i = max_; i < as.size(); ++i) out.violations.push_back(as[i]);
    }
    return out;
  }

 private:
  std::uint32_t a_;
  std::size_t min_;
  std::size_t max_;
};

// Opening and closing tag names of every element must match. The two names
// are the element's name-typed grandchildren (directly under its body
// concatenation); nested elements contribute their own instances.
template <class B>
class XmlTagMatch : public Constraint<B> {
 public:
  XmlTagMatch(std::uint32_t element_id, std::uint32_t name_id)
      : element_(element_id), name_(name_id) {}
  std::string_view name() const override { return "xml_tag_match"; }

  CheckResult evaluate(const typename B::Tree& tree) const override {
    auto root = B::view(tree);
    const auto elements = find_same_type_subtrees(root, element_);
    const auto names = find_same_type_subtrees(root, name_);
    CheckResult out;
    if (elements.empty()) return out;
    std::size_t ok = 0;
    for (const NodePath& e : elements) {
      std::vector<const NodePath*> own;
      for (const NodePath& n : names) {
        if (n.size() == e.size() + 2 && detail::path_prefix(e, n)) own.push_back(&n);
      }
      if (own.size() == 2 &&
          detail::text_at<B>(tree, *own[0]) == detail::text_at<B>(tree, *own[1])) {
        ++ok;
      } else {
        out.violations.push_back(e);
      }
    }
    out.score = static_cast<double>(ok) / static_cast<double>(elements.size());
    return out;
  }

 private:
  std::uint32_t element_;
  std::uint32_t name_;
};

// --- statement-language checkers ------------------------------------------
//
// These walk declaration/assignment statements in document order. They are
// keyed by rule selectors, so they apply to any grammar with the same
// statement shape: a declaration's first identifier introduces the name,
// every other identifier occurrence is a use.

struct StmtIndex {
  struct Stmt {
    NodePath path;
    bool is_decl;
    std::vector<NodePath> idents;  // document order within the statement
  };
  std::vector<Stmt> stmts;
};

template <class B>
StmtIndex index_statements(const typename B::Tree& tree, std::uint32_t decl_id,
                           std::uint32_t assign_id, std::uint32_t ident_id) {
  auto root = B::view(tree);
  StmtIndex out;
  auto stmt_paths = collect_paths(root, [&](const NodeDef& d) {
    return d.id == decl_id || d.id == assign_id;
  });
  const auto idents = find_same_type_subtrees(root, ident_id);
  for (NodePath& p : stmt_paths) {
    auto at = resolve_path(root, p);
    StmtIndex::Stmt s;
    s.is_decl = at.value().definition().id == decl_id;
    for (const NodePath& ip : idents) {
      if (detail::path_prefix(p, ip)) s.idents.push_back(ip);
    }
    s.path = std::move(p);
    out.stmts.push_back(std::move(s));
  }
  return out;
}

template <class B>
class DeclBeforeUse : public Constraint<B> {
 public:
  DeclBeforeUse(std::uint32_t decl_id, std::uint32_t assign_id, std::uint32_t ident_id)
      : decl_(decl_id), assign_(assign_id), ident_(ident_id) {}
  std::string_view name() const override { return "decl_before_use"; }

  CheckResult evaluate(const typename B::Tree& tree) const override {
    const StmtIndex idx = index_statements<B>(tree, decl_, assign_, ident_);
    std::set<std::string> declared;
    std::size_t uses = 0, ok = 0;
    CheckResult out;
    for (const auto& s : idx.stmts) {
      for (std::size_t i = 0; i < s.idents.size(); ++i) {
        if (s.is_decl && i == 0) continue;  // the declared name itself
        ++uses;
        if (declared.count(detail::text_at<B>(tree, s.idents[i]))) {
          ++ok;
        } else {
          out.violations.push_back(s.idents[i]);
        }
      }
      if (s.is_decl && !s.idents.empty()) {
        declared.insert(detail::text_at<B>(tree, s.idents[0]));
      }
    }
    out.score = uses == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(uses);
    return out;
  }

 private:
  std::uint32_t decl_;
  std::uint32_t assign_;
  std::uint32_t ident_;
};

template <class B>
class NoRedecl : public Constraint<B> {
 public:
  NoRedecl(std::uint32_t decl_id, std::uint32_t assign_id, std::uint32_t ident_id)
      : decl_(decl_id), assign_(assign_id), ident_(ident_id) {}
  std::string_view name() const override { return "no_redecl"; }

  CheckResult evaluate(const typename B::Tree& tree) const override {
    const StmtIndex idx = index_statements<B>(tree, decl_, assign_, ident_);
    std::set<std::string> declared;
    std::size_t decls = 0, ok = 0;
    CheckResult out;
    for (const auto& s : idx.stmts) {
      if (!s.is_decl || s.idents.empty()) continue;
      ++decls;
      if (declared.insert(detail::text_at<B>(tree, s.idents[0])).second) {
        ++ok;
      } else {
        out.violations.push_back(s.path);
      }
    }
    out.score = decls == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(decls);
    return out;
  }

 private:
  std::uint32_t decl_;
  std::uint32_t assign_;
  std::uint32_t ident_;
};

const std::set<std::string>& reserved_c_words();

template <class B>
class NoReservedIdent : public Constraint<B> {
 public:
  explicit NoReservedIdent(std::uint32_t ident_id) : ident_(ident_id) {}
  std::string_view name() const override { return "no_reserved_ident"; }

  CheckResult evaluate(const typename B::Tree& tree) const override {
    const auto idents = find_same_type_subtrees(B::view(tree), ident_);
    CheckResult out;
    if (idents.empty()) return out;
    std::size_t ok = 0;
    for (const NodePath& p : idents) {
      if (reserved_c_words().count(detail::text_at<B>(tree, p))) {
        out.violations.push_back(p);
      } else {
        ++ok;
      }
    }
    out.score = static_cast<double>(ok) / static_cast<double>(idents.size());
    return out;
  }

 private:
  std::uint32_t ident_;
};

// --- constraint spec files ---------------------------------------------------

// One entry of the JSON constraint list, decoded into plain maps so only one
// translation unit needs the JSON library.
struct ConstraintSpecItem {
  std::string type;
  std::map<std::string, std::string> strs;
  std::map<std::string, double> nums;

  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
};

std::vector<ConstraintSpecItem> parse_constraint_spec(const std::string& json_text);

template <class B>
class ConstraintRegistry {
 public:
  using Factory =
      std::function<std::unique_ptr<Constraint<B>>(const GrammarGraph&, const ConstraintSpecItem&)>;

  ConstraintRegistry();

  void add(const std::string& type, Factory f) { factories_[type] = std::move(f); }

  std::vector<std::unique_ptr<Constraint<B>>> make_list(
      const GrammarGraph& g, const std::vector<ConstraintSpecItem>& items) const {
    std::vector<std::unique_ptr<Constraint<B>>> out;
    for (const auto& item : items) {
      auto it = factories_.find(item.type);
      if (it == factories_.end()) {
        throw std::runtime_error("unknown constraint type: " + item.type);
      }
      out.push_back(it->second(g, item));
    }
    return out;
  }

 private:
  std::map<std::string, Factory> factories_;
};

template <class B>
ConstraintRegistry<B>::ConstraintRegistry() {
  add("cardinality_equal", [](const GrammarGraph& g, const ConstraintSpecItem& it) {
    return std::make_unique<CardinalityEqual<B>>(resolve_rule(g, it.str("over")),
                                                 resolve_rule(g, it.str("count")));
  });
  add("cardinality_eq_k", [](const GrammarGraph& g, const ConstraintSpecItem& it) {
    return std::make_unique<CardinalityEqK<B>>(resolve_rule(g, it.str("over")),
                                               resolve_rule(g, it.str("count")),
                                               static_cast<std::size_t>(it.num("k")));
  });
  add("node_goal", [](const GrammarGraph&, const ConstraintSpecItem& it) {
    return std::make_unique<NodeGoal<B>>(static_cast<std::size_t>(it.num("target")));
  });
  add("count_bound", [](const GrammarGraph& g, const ConstraintSpecItem& it) {
    return std::make_unique<CountBound<B>>(resolve_rule(g, it.str("selector")),
                                           static_cast<std::size_t>(it.num("min")),
                                           static_cast<std::size_t>(it.num("max")));
  });
  add("xml_tag_match", [](const GrammarGraph& g, const ConstraintSpecItem& it) {
    return std::make_unique<XmlTagMatch<B>>(resolve_rule(g, it.str("element")),
                                            resolve_rule(g, it.str("name")));
  });
  add("decl_before_use", [](const GrammarGraph& g, const ConstraintSpecItem& it) {
    return std::make_unique<DeclBeforeUse<B>>(resolve_rule(g, it.str("decl")),
                                              resolve_rule(g, it.str("assign")),
                                              resolve_rule(g, it.str("ident")));
  });
  add("no_redecl", [](const GrammarGraph& g, const ConstraintSpecItem& it) {
    return std::make_unique<NoRedecl<B>>(resolve_rule(g, it.str("decl")),
                                         resolve_rule(g, it.str("assign")),
                                         resolve_rule(g, it.str("ident")));
  });
  add("no_reserved_ident", [](const GrammarGraph& g, const ConstraintSpecItem& it) {
    return std::make_unique<NoReservedIdent<B>>(resolve_rule(g, it.str("ident")));
  });
}

}  // namespace gevo
