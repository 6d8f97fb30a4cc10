#pragma once

#include <cstdint>
#include <tuple>
#include <utility>
#include <variant>

#include "gevo/gen.hpp"
#include "gevo/graph.hpp"
#include "gevo/visit.hpp"

namespace gevo {

template <class G>
class ARef;
template <class G>
class AMut;

// Typed views over generated node types. SRef/SMut carry the concrete type;
// ARef/AMut are the grammar's opaque views (one variant per node type).
template <class X>
class SRef {
 public:
  using Grammar = typename X::Grammar;
  using AnyRefT = ARef<Grammar>;

  explicit SRef(const X* p) : p_(p) {}

  static constexpr NodeDef definition() { return X::definition(); }
  std::uint32_t node_id() const { return X::definition().id; }
  const X* raw() const { return p_; }

  template <class V>
  VisitNext<V> visit_each(V v) const {
    return p_->visit_children(std::move(v));
  }

  AnyRefT any_ref() const { return AnyRefT(p_->opaque()); }

 private:
  const X* p_;
};

template <class X>
class SMut {
 public:
  using Grammar = typename X::Grammar;
  using AnyMutT = AMut<Grammar>;

  explicit SMut(X* p) : p_(p) {}

  static constexpr NodeDef definition() { return X::definition(); }
  std::uint32_t node_id() const { return X::definition().id; }
  X* raw() const { return p_; }

  template <class V>
  VisitNext<V> visit_each_mut(V v) const {
    return p_->visit_children_mut(std::move(v));
  }

  AnyMutT any_mut() const { return AnyMutT(p_->opaque_mut()); }

 private:
  X* p_;
};

template <class G>
class ARef {
 public:
  using Grammar = G;
  using AnyRefT = ARef;

  explicit ARef(typename G::Ref r) : r_(r) {}

  NodeDef definition() const {
    return std::visit(
        [](auto* p) { return std::remove_cvref_t<decltype(*p)>::definition(); }, r_);
  }
  std::uint32_t node_id() const { return definition().id; }
  ARef any_ref() const { return *this; }
  const typename G::Ref& raw() const { return r_; }

  template <class V>
  VisitNext<V> visit_each(V v) const {
    return std::visit(
        [&v](auto* p) {
          using X = std::remove_cvref_t<decltype(*p)>;
          return SRef<X>(p).visit_each(std::move(v));
        },
        r_);
  }

 private:
  typename G::Ref r_;
};

template <class G>
class AMut {
 public:
  using Grammar = G;
  using AnyMutT = AMut;

  explicit AMut(typename G::Mut m) : m_(m) {}

  NodeDef definition() const {
    return std::visit(
        [](auto* p) { return std::remove_cvref_t<decltype(*p)>::definition(); }, m_);
  }
  std::uint32_t node_id() const { return definition().id; }
  AMut any_mut() const { return *this; }
  const typename G::Mut& raw() const { return m_; }

  template <class V>
  VisitNext<V> visit_each_mut(V v) const {
    return std::visit(
        [&v](auto* p) {
          using X = std::remove_cvref_t<decltype(*p)>;
          return SMut<X>(p).visit_each_mut(std::move(v));
        },
        m_);
  }

  ARef<G> as_ref() const {
    return std::visit([](auto* p) { return ARef<G>(p->opaque()); }, m_);
  }

 private:
  typename G::Mut m_;
};

// Checked downcasts of opaque views; yield nullptr when the contained type
// differs from the requested one.
template <class X, class G>
const X* downcast(const ARef<G>& r) {
  auto* pp = std::get_if<const X*>(&r.raw());
  return pp ? *pp : nullptr;
}

template <class X, class G>
X* downcast_mut(const AMut<G>& m) {
  auto* pp = std::get_if<X*>(&m.raw());
  return pp ? *pp : nullptr;
}

// Regenerates the addressed node in place, preserving its type.
template <class G, class S, class Chain>
Expected<void, GenErr> regenerate(const AMut<G>& at, S& s, Chain& chain) {
  return std::visit(
      [&](auto* p) -> Expected<void, GenErr> {
        using X = std::remove_cvref_t<decltype(*p)>;
        auto r = gen_node<X>(s, chain);
        if (!r.ok()) return unexpected(r.error());
        *p = std::move(r).value();
        return {};
      },
      at.raw());
}

// Swaps two subtrees when they hold the same node type; value exchange only,
// no copying.
template <class G>
bool swap_same_type(const AMut<G>& a, const AMut<G>& b) {
  return std::visit(
      [&](auto* pa) -> bool {
        using XPtr = std::remove_cvref_t<decltype(pa)>;
        const XPtr* pb = std::get_if<XPtr>(&b.raw());
        if (!pb) return false;
        if (pa != *pb) std::swap(*pa, **pb);
        return true;
      },
      a.raw());
}

}  // namespace gevo
