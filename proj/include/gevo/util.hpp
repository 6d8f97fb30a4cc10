#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace gevo {

// Minimal expected-like result type. C++20 has no std::expected yet and the
// generation hot path cannot afford exceptions for routine failures.
template <class E>
struct Unexpected {
  E error;
};

template <class E>
Unexpected<E> unexpected(E e) {
  return Unexpected<E>{std::move(e)};
}

// Tagged union rather than std::variant: moves and destroys must inline in
// the generation hot path (libstdc++'s variant dispatches them through
// function-pointer tables).
template <class T, class E>
class Expected {
 public:
  Expected(T value) : val_(std::move(value)), ok_(true) {}
  Expected(Unexpected<E> u) : err_(std::move(u.error)), ok_(false) {}

  Expected(const Expected& o) : ok_(o.ok_) {
    if (ok_) {
      std::construct_at(&val_, o.val_);
    } else {
      std::construct_at(&err_, o.err_);
    }
  }
  Expected(Expected&& o) noexcept : ok_(o.ok_) {
    if (ok_) {
      std::construct_at(&val_, std::move(o.val_));
    } else {
      std::construct_at(&err_, std::move(o.err_));
    }
  }
  Expected& operator=(const Expected& o) {
    if (this != &o) {
      destroy();
      ok_ = o.ok_;
      if (ok_) {
        std::construct_at(&val_, o.val_);
      } else {
        std::construct_at(&err_, o.err_);
      }
    }
    return *this;
  }
  Expected& operator=(Expected&& o) noexcept {
    if (this != &o) {
      destroy();
      ok_ = o.ok_;
      if (ok_) {
        std::construct_at(&val_, std::move(o.val_));
      } else {
        std::construct_at(&err_, std::move(o.err_));
      }
    }
    return *this;
  }
  ~Expected() { destroy(); }

  bool ok() const { return ok_; }
  explicit operator bool() const { return ok_; }

  T& value() & { return val_; }
  const T& value() const& { return val_; }
  T&& value() && { return std::move(val_); }
  const E& error() const { return err_; }

  T& operator*() & { return val_; }
  const T& operator*() const& { return val_; }
  T* operator->() { return &val_; }
  const T* operator->() const { return &val_; }

 private:
  void destroy() {
    if (ok_) {
      std::destroy_at(&val_);
    } else {
      std::destroy_at(&err_);
    }
  }

  union {
    T val_;
    E err_;
  };
  bool ok_;
};

template <class E>
class Expected<void, E> {
 public:
  Expected() = default;
  Expected(Unexpected<E> u) : err_(std::move(u.error)) {}
  bool ok() const { return !err_.has_value(); }
  explicit operator bool() const { return ok(); }
  const E& error() const { return *err_; }

 private:
  std::optional<E> err_;
};

// Value-semantic heap cell. Used wherever the grammar graph marks an edge as
// indirect: the child lives in its own allocation, copies are deep, and the
// pointer is never exposed past the owning node's accessors.
template <class T>
class Box {
 public:
  explicit Box(T value) : p_(std::make_unique<T>(std::move(value))) {}

  // Builds the cell contents in place: `new T(f())` consumes the prvalue
  // under guaranteed elision, skipping one move of the subtree root.
  template <class F>
  static Box make_with(F&& f) {
    return Box(std::unique_ptr<T>(new T(std::forward<F>(f)())));
  }
  Box(const Box& o) : p_(std::make_unique<T>(*o.p_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& o) {
    if (this != &o) p_ = std::make_unique<T>(*o.p_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *p_; }
  const T& operator*() const { return *p_; }
  T* operator->() { return p_.get(); }
  const T* operator->() const { return p_.get(); }

  void swap(Box& o) noexcept { p_.swap(o.p_); }

 private:
  explicit Box(std::unique_ptr<T> p) : p_(std::move(p)) {}
  std::unique_ptr<T> p_;
};

template <class T>
void swap(Box<T>& a, Box<T>& b) noexcept {
  a.swap(b);
}

// Escape bytes using the grammar format's escape table. `quote_for_terminal`
// additionally escapes double quotes (for use inside "..." literals).
std::string escape_bytes(std::string_view bytes, bool quote_for_terminal);

// splitmix64 finalizer; also used to derive independent seed streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x51ed2701a3c52e8dull));
}

}  // namespace gevo
