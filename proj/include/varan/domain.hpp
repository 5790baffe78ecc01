#pragma once

/*
 * Abstract-domain building blocks.
 *
 * A domain is a struct of static operations over some carrier `value_type`:
 *
 *   top()        greatest element
 *   le(a, b)     decidable order test (an approximation order, not equality)
 *   join(a, b)   upper bound of a and b
 *   widen(a, b)  upper bound that stabilizes every ascending chain
 *
 * Domains are given meaning by a concretization (which set of concrete
 * values each element denotes).  That function never appears in the
 * analyzer itself — only the tests need it, as a membership oracle — so it
 * is not part of the struct.  The laws the tests enforce are:
 *
 *   le(a, b)  implies  gamma(a) subset-of gamma(b)
 *   gamma(top) is everything
 *   gamma(join(a, b)) includes gamma(a) and gamma(b)
 *
 * Nothing is required of widen beyond termination: results are validated
 * after the fact by an independent checker, so a widening bug can lose
 * precision or convergence, never soundness.
 *
 * Some domains additionally provide
 *
 *   meet(a, b) -> Lifted<value_type>   lower bound (possibly empty)
 *
 * which refinement and narrowing use where available.
 */

#include <cassert>
#include <concepts>
#include <map>
#include <optional>
#include <utility>

namespace varan {

template <class D>
concept AbstractDomain = requires(const typename D::value_type& a,
                                  const typename D::value_type& b) {
  { D::top() } -> std::same_as<typename D::value_type>;
  { D::le(a, b) } -> std::same_as<bool>;
  { D::join(a, b) } -> std::same_as<typename D::value_type>;
  { D::widen(a, b) } -> std::same_as<typename D::value_type>;
};

// A domain carrier extended with a least element denoting the empty set of
// concrete values.  Bottom is deliberately not a default: it must be asked
// for by name.
template <class A>
class Lifted {
public:
  Lifted(A v) : v_(std::move(v)) {}  // NOLINT: implicit lift is the point

  static Lifted bottom() { return Lifted(nullopt_tag{}); }

  bool is_bottom() const { return !v_.has_value(); }

  const A& value() const {
    assert(v_.has_value());
    return *v_;
  }

  // Apply f to the carried value; bottom maps to bottom.
  template <class F>
  auto map(F&& f) const -> Lifted<std::decay_t<decltype(f(value()))>> {
    using B = std::decay_t<decltype(f(value()))>;
    if (is_bottom()) return Lifted<B>::bottom();
    return Lifted<B>(f(value()));
  }

  // Like map, for f that can itself come up empty.
  template <class F>
  auto and_then(F&& f) const -> decltype(f(value())) {
    using R = decltype(f(value()));
    if (is_bottom()) return R::bottom();
    return f(value());
  }

  friend bool operator==(const Lifted&, const Lifted&) = default;

private:
  struct nullopt_tag {};
  explicit Lifted(nullopt_tag) : v_(std::nullopt) {}
  std::optional<A> v_;
};

// ---------------------------------------------------------------------------
// Bottom lift: D plus an explicit least element.
// ---------------------------------------------------------------------------
template <AbstractDomain D>
struct LiftBottom {
  using inner_type = typename D::value_type;
  using value_type = Lifted<inner_type>;

  static value_type top() { return value_type(D::top()); }
  static value_type bottom() { return value_type::bottom(); }

  static bool le(const value_type& a, const value_type& b) {
    if (a.is_bottom()) return true;
    if (b.is_bottom()) return false;
    return D::le(a.value(), b.value());
  }

  static value_type join(const value_type& a, const value_type& b) {
    if (a.is_bottom()) return b;
    if (b.is_bottom()) return a;
    return value_type(D::join(a.value(), b.value()));
  }

  static value_type widen(const value_type& a, const value_type& b) {
    if (a.is_bottom()) return b;
    if (b.is_bottom()) return a;
    return value_type(D::widen(a.value(), b.value()));
  }

  // Only available when D itself has a meet.
  static value_type meet(const value_type& a, const value_type& b) {
    if (a.is_bottom() || b.is_bottom()) return bottom();
    return D::meet(a.value(), b.value());
  }
};

// ---------------------------------------------------------------------------
// Direct product: a pair of domains constraining the same concrete values,
// concretized as the intersection of the two interpretations.
// ---------------------------------------------------------------------------
template <AbstractDomain D1, AbstractDomain D2>
struct DirectProduct {
  using value_type = std::pair<typename D1::value_type, typename D2::value_type>;

  static value_type top() { return {D1::top(), D2::top()}; }

  static bool le(const value_type& a, const value_type& b) {
    return D1::le(a.first, b.first) && D2::le(a.second, b.second);
  }

  static value_type join(const value_type& a, const value_type& b) {
    return {D1::join(a.first, b.first), D2::join(a.second, b.second)};
  }

  static value_type widen(const value_type& a, const value_type& b) {
    return {D1::widen(a.first, b.first), D2::widen(a.second, b.second)};
  }

  static Lifted<value_type> meet(const value_type& a, const value_type& b) {
    auto m1 = D1::meet(a.first, b.first);
    if (m1.is_bottom()) return Lifted<value_type>::bottom();
    auto m2 = D2::meet(a.second, b.second);
    if (m2.is_bottom()) return Lifted<value_type>::bottom();
    return value_type{m1.value(), m2.value()};
  }
};

// ---------------------------------------------------------------------------
// Finite reduced map: Key -> D with two normalizations baked in.
//
//   * A key that is not bound means "top": environments stay small and two
//     maps that differ only in explicit-top bindings are the same value.
//   * Binding any key to an empty value collapses the whole map to bottom:
//     if one variable has no possible value, no concrete environment is
//     described at all.
// ---------------------------------------------------------------------------
template <class Key, class D>
struct ReducedMap {
  using entry_type = typename D::value_type;
  using map_type = std::map<Key, entry_type>;
  using value_type = Lifted<map_type>;

  static value_type top() { return value_type(map_type{}); }
  static value_type bottom() { return value_type::bottom(); }

  static Lifted<entry_type> get(const value_type& m, const Key& k) {
    if (m.is_bottom()) return Lifted<entry_type>::bottom();
    auto it = m.value().find(k);
    if (it == m.value().end()) return Lifted<entry_type>(D::top());
    return Lifted<entry_type>(it->second);
  }

  static value_type set(value_type m, const Key& k, const Lifted<entry_type>& v) {
    if (m.is_bottom()) return m;
    if (v.is_bottom()) return bottom();
    map_type out = m.value();
    if (v.value() == D::top()) {
      out.erase(k);
    } else {
      out.insert_or_assign(k, v.value());
    }
    return value_type(std::move(out));
  }

  static bool le(const value_type& a, const value_type& b) {
    if (a.is_bottom()) return true;
    if (b.is_bottom()) return false;
    for (const auto& [k, vb] : b.value()) {
      auto it = a.value().find(k);
      const entry_type& va = it == a.value().end() ? D::top() : it->second;
      if (!D::le(va, vb)) return false;
    }
    return true;
  }

  // Pointwise; a key missing on either side is top, so only keys bound on
  // both sides survive.
  static value_type join(const value_type& a, const value_type& b) {
    return merge_bound_keys(a, b, [](const entry_type& x, const entry_type& y) {
      return D::join(x, y);
    });
  }

  static value_type widen(const value_type& a, const value_type& b) {
    return merge_bound_keys(a, b, [](const entry_type& x, const entry_type& y) {
      return D::widen(x, y);
    });
  }

  static value_type meet(const value_type& a, const value_type& b) {
    if (a.is_bottom() || b.is_bottom()) return bottom();
    map_type out = a.value();
    for (const auto& [k, vb] : b.value()) {
      auto it = out.find(k);
      if (it == out.end()) {
        out.insert({k, vb});
        continue;
      }
      auto m = D::meet(it->second, vb);
      if (m.is_bottom()) return bottom();
      it->second = m.value();
    }
    return value_type(std::move(out));
  }

private:
  template <class F>
  static value_type merge_bound_keys(const value_type& a, const value_type& b, F combine) {
    if (a.is_bottom()) return b;
    if (b.is_bottom()) return a;
    map_type out;
    for (const auto& [k, va] : a.value()) {
      auto it = b.value().find(k);
      if (it == b.value().end()) continue;
      entry_type v = combine(va, it->second);
      if (v == D::top()) continue;
      out.insert({k, std::move(v)});
    }
    return value_type(std::move(out));
  }
};

}  // namespace varan
