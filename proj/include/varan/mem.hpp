// Bridge between the full expression language (which mixes integers,
// pointers and memory accesses) and the purely numeric environments.
//
// The numeric environment constrains a variable only in the states where
// that variable holds a plain integer; pointer values and the undefined
// value are never constrained by it.  This file adds the small "kind"
// analysis that keeps track of which of those cases can occur, and uses it
// to decide when a source expression may be translated into a numeric one.
//
// The one subtle rule lives in `convert`: a signed comparison applied to a
// pointer is undefined in the concrete machine (the branch is never taken),
// so signed comparisons always translate.  Unsigned comparisons, however,
// genuinely order pointers into the same block, so they translate only when
// both operands are known integers or known pointers — otherwise a pointer
// offset could be compared against a numeric constant and acquire bounds
// that the real pointer does not satisfy.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>

#include "varan/cfg.hpp"
#include "varan/domain.hpp"
#include "varan/interval.hpp"
#include "varan/machine_int.hpp"
#include "varan/num_env.hpp"

namespace varan {

// ---------------------------------------------------------------------------
// Value kinds.
//
// KInt  : the value is a machine integer or undefined.
// KPtr  : the value is a pointer or undefined.
// KTop  : no information (any value).
//
// The undefined value belongs to every kind: most operators produce it when
// applied outside their domain, and a kind must cover every result its
// expression can produce.

enum class Kind : std::uint8_t { KInt, KPtr, KTop };

constexpr bool kind_le(Kind a, Kind b) { return a == b || b == Kind::KTop; }

constexpr Kind kind_join(Kind a, Kind b) { return a == b ? a : Kind::KTop; }

// Variable -> kind map.  Unbound variables are KTop, so the empty map is the
// top element and only KInt/KPtr bindings are stored.
struct TypeInfo {
  std::map<VarId, Kind> kinds;

  Kind get(VarId v) const {
    auto it = kinds.find(v);
    return it == kinds.end() ? Kind::KTop : it->second;
  }

  void set(VarId v, Kind k) {
    if (k == Kind::KTop) {
      kinds.erase(v);
    } else {
      kinds[v] = k;
    }
  }

  static bool le(const TypeInfo& a, const TypeInfo& b) {
    for (const auto& [v, k] : b.kinds) {
      if (!kind_le(a.get(v), k)) return false;
    }
    return true;
  }

  static TypeInfo join(const TypeInfo& a, const TypeInfo& b) {
    TypeInfo out;
    for (const auto& [v, k] : a.kinds) {
      if (b.get(v) == k) out.kinds.emplace(v, k);
    }
    return out;
  }

  bool operator==(const TypeInfo&) const = default;
};

// ---------------------------------------------------------------------------
// Kind inference for expressions.

inline Kind infer_kind(const TypeInfo& types, const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Var:
      return types.get(e.var_id());
    case Expr::Kind::Const:
      return e.constant_value().kind == Constant::Kind::Int ? Kind::KInt
                                                            : Kind::KPtr;
    case Expr::Kind::Unary:
      // Unary operators yield an integer or the undefined value.
      return Kind::KInt;
    case Expr::Kind::Binary: {
      BinOp op = e.binop();
      if (op == BinOp::Add || op == BinOp::Sub) {
        Kind a = infer_kind(types, e.child(0));
        Kind b = infer_kind(types, e.child(1));
        if (op == BinOp::Add) {
          // ptr+int and int+ptr shift a pointer; ptr+ptr is undefined.
          if (a == Kind::KInt && b == Kind::KInt) return Kind::KInt;
          if (a == Kind::KPtr && b == Kind::KPtr) return Kind::KInt;
          if (a == Kind::KPtr || b == Kind::KPtr) return Kind::KPtr;
          return Kind::KTop;
        }
        // Sub: ptr-int shifts, ptr-ptr measures, int-anything is numeric
        // or undefined.
        if (a == Kind::KInt) return Kind::KInt;
        if (a == Kind::KPtr) {
          if (b == Kind::KInt) return Kind::KPtr;
          if (b == Kind::KPtr) return Kind::KInt;
          return Kind::KTop;
        }
        // a unknown: a ptr minus a known pointer is an integer or undefined,
        // as is an integer minus one.
        if (b == Kind::KPtr) return Kind::KInt;
        return Kind::KTop;
      }
      // Multiplicative, bitwise, shift and comparison operators produce an
      // integer (or undefined) whatever the operands are.
      return Kind::KInt;
    }
    case Expr::Kind::Cond:
      return kind_join(infer_kind(types, e.child(1)),
                       infer_kind(types, e.child(2)));
    case Expr::Kind::Load:
      return Kind::KTop;  // memory may hold any value
  }
  return Kind::KTop;
}

// ---------------------------------------------------------------------------
// Expression translation.

// Translates an expression into the numeric language, or refuses.
//
// Refused constructs: memory loads, address constants, and unsigned
// comparisons whose operands are not (both known integers) or (both known
// pointers).  Refusal is contagious: an expression translates only if every
// subexpression does.
//
// Variables always translate, even pointer-kinded ones.  That is sound
// because the numeric environment only speaks about integer-valued
// states, and it is deliberate: the translated expression is evaluated or
// refined against bindings that stay unconstrained while the variable
// actually holds a pointer.
inline std::optional<NExpr> convert(const TypeInfo& types, const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Var:
      return NExpr::var(e.var_id());
    case Expr::Kind::Const:
      if (e.constant_value().kind != Constant::Kind::Int) return std::nullopt;
      return NExpr::constant(e.constant_value().value);
    case Expr::Kind::Unary: {
      auto c = convert(types, e.child(0));
      if (!c) return std::nullopt;
      return NExpr::unary(e.unop(), *c);
    }
    case Expr::Kind::Binary: {
      if (is_unsigned_comparison(e.binop())) {
        Kind a = infer_kind(types, e.child(0));
        Kind b = infer_kind(types, e.child(1));
        bool both_int = a == Kind::KInt && b == Kind::KInt;
        bool both_ptr = a == Kind::KPtr && b == Kind::KPtr;
        if (!both_int && !both_ptr) return std::nullopt;
      }
      auto l = convert(types, e.child(0));
      if (!l) return std::nullopt;
      auto r = convert(types, e.child(1));
      if (!r) return std::nullopt;
      return NExpr::binary(e.binop(), *l, *r);
    }
    case Expr::Kind::Cond: {
      auto g = convert(types, e.child(0));
      if (!g) return std::nullopt;
      auto t = convert(types, e.child(1));
      if (!t) return std::nullopt;
      auto f = convert(types, e.child(2));
      if (!f) return std::nullopt;
      return NExpr::cond(*g, *t, *f);
    }
    case Expr::Kind::Load:
      return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Abstract machine state: numeric ranges for the variables plus their kinds.
//
// Memory cells are not tracked; stores are the identity and loads translate
// to "anything".  A state whose numeric part is bottom is normalised to a
// canonical bottom so that equality tests can be structural.

template <typename NE>
struct MemoryDomain {
  using NumEnv = NE;
  using Env = typename NE::Env;
  using NumDom = typename NE::NumDom;

  struct State {
    Env env = Env::bottom();
    TypeInfo types;
    bool operator==(const State&) const = default;
  };

  static State bottom() { return State{NE::bottom(), TypeInfo{}}; }
  static State top() { return State{NE::top(), TypeInfo{}}; }

  static bool is_bottom(const State& s) { return s.env.is_bottom(); }

  // Re-establishes the canonical-bottom invariant.
  static State make(Env env, TypeInfo types) {
    if (env.is_bottom()) return bottom();
    return State{std::move(env), std::move(types)};
  }

  static bool le(const State& a, const State& b) {
    if (is_bottom(a)) return true;
    if (is_bottom(b)) return false;
    return NE::le(a.env, b.env) && TypeInfo::le(a.types, b.types);
  }

  static State join(const State& a, const State& b) {
    if (is_bottom(a)) return b;
    if (is_bottom(b)) return a;
    return State{NE::join(a.env, b.env), TypeInfo::join(a.types, b.types)};
  }

  static State widen(const State& a, const State& b) {
    if (is_bottom(a)) return b;
    if (is_bottom(b)) return a;
    // Kinds live in a finite lattice, so join already terminates there.
    return State{NE::widen(a.env, b.env), TypeInfo::join(a.types, b.types)};
  }

  // Any sound intersection works here (this is only used to tighten a sound
  // result, never to establish soundness): intersect the numeric parts and
  // keep the left kinds.
  static State meet(const State& a, const State& b) {
    if (is_bottom(a) || is_bottom(b)) return bottom();
    return make(NE::meet(a.env, b.env), a.types);
  }

  static State assign(const State& s, VarId x, const Expr& e) {
    if (is_bottom(s)) return s;
    std::optional<NExpr> ne = convert(s.types, e);
    Env env = ne ? NE::assign(s.env, x, *ne) : NE::forget(s.env, x);
    TypeInfo types = s.types;
    types.set(x, infer_kind(s.types, e));
    return make(std::move(env), std::move(types));
  }

  // Keeps the states where `e` is a nonzero integer (truth = true) or the
  // integer zero (truth = false).  Untranslatable guards learn nothing.
  static State assume(const State& s, const Expr& e, bool truth) {
    if (is_bottom(s)) return s;
    std::optional<NExpr> ne = convert(s.types, e);
    if (!ne) return s;
    NExpr guard = truth ? *ne : NExpr::unary(UnOp::BoolNot, *ne);
    return make(NE::assume(s.env, guard), s.types);
  }

  // Stores touch memory only, which this state does not track.
  static State store(const State& s, MemChunk, const Expr&, const Expr&) {
    return s;
  }

  static State forget(const State& s, VarId x) {
    if (is_bottom(s)) return s;
    TypeInfo types = s.types;
    types.set(x, Kind::KTop);
    return make(NE::forget(s.env, x), std::move(types));
  }

  static Lifted<Interval> var_range(const State& s, VarId x, Signedness f) {
    if (is_bottom(s)) return Lifted<Interval>::bottom();
    auto v = NE::var_range(s.env, x);
    if (v.is_bottom()) return Lifted<Interval>::bottom();
    return NumDom::range(v.value(), f);
  }
};

}  // namespace varan
