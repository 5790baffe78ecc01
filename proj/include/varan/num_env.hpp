// ===========================================================================
// num_env.hpp -- non-relational numeric environments
//
// NExpr is the purely numeric expression language: variables, word
// constants, and machine operations, with no memory access and no
// addresses.  NonRelEnv lifts any numeric value domain N (an abstraction of
// sets of 32-bit words with forward and backward transformers) to an
// abstract environment mapping variables to abstract values.  Forward
// evaluation interprets an expression over the environment; `refine` walks
// an expression backward, narrowing variable bindings so the expression can
// still produce a value in a target set; `assume` iterates refinement to a
// local fixpoint to learn from branch guards.
// ===========================================================================
#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "varan/domain.hpp"
#include "varan/ids.hpp"
#include "varan/machine_int.hpp"

namespace varan {

// ---------------------------------------------------------------------------
// Numeric expressions
// ---------------------------------------------------------------------------

class NExpr {
 public:
  enum class Kind : std::uint8_t { Var, Const, Unary, Binary, Cond };

  static NExpr var(VarId v) {
    Node n;
    n.kind = Kind::Var;
    n.var = v;
    return NExpr(std::move(n));
  }
  static NExpr constant(MachineInt w) {
    Node n;
    n.kind = Kind::Const;
    n.word = w;
    return NExpr(std::move(n));
  }
  static NExpr unary(UnOp op, NExpr a) {
    Node n;
    n.kind = Kind::Unary;
    n.un = op;
    n.kids = {std::move(a)};
    return NExpr(std::move(n));
  }
  static NExpr binary(BinOp op, NExpr a, NExpr b) {
    Node n;
    n.kind = Kind::Binary;
    n.bin = op;
    n.kids = {std::move(a), std::move(b)};
    return NExpr(std::move(n));
  }
  static NExpr cond(NExpr guard, NExpr if_nonzero, NExpr if_zero) {
    Node n;
    n.kind = Kind::Cond;
    n.kids = {std::move(guard), std::move(if_nonzero), std::move(if_zero)};
    return NExpr(std::move(n));
  }

  Kind kind() const { return n_->kind; }
  VarId var_id() const {
    assert(kind() == Kind::Var);
    return n_->var;
  }
  MachineInt word() const {
    assert(kind() == Kind::Const);
    return n_->word;
  }
  UnOp unop() const {
    assert(kind() == Kind::Unary);
    return n_->un;
  }
  BinOp binop() const {
    assert(kind() == Kind::Binary);
    return n_->bin;
  }
  std::size_t child_count() const { return n_->kids.size(); }
  const NExpr& child(std::size_t i) const {
    assert(i < n_->kids.size());
    return n_->kids[i];
  }

  friend bool operator==(const NExpr& a, const NExpr& b) {
    if (a.n_ == b.n_) return true;
    const Node& x = *a.n_;
    const Node& y = *b.n_;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case Kind::Var:
        if (x.var != y.var) return false;
        break;
      case Kind::Const:
        if (!(x.word == y.word)) return false;
        break;
      case Kind::Unary:
        if (x.un != y.un) return false;
        break;
      case Kind::Binary:
        if (x.bin != y.bin) return false;
        break;
      case Kind::Cond:
        break;
    }
    if (x.kids.size() != y.kids.size()) return false;
    for (std::size_t i = 0; i < x.kids.size(); ++i)
      if (!(x.kids[i] == y.kids[i])) return false;
    return true;
  }

 private:
  struct Node {
    Kind kind = Kind::Const;
    VarId var = 0;
    MachineInt word{};
    UnOp un = UnOp::Neg;
    BinOp bin = BinOp::Add;
    std::vector<NExpr> kids;
  };

  explicit NExpr(Node n) : n_(std::make_shared<const Node>(std::move(n))) {}

  std::shared_ptr<const Node> n_;
};

inline void collect_nexpr_vars(const NExpr& e, std::set<VarId>& out) {
  if (e.kind() == NExpr::Kind::Var) out.insert(e.var_id());
  for (std::size_t i = 0; i < e.child_count(); ++i)
    collect_nexpr_vars(e.child(i), out);
}

// Concrete semantics of a numeric expression over an exact environment:
// nullopt when evaluation traps.  Conditionals evaluate only the taken arm.
inline std::optional<MachineInt> eval_nexpr(
    const NExpr& e, const std::map<VarId, MachineInt>& env) {
  switch (e.kind()) {
    case NExpr::Kind::Var: {
      auto it = env.find(e.var_id());
      return it == env.end() ? std::optional<MachineInt>() : it->second;
    }
    case NExpr::Kind::Const:
      return e.word();
    case NExpr::Kind::Unary: {
      std::optional<MachineInt> a = eval_nexpr(e.child(0), env);
      if (!a) return std::nullopt;
      return eval_unop(e.unop(), *a);
    }
    case NExpr::Kind::Binary: {
      std::optional<MachineInt> a = eval_nexpr(e.child(0), env);
      if (!a) return std::nullopt;
      std::optional<MachineInt> b = eval_nexpr(e.child(1), env);
      if (!b) return std::nullopt;
      return eval_binop(e.binop(), *a, *b);
    }
    case NExpr::Kind::Cond: {
      std::optional<MachineInt> g = eval_nexpr(e.child(0), env);
      if (!g) return std::nullopt;
      return eval_nexpr(g->bits() != 0 ? e.child(1) : e.child(2), env);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Abstract environments
// ---------------------------------------------------------------------------

// N abstracts sets of machine words and provides, besides the lattice
// record: constant, meet, forward_unop/binop, and backward_unop/binop.
template <typename N>
struct NonRelEnv {
  using NumDom = N;
  using Map = ReducedMap<VarId, N>;
  using Env = typename Map::value_type;        // Lifted map, bottom-aware
  using Val = Lifted<typename N::value_type>;  // abstract word set

  static Env top() { return Map::top(); }
  static Env bottom() { return Env::bottom(); }
  static bool le(const Env& a, const Env& b) { return Map::le(a, b); }
  static Env join(const Env& a, const Env& b) { return Map::join(a, b); }
  static Env widen(const Env& a, const Env& b) { return Map::widen(a, b); }
  static Env meet(const Env& a, const Env& b) { return Map::meet(a, b); }

  static Val var_range(const Env& env, VarId v) { return Map::get(env, v); }

  // --- forward evaluation ---------------------------------------------------

  static Val eval(const Env& env, const NExpr& e) {
    if (env.is_bottom()) return Val::bottom();
    switch (e.kind()) {
      case NExpr::Kind::Var:
        return Map::get(env, e.var_id());
      case NExpr::Kind::Const:
        return Val(N::constant(e.word()));
      case NExpr::Kind::Unary: {
        Val a = eval(env, e.child(0));
        if (a.is_bottom()) return Val::bottom();
        return N::forward_unop(e.unop(), a.value());
      }
      case NExpr::Kind::Binary: {
        Val a = eval(env, e.child(0));
        if (a.is_bottom()) return Val::bottom();
        Val b = eval(env, e.child(1));
        if (b.is_bottom()) return Val::bottom();
        return N::forward_binop(e.binop(), a.value(), b.value());
      }
      case NExpr::Kind::Cond: {
        Val g = eval(env, e.child(0));
        if (g.is_bottom()) return Val::bottom();
        // Skip arms the guard cannot reach.
        Val t = guard_can_be_nonzero(g.value())
                    ? eval(env, e.child(1))
                    : Val::bottom();
        Val z = guard_can_be_zero(g.value()) ? eval(env, e.child(2))
                                             : Val::bottom();
        if (t.is_bottom()) return z;
        if (z.is_bottom()) return t;
        return Val(N::join(t.value(), z.value()));
      }
    }
    return Val::bottom();
  }

  // --- backward refinement ---------------------------------------------------

  // Shrinks `env` toward the states in which `e` can evaluate to a value in
  // `target`.  Always a sound over-approximation of that state set; bottom
  // means no state qualifies.
  static Env refine(const Env& env, const NExpr& e, const Val& target) {
    if (env.is_bottom()) return env;
    if (target.is_bottom()) return Env::bottom();
    switch (e.kind()) {
      case NExpr::Kind::Var: {
        Val cur = Map::get(env, e.var_id());
        Val m = N::meet(cur.value(), target.value());
        if (m.is_bottom()) return Env::bottom();
        return Map::set(env, e.var_id(), m);
      }
      case NExpr::Kind::Const: {
        Val m = N::meet(N::constant(e.word()), target.value());
        return m.is_bottom() ? Env::bottom() : env;
      }
      case NExpr::Kind::Unary: {
        Val a = eval(env, e.child(0));
        if (a.is_bottom()) return Env::bottom();
        Val ref = N::backward_unop(e.unop(), a.value(), target.value());
        if (ref.is_bottom()) return Env::bottom();
        return refine(env, e.child(0), ref);
      }
      case NExpr::Kind::Binary: {
        Val a = eval(env, e.child(0));
        if (a.is_bottom()) return Env::bottom();
        Val b = eval(env, e.child(1));
        if (b.is_bottom()) return Env::bottom();
        auto [ra, rb] =
            N::backward_binop(e.binop(), a.value(), b.value(), target.value());
        if (ra.is_bottom() || rb.is_bottom()) return Env::bottom();
        Env out = refine(env, e.child(1), rb);
        return refine(out, e.child(0), ra);
      }
      case NExpr::Kind::Cond: {
        Val g = eval(env, e.child(0));
        if (g.is_bottom()) return Env::bottom();
        // Case split on the guard.  Each side refines its arm to the target
        // first and the guard second, so that in a chain of conditionals
        // information propagates from the innermost condition outward
        // (right to left through `&&` chains).  The guard's own target is
        // computed against the incoming environment.
        Val g_true =
            N::backward_unop(UnOp::BoolVal, g.value(), N::constant(one()));
        Env env_t = refine(env, e.child(1), target);
        if (!env_t.is_bottom())
          env_t = g_true.is_bottom() ? Env::bottom()
                                     : refine(env_t, e.child(0), g_true);

        Env env_f = refine(env, e.child(2), target);
        if (!env_f.is_bottom())
          env_f = refine(env_f, e.child(0), Val(N::constant(zero())));

        return Map::join(env_t, env_f);
      }
    }
    return env;
  }

  // Keeps the states in which `e` evaluates to a nonzero word.  Refinement
  // may expose new bounds on each pass (a narrowed variable narrows the
  // other operands next time around), so it iterates to a local fixpoint
  // with a budget proportional to the number of distinct variables.
  static Env assume(Env env, const NExpr& e) {
    std::set<VarId> vars;
    collect_nexpr_vars(e, vars);
    const int budget =
        std::max(1, std::min(2 * static_cast<int>(vars.size()), 16));
    return assume(std::move(env), e, budget);
  }

  // Same, with an explicit cap on refinement passes.  One pass is a single
  // sweep of the condition tree; later passes reuse bounds learned earlier.
  static Env assume(Env env, const NExpr& e, int passes) {
    NExpr cond = NExpr::unary(UnOp::BoolVal, e);
    Val truthy = Val(N::constant(one()));
    for (int i = 0; i < passes; ++i) {
      Env next = refine(env, cond, truthy);
      if (next == env) break;
      env = std::move(next);
    }
    return env;
  }

  // --- state updates ----------------------------------------------------------

  static Env assign(const Env& env, VarId x, const NExpr& e) {
    Val v = eval(env, e);
    if (v.is_bottom()) return Env::bottom();
    return Map::set(env, x, v);
  }

  static Env forget(const Env& env, VarId x) {
    if (env.is_bottom()) return env;
    return Map::set(env, x, Val(N::top()));
  }

 private:
  static MachineInt zero() { return MachineInt::from_bits(0); }
  static MachineInt one() { return MachineInt::from_bits(1); }

  static bool guard_can_be_zero(const typename N::value_type& g) {
    return !N::meet(g, N::constant(zero())).is_bottom();
  }
  static bool guard_can_be_nonzero(const typename N::value_type& g) {
    return !N::le(g, N::constant(zero()));
  }
};

}  // namespace varan
