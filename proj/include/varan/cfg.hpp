// ===========================================================================
// cfg.hpp -- control-flow-graph intermediate language
//
// A program is a list of global byte arrays plus a list of functions.  Each
// function body is a map from node ids to instructions; every instruction
// names its successor nodes explicitly, so the body is a genuine graph
// rather than a linear listing.  Expressions are immutable shared trees and
// are side-effect free: loads from memory appear in expressions, stores are
// instructions.
// ===========================================================================
#pragma once

#include <cassert>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "varan/ids.hpp"
#include "varan/machine_int.hpp"

namespace varan {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Base class for everything thrown while loading a program.
struct CfgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by the text-format reader on malformed input.
struct ParseError : CfgError {
  using CfgError::CfgError;
};

// Raised by validate() when a structurally well-formed program is
// inconsistent (dangling successor, unknown symbol, duplicate name, ...).
struct SemanticError : CfgError {
  using CfgError::CfgError;
};

// ---------------------------------------------------------------------------
// Memory access granularity
// ---------------------------------------------------------------------------

enum class MemChunk : std::uint8_t {
  Int8Signed,
  Int8Unsigned,
  Int16Signed,
  Int16Unsigned,
  Int32,
};

inline unsigned chunk_size(MemChunk c) {
  switch (c) {
    case MemChunk::Int8Signed:
    case MemChunk::Int8Unsigned:
      return 1;
    case MemChunk::Int16Signed:
    case MemChunk::Int16Unsigned:
      return 2;
    case MemChunk::Int32:
      return 4;
  }
  return 4;
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

// A literal operand: either a 32-bit word, the address of a named symbol
// (global array or function) plus a byte offset, or an address within the
// enclosing function's stack block.
struct Constant {
  enum class Kind : std::uint8_t { Int, GlobalAddr, StackAddr };

  Kind kind = Kind::Int;
  MachineInt value{};    // the word, or the byte offset for addresses
  std::string symbol;    // GlobalAddr only

  static Constant integer(MachineInt w) {
    Constant c;
    c.kind = Kind::Int;
    c.value = w;
    return c;
  }
  static Constant global(std::string name, MachineInt offset = MachineInt{}) {
    Constant c;
    c.kind = Kind::GlobalAddr;
    c.value = offset;
    c.symbol = std::move(name);
    return c;
  }
  static Constant stack(MachineInt offset) {
    Constant c;
    c.kind = Kind::StackAddr;
    c.value = offset;
    return c;
  }

  bool operator==(const Constant&) const = default;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

// Immutable shared expression tree.  Copying an Expr copies a pointer.
class Expr {
 public:
  enum class Kind : std::uint8_t { Var, Const, Unary, Binary, Cond, Load };

  Expr() : Expr(constant(Constant::integer(MachineInt{}))) {}

  static Expr var(VarId v) {
    Node n;
    n.kind = Kind::Var;
    n.var = v;
    return Expr(std::move(n));
  }
  static Expr constant(Constant c) {
    Node n;
    n.kind = Kind::Const;
    n.cst = std::move(c);
    return Expr(std::move(n));
  }
  static Expr unary(UnOp op, Expr a) {
    Node n;
    n.kind = Kind::Unary;
    n.un = op;
    n.kids = {std::move(a)};
    return Expr(std::move(n));
  }
  static Expr binary(BinOp op, Expr a, Expr b) {
    Node n;
    n.kind = Kind::Binary;
    n.bin = op;
    n.kids = {std::move(a), std::move(b)};
    return Expr(std::move(n));
  }
  // Value of `guard ? if_nonzero : if_zero`; the guard must evaluate to an
  // integer, and exactly one arm is evaluated.
  static Expr cond(Expr guard, Expr if_nonzero, Expr if_zero) {
    Node n;
    n.kind = Kind::Cond;
    n.kids = {std::move(guard), std::move(if_nonzero), std::move(if_zero)};
    return Expr(std::move(n));
  }
  static Expr load(MemChunk chunk, Expr addr) {
    Node n;
    n.kind = Kind::Load;
    n.chunk = chunk;
    n.kids = {std::move(addr)};
    return Expr(std::move(n));
  }

  Kind kind() const { return n_->kind; }

  VarId var_id() const {
    assert(kind() == Kind::Var);
    return n_->var;
  }
  const Constant& constant_value() const {
    assert(kind() == Kind::Const);
    return n_->cst;
  }
  UnOp unop() const {
    assert(kind() == Kind::Unary);
    return n_->un;
  }
  BinOp binop() const {
    assert(kind() == Kind::Binary);
    return n_->bin;
  }
  MemChunk chunk() const {
    assert(kind() == Kind::Load);
    return n_->chunk;
  }

  std::size_t child_count() const { return n_->kids.size(); }
  const Expr& child(std::size_t i) const {
    assert(i < n_->kids.size());
    return n_->kids[i];
  }

  // Structural equality (shared subtrees short-circuit).
  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.n_ == b.n_) return true;
    const Node& x = *a.n_;
    const Node& y = *b.n_;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case Kind::Var:
        if (x.var != y.var) return false;
        break;
      case Kind::Const:
        if (!(x.cst == y.cst)) return false;
        break;
      case Kind::Unary:
        if (x.un != y.un) return false;
        break;
      case Kind::Binary:
        if (x.bin != y.bin) return false;
        break;
      case Kind::Cond:
        break;
      case Kind::Load:
        if (x.chunk != y.chunk) return false;
        break;
    }
    if (x.kids.size() != y.kids.size()) return false;
    for (std::size_t i = 0; i < x.kids.size(); ++i)
      if (!(x.kids[i] == y.kids[i])) return false;
    return true;
  }

  // True iff this is the integer literal `w`.
  bool is_int_literal(std::int64_t w) const {
    return kind() == Kind::Const && n_->cst.kind == Constant::Kind::Int &&
           n_->cst.value == MachineInt::from_integer(w);
  }

 private:
  struct Node {
    Kind kind = Kind::Const;
    VarId var = 0;
    Constant cst;
    UnOp un = UnOp::Neg;
    BinOp bin = BinOp::Add;
    MemChunk chunk = MemChunk::Int32;
    std::vector<Expr> kids;
  };

  explicit Expr(Node n) : n_(std::make_shared<const Node>(std::move(n))) {}

  std::shared_ptr<const Node> n_;
};

// Adds every variable mentioned by `e` to `out`.
inline void collect_vars(const Expr& e, std::set<VarId>& out) {
  if (e.kind() == Expr::Kind::Var) out.insert(e.var_id());
  for (std::size_t i = 0; i < e.child_count(); ++i)
    collect_vars(e.child(i), out);
}

// ---------------------------------------------------------------------------
// Instructions
// ---------------------------------------------------------------------------

struct SkipInstr {
  NodeId next;
  bool operator==(const SkipInstr&) const = default;
};

struct AssignInstr {
  VarId dst;
  Expr value;
  NodeId next;
  bool operator==(const AssignInstr&) const = default;
};

struct StoreInstr {
  MemChunk chunk;
  Expr addr;
  Expr value;
  NodeId next;
  bool operator==(const StoreInstr&) const = default;
};

struct IfInstr {
  Expr cond;
  NodeId if_true;   // taken when the guard is a nonzero integer
  NodeId if_false;  // taken when the guard is zero
  bool operator==(const IfInstr&) const = default;
};

struct CallInstr {
  std::string signature;        // free-form tag, not interpreted
  std::optional<VarId> dst;     // receives the callee's return value
  Expr callee;                  // must evaluate to a function address
  std::vector<Expr> args;
  NodeId next;
  bool operator==(const CallInstr&) const = default;
};

struct ReturnInstr {
  std::optional<Expr> value;
  bool operator==(const ReturnInstr&) const = default;
};

using Instruction = std::variant<SkipInstr, AssignInstr, StoreInstr, IfInstr,
                                 CallInstr, ReturnInstr>;

inline std::vector<NodeId> successors(const Instruction& ins) {
  return std::visit(
      [](const auto& i) -> std::vector<NodeId> {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, IfInstr>)
          return {i.if_true, i.if_false};
        else if constexpr (std::is_same_v<T, ReturnInstr>)
          return {};
        else
          return {i.next};
      },
      ins);
}

// ---------------------------------------------------------------------------
// Functions and programs
// ---------------------------------------------------------------------------

struct CfgFunction {
  std::string name;
  std::vector<VarId> params;
  std::uint32_t stack_size = 0;  // bytes in this function's stack block
  NodeId entry = 0;
  std::map<NodeId, Instruction> body;
  std::map<VarId, std::string> var_names;
  std::set<NodeId> report_nodes;  // nodes flagged for reporting

  bool operator==(const CfgFunction&) const = default;
};

// Printable name of a variable; falls back to a synthetic name so that IR
// built programmatically without a name table still renders.
inline std::string var_name(const CfgFunction& f, VarId v) {
  auto it = f.var_names.find(v);
  if (it != f.var_names.end()) return it->second;
  return "v" + std::to_string(v);
}

// Every variable a function mentions: parameters, assignment and call
// destinations, and every variable read by an expression.
inline std::set<VarId> function_vars(const CfgFunction& f) {
  std::set<VarId> vars(f.params.begin(), f.params.end());
  for (const auto& [node, ins] : f.body) {
    std::visit(
        [&](const auto& i) {
          using T = std::decay_t<decltype(i)>;
          if constexpr (std::is_same_v<T, AssignInstr>) {
            vars.insert(i.dst);
            collect_vars(i.value, vars);
          } else if constexpr (std::is_same_v<T, StoreInstr>) {
            collect_vars(i.addr, vars);
            collect_vars(i.value, vars);
          } else if constexpr (std::is_same_v<T, IfInstr>) {
            collect_vars(i.cond, vars);
          } else if constexpr (std::is_same_v<T, CallInstr>) {
            if (i.dst) vars.insert(*i.dst);
            collect_vars(i.callee, vars);
            for (const Expr& a : i.args) collect_vars(a, vars);
          } else if constexpr (std::is_same_v<T, ReturnInstr>) {
            if (i.value) collect_vars(*i.value, vars);
          }
        },
        ins);
  }
  return vars;
}

struct CfgProgram {
  // name, size in bytes -- declaration order is preserved
  std::vector<std::pair<std::string, std::uint32_t>> globals;
  std::vector<CfgFunction> functions;

  bool operator==(const CfgProgram&) const = default;

  const CfgFunction* find_function(const std::string& name) const {
    for (const CfgFunction& f : functions)
      if (f.name == name) return &f;
    return nullptr;
  }

  // Execution and analysis start at `main` when it exists, otherwise at the
  // first function in declaration order.
  const CfgFunction& entry_function() const {
    if (functions.empty())
      throw SemanticError("program has no functions");
    if (const CfgFunction* m = find_function("main")) return *m;
    return functions.front();
  }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline void check_symbols(const CfgProgram& p, const CfgFunction& f,
                          const Expr& e) {
  if (e.kind() == Expr::Kind::Const) {
    const Constant& c = e.constant_value();
    if (c.kind == Constant::Kind::GlobalAddr) {
      bool known = p.find_function(c.symbol) != nullptr;
      for (const auto& [name, size] : p.globals)
        if (name == c.symbol) known = true;
      if (!known)
        throw SemanticError("function '" + f.name +
                            "' references unknown symbol '" + c.symbol + "'");
    }
  }
  for (std::size_t i = 0; i < e.child_count(); ++i)
    check_symbols(p, f, e.child(i));
}

}  // namespace detail

// Checks program-level consistency: unique names, resolvable symbols,
// existing entry and successor nodes, positive node ids.  Throws
// SemanticError on the first problem found.
inline void validate(const CfgProgram& p) {
  std::set<std::string> names;
  for (const auto& [name, size] : p.globals) {
    if (!names.insert(name).second)
      throw SemanticError("duplicate symbol '" + name + "'");
  }
  for (const CfgFunction& f : p.functions) {
    if (!names.insert(f.name).second)
      throw SemanticError("duplicate symbol '" + f.name + "'");
  }

  for (const CfgFunction& f : p.functions) {
    std::set<VarId> seen_params;
    for (VarId v : f.params)
      if (!seen_params.insert(v).second)
        throw SemanticError("function '" + f.name +
                            "' has a duplicate parameter");

    if (f.body.empty())
      throw SemanticError("function '" + f.name + "' has an empty body");
    if (!f.body.count(f.entry))
      throw SemanticError("function '" + f.name + "': entry node " +
                          std::to_string(f.entry) + " does not exist");
    for (const auto& [node, ins] : f.body) {
      if (node == 0)
        throw SemanticError("function '" + f.name +
                            "': node ids must be positive");
      for (NodeId succ : successors(ins))
        if (!f.body.count(succ))
          throw SemanticError("function '" + f.name + "': node " +
                              std::to_string(node) +
                              " jumps to missing node " +
                              std::to_string(succ));
      std::visit(
          [&](const auto& i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, AssignInstr>) {
              detail::check_symbols(p, f, i.value);
            } else if constexpr (std::is_same_v<T, StoreInstr>) {
              detail::check_symbols(p, f, i.addr);
              detail::check_symbols(p, f, i.value);
            } else if constexpr (std::is_same_v<T, IfInstr>) {
              detail::check_symbols(p, f, i.cond);
            } else if constexpr (std::is_same_v<T, CallInstr>) {
              detail::check_symbols(p, f, i.callee);
              for (const Expr& a : i.args) detail::check_symbols(p, f, a);
            } else if constexpr (std::is_same_v<T, ReturnInstr>) {
              if (i.value) detail::check_symbols(p, f, *i.value);
            }
          },
          ins);
    }
    for (NodeId r : f.report_nodes)
      if (!f.body.count(r))
        throw SemanticError("function '" + f.name + "': report marker on " +
                            "missing node " + std::to_string(r));
  }
}

}  // namespace varan
