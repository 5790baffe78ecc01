// ===========================================================================
// concrete.hpp -- reference interpreter for CFG programs
//
// Defines the ground-truth small-step semantics the analyzer is measured
// against.  Values are undefined, 32-bit words, or pointers (block id plus
// byte offset).  Memory is a set of typed cells per block: a store wipes any
// overlapping cells and installs one cell; a load yields a value only when
// it hits exactly one cell at the same offset and size (global blocks read
// as zero where nothing was ever stored).  Arithmetic follows machine_int;
// operations with no defined result (division traps, out-of-bounds or wild
// memory access, non-integer guards, bad calls) have no transition: the
// machine reports itself stuck, and execution ends there.
// ===========================================================================
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "varan/cfg.hpp"
#include "varan/machine_int.hpp"

namespace varan {

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

struct VUndef {
  bool operator==(const VUndef&) const = default;
};
struct VInt {
  MachineInt w;
  bool operator==(const VInt&) const = default;
};
struct VPtr {
  BlockId block;
  MachineInt offset;  // byte offset, wraps as a word
  bool operator==(const VPtr&) const = default;
};
using Value = std::variant<VUndef, VInt, VPtr>;

inline Value vint(std::int64_t w) { return VInt{MachineInt::from_integer(w)}; }
inline bool is_undef(const Value& v) {
  return std::holds_alternative<VUndef>(v);
}
inline const VInt* as_int(const Value& v) { return std::get_if<VInt>(&v); }
inline const VPtr* as_ptr(const Value& v) { return std::get_if<VPtr>(&v); }

// ---------------------------------------------------------------------------
// Machine
// ---------------------------------------------------------------------------

enum class StepStatus : std::uint8_t { Running, Done, Stuck };

class Machine {
 public:
  explicit Machine(const CfgProgram& prog) : prog_(&prog) {
    for (const CfgFunction& f : prog.functions) {
      block_ids_.emplace(f.name, static_cast<BlockId>(blocks_.size()));
      blocks_.push_back({f.name, 0, &f, false, true});
    }
    for (const auto& [name, size] : prog.globals) {
      block_ids_.emplace(name, static_cast<BlockId>(blocks_.size()));
      blocks_.push_back({name, size, nullptr, true, true});
    }
  }

  // Begins execution of `f` with the given initial environment.  Variables
  // absent from `env` read as undefined.
  void start(const CfgFunction& f, std::map<VarId, Value> env) {
    frames_.clear();
    status_ = StepStatus::Running;
    stuck_reason_.clear();
    result_.reset();
    push_frame(f, std::move(env), std::nullopt);
  }

  StepStatus status() const { return status_; }
  const std::string& stuck_reason() const { return stuck_reason_; }
  // Defined once status() == Done: the entry function's return value.
  const std::optional<Value>& result() const { return result_; }

  const CfgFunction& current_function() const {
    return *frames_.back().fn;
  }
  NodeId current_pc() const { return frames_.back().pc; }
  const std::map<VarId, Value>& current_env() const {
    return frames_.back().env;
  }
  bool running() const { return status_ == StepStatus::Running; }

  // Executes one instruction.
  StepStatus step() {
    if (status_ != StepStatus::Running) return status_;
    Frame& fr = frames_.back();
    auto it = fr.fn->body.find(fr.pc);
    if (it == fr.fn->body.end()) return stuck("jump to a missing node");

    return std::visit(
        [&](const auto& ins) -> StepStatus {
          using T = std::decay_t<decltype(ins)>;
          if constexpr (std::is_same_v<T, SkipInstr>) {
            fr.pc = ins.next;
            return status_;
          } else if constexpr (std::is_same_v<T, AssignInstr>) {
            std::optional<Value> v = eval(fr, ins.value);
            if (!v) return stuck("assignment operand has no value");
            fr.env[ins.dst] = *v;
            fr.pc = ins.next;
            return status_;
          } else if constexpr (std::is_same_v<T, StoreInstr>) {
            std::optional<Value> a = eval(fr, ins.addr);
            std::optional<Value> v = eval(fr, ins.value);
            if (!a || !v) return stuck("store operand has no value");
            const VPtr* p = as_ptr(*a);
            if (!p) return stuck("store through a non-pointer");
            if (!write_cell(*p, ins.chunk, *v)) return stuck("bad store");
            fr.pc = ins.next;
            return status_;
          } else if constexpr (std::is_same_v<T, IfInstr>) {
            std::optional<Value> g = eval(fr, ins.cond);
            if (!g) return stuck("branch guard has no value");
            const VInt* w = as_int(*g);
            if (!w) return stuck("branch guard is not an integer");
            fr.pc = w->w.bits() != 0 ? ins.if_true : ins.if_false;
            return status_;
          } else if constexpr (std::is_same_v<T, CallInstr>) {
            return do_call(fr, ins);
          } else {
            static_assert(std::is_same_v<T, ReturnInstr>);
            return do_return(fr, ins);
          }
        },
        it->second);
  }

 private:
  struct Block {
    std::string name;
    std::uint32_t size = 0;
    const CfgFunction* fn = nullptr;  // set for function blocks
    bool zero_init = false;           // globals read as zero by default
    bool alive = true;                // stack blocks die on return
  };

  // One stored region: `size` bytes at some offset holding either truncated
  // integer bits, a pointer (4-byte cells only), or undef.
  struct Cell {
    unsigned size = 4;
    Value v = VUndef{};
  };

  struct Frame {
    const CfgFunction* fn = nullptr;
    NodeId pc = 0;
    std::map<VarId, Value> env;
    BlockId stack_block = 0;
    std::optional<VarId> ret_dst;  // caller variable receiving the result
  };

  const CfgProgram* prog_;
  std::vector<Block> blocks_;
  std::map<std::string, BlockId> block_ids_;
  std::map<BlockId, std::map<std::uint32_t, Cell>> memory_;
  std::vector<Frame> frames_;
  StepStatus status_ = StepStatus::Done;
  std::string stuck_reason_;
  std::optional<Value> result_;

  StepStatus stuck(std::string why) {
    status_ = StepStatus::Stuck;
    stuck_reason_ = std::move(why);
    return status_;
  }

  void push_frame(const CfgFunction& f, std::map<VarId, Value> env,
                  std::optional<VarId> ret_dst) {
    Frame fr;
    fr.fn = &f;
    fr.pc = f.entry;
    fr.env = std::move(env);
    fr.ret_dst = ret_dst;
    fr.stack_block = static_cast<BlockId>(blocks_.size());
    blocks_.push_back({f.name + ".stack", f.stack_size, nullptr, false, true});
    frames_.push_back(std::move(fr));
  }

  StepStatus do_call(Frame& fr, const CallInstr& ins) {
    std::optional<Value> callee = eval(fr, ins.callee);
    if (!callee) return stuck("callee has no value");
    const VPtr* p = as_ptr(*callee);
    if (!p || p->offset != MachineInt{} ||
        p->block >= blocks_.size() || blocks_[p->block].fn == nullptr)
      return stuck("call target is not a function");
    const CfgFunction& target = *blocks_[p->block].fn;
    if (ins.args.size() != target.params.size())
      return stuck("call to '" + target.name + "' with " +
                   std::to_string(ins.args.size()) + " argument(s), expected " +
                   std::to_string(target.params.size()));
    std::map<VarId, Value> callee_env;
    for (std::size_t k = 0; k < ins.args.size(); ++k) {
      std::optional<Value> v = eval(fr, ins.args[k]);
      if (!v) return stuck("call argument has no value");
      callee_env[target.params[k]] = *v;
    }
    fr.pc = ins.next;  // resume here after the callee returns
    push_frame(target, std::move(callee_env), ins.dst);
    return status_;
  }

  StepStatus do_return(Frame& fr, const ReturnInstr& ins) {
    Value v = VUndef{};
    if (ins.value) {
      std::optional<Value> r = eval(fr, *ins.value);
      if (!r) return stuck("return operand has no value");
      v = *r;
    }
    // The frame's stack block dies with it; pointers into it go wild.
    blocks_[fr.stack_block].alive = false;
    memory_.erase(fr.stack_block);
    std::optional<VarId> dst = fr.ret_dst;
    frames_.pop_back();
    if (frames_.empty()) {
      status_ = StepStatus::Done;
      result_ = v;
      return status_;
    }
    if (dst) frames_.back().env[*dst] = v;
    return status_;
  }

  // --- expression evaluation ----------------------------------------------
  // nullopt means evaluation (and hence the instruction) is stuck; VUndef is
  // an ordinary value that flows through arithmetic.

  std::optional<Value> eval(const Frame& fr, const Expr& e) {
    switch (e.kind()) {
      case Expr::Kind::Var: {
        auto it = fr.env.find(e.var_id());
        return it == fr.env.end() ? Value{VUndef{}} : it->second;
      }
      case Expr::Kind::Const: {
        const Constant& c = e.constant_value();
        switch (c.kind) {
          case Constant::Kind::Int:
            return Value{VInt{c.value}};
          case Constant::Kind::GlobalAddr: {
            auto it = block_ids_.find(c.symbol);
            if (it == block_ids_.end()) return std::nullopt;
            return Value{VPtr{it->second, c.value}};
          }
          case Constant::Kind::StackAddr:
            return Value{VPtr{fr.stack_block, c.value}};
        }
        return std::nullopt;
      }
      case Expr::Kind::Unary: {
        std::optional<Value> a = eval(fr, e.child(0));
        if (!a) return std::nullopt;
        if (const VInt* w = as_int(*a)) {
          std::optional<MachineInt> r = eval_unop(e.unop(), w->w);
          if (!r) return std::nullopt;
          return Value{VInt{*r}};
        }
        return Value{VUndef{}};  // unary arithmetic on undef or pointers
      }
      case Expr::Kind::Binary:
        return eval_binary(fr, e);
      case Expr::Kind::Cond: {
        std::optional<Value> g = eval(fr, e.child(0));
        if (!g) return std::nullopt;
        const VInt* w = as_int(*g);
        if (!w) return std::nullopt;  // guards must be integers
        return eval(fr, w->w.bits() != 0 ? e.child(1) : e.child(2));
      }
      case Expr::Kind::Load: {
        std::optional<Value> a = eval(fr, e.child(0));
        if (!a) return std::nullopt;
        const VPtr* p = as_ptr(*a);
        if (!p) return std::nullopt;
        return read_cell(*p, e.chunk());
      }
    }
    return std::nullopt;
  }

  std::optional<Value> eval_binary(const Frame& fr, const Expr& e) {
    std::optional<Value> oa = eval(fr, e.child(0));
    if (!oa) return std::nullopt;
    std::optional<Value> ob = eval(fr, e.child(1));
    if (!ob) return std::nullopt;
    const BinOp op = e.binop();
    const VInt* ai = as_int(*oa);
    const VInt* bi = as_int(*ob);
    const VPtr* ap = as_ptr(*oa);
    const VPtr* bp = as_ptr(*ob);

    if (ai && bi) {
      std::optional<MachineInt> r = eval_binop(op, ai->w, bi->w);
      if (!r) return std::nullopt;  // trap: the instruction is stuck
      return Value{VInt{*r}};
    }

    // Pointer arithmetic: offset adjustment, same-block difference, and
    // same-block unsigned comparison.  Everything else involving a pointer
    // or an undef has no defined result and yields undef.
    if (ap && bi && op == BinOp::Add)
      return Value{VPtr{ap->block, MachineInt::from_integer(
                                       ap->offset.unsigned_value() +
                                       bi->w.unsigned_value())}};
    if (ai && bp && op == BinOp::Add)
      return Value{VPtr{bp->block, MachineInt::from_integer(
                                       bp->offset.unsigned_value() +
                                       ai->w.unsigned_value())}};
    if (ap && bi && op == BinOp::Sub)
      return Value{VPtr{ap->block, MachineInt::from_integer(
                                       ap->offset.unsigned_value() -
                                       bi->w.unsigned_value())}};
    if (ap && bp && op == BinOp::Sub && ap->block == bp->block)
      return Value{VInt{MachineInt::from_integer(
          ap->offset.unsigned_value() - bp->offset.unsigned_value())}};
    if (ap && bp && ap->block == bp->block && is_comparison(op) &&
        is_unsigned_comparison(op)) {
      std::optional<MachineInt> r =
          eval_binop(op, ap->offset, bp->offset);
      if (!r) return std::nullopt;
      return Value{VInt{*r}};
    }
    return Value{VUndef{}};
  }

  // --- memory ---------------------------------------------------------------

  bool block_ok(const VPtr& p, unsigned size, std::uint64_t* out_ofs) {
    if (p.block >= blocks_.size()) return false;
    const Block& b = blocks_[p.block];
    if (!b.alive || b.fn != nullptr) return false;
    std::uint64_t ofs = static_cast<std::uint64_t>(p.offset.unsigned_value());
    if (ofs + size > b.size) return false;
    *out_ofs = ofs;
    return true;
  }

  bool write_cell(const VPtr& p, MemChunk chunk, const Value& v) {
    std::uint64_t ofs64 = 0;
    const unsigned size = chunk_size(chunk);
    if (!block_ok(p, size, &ofs64)) return false;
    const std::uint32_t ofs = static_cast<std::uint32_t>(ofs64);
    auto& cells = memory_[p.block];
    // Clobber everything the new cell overlaps.
    for (auto it = cells.lower_bound(ofs >= 3 ? ofs - 3 : 0);
         it != cells.end() && it->first < ofs + size;) {
      if (it->first + it->second.size > ofs)
        it = cells.erase(it);
      else
        ++it;
    }
    Cell cell;
    cell.size = size;
    if (const VInt* w = as_int(v)) {
      std::uint32_t mask =
          size == 4 ? 0xFFFFFFFFu : ((1u << (8 * size)) - 1u);
      cell.v = VInt{MachineInt::from_bits(w->w.bits() & mask)};
    } else if (const VPtr* q = as_ptr(v)) {
      cell.v = size == 4 ? Value{*q} : Value{VUndef{}};
    } else {
      cell.v = VUndef{};
    }
    cells[ofs] = cell;
    return true;
  }

  std::optional<Value> read_cell(const VPtr& p, MemChunk chunk) {
    std::uint64_t ofs64 = 0;
    const unsigned size = chunk_size(chunk);
    if (!block_ok(p, size, &ofs64)) return std::nullopt;
    const std::uint32_t ofs = static_cast<std::uint32_t>(ofs64);
    auto mit = memory_.find(p.block);
    const Cell* hit = nullptr;
    int overlaps = 0;
    if (mit != memory_.end()) {
      auto& cells = mit->second;
      for (auto it = cells.lower_bound(ofs >= 3 ? ofs - 3 : 0);
           it != cells.end() && it->first < ofs + size; ++it) {
        if (it->first + it->second.size <= ofs) continue;
        ++overlaps;
        if (it->first == ofs && it->second.size == size) hit = &it->second;
      }
    }
    if (overlaps == 0)
      return blocks_[p.block].zero_init ? Value{VInt{MachineInt{}}}
                                        : Value{VUndef{}};
    if (overlaps != 1 || !hit) return Value{VUndef{}};
    if (const VInt* w = as_int(hit->v)) {
      std::uint32_t bits = w->w.bits();
      switch (chunk) {
        case MemChunk::Int8Signed:
          return Value{VInt{MachineInt::from_integer(
              static_cast<std::int64_t>(static_cast<std::int8_t>(bits)))}};
        case MemChunk::Int8Unsigned:
          return Value{VInt{MachineInt::from_bits(bits & 0xFF)}};
        case MemChunk::Int16Signed:
          return Value{VInt{MachineInt::from_integer(
              static_cast<std::int64_t>(static_cast<std::int16_t>(bits)))}};
        case MemChunk::Int16Unsigned:
          return Value{VInt{MachineInt::from_bits(bits & 0xFFFF)}};
        case MemChunk::Int32:
          return Value{VInt{MachineInt::from_bits(bits)}};
      }
    }
    if (const VPtr* q = as_ptr(hit->v))
      return chunk == MemChunk::Int32 ? Value{*q} : Value{VUndef{}};
    return Value{VUndef{}};
  }
};

// ---------------------------------------------------------------------------
// Tracing
// ---------------------------------------------------------------------------

struct TraceState {
  const CfgFunction* fn;
  NodeId pc;
  std::map<VarId, Value> env;
};

struct TraceResult {
  enum class End : std::uint8_t { Done, Stuck, OutOfFuel };
  std::vector<TraceState> states;
  End end = End::Done;
  std::optional<Value> result;     // Done only
  std::string stuck_reason;        // Stuck only
};

// Runs `entry` on `prog` for at most `fuel` steps, recording the machine
// state (function, node, environment) before every step.
inline TraceResult trace(const CfgProgram& prog, const CfgFunction& entry,
                         std::map<VarId, Value> env, std::uint64_t fuel) {
  Machine m(prog);
  m.start(entry, std::move(env));
  TraceResult out;
  for (std::uint64_t i = 0; i < fuel && m.running(); ++i) {
    out.states.push_back(
        TraceState{&m.current_function(), m.current_pc(), m.current_env()});
    m.step();
  }
  switch (m.status()) {
    case StepStatus::Done:
      out.end = TraceResult::End::Done;
      out.result = m.result();
      break;
    case StepStatus::Stuck:
      out.end = TraceResult::End::Stuck;
      out.stuck_reason = m.stuck_reason();
      break;
    case StepStatus::Running:
      out.end = TraceResult::End::OutOfFuel;
      break;
  }
  return out;
}

inline TraceResult trace(const CfgProgram& prog,
                         std::map<VarId, Value> env, std::uint64_t fuel) {
  return trace(prog, prog.entry_function(), std::move(env), fuel);
}

}  // namespace varan
