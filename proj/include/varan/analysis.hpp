// Whole-program range analysis, and the execution oracle that cross-checks
// its results against the reference machine.
//
// Each function is analysed separately: its body becomes a flow system
// whose edges apply the variable-state domain's transfer functions, the
// system is solved over the function's weak topological order, and the
// validated solution maps every node to the abstract state holding just
// before that node executes.  Function entry states are unconstrained, so
// any call protocol is covered; a call instruction only clobbers its result
// variable.
//
// If solving a function fails (budget, or a result the checker refuses),
// that function's answer degrades to all-top and the result is flagged, but
// other functions keep their precision.
#pragma once

#include <cstdint>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "varan/cfg.hpp"
#include "varan/concrete.hpp"
#include "varan/fixpoint.hpp"
#include "varan/interval.hpp"
#include "varan/machine_int.hpp"
#include "varan/mem.hpp"
#include "varan/num_env.hpp"
#include "varan/reduced_product.hpp"
#include "varan/transfer.hpp"
#include "varan/wto.hpp"

namespace varan {

using ProgramDomain = MemoryDomain<NonRelEnv<IntervalPairDomain>>;

// Turns one function body into a flow system over domain D.
template <typename D>
FlowSystem<D> build_flow(const CfgFunction& f) {
  using State = typename D::State;
  FlowSystem<D> sys;
  sys.entry = f.entry;
  for (const auto& [pc, instruction] : f.body) {
    NodeId at = pc;
    std::visit(
        [&](const auto& ins) {
          using T = std::decay_t<decltype(ins)>;
          if constexpr (std::is_same_v<T, SkipInstr>) {
            sys.add_edge(at, ins.next, [](const State& s) { return s; });
          } else if constexpr (std::is_same_v<T, AssignInstr>) {
            sys.add_edge(at, ins.next,
                         [dst = ins.dst, e = ins.value](const State& s) {
                           return D::assign(s, dst, e);
                         });
          } else if constexpr (std::is_same_v<T, StoreInstr>) {
            sys.add_edge(at, ins.next,
                         [chunk = ins.chunk, addr = ins.addr,
                          value = ins.value](const State& s) {
                           return D::store(s, chunk, addr, value);
                         });
          } else if constexpr (std::is_same_v<T, IfInstr>) {
            sys.add_edge(at, ins.if_true, [e = ins.cond](const State& s) {
              return D::assume(s, e, true);
            });
            sys.add_edge(at, ins.if_false, [e = ins.cond](const State& s) {
              return D::assume(s, e, false);
            });
          } else if constexpr (std::is_same_v<T, CallInstr>) {
            // The callee cannot touch the caller's variables except through
            // the result; memory is not tracked.
            if (ins.dst.has_value()) {
              sys.add_edge(at, ins.next, [dst = *ins.dst](const State& s) {
                return D::forget(s, dst);
              });
            } else {
              sys.add_edge(at, ins.next, [](const State& s) { return s; });
            }
          } else {
            static_assert(std::is_same_v<T, ReturnInstr>);
          }
        },
        instruction);
  }
  return sys;
}

struct FunctionResult {
  const CfgFunction* fn = nullptr;
  Wto order;
  std::map<NodeId, ProgramDomain::State> values;
  bool fallback = false;
};

struct AnalysisResult {
  const CfgProgram* program = nullptr;
  std::vector<FunctionResult> functions;
  bool any_fallback = false;

  const FunctionResult* for_function(const std::string& name) const {
    for (const FunctionResult& fr : functions) {
      if (fr.fn->name == name) return &fr;
    }
    return nullptr;
  }
};

// Update allowance per node: generous enough for deeply nested loops over
// the threshold-laddered widening, small enough to cut runaways off.
inline constexpr std::uint64_t updates_per_node = 600;

inline AnalysisResult analyze_program(
    const CfgProgram& prog, const SolveEngine<ProgramDomain>& engine) {
  AnalysisResult out;
  out.program = &prog;
  for (const CfgFunction& f : prog.functions) {
    FunctionResult fr;
    fr.fn = &f;
    fr.order = weak_topological_order(f);
    FlowSystem<ProgramDomain> sys = build_flow<ProgramDomain>(f);
    std::uint64_t budget = updates_per_node * (f.body.size() + 1);
    SolveResult<ProgramDomain> sol = solve_post_fixpoint<ProgramDomain>(
        sys, fr.order, ProgramDomain::top(), budget, engine);
    fr.values = std::move(sol.values);
    fr.fallback = sol.fallback;
    out.any_fallback = out.any_fallback || fr.fallback;
    out.functions.push_back(std::move(fr));
  }
  return out;
}

inline AnalysisResult analyze_program(const CfgProgram& prog) {
  return analyze_program(
      prog, SolveEngine<ProgramDomain>(&iterate_post_fixpoint<ProgramDomain>));
}

// ---------------------------------------------------------------------------
// Execution oracle.
//
// Every state of a recorded execution must be covered by the abstract state
// the analysis reports for that program point: integer-valued variables lie
// inside both reported views, and a point claimed unreachable is never
// visited.  Each departure is reported.

struct OracleViolation {
  std::string function;
  NodeId pc = 0;
  VarId var = 0;  // 0 when the point itself was claimed unreachable
  std::string message;
};

inline std::vector<OracleViolation> check_against_oracle(
    const AnalysisResult& ar, const TraceResult& tr) {
  std::vector<OracleViolation> out;
  for (const TraceState& st : tr.states) {
    const FunctionResult* fr = ar.for_function(st.fn->name);
    if (fr == nullptr) {
      out.push_back({st.fn->name, st.pc, 0, "function was never analysed"});
      continue;
    }
    auto it = fr->values.find(st.pc);
    if (it == fr->values.end()) continue;  // missing claims nothing
    const ProgramDomain::State& abs = it->second;
    if (ProgramDomain::is_bottom(abs)) {
      std::ostringstream msg;
      msg << st.fn->name << ":" << st.pc
          << " is claimed unreachable but was executed";
      out.push_back({st.fn->name, st.pc, 0, msg.str()});
      continue;
    }
    for (const auto& [var, val] : st.env) {
      const VInt* iv = std::get_if<VInt>(&val);
      if (iv == nullptr) continue;  // only integer values are constrained
      for (Signedness view : {Signedness::Signed, Signedness::Unsigned}) {
        Lifted<Interval> r = ProgramDomain::var_range(abs, var, view);
        if (r.is_bottom()) {
          std::ostringstream msg;
          msg << st.fn->name << ":" << st.pc << " " << var_name(*st.fn, var)
              << " claimed valueless but holds " << iv->w.unsigned_value();
          out.push_back({st.fn->name, st.pc, var, msg.str()});
          break;
        }
        Big v(iv->w.view(view));
        if (v < r.value().lo || v > r.value().hi) {
          std::ostringstream msg;
          msg << st.fn->name << ":" << st.pc << " " << var_name(*st.fn, var)
              << " = " << iv->w.view(view) << " outside ["
              << r.value().lo << ", " << r.value().hi << "]";
          out.push_back({st.fn->name, st.pc, var, msg.str()});
        }
      }
    }
  }
  return out;
}

// Deterministic entry environments for the oracle: a mix of boundary words,
// small counters and arbitrary bit patterns, occasionally leaving a
// parameter undefined.
inline std::map<VarId, Value> make_seed_env(const CfgFunction& f,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ (seed * 0xbf58476d1ce4e5b9ULL));
  static const std::int64_t pool[] = {
      0,  1,          -1,         2,          7,           9,
      10, 100,        255,        256,        4096,        -100,
      31, 32,         33,         max_signed, min_signed,  max_signed - 1,
      5,  2147483648, max_unsigned};
  std::map<VarId, Value> env;
  for (VarId p : f.params) {
    switch (rng() % 10) {
      case 0:
        break;  // leave the parameter undefined
      case 1:
        env[p] = vint(static_cast<std::int64_t>(rng()));
        break;
      default:
        env[p] = vint(pool[rng() % std::size(pool)]);
        break;
    }
  }
  return env;
}

}  // namespace varan
