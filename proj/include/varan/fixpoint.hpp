// Validated fixpoint solving: run a solver, keep its answer only if the
// independent checker accepts it, and otherwise degrade to the solution
// that claims nothing.
//
// The solver is an injectable parameter precisely so that it carries no
// trust: replace it with anything — including a stub returning garbage —
// and the worst possible outcome is the all-top fallback, never an unsound
// answer.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <utility>

#include "varan/cfg.hpp"
#include "varan/fixpoint_check.hpp"
#include "varan/fixpoint_iterate.hpp"
#include "varan/transfer.hpp"
#include "varan/wto.hpp"

namespace varan {

template <typename D>
struct SolveResult {
  std::map<NodeId, typename D::State> values;
  // True when the solver's answer was unusable (budget blown or rejected by
  // the checker) and `values` is the all-top fallback.
  bool fallback = false;
};

template <typename D>
using SolveEngine = std::function<std::map<NodeId, typename D::State>(
    const FlowSystem<D>&, const Wto&, const typename D::State&,
    std::uint64_t)>;

namespace fixpoint_detail {

template <typename D>
void fill_top(const Wto& order, std::map<NodeId, typename D::State>& out) {
  for (const WtoElement& e : order) {
    out.emplace(e.head, D::top());
    fill_top<D>(e.body, out);
  }
}

}  // namespace fixpoint_detail

template <typename D>
SolveResult<D> solve_post_fixpoint(const FlowSystem<D>& sys, const Wto& order,
                                   const typename D::State& init,
                                   std::uint64_t budget,
                                   const SolveEngine<D>& engine) {
  std::map<NodeId, typename D::State> cand;
  bool produced = false;
  try {
    cand = engine(sys, order, init, budget);
    produced = true;
  } catch (const IterationBudgetExceeded&) {
    // fall through to the top map
  }
  if (produced && check_post_fixpoint<D>(sys, init, cand)) {
    return SolveResult<D>{std::move(cand), false};
  }
  // The all-top map constrains nothing, so it satisfies every equation.
  SolveResult<D> out;
  out.fallback = true;
  fixpoint_detail::fill_top<D>(order, out.values);
  return out;
}

template <typename D>
SolveResult<D> solve_post_fixpoint(const FlowSystem<D>& sys, const Wto& order,
                                   const typename D::State& init,
                                   std::uint64_t budget) {
  return solve_post_fixpoint<D>(sys, order, init, budget,
                                SolveEngine<D>(&iterate_post_fixpoint<D>));
}

}  // namespace varan
