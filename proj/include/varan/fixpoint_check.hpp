// Independent validation of a claimed solution to a flow system.
//
// The analyzer's soundness never rests on how a candidate solution was
// produced — only on this check accepting it.  The check uses nothing but
// the domain's order and the edge transfer functions:
//
//   * the initial state is below the candidate's entry state, and
//   * pushing each node's candidate state across each outgoing edge lands
//     below the candidate state of the edge's target.
//
// Any map passing both conditions over-approximates every concrete
// execution by induction over its steps, no matter what (widening,
// heuristics, bugs) happened while computing it.  Keep this file free of
// any iteration machinery: it must stay meaningful when the solver is
// replaced wholesale.
#pragma once

#include <map>

#include "varan/cfg.hpp"
#include "varan/transfer.hpp"

namespace varan {

template <typename D>
const typename D::State& candidate_at(
    const std::map<NodeId, typename D::State>& cand, NodeId n,
    const typename D::State& absent) {
  auto it = cand.find(n);
  return it == cand.end() ? absent : it->second;
}

template <typename D>
bool check_post_fixpoint(const FlowSystem<D>& sys,
                         const typename D::State& init,
                         const std::map<NodeId, typename D::State>& cand) {
  // A node the candidate does not mention claims nothing: treat it as top.
  const typename D::State top = D::top();
  if (!D::le(init, candidate_at<D>(cand, sys.entry, top))) return false;
  for (const auto& e : sys.edges) {
    const typename D::State& from = candidate_at<D>(cand, e.from, top);
    if (!D::le(e.apply(from), candidate_at<D>(cand, e.to, top))) return false;
  }
  return true;
}

}  // namespace varan
