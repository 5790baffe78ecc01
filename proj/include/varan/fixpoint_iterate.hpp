// The iterating solver: chaotic iteration over a weak topological order,
// with widening at component heads and a bounded decreasing phase.
//
// Nothing downstream trusts this code — its output is validated by the
// independent checker before being used (see fixpoint.hpp).  The solver's
// obligations are therefore only practical ones: terminate (every component
// head goes through widening, and a global update budget backstops even a
// broken widening operator) and be as precise as it can.
//
// Ascending phase: nodes are recomputed from their incoming edges in order;
// each component iterates until the recomputed head state stops growing,
// joining for the first couple of rounds and widening afterwards.
//
// Descending phase: two sweeps recompute every node from its predecessors
// and keep the tighter state, clawing back precision the widening gave up
// (typically the final bound of a loop counter).  The narrowed map is
// re-validated internally; if a non-monotone transfer ever made it invalid,
// the ascending result is returned instead.
#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "varan/cfg.hpp"
#include "varan/fixpoint_check.hpp"
#include "varan/transfer.hpp"
#include "varan/wto.hpp"

namespace varan {

// Thrown when the solver exceeds its update budget; the caller falls back
// to a solution that claims nothing.
struct IterationBudgetExceeded {};

namespace fixpoint_detail {

template <typename D>
class Iterator {
 public:
  using State = typename D::State;
  using Values = std::map<NodeId, State>;

  Iterator(const FlowSystem<D>& sys, const typename D::State& init,
           std::uint64_t budget)
      : sys_(sys), init_(init), budget_(budget), bottom_(D::bottom()) {}

  Values run(const Wto& order) {
    for (const WtoElement& e : order) process(e);

    Values ascending = result_;
    narrow(order);
    narrow(order);
    if (result_ == ascending) return ascending;
    if (!check_post_fixpoint<D>(sys_, init_, result_)) return ascending;
    return result_;
  }

 private:
  const State& value_of(NodeId n) const {
    auto it = result_.find(n);
    return it == result_.end() ? bottom_ : it->second;
  }

  // Exact join of everything flowing into n under the current solution.
  State recompute(NodeId n) const {
    State acc = n == sys_.entry ? init_ : D::bottom();
    auto it = sys_.in.find(n);
    if (it == sys_.in.end()) return acc;
    for (std::size_t idx : it->second) {
      const auto& e = sys_.edges[idx];
      const State& src = value_of(e.from);
      if (D::is_bottom(src)) continue;
      acc = D::join(acc, e.apply(src));
    }
    return acc;
  }

  void spend() {
    if (budget_ == 0) throw IterationBudgetExceeded{};
    --budget_;
  }

  void process(const WtoElement& el) {
    if (!el.component) {
      spend();
      result_[el.head] = recompute(el.head);
      return;
    }
    // Iterate the component until its head stabilises.  The body runs
    // after every head update, so on exit the body is consistent with the
    // final head state.
    int updates = 0;
    while (true) {
      State fresh = recompute(el.head);
      const State& cur = value_of(el.head);
      if (D::le(fresh, cur)) break;
      spend();
      ++updates;
      // A couple of plain joins first: cheap precision for short-lived
      // growth, widening afterwards to force stabilisation.
      result_[el.head] =
          updates <= 2 ? D::join(cur, fresh) : D::widen(cur, fresh);
      for (const WtoElement& b : el.body) process(b);
    }
  }

  // One decreasing sweep.  A post-fixpoint satisfies recompute(n) <= cur,
  // so replacing a state by its recomputation only tightens the solution;
  // the meet covers transfers that fail to shrink along.
  void narrow_element(const WtoElement& el) {
    State fresh = recompute(el.head);
    const State& cur = value_of(el.head);
    result_[el.head] = D::le(fresh, cur) ? std::move(fresh)
                                         : D::meet(cur, fresh);
    for (const WtoElement& b : el.body) narrow_element(b);
  }

  void narrow(const Wto& order) {
    for (const WtoElement& e : order) narrow_element(e);
  }

  const FlowSystem<D>& sys_;
  const State& init_;
  std::uint64_t budget_;
  const State bottom_;
  Values result_;
};

}  // namespace fixpoint_detail

template <typename D>
std::map<NodeId, typename D::State> iterate_post_fixpoint(
    const FlowSystem<D>& sys, const Wto& order, const typename D::State& init,
    std::uint64_t budget) {
  fixpoint_detail::Iterator<D> it(sys, init, budget);
  return it.run(order);
}

}  // namespace varan
