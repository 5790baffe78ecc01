// The equation system a fixpoint is computed over: one abstract transfer
// function per control-flow edge.
//
// A solution assigns an abstract state to every node such that pushing any
// node's state across any of its outgoing edges stays below the state at
// the target node.  Both the iterating solver and the independent result
// checker consume this same structure, so they necessarily agree on what
// the equations are — they only differ in how a solution is obtained or
// trusted.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "varan/cfg.hpp"

namespace varan {

template <typename D>
struct FlowSystem {
  using State = typename D::State;
  using EdgeFn = std::function<State(const State&)>;

  struct Edge {
    NodeId from = 0;
    NodeId to = 0;
    EdgeFn apply;
  };

  NodeId entry = 0;
  std::vector<Edge> edges;
  // Edge indices by endpoint, for recomputation (in) and iteration (out).
  std::map<NodeId, std::vector<std::size_t>> in;
  std::map<NodeId, std::vector<std::size_t>> out;

  void add_edge(NodeId from, NodeId to, EdgeFn fn) {
    std::size_t idx = edges.size();
    edges.push_back(Edge{from, to, std::move(fn)});
    out[from].push_back(idx);
    in[to].push_back(idx);
  }
};

}  // namespace varan
