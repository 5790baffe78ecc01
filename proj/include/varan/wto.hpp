// Weak topological ordering of a function body.
//
// The ordering arranges the nodes of the control-flow graph into a nested
// sequence of vertices and components.  Every cycle of the graph is
// contained in some component, and the head of that component is the single
// place the fixpoint engine needs to apply widening for the iteration over
// the component to stabilise.  The defining property: for every edge u -> w,
// either u comes before w in the sequence, or w is the head of a component
// that (transitively) encloses u.
//
// Built with a single depth-first traversal that detects strongly connected
// subgraphs on the fly and recursively orders the inside of each component,
// excluding its head, the same way.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "varan/cfg.hpp"

namespace varan {

struct WtoElement {
  NodeId head = 0;
  bool component = false;       // false: plain vertex (body empty)
  std::vector<WtoElement> body; // nested elements, head excluded
  bool operator==(const WtoElement&) const = default;
};

using Wto = std::vector<WtoElement>;

namespace wto_detail {

struct Builder {
  const CfgFunction& f;
  std::map<NodeId, std::uint32_t> dfn;  // 0 = unvisited
  std::uint32_t num = 0;
  std::vector<NodeId> stack;
  static constexpr std::uint32_t done = std::numeric_limits<std::uint32_t>::max();

  explicit Builder(const CfgFunction& fn) : f(fn) {
    for (const auto& [id, ins] : f.body) dfn[id] = 0;
  }

  // Returns the smallest traversal number reachable from v that is still on
  // the stack; v completes (is emitted) exactly when that number is its own.
  std::uint32_t visit(NodeId v, Wto& out) {
    stack.push_back(v);
    dfn[v] = ++num;
    std::uint32_t head = dfn[v];
    bool loop = false;
    for (NodeId w : successors(f.body.at(v))) {
      std::uint32_t min = dfn[w] == 0 ? visit(w, out) : dfn[w];
      if (min <= head) {
        head = min;
        loop = true;
      }
    }
    if (head == dfn[v]) {
      dfn[v] = done;
      NodeId element = stack.back();
      stack.pop_back();
      if (loop) {
        // Everything popped above v belongs to the component headed by v;
        // mark it unvisited again and order it recursively.
        while (element != v) {
          dfn[element] = 0;
          element = stack.back();
          stack.pop_back();
        }
        out.push_back(make_component(v));
      } else {
        out.push_back(WtoElement{v, false, {}});
      }
    }
    return head;
  }

  WtoElement make_component(NodeId v) {
    Wto body;
    for (NodeId w : successors(f.body.at(v))) {
      if (dfn[w] == 0) visit(w, body);
    }
    // Elements are appended in completion order, which is the reverse of
    // the iteration order.
    std::reverse(body.begin(), body.end());
    return WtoElement{v, true, std::move(body)};
  }
};

inline void to_stream(std::ostream& os, const Wto& w) {
  bool first = true;
  for (const WtoElement& e : w) {
    if (!first) os << ' ';
    first = false;
    if (e.component) {
      os << '(' << e.head;
      if (!e.body.empty()) {
        os << ' ';
        to_stream(os, e.body);
      }
      os << ')';
    } else {
      os << e.head;
    }
  }
}

}  // namespace wto_detail

// Orders all nodes of `f`.  Nodes unreachable from the entry cannot be part
// of any cycle that matters; they are appended as plain vertices in
// ascending id order.
inline Wto weak_topological_order(const CfgFunction& f) {
  wto_detail::Builder b(f);
  Wto out;
  if (f.body.count(f.entry) != 0) b.visit(f.entry, out);
  std::reverse(out.begin(), out.end());
  for (const auto& [id, mark] : b.dfn) {
    if (mark != wto_detail::Builder::done) {
      out.push_back(WtoElement{id, false, {}});
    }
  }
  return out;
}

inline std::string to_string(const Wto& w) {
  std::ostringstream os;
  wto_detail::to_stream(os, w);
  return os.str();
}

}  // namespace varan
