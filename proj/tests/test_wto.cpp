// Tests for the weak topological ordering of function bodies.
#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "varan/cfg.hpp"
#include "varan/cfg_text.hpp"
#include "varan/wto.hpp"

using namespace varan;

namespace {

CfgFunction parse_fn(const std::string& nodes) {
  std::string src = "function main(x) entry 1 {\n" + nodes + "\n}\n";
  CfgProgram p = parse_program(src);
  validate(p);
  return p.functions.front();
}

std::string order_of(const std::string& nodes) {
  return to_string(weak_topological_order(parse_fn(nodes)));
}

}  // namespace

TEST_CASE("straight-line code orders by control flow") {
  CHECK(order_of("1: skip -> 2; 2: skip -> 3; 3: skip -> 4; 4: return") ==
        "1 2 3 4");
  CHECK(order_of("1: return") == "1");
  // Order follows edges, not node numbering.
  CHECK(order_of("1: skip -> 9; 9: skip -> 4; 4: return") == "1 9 4");
}

TEST_CASE("loops become components headed by their entry") {
  CHECK(order_of("1: skip -> 2; 2: if (x) -> 3, 4; 3: skip -> 2; 4: return") ==
        "1 (2 3) 4");
  CHECK(order_of("1: skip -> 2; 2: if (x) -> 2, 3; 3: return") == "1 (2) 3");
  CHECK(order_of("1: skip -> 2; 2: if (x) -> 3, 4; 3: skip -> 2;"
                 "4: if (x) -> 5, 6; 5: skip -> 4; 6: return") ==
        "1 (2 3) (4 5) 6");
}

TEST_CASE("nested loops nest their components") {
  CHECK(order_of("1: skip -> 2; 2: if (x) -> 3, 4; 3: if (x) -> 3, 2;"
                 "4: return") == "1 (2 (3)) 4");
  // Three levels.
  CHECK(order_of("1: skip -> 2;"
                 "2: if (x) -> 3, 7;"
                 "3: if (x) -> 4, 2;"
                 "4: if (x) -> 4, 3;"
                 "7: return") == "1 (2 (3 (4))) 7");
}

TEST_CASE("a cycle entered at two points still forms one component") {
  CHECK(order_of("1: if (x) -> 3, 2; 2: skip -> 3; 3: if (x) -> 2, 4;"
                 "4: return") == "1 (3 2) 4");
}

TEST_CASE("unreachable nodes are appended in ascending order") {
  CHECK(order_of("1: skip -> 2; 2: return; 9: return; 7: skip -> 1") ==
        "1 2 7 9");
}

TEST_CASE("a long chain is ordered without blowing the traversal") {
  CfgFunction f;
  f.name = "main";
  f.entry = 1;
  const NodeId n = 10000;
  for (NodeId i = 1; i < n; ++i) f.body[i] = SkipInstr{i + 1};
  f.body[n] = ReturnInstr{};
  Wto w = weak_topological_order(f);
  REQUIRE(w.size() == n);
  CHECK(w.front().head == 1);
  CHECK(w.back().head == n);
  CHECK_FALSE(w.front().component);
}

// ---------------------------------------------------------------------------
// The defining property, on random graphs: every node appears exactly once,
// and every edge u -> w either goes forward in the flattened sequence or
// targets the head of a component enclosing u.

namespace {

struct Flattening {
  std::map<NodeId, int> pos;
  std::map<NodeId, std::set<NodeId>> enclosing_heads;
};

void flatten(const Wto& w, std::vector<NodeId>& heads, Flattening& out,
             int& counter) {
  for (const WtoElement& e : w) {
    REQUIRE(out.pos.count(e.head) == 0);  // no duplicates anywhere
    out.pos[e.head] = counter++;
    std::set<NodeId> enc(heads.begin(), heads.end());
    if (e.component) enc.insert(e.head);
    out.enclosing_heads[e.head] = std::move(enc);
    if (e.component) {
      heads.push_back(e.head);
      flatten(e.body, heads, out, counter);
      heads.pop_back();
    } else {
      REQUIRE(e.body.empty());
    }
  }
}

// Members of a component inherit its head in their enclosing set; fill that
// in by a second pass ordered by position.
Flattening flatten(const Wto& w) {
  Flattening out;
  std::vector<NodeId> heads;
  int counter = 0;
  flatten(w, heads, out, counter);
  return out;
}

}  // namespace

TEST_CASE("random graphs satisfy the ordering property") {
  std::mt19937_64 rng(424242u);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    CfgFunction f;
    f.name = "main";
    f.entry = 1;
    auto target = [&] { return static_cast<NodeId>(1 + rng() % n); };
    for (NodeId i = 1; i <= static_cast<NodeId>(n); ++i) {
      switch (rng() % 4) {
        case 0:
          f.body[i] = ReturnInstr{};
          break;
        case 1:
          f.body[i] = SkipInstr{target()};
          break;
        default:
          f.body[i] = IfInstr{Expr::var(1), target(), target()};
          break;
      }
    }

    Wto w = weak_topological_order(f);
    Flattening fl = flatten(w);

    // Exactly the function's nodes, each exactly once.
    REQUIRE(fl.pos.size() == f.body.size());
    for (const auto& [id, ins] : f.body) REQUIRE(fl.pos.count(id) == 1);

    // Nodes reachable from the entry.  Unreachable nodes sit anywhere (the
    // solver pins them at bottom); the ordering property concerns only the
    // rooted part of the graph.
    std::set<NodeId> reachable;
    std::vector<NodeId> work{f.entry};
    while (!work.empty()) {
      NodeId v = work.back();
      work.pop_back();
      if (!reachable.insert(v).second) continue;
      for (NodeId t : successors(f.body.at(v))) work.push_back(t);
    }

    // Edge property.
    for (const auto& [u, ins] : f.body) {
      if (reachable.count(u) == 0) continue;
      for (NodeId t : successors(ins)) {
        bool forward = fl.pos.at(t) > fl.pos.at(u);
        bool back_to_enclosing_head = fl.enclosing_heads.at(u).count(t) > 0;
        INFO("graph " << trial << ": edge " << u << " -> " << t << " in "
                      << to_string(w));
        REQUIRE((forward || back_to_enclosing_head));
      }
    }

    // Deterministic.
    CHECK(to_string(weak_topological_order(f)) == to_string(w));
  }
}
