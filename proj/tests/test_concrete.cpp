// Tests for the reference interpreter: pinned traces for arithmetic,
// branching, memory, calls, and every class of stuck state.
#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "varan/cfg_text.hpp"
#include "varan/concrete.hpp"

using namespace varan;

namespace {

CfgProgram P(const std::string& src) {
  CfgProgram p = parse_program(src);
  validate(p);
  return p;
}

VarId vid(const CfgFunction& f, const std::string& name) {
  for (const auto& [id, n] : f.var_names)
    if (n == name) return id;
  FAIL("no variable named " << name);
  return 0;
}

// Runs the program's entry function with an empty environment.
TraceResult run(const CfgProgram& p, std::uint64_t fuel = 1000) {
  return trace(p, {}, fuel);
}

std::int64_t int_result(const TraceResult& t) {
  REQUIRE(t.end == TraceResult::End::Done);
  REQUIRE(t.result.has_value());
  const VInt* w = as_int(*t.result);
  REQUIRE(w != nullptr);
  return w->w.signed_value();
}

}  // namespace

TEST_CASE("straight-line arithmetic wraps at the word size") {
  CfgProgram p = P(
      "1: x = 2147483647 -> 2\n"
      "2: y = x + 1 -> 3\n"
      "3: return y\n");
  TraceResult t = run(p);
  REQUIRE(t.states.size() == 3);
  CHECK(t.states[0].pc == 1);
  CHECK(t.states[1].pc == 2);
  CHECK(t.states[2].pc == 3);
  CHECK(int_result(t) == min_signed);

  const CfgFunction& f = p.entry_function();
  const auto& env = t.states[2].env;
  CHECK(env.at(vid(f, "x")) == vint(2147483647));
  CHECK(env.at(vid(f, "y")) == vint(min_signed));
}

TEST_CASE("signed and unsigned comparisons steer branches differently") {
  CfgProgram pu = P(
      "1: x = -1 -> 2\n"
      "2: if (x <u 10) -> 3, 4\n"
      "3: r = 1 -> 5\n"
      "4: r = 0 -> 5\n"
      "5: return r\n");
  CHECK(int_result(run(pu)) == 0);  // 4294967295 <u 10 is false

  CfgProgram ps = P(
      "1: x = -1 -> 2\n"
      "2: if (x < 10) -> 3, 4\n"
      "3: r = 1 -> 5\n"
      "4: r = 0 -> 5\n"
      "5: return r\n");
  CHECK(int_result(run(ps)) == 1);
}

TEST_CASE("division traps leave the machine stuck") {
  auto expect_stuck_at = [](const std::string& src,
                            std::map<VarId, Value> env, NodeId pc) {
    CfgProgram p = P(src);
    TraceResult t = trace(p, std::move(env), 100);
    REQUIRE(t.end == TraceResult::End::Stuck);
    REQUIRE_FALSE(t.states.empty());
    CHECK(t.states.back().pc == pc);
    CHECK_FALSE(t.stuck_reason.empty());
  };

  // In each program, variable ids are assigned in order of appearance:
  // the destination x gets 1 and the operand y gets 2.
  expect_stuck_at("1: x = 5 / y -> 2\n2: return x\n", {{2, vint(0)}}, 1);
  expect_stuck_at("1: x = 5 /u y -> 2\n2: return x\n", {{2, vint(0)}}, 1);
  expect_stuck_at("1: x = 5 % y -> 2\n2: return x\n", {{2, vint(0)}}, 1);
  expect_stuck_at("1: x = -2147483648 / y -> 2\n2: return x\n",
                  {{2, vint(-1)}}, 1);
  expect_stuck_at("1: x = 1 << y -> 2\n2: return x\n", {{2, vint(32)}}, 1);
  expect_stuck_at("1: x = 1 >> y -> 2\n2: return x\n", {{2, vint(-1)}}, 1);

  CfgProgram ok = P("1: x = 5 / y -> 2\n2: return x\n");
  CHECK(int_result(trace(ok, {{2, vint(2)}}, 100)) == 2);
}

TEST_CASE("loops terminate with the expected trace") {
  CfgProgram p = P(
      "1: n = 3 -> 2\n"
      "2: if (n > 0) -> 3, 4\n"
      "3: n = n - 1 -> 2\n"
      "4: return n\n");
  TraceResult t = run(p);
  REQUIRE(t.states.size() == 9);
  CHECK(int_result(t) == 0);
  std::vector<NodeId> pcs;
  for (const auto& s : t.states) pcs.push_back(s.pc);
  CHECK(pcs == std::vector<NodeId>{1, 2, 3, 2, 3, 2, 3, 2, 4});
}

TEST_CASE("fuel exhaustion is reported") {
  CfgProgram p = P("1: skip -> 1\n");
  TraceResult t = run(p, 50);
  CHECK(t.end == TraceResult::End::OutOfFuel);
  CHECK(t.states.size() == 50);
}

TEST_CASE("global memory: zero init, exact-cell reads, clobbering") {
  CfgProgram p = P(
      "symbol buf 8\n"
      "1: int32[addrglobal(buf)] = 305419896 -> 2\n"
      "2: a = int32[addrglobal(buf)] -> 3\n"
      "3: b = int16u[addrglobal(buf, 4)] -> 4\n"
      "4: int8s[addrglobal(buf)] = 200 -> 5\n"
      "5: c = int32[addrglobal(buf)] -> 6\n"
      "6: d = int8s[addrglobal(buf)] -> 7\n"
      "7: e = int8u[addrglobal(buf)] -> 8\n"
      "8: return a\n");
  TraceResult t = run(p);
  CHECK(int_result(t) == 305419896);
  const CfgFunction& f = p.entry_function();
  const auto& env = t.states.back().env;
  CHECK(env.at(vid(f, "a")) == vint(305419896));
  CHECK(env.at(vid(f, "b")) == vint(0));            // untouched global bytes
  CHECK(is_undef(env.at(vid(f, "c"))));             // size-mismatched read
  CHECK(env.at(vid(f, "d")) == vint(-56));          // sign-extended byte
  CHECK(env.at(vid(f, "e")) == vint(200));          // zero-extended byte
}

TEST_CASE("store normalization truncates to the chunk width") {
  CfgProgram p = P(
      "symbol g 4\n"
      "1: int8u[addrglobal(g)] = 511 -> 2\n"
      "2: a = int8s[addrglobal(g)] -> 3\n"
      "3: b = int8u[addrglobal(g)] -> 4\n"
      "4: int16s[addrglobal(g)] = -1 -> 5\n"
      "5: c = int16u[addrglobal(g)] -> 6\n"
      "6: return c\n");
  TraceResult t = run(p);
  CHECK(int_result(t) == 65535);
  const CfgFunction& f = p.entry_function();
  CHECK(t.states.back().env.at(vid(f, "a")) == vint(-1));
  CHECK(t.states.back().env.at(vid(f, "b")) == vint(255));
}

TEST_CASE("stack blocks are function-local and bounds-checked") {
  CfgProgram ok = P(
      "function main() stack 4 entry 1 {\n"
      "  1: int32[addrstack(0)] = 7 -> 2\n"
      "  2: x = int32[addrstack(0)] -> 3\n"
      "  3: return x\n"
      "}\n");
  CHECK(int_result(run(ok)) == 7);

  CfgProgram oob = P(
      "function main() stack 4 entry 1 {\n"
      "  1: int32[addrstack(2)] = 1 -> 2\n"
      "  2: return\n"
      "}\n");
  TraceResult t = run(oob);
  CHECK(t.end == TraceResult::End::Stuck);
  CHECK(t.states.back().pc == 1);

  CfgProgram uninit = P(
      "function main() stack 4 entry 1 {\n"
      "  1: x = int32[addrstack(0)] -> 2\n"
      "  2: return x\n"
      "}\n");
  TraceResult u = run(uninit);
  REQUIRE(u.end == TraceResult::End::Done);
  CHECK(is_undef(*u.result));  // stack memory starts undefined, not zero
}

TEST_CASE("pointer arithmetic, differences, and unsigned comparison") {
  CfgProgram p = P(
      "symbol buf 16\n"
      "1: p = addrglobal(buf) -> 2\n"
      "2: q = p + 8 -> 3\n"
      "3: int32[q] = 5 -> 4\n"
      "4: d = q - p -> 5\n"
      "5: c = p <u q -> 6\n"
      "6: e = p == q -> 7\n"
      "7: return d\n");
  TraceResult t = run(p);
  CHECK(int_result(t) == 8);
  const CfgFunction& f = p.entry_function();
  const auto& env = t.states.back().env;
  CHECK(env.at(vid(f, "c")) == vint(1));
  // Signed comparison is not defined on pointers.
  CHECK(is_undef(env.at(vid(f, "e"))));
  const VPtr* q = as_ptr(env.at(vid(f, "q")));
  REQUIRE(q != nullptr);
  CHECK(q->offset == MachineInt::from_integer(8));
}

TEST_CASE("pointers survive memory only through full-width cells") {
  CfgProgram p = P(
      "symbol buf 8\n"
      "1: p = addrglobal(buf) -> 2\n"
      "2: int32[addrglobal(buf)] = p -> 3\n"
      "3: q = int32[addrglobal(buf)] -> 4\n"
      "4: r = int16u[addrglobal(buf)] -> 5\n"
      "5: int16s[addrglobal(buf, 4)] = p -> 6\n"
      "6: s = int16s[addrglobal(buf, 4)] -> 7\n"
      "7: return\n");
  TraceResult t = run(p);
  REQUIRE(t.end == TraceResult::End::Done);
  const CfgFunction& f = p.entry_function();
  const auto& env = t.states.back().env;
  CHECK(env.at(vid(f, "q")) == env.at(vid(f, "p")));  // round-tripped pointer
  CHECK(is_undef(env.at(vid(f, "r"))));  // narrow read of a pointer cell
  CHECK(is_undef(env.at(vid(f, "s"))));  // pointer squeezed into 2 bytes
}

TEST_CASE("calls pass arguments, return values, and recurse") {
  CfgProgram dbl = P(
      "function dbl(n) entry 1 {\n"
      "  1: return n * 2\n"
      "}\n"
      "function main() entry 1 {\n"
      "  1: x = call dbl(21) -> 2\n"
      "  2: return x\n"
      "}\n");
  TraceResult t = run(dbl);
  CHECK(int_result(t) == 42);
  REQUIRE(t.states.size() == 3);
  CHECK(t.states[0].fn->name == "main");
  CHECK(t.states[1].fn->name == "dbl");
  CHECK(t.states[2].fn->name == "main");

  CfgProgram fact = P(
      "function fact(n) entry 1 {\n"
      "  1: if (n <= 1) -> 2, 3\n"
      "  2: return 1\n"
      "  3: r = call fact(n - 1) -> 4\n"
      "  4: return n * r\n"
      "}\n"
      "function main() entry 1 {\n"
      "  1: x = call fact(5) -> 2\n"
      "  2: return x\n"
      "}\n");
  CHECK(int_result(run(fact)) == 120);
}

TEST_CASE("calls through function pointers") {
  CfgProgram p = P(
      "function dbl(n) entry 1 { 1: return n * 2 }\n"
      "function main() entry 1 {\n"
      "  1: f = addrglobal(dbl) -> 2\n"
      "  2: x = call (f)(5) -> 3\n"
      "  3: return x\n"
      "}\n");
  CHECK(int_result(run(p)) == 10);
}

TEST_CASE("bad calls are stuck") {
  CfgProgram arity = P(
      "function dbl(n) entry 1 { 1: return n * 2 }\n"
      "function main() entry 1 {\n"
      "  1: x = call dbl(1, 2) -> 2\n"
      "  2: return x\n"
      "}\n");
  CHECK(run(arity).end == TraceResult::End::Stuck);

  CfgProgram not_fn = P(
      "symbol buf 4\n"
      "function main() entry 1 {\n"
      "  1: x = call (addrglobal(buf))(1) -> 2\n"
      "  2: return x\n"
      "}\n");
  CHECK(run(not_fn).end == TraceResult::End::Stuck);

  CfgProgram offset = P(
      "function dbl(n) entry 1 { 1: return n * 2 }\n"
      "function main() entry 1 {\n"
      "  1: x = call (addrglobal(dbl, 4))(1) -> 2\n"
      "  2: return x\n"
      "}\n");
  CHECK(run(offset).end == TraceResult::End::Stuck);
}

TEST_CASE("stack blocks die on return") {
  CfgProgram p = P(
      "function leak() stack 8 entry 1 {\n"
      "  1: return addrstack(0)\n"
      "}\n"
      "function main() entry 1 {\n"
      "  1: p = call leak() -> 2\n"
      "  2: x = int32[p] -> 3\n"
      "  3: return x\n"
      "}\n");
  TraceResult t = run(p);
  REQUIRE(t.end == TraceResult::End::Stuck);
  CHECK(t.states.back().pc == 2);
  CHECK(t.states.back().fn->name == "main");
}

TEST_CASE("conditional expressions evaluate only the taken arm") {
  CfgProgram p = P(
      "1: x = 5 -> 2\n"
      "2: y = x > 3 && x < 10 -> 3\n"
      "3: z = x > 3 ? 100 : 200 -> 4\n"
      "4: w = x == 5 || u -> 5\n"
      "5: return z\n");
  TraceResult t = run(p);
  CHECK(int_result(t) == 100);
  const CfgFunction& f = p.entry_function();
  const auto& env = t.states.back().env;
  CHECK(env.at(vid(f, "y")) == vint(1));
  // u is undefined, but the || guard was true so it was never evaluated.
  CHECK(env.at(vid(f, "w")) == vint(1));
}

TEST_CASE("non-integer guards are stuck") {
  CfgProgram undef_guard = P(
      "1: y = u ? 1 : 2 -> 2\n"
      "2: return y\n");
  CHECK(run(undef_guard).end == TraceResult::End::Stuck);

  CfgProgram undef_branch = P(
      "1: if (u) -> 2, 2\n"
      "2: return\n");
  CHECK(run(undef_branch).end == TraceResult::End::Stuck);

  CfgProgram ptr_branch = P(
      "symbol g 4\n"
      "1: if (addrglobal(g)) -> 2, 2\n"
      "2: return\n");
  CHECK(run(ptr_branch).end == TraceResult::End::Stuck);
}

TEST_CASE("undefined values flow through arithmetic without sticking") {
  CfgProgram p = P(
      "1: y = u + 1 -> 2\n"
      "2: z = y * y -> 3\n"
      "3: return z\n");
  TraceResult t = run(p);
  REQUIRE(t.end == TraceResult::End::Done);
  CHECK(is_undef(*t.result));
}

TEST_CASE("entry environments seed parameters") {
  CfgProgram p = P(
      "function main(a, b) entry 1 {\n"
      "  1: return a + b\n"
      "}\n");
  const CfgFunction& f = p.entry_function();
  std::map<VarId, Value> env{{vid(f, "a"), vint(2)}, {vid(f, "b"), vint(40)}};
  CHECK(int_result(trace(p, env, 10)) == 42);

  TraceResult unseeded = run(p);
  REQUIRE(unseeded.end == TraceResult::End::Done);
  CHECK(is_undef(*unseeded.result));
}
