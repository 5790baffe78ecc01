// Tests for the kind analysis, the expression translation that feeds the
// numeric environments, and the variable-state domain built on top of them.
#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "support/gamma.hpp"
#include "varan/cfg.hpp"
#include "varan/cfg_text.hpp"
#include "varan/concrete.hpp"
#include "varan/mem.hpp"
#include "varan/num_env.hpp"
#include "varan/reduced_product.hpp"

using namespace varan;

namespace {

using NE = NonRelEnv<IntervalPairDomain>;
using MD = MemoryDomain<NE>;
using State = MD::State;

MachineInt w(std::int64_t v) { return MachineInt::from_integer(v); }

// Variable numbering used throughout: x=1 y=2 z=3 p=4 q=5 r=6.
Expr parse_expr_text(const std::string& text) {
  std::string src =
      "symbol g 16\n"
      "\n"
      "function main() entry 1 {\n"
      "  ids x = 1, y = 2, z = 3, p = 4, q = 5, r = 6\n"
      "  1: r = " +
      text +
      " -> 2\n"
      "  2: return\n"
      "}\n";
  CfgProgram prog = parse_program(src);
  return std::get<AssignInstr>(prog.functions.front().body.at(1)).value;
}

// x and y are integers, p and q pointers, z stays unknown.
TypeInfo mixed_types() {
  TypeInfo t;
  t.set(1, Kind::KInt);
  t.set(2, Kind::KInt);
  t.set(4, Kind::KPtr);
  t.set(5, Kind::KPtr);
  return t;
}

bool signed_is(const State& s, VarId v, std::int64_t lo, std::int64_t hi) {
  auto r = MD::var_range(s, v, Signedness::Signed);
  return !r.is_bottom() && r.value().lo == lo && r.value().hi == hi;
}

bool unsigned_is(const State& s, VarId v, std::int64_t lo, std::int64_t hi) {
  auto r = MD::var_range(s, v, Signedness::Unsigned);
  return !r.is_bottom() && r.value().lo == lo && r.value().hi == hi;
}

}  // namespace

TEST_CASE("kinds form a small join semilattice") {
  const Kind all[] = {Kind::KInt, Kind::KPtr, Kind::KTop};
  for (Kind a : all) {
    CHECK(kind_le(a, a));
    CHECK(kind_le(a, Kind::KTop));
    CHECK(kind_join(a, a) == a);
    CHECK(kind_join(a, Kind::KTop) == Kind::KTop);
    for (Kind b : all) {
      CHECK(kind_join(a, b) == kind_join(b, a));
      CHECK(kind_le(a, kind_join(a, b)));
      CHECK(kind_le(b, kind_join(a, b)));
      for (Kind c : all) {
        CHECK(kind_join(kind_join(a, b), c) == kind_join(a, kind_join(b, c)));
        if (kind_le(a, c) && kind_le(b, c)) {
          CHECK(kind_le(kind_join(a, b), c));
        }
      }
    }
  }
  CHECK_FALSE(kind_le(Kind::KInt, Kind::KPtr));
  CHECK_FALSE(kind_le(Kind::KPtr, Kind::KInt));
  CHECK_FALSE(kind_le(Kind::KTop, Kind::KInt));
}

TEST_CASE("kind maps order and join pointwise with unbound as top") {
  TypeInfo top;
  TypeInfo a;
  a.set(1, Kind::KInt);
  a.set(2, Kind::KPtr);
  TypeInfo b;
  b.set(1, Kind::KInt);
  b.set(2, Kind::KInt);

  CHECK(TypeInfo::le(a, top));
  CHECK_FALSE(TypeInfo::le(top, a));
  CHECK(TypeInfo::le(a, a));
  CHECK_FALSE(TypeInfo::le(a, b));
  CHECK_FALSE(TypeInfo::le(b, a));

  TypeInfo j = TypeInfo::join(a, b);
  CHECK(j.get(1) == Kind::KInt);
  CHECK(j.get(2) == Kind::KTop);
  CHECK(TypeInfo::le(a, j));
  CHECK(TypeInfo::le(b, j));
  CHECK(TypeInfo::join(a, top) == top);

  // Setting top erases the binding rather than storing it.
  TypeInfo c = a;
  c.set(1, Kind::KTop);
  CHECK(c.kinds.size() == 1);
  CHECK(c.get(1) == Kind::KTop);
}

TEST_CASE("expression kinds follow pointer arithmetic") {
  TypeInfo t = mixed_types();
  auto K = [&](const std::string& s) {
    return infer_kind(t, parse_expr_text(s));
  };

  CHECK(K("5") == Kind::KInt);
  CHECK(K("addrglobal(g)") == Kind::KPtr);
  CHECK(K("addrstack(4)") == Kind::KPtr);
  CHECK(K("x") == Kind::KInt);
  CHECK(K("p") == Kind::KPtr);
  CHECK(K("z") == Kind::KTop);

  // Addition: shifting a pointer stays a pointer, adding two pointers is
  // undefined (an integer kind covers the undefined value).
  CHECK(K("x + y") == Kind::KInt);
  CHECK(K("p + x") == Kind::KPtr);
  CHECK(K("x + p") == Kind::KPtr);
  CHECK(K("p + q") == Kind::KInt);
  CHECK(K("z + x") == Kind::KTop);

  // Subtraction: pointer minus integer shifts, pointer minus pointer
  // measures a distance, integer minus anything is numeric or undefined.
  CHECK(K("p - x") == Kind::KPtr);
  CHECK(K("p - q") == Kind::KInt);
  CHECK(K("x - p") == Kind::KInt);
  CHECK(K("x - z") == Kind::KInt);
  CHECK(K("z - p") == Kind::KInt);
  CHECK(K("p - z") == Kind::KTop);
  CHECK(K("z - z") == Kind::KTop);

  // Everything else produces an integer or the undefined value.
  CHECK(K("-p") == Kind::KInt);
  CHECK(K("boolval(p)") == Kind::KInt);
  CHECK(K("x * p") == Kind::KInt);
  CHECK(K("p << 1") == Kind::KInt);
  CHECK(K("x < p") == Kind::KInt);
  CHECK(K("p <u q") == Kind::KInt);

  // Memory may hold anything; conditionals join their arms.
  CHECK(K("int32[p]") == Kind::KTop);
  CHECK(K("x ? p : q") == Kind::KPtr);
  CHECK(K("x ? p : y") == Kind::KTop);
  CHECK(K("x ? y : 3") == Kind::KInt);
  CHECK(K("x && y") == Kind::KInt);
  CHECK(K("x || p") == Kind::KTop);
}

TEST_CASE("translation accepts numeric shapes and refuses the rest") {
  TypeInfo t = mixed_types();
  auto C = [&](const std::string& s) {
    return convert(t, parse_expr_text(s));
  };

  SECTION("structure and value of a translated expression") {
    auto ne = C("x + 3 * y");
    REQUIRE(ne.has_value());
    NExpr expected = NExpr::binary(
        BinOp::Add, NExpr::var(1),
        NExpr::binary(BinOp::Mul, NExpr::constant(w(3)), NExpr::var(2)));
    CHECK(*ne == expected);

    auto sel = C("x ? y : 7");
    REQUIRE(sel.has_value());
    std::map<VarId, MachineInt> env{{1, w(0)}, {2, w(9)}};
    auto got = eval_nexpr(*sel, env);
    REQUIRE(got.has_value());
    CHECK(*got == w(7));
  }

  SECTION("loads and address constants never translate") {
    CHECK_FALSE(C("int32[p]"));
    CHECK_FALSE(C("x + int32[p]"));
    CHECK_FALSE(C("x ? int32[p] : 3"));
    CHECK_FALSE(C("addrglobal(g)"));
    CHECK_FALSE(C("addrstack(0)"));
    CHECK_FALSE(C("p - addrglobal(g)"));
  }

  SECTION("pointer variables translate inside arithmetic") {
    CHECK(C("p + 1").has_value());
    CHECK(C("p - q").has_value());
    CHECK(C("x ? p : 3").has_value());
  }

  SECTION("signed comparisons always translate") {
    CHECK(C("p < 3").has_value());
    CHECK(C("z == 7").has_value());
    CHECK(C("p >= q").has_value());
  }

  SECTION("unsigned comparisons need matching known kinds") {
    CHECK(C("x <u y").has_value());
    CHECK(C("x <u 16").has_value());
    CHECK(C("p <u q").has_value());
    CHECK_FALSE(C("x ==u p"));
    CHECK_FALSE(C("p >=u 1"));
    CHECK_FALSE(C("z <u 5"));
    CHECK_FALSE(C("z !=u z"));
    CHECK(C("(x <u y) + 1").has_value());
    CHECK_FALSE(C("(x <u p) + 1"));
  }
}

TEST_CASE("assignments update ranges and kinds together") {
  State s = MD::top();

  s = MD::assign(s, 6, parse_expr_text("5"));
  CHECK(s.types.get(6) == Kind::KInt);
  CHECK(signed_is(s, 6, 5, 5));
  CHECK(unsigned_is(s, 6, 5, 5));

  // Address expressions do not translate: the range stays full but the
  // kind records a pointer.
  s = MD::assign(s, 4, parse_expr_text("addrglobal(g)"));
  CHECK(s.types.get(4) == Kind::KPtr);
  CHECK(unsigned_is(s, 4, 0, max_unsigned));

  // A multiplication by an unknown variable has integer kind and full range.
  s = MD::assign(s, 1, parse_expr_text("3 * z"));
  CHECK(s.types.get(1) == Kind::KInt);
  CHECK(signed_is(s, 1, min_signed, max_signed));

  // Derived ranges flow through translated assignments.
  s = MD::assign(s, 2, parse_expr_text("r + 10"));
  CHECK(s.types.get(2) == Kind::KInt);
  CHECK(signed_is(s, 2, 15, 15));

  // Reassignment replaces both parts.
  s = MD::assign(s, 4, parse_expr_text("2"));
  CHECK(s.types.get(4) == Kind::KInt);
  CHECK(signed_is(s, 4, 2, 2));

  // An untranslatable right-hand side erases the old range.
  s = MD::assign(s, 2, parse_expr_text("int32[p]"));
  CHECK(s.types.get(2) == Kind::KTop);
  CHECK(signed_is(s, 2, min_signed, max_signed));
}

TEST_CASE("assume narrows translated guards and skips the rest") {
  State top = MD::top();

  // Unknown kinds block unsigned guards entirely.
  State s1 = MD::assume(top, parse_expr_text("z <u 16"), true);
  CHECK(s1 == top);

  // Establish x as an integer of unknown value, then narrow it.
  State s2 = MD::assign(top, 1, parse_expr_text("3 * z"));
  State s3 = MD::assume(s2, parse_expr_text("x <u 16"), true);
  CHECK(unsigned_is(s3, 1, 0, 15));
  CHECK(signed_is(s3, 1, 0, 15));

  // False branches keep the complement.
  State s4 = MD::assume(s2, parse_expr_text("x < 10"), false);
  CHECK(signed_is(s4, 1, 10, max_signed));

  // Signed guards refine variables of any kind; the states they cut are
  // exactly those where the comparison has a defined (integer) meaning.
  State s5 = MD::assume(top, parse_expr_text("p == 3"), true);
  CHECK(signed_is(s5, 4, 3, 3));
  CHECK(s5.types.get(4) == Kind::KTop);

  // Pointer/pointer unsigned comparisons translate; only relative cuts
  // appear, never constant bounds.
  State sp = MD::assign(top, 4, parse_expr_text("addrglobal(g)"));
  sp = MD::assign(sp, 5, parse_expr_text("addrstack(0)"));
  State s6 = MD::assume(sp, parse_expr_text("p <u q"), true);
  REQUIRE_FALSE(MD::is_bottom(s6));
  CHECK(unsigned_is(s6, 4, 0, max_unsigned - 1));
  CHECK(unsigned_is(s6, 5, 1, max_unsigned));

  // Mixed integer/pointer unsigned guards learn nothing at all.
  State sm = MD::assign(sp, 1, parse_expr_text("7"));
  State s7 = MD::assume(sm, parse_expr_text("x ==u p"), true);
  CHECK(s7 == sm);
  State s8 = MD::assume(sm, parse_expr_text("x ==u p"), false);
  CHECK(s8 == sm);
}

TEST_CASE("contradictions collapse to a canonical bottom state") {
  State s = MD::assign(MD::top(), 1, parse_expr_text("5"));
  State b = MD::assume(s, parse_expr_text("x == 6"), true);

  CHECK(MD::is_bottom(b));
  CHECK(b == MD::bottom());
  CHECK(MD::var_range(b, 1, Signedness::Signed).is_bottom());

  // Bottom is absorbing for transfer operations and neutral for join.
  CHECK(MD::assign(b, 2, parse_expr_text("1")) == MD::bottom());
  CHECK(MD::assume(b, parse_expr_text("x == 5"), true) == MD::bottom());
  CHECK(MD::forget(b, 1) == MD::bottom());
  CHECK(MD::join(b, s) == s);
  CHECK(MD::join(s, b) == s);
  CHECK(MD::le(b, s));
  CHECK_FALSE(MD::le(s, b));
  CHECK(MD::le(b, MD::bottom()));
}

TEST_CASE("state order and lattice operations combine ranges with kinds") {
  State top = MD::top();
  State s_int = MD::assign(top, 1, parse_expr_text("5"));
  State s_wide = MD::assign(top, 1, parse_expr_text("3 * z"));
  State s_ptr = MD::assign(top, 1, parse_expr_text("addrglobal(g)"));

  CHECK(MD::le(s_int, s_wide));
  CHECK_FALSE(MD::le(s_wide, s_int));
  // Same full range, incomparable kinds.
  CHECK_FALSE(MD::le(s_wide, s_ptr));
  CHECK_FALSE(MD::le(s_ptr, s_wide));
  CHECK_FALSE(MD::le(s_int, s_ptr));
  CHECK(MD::le(s_int, top));
  CHECK(MD::le(s_ptr, top));

  State j = MD::join(s_int, s_ptr);
  CHECK(MD::le(s_int, j));
  CHECK(MD::le(s_ptr, j));
  CHECK(j.types.get(1) == Kind::KTop);

  State wdn = MD::widen(s_int, s_wide);
  CHECK(MD::le(s_wide, wdn));
  CHECK(wdn.types.get(1) == Kind::KInt);

  State m = MD::meet(s_wide, s_int);
  CHECK(signed_is(m, 1, 5, 5));
  CHECK(m.types.get(1) == Kind::KInt);
  CHECK(MD::meet(s_int, MD::bottom()) == MD::bottom());

  // Stores never change the variable state; forget clears one variable.
  State st = MD::store(s_int, MemChunk::Int32, parse_expr_text("p"),
                        parse_expr_text("x"));
  CHECK(st == s_int);
  State fg = MD::forget(s_int, 1);
  CHECK(signed_is(fg, 1, min_signed, max_signed));
  CHECK(fg.types.get(1) == Kind::KTop);
}

// ---------------------------------------------------------------------------
// Differential check against the reference machine: run a random
// straight-line program concretely, mirror its assignments abstractly, and
// require the final concrete value to lie inside both the inferred kind and
// the reported ranges.

namespace {

Expr gen_leaf(std::mt19937_64& rng) {
  static const std::int64_t pool[] = {0,  1,  2,          3,           7,
                                      10, 16, 255,        -1,          -8,
                                      31, 33, max_signed, min_signed,  2147483648LL,
                                      5,  9,  100,        max_unsigned};
  switch (rng() % 8) {
    case 0:
      return Expr::var(1);  // x: integer constant
    case 1:
      return Expr::var(2);  // y: integer constant
    case 2:
      return Expr::var(4);  // p: pointer into the global
    case 3:
      return Expr::var(5);  // q: pointer into the stack block
    case 4:
      return Expr::constant(
          Constant::global("g", w(static_cast<std::int64_t>(rng() % 20))));
    case 5:
      return Expr::constant(
          Constant::stack(w(static_cast<std::int64_t>(rng() % 12))));
    default:
      return Expr::constant(
          Constant::integer(w(pool[rng() % (sizeof(pool) / sizeof(pool[0]))])));
  }
}

Expr gen_expr(std::mt19937_64& rng, int depth) {
  if (depth == 0 || rng() % 4 == 0) return gen_leaf(rng);
  switch (rng() % 10) {
    case 0:
    case 1: {
      auto op = static_cast<UnOp>(rng() % 8);
      return Expr::unary(op, gen_expr(rng, depth - 1));
    }
    case 8: {
      return Expr::cond(gen_expr(rng, depth - 1), gen_expr(rng, depth - 1),
                        gen_expr(rng, depth - 1));
    }
    case 9: {
      auto chunk = static_cast<MemChunk>(rng() % 5);
      return Expr::load(chunk, gen_expr(rng, depth - 1));
    }
    default: {
      auto op = static_cast<BinOp>(rng() % 25);
      return Expr::binary(op, gen_expr(rng, depth - 1),
                          gen_expr(rng, depth - 1));
    }
  }
}

}  // namespace

TEST_CASE("random straight-line programs stay inside kinds and ranges") {
  std::mt19937_64 rng(20260819u);
  const std::int64_t seeds[] = {0, 1, 5, 255, -1, max_signed, min_signed, 77};

  int completed = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::int64_t c1 = seeds[rng() % 8];
    std::int64_t c2 = seeds[rng() % 8];
    Expr e = gen_expr(rng, 3);

    CfgProgram prog;
    prog.globals.emplace_back("g", 16);
    CfgFunction f;
    f.name = "main";
    f.stack_size = 12;
    f.entry = 1;
    f.body[1] = AssignInstr{1, Expr::constant(Constant::integer(w(c1))), 2};
    f.body[2] = AssignInstr{2, Expr::constant(Constant::integer(w(c2))), 3};
    f.body[3] = AssignInstr{
        4,
        Expr::constant(Constant::global(
            "g", w(static_cast<std::int64_t>(rng() % 8)))),
        4};
    f.body[4] = AssignInstr{5, Expr::constant(Constant::stack(w(0))), 5};
    f.body[5] = AssignInstr{6, e, 6};
    f.body[6] = ReturnInstr{Expr::var(6)};
    prog.functions.push_back(std::move(f));
    validate(prog);

    // Mirror the five assignments abstractly.
    State s = MD::top();
    for (NodeId pc = 1; pc <= 5; ++pc) {
      const auto& ins = std::get<AssignInstr>(prog.functions[0].body.at(pc));
      s = MD::assign(s, ins.dst, ins.value);
    }
    REQUIRE_FALSE(MD::is_bottom(s));

    TraceResult tr = trace(prog, {}, 64);
    if (tr.end != TraceResult::End::Done || !tr.result.has_value()) {
      continue;  // the expression trapped or read outside a block
    }
    ++completed;

    Kind k = s.types.get(6);
    if (const VInt* iv = std::get_if<VInt>(&*tr.result)) {
      INFO("trial " << trial << " produced integer "
                    << iv->w.unsigned_value());
      REQUIRE((k == Kind::KInt || k == Kind::KTop));
      auto rs = MD::var_range(s, 6, Signedness::Signed);
      auto ru = MD::var_range(s, 6, Signedness::Unsigned);
      REQUIRE_FALSE(rs.is_bottom());
      REQUIRE_FALSE(ru.is_bottom());
      REQUIRE(testing::word_in(rs.value(), Signedness::Signed, iv->w));
      REQUIRE(testing::word_in(ru.value(), Signedness::Unsigned, iv->w));
    } else if (std::holds_alternative<VPtr>(*tr.result)) {
      INFO("trial " << trial << " produced a pointer");
      REQUIRE((k == Kind::KPtr || k == Kind::KTop));
    }
    // Undefined results are unconstrained.
  }
  // The generator must actually exercise the check.
  CHECK(completed > 1500);
}
