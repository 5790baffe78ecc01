#pragma once

/*
 * 32-bit machine integers.
 *
 * A value is a bit pattern; "signed" and "unsigned" are two views of the
 * same word, not two types.  All wrap-around arithmetic is defined on the
 * pattern (two's complement); the handful of genuinely partial operations
 * (division/remainder corner cases, oversized shift amounts) report an
 * error instead of producing a value.
 */

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace varan {

// Arbitrary-precision integers, used wherever intermediate results can
// exceed 64 bits (interval corner products, widening thresholds, oracles).
using Big = boost::multiprecision::cpp_int;

inline constexpr std::int64_t min_signed = -2147483648LL;
inline constexpr std::int64_t max_signed = 2147483647LL;
inline constexpr std::int64_t max_unsigned = 4294967295LL;
inline constexpr std::int64_t two_to_32 = 4294967296LL;

// The two ways of reading a word as a number.
enum class Signedness : std::uint8_t { Signed, Unsigned };

class MachineInt {
public:
  constexpr MachineInt() = default;

  static constexpr MachineInt from_bits(std::uint32_t bits) {
    MachineInt m;
    m.bits_ = bits;
    return m;
  }

  // Wraps modulo 2^32, so any integer is accepted.
  static constexpr MachineInt from_integer(std::int64_t z) {
    return from_bits(static_cast<std::uint32_t>(static_cast<std::uint64_t>(z)));
  }

  static MachineInt from_integer(const Big& z) {
    Big r = z % two_to_32;
    if (r < 0) r += two_to_32;
    return from_bits(r.convert_to<std::uint32_t>());
  }

  constexpr std::uint32_t bits() const { return bits_; }

  // Unsigned view: [0, 2^32).
  constexpr std::int64_t unsigned_value() const {
    return static_cast<std::int64_t>(bits_);
  }

  // Signed view: [-2^31, 2^31).  Same word, shifted window.
  constexpr std::int64_t signed_value() const {
    std::int64_t u = unsigned_value();
    return u > max_signed ? u - two_to_32 : u;
  }

  constexpr std::int64_t view(Signedness s) const {
    return s == Signedness::Signed ? signed_value() : unsigned_value();
  }

  friend constexpr bool operator==(MachineInt, MachineInt) = default;

private:
  std::uint32_t bits_ = 0;
};

enum class UnOp : std::uint8_t {
  Cast8Signed,    // sign-extend the low byte
  Cast8Unsigned,  // zero-extend the low byte
  Cast16Signed,
  Cast16Unsigned,
  Neg,      // two's-complement negation (wraps)
  Not,      // bitwise complement
  BoolVal,  // 1 if nonzero else 0
  BoolNot,  // 1 if zero else 0
};

enum class BinOp : std::uint8_t {
  Add,
  Sub,
  Mul,
  DivS,   // truncated signed division
  RemS,
  DivU,
  RemU,
  And,
  Or,
  Xor,
  Shl,
  ShrS,  // arithmetic right shift
  ShrU,  // logical right shift
  // Comparisons produce the machine integer 1 or 0.
  CmpEq,
  CmpNe,
  CmpLt,
  CmpLe,
  CmpGt,
  CmpGe,
  CmpEqU,
  CmpNeU,
  CmpLtU,
  CmpLeU,
  CmpGtU,
  CmpGeU,
};

enum class Rel : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

constexpr bool is_comparison(BinOp op) {
  return op >= BinOp::CmpEq && op <= BinOp::CmpGeU;
}

constexpr bool is_unsigned_comparison(BinOp op) {
  return op >= BinOp::CmpEqU && op <= BinOp::CmpGeU;
}

// Precondition: is_comparison(op).
constexpr Rel comparison_rel(BinOp op) {
  switch (op) {
    case BinOp::CmpEq:
    case BinOp::CmpEqU: return Rel::Eq;
    case BinOp::CmpNe:
    case BinOp::CmpNeU: return Rel::Ne;
    case BinOp::CmpLt:
    case BinOp::CmpLtU: return Rel::Lt;
    case BinOp::CmpLe:
    case BinOp::CmpLeU: return Rel::Le;
    case BinOp::CmpGt:
    case BinOp::CmpGtU: return Rel::Gt;
    default: return Rel::Ge;
  }
}

constexpr BinOp comparison_op(Rel r, Signedness s) {
  int base = s == Signedness::Signed ? static_cast<int>(BinOp::CmpEq)
                                     : static_cast<int>(BinOp::CmpEqU);
  return static_cast<BinOp>(base + static_cast<int>(r));
}

constexpr Rel negate_rel(Rel r) {
  switch (r) {
    case Rel::Eq: return Rel::Ne;
    case Rel::Ne: return Rel::Eq;
    case Rel::Lt: return Rel::Ge;
    case Rel::Le: return Rel::Gt;
    case Rel::Gt: return Rel::Le;
    default: return Rel::Lt;
  }
}

// rel such that (b rel a) <=> (a swap_rel(rel) b)
constexpr Rel swap_rel(Rel r) {
  switch (r) {
    case Rel::Lt: return Rel::Gt;
    case Rel::Le: return Rel::Ge;
    case Rel::Gt: return Rel::Lt;
    case Rel::Ge: return Rel::Le;
    default: return r;  // Eq, Ne are symmetric
  }
}

constexpr bool rel_holds(Rel r, std::int64_t a, std::int64_t b) {
  switch (r) {
    case Rel::Eq: return a == b;
    case Rel::Ne: return a != b;
    case Rel::Lt: return a < b;
    case Rel::Le: return a <= b;
    case Rel::Gt: return a > b;
    default: return a >= b;
  }
}

// Partial evaluation: nullopt models a machine trap (division corner cases,
// shift amount >= 32).  Everything else wraps.
inline std::optional<MachineInt> eval_unop(UnOp op, MachineInt a) {
  switch (op) {
    case UnOp::Cast8Signed:
      return MachineInt::from_integer(static_cast<std::int64_t>(
          static_cast<std::int8_t>(static_cast<std::uint8_t>(a.bits() & 0xFF))));
    case UnOp::Cast8Unsigned:
      return MachineInt::from_bits(a.bits() & 0xFF);
    case UnOp::Cast16Signed:
      return MachineInt::from_integer(static_cast<std::int64_t>(
          static_cast<std::int16_t>(static_cast<std::uint16_t>(a.bits() & 0xFFFF))));
    case UnOp::Cast16Unsigned:
      return MachineInt::from_bits(a.bits() & 0xFFFF);
    case UnOp::Neg:
      return MachineInt::from_bits(~a.bits() + 1u);
    case UnOp::Not:
      return MachineInt::from_bits(~a.bits());
    case UnOp::BoolVal:
      return MachineInt::from_bits(a.bits() != 0 ? 1u : 0u);
    case UnOp::BoolNot:
      return MachineInt::from_bits(a.bits() == 0 ? 1u : 0u);
  }
  return std::nullopt;  // unreachable
}

inline std::optional<MachineInt> eval_binop(BinOp op, MachineInt a, MachineInt b) {
  const std::int64_t as = a.signed_value(), bs = b.signed_value();
  const std::int64_t au = a.unsigned_value(), bu = b.unsigned_value();
  switch (op) {
    case BinOp::Add: return MachineInt::from_integer(au + bu);
    case BinOp::Sub: return MachineInt::from_integer(au - bu);
    case BinOp::Mul: return MachineInt::from_integer(Big(au) * Big(bu));
    case BinOp::DivS:
      if (bs == 0 || (as == min_signed && bs == -1)) return std::nullopt;
      return MachineInt::from_integer(as / bs);
    case BinOp::RemS:
      if (bs == 0 || (as == min_signed && bs == -1)) return std::nullopt;
      return MachineInt::from_integer(as % bs);
    case BinOp::DivU:
      if (bu == 0) return std::nullopt;
      return MachineInt::from_integer(au / bu);
    case BinOp::RemU:
      if (bu == 0) return std::nullopt;
      return MachineInt::from_integer(au % bu);
    case BinOp::And: return MachineInt::from_bits(a.bits() & b.bits());
    case BinOp::Or: return MachineInt::from_bits(a.bits() | b.bits());
    case BinOp::Xor: return MachineInt::from_bits(a.bits() ^ b.bits());
    case BinOp::Shl:
      if (bu >= 32) return std::nullopt;
      return MachineInt::from_bits(a.bits() << bu);
    case BinOp::ShrS:
      if (bu >= 32) return std::nullopt;
      return MachineInt::from_integer(as >> bu);
    case BinOp::ShrU:
      if (bu >= 32) return std::nullopt;
      return MachineInt::from_bits(a.bits() >> bu);
    default:
      break;
  }
  const Rel r = comparison_rel(op);
  const bool holds = is_unsigned_comparison(op) ? rel_holds(r, au, bu)
                                                : rel_holds(r, as, bs);
  return MachineInt::from_bits(holds ? 1u : 0u);
}

}  // namespace varan
