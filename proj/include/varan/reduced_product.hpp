#pragma once

/*
 * Reduced product of the two interval instances.
 *
 * A pair constrains one set of words through both views at once.  Since
 * either side's constraint, converted through the other view, still holds
 * of the same words, the reduction step meets each side with the other's
 * conversion; that can only discard words no concrete run could produce.
 * The payoff is wrap-around precision: an addition that overflows the
 * signed window stays exact on the unsigned side, and the reduction pulls
 * the tight bound back into the signed view (and vice versa).
 *
 * The reduction runs after value-producing operations (constants, meets,
 * forward/backward transfer).  It deliberately does not run after join or
 * widen: widening extrapolates, and re-tightening its result could bounce
 * bounds back and forth and break termination.
 */

#include "varan/domain.hpp"
#include "varan/interval.hpp"
#include "varan/machine_int.hpp"

#include <utility>

namespace varan {

struct IntervalPair {
  Interval as_signed, as_unsigned;

  friend bool operator==(const IntervalPair&, const IntervalPair&) = default;
};

inline Lifted<IntervalPair> reduce_pair(const Interval& s, const Interval& u) {
  auto u2 = UnsignedIntervals::meet(
      u, SignedIntervals::to_view(s, Signedness::Unsigned));
  if (u2.is_bottom()) return Lifted<IntervalPair>::bottom();
  auto s2 = SignedIntervals::meet(
      s, UnsignedIntervals::to_view(u2.value(), Signedness::Signed));
  if (s2.is_bottom()) return Lifted<IntervalPair>::bottom();
  return Lifted<IntervalPair>(IntervalPair{s2.value(), u2.value()});
}

struct IntervalPairDomain {
  using value_type = IntervalPair;

  static value_type top() {
    return {SignedIntervals::top(), UnsignedIntervals::top()};
  }

  static bool le(const value_type& a, const value_type& b) {
    return SignedIntervals::le(a.as_signed, b.as_signed) &&
           UnsignedIntervals::le(a.as_unsigned, b.as_unsigned);
  }

  static value_type join(const value_type& a, const value_type& b) {
    return {SignedIntervals::join(a.as_signed, b.as_signed),
            UnsignedIntervals::join(a.as_unsigned, b.as_unsigned)};
  }

  static value_type widen(const value_type& a, const value_type& b) {
    return {SignedIntervals::widen(a.as_signed, b.as_signed),
            UnsignedIntervals::widen(a.as_unsigned, b.as_unsigned)};
  }

  static Lifted<value_type> meet(const value_type& a, const value_type& b) {
    auto s = SignedIntervals::meet(a.as_signed, b.as_signed);
    if (s.is_bottom()) return Lifted<value_type>::bottom();
    auto u = UnsignedIntervals::meet(a.as_unsigned, b.as_unsigned);
    if (u.is_bottom()) return Lifted<value_type>::bottom();
    return reduce_pair(s.value(), u.value());
  }

  static value_type constant(MachineInt n) {
    return {SignedIntervals::constant(n), UnsignedIntervals::constant(n)};
  }

  // The requested view's interval, sharpened by what the other side knows.
  static Lifted<Interval> range(const value_type& p, Signedness f) {
    Interval s = SignedIntervals::to_view(p.as_signed, f);
    Interval u = UnsignedIntervals::to_view(p.as_unsigned, f);
    return f == Signedness::Signed ? SignedIntervals::meet(s, u)
                                   : UnsignedIntervals::meet(s, u);
  }

  static Lifted<value_type> forward_unop(UnOp op, const value_type& a) {
    auto s = SignedIntervals::forward_unop(op, a.as_signed);
    auto u = UnsignedIntervals::forward_unop(op, a.as_unsigned);
    return combine(s, u);
  }

  static Lifted<value_type> forward_binop(BinOp op, const value_type& a,
                                          const value_type& b) {
    auto s = SignedIntervals::forward_binop(op, a.as_signed, b.as_signed);
    auto u = UnsignedIntervals::forward_binop(op, a.as_unsigned, b.as_unsigned);
    return combine(s, u);
  }

  static Lifted<value_type> backward_unop(UnOp op, const value_type& x,
                                          const value_type& z) {
    auto s = SignedIntervals::backward_unop(op, x.as_signed, z.as_signed);
    auto u = UnsignedIntervals::backward_unop(op, x.as_unsigned, z.as_unsigned);
    return combine(s, u);
  }

  static std::pair<Lifted<value_type>, Lifted<value_type>> backward_binop(
      BinOp op, const value_type& x, const value_type& y, const value_type& z) {
    auto [xs, ys] =
        SignedIntervals::backward_binop(op, x.as_signed, y.as_signed, z.as_signed);
    auto [xu, yu] = UnsignedIntervals::backward_binop(op, x.as_unsigned,
                                                      y.as_unsigned, z.as_unsigned);
    return {combine(xs, xu), combine(ys, yu)};
  }

private:
  static Lifted<value_type> combine(const Lifted<Interval>& s,
                                    const Lifted<Interval>& u) {
    if (s.is_bottom() || u.is_bottom()) return Lifted<value_type>::bottom();
    return reduce_pair(s.value(), u.value());
  }
};

}  // namespace varan
