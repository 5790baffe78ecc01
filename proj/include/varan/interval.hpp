#pragma once

/*
 * Interval domains over 32-bit machine words.
 *
 * The same word set is approximated twice: once through its signed views,
 * once through its unsigned views.  IntervalDomain<S> is one such instance;
 * an interval [lo, hi] denotes every word whose S-view lies between the two
 * bounds.  Bounds are arbitrary-precision so transfer functions can compute
 * in plain integer arithmetic and only then decide whether the result still
 * fits the view window (`fit` falls back to top when it does not — that is
 * the wrap-around case).
 *
 * Operations whose semantics is tied to one view (signed division, unsigned
 * shift, each comparison family...) are computed in their native instance;
 * the other instance converts its operands across (`to_view`), computes
 * there, and converts back.  Conversion is a hull: exact while the interval
 * sits inside a half of the view overlap, top when it straddles.
 */

#include "varan/domain.hpp"
#include "varan/machine_int.hpp"

#include <algorithm>
#include <cassert>
#include <initializer_list>
#include <utility>
#include <vector>

namespace varan {

struct Interval {
  Big lo, hi;

  Interval(Big l, Big h) : lo(std::move(l)), hi(std::move(h)) { assert(lo <= hi); }

  bool contains(const Big& v) const { return lo <= v && v <= hi; }
  bool is_singleton() const { return lo == hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// The only constructor that may discover emptiness: a pair of bounds is an
// interval iff lo <= hi, otherwise it denotes no value at all.
inline Lifted<Interval> reduce(Big lo, Big hi) {
  if (lo > hi) return Lifted<Interval>::bottom();
  return Lifted<Interval>(Interval(std::move(lo), std::move(hi)));
}

template <Signedness S>
struct IntervalDomain {
  using value_type = Interval;
  static constexpr Signedness signedness = S;

  static Big view_min() {
    return S == Signedness::Signed ? Big(min_signed) : Big(0);
  }
  static Big view_max() {
    return S == Signedness::Signed ? Big(max_signed) : Big(max_unsigned);
  }

  static Interval top() { return Interval(view_min(), view_max()); }

  static bool le(const Interval& a, const Interval& b) {
    return b.lo <= a.lo && a.hi <= b.hi;
  }

  static Interval join(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
  }

  static Lifted<Interval> meet(const Interval& a, const Interval& b) {
    return reduce(std::max(a.lo, b.lo), std::min(a.hi, b.hi));
  }

  // Unstable bounds jump along a short ladder of landmarks (powers of two
  // where program behaviour typically changes regime) instead of straight
  // to the view edge; ascending chains still stabilize in a few steps.
  static Interval widen(const Interval& a, const Interval& b) {
    Big lo = b.lo < a.lo ? rung_below(b.lo) : a.lo;
    Big hi = b.hi > a.hi ? rung_above(b.hi) : a.hi;
    return Interval(std::move(lo), std::move(hi));
  }

  static Interval constant(MachineInt n) {
    Big v(n.view(S));
    return Interval(v, v);
  }

  // This interval's words, seen through view f (hull; exact when the
  // interval does not straddle the wrap point of the other view).
  static Interval to_view(const Interval& a, Signedness f) {
    if (f == S) return a;
    if constexpr (S == Signedness::Signed) {
      if (a.lo >= 0) return a;
      if (a.hi < 0) return Interval(a.lo + two_to_32, a.hi + two_to_32);
      return Interval(Big(0), Big(max_unsigned));
    } else {
      if (a.hi <= max_signed) return a;
      if (a.lo > max_signed) return Interval(a.lo - two_to_32, a.hi - two_to_32);
      return Interval(Big(min_signed), Big(max_signed));
    }
  }

  static Lifted<Interval> range(const Interval& a, Signedness f) {
    return Lifted<Interval>(to_view(a, f));
  }

  // ---- forward transfer ----------------------------------------------

  static Lifted<Interval> forward_unop(UnOp op, const Interval& a) {
    switch (op) {
      case UnOp::Cast8Signed:
        return cast(a, S == Signedness::Signed ? Big(-128) : Big(0), Big(127),
                    S == Signedness::Signed ? reduce(-128, 127) : Lifted<Interval>(top()));
      case UnOp::Cast8Unsigned:
        return cast(a, Big(0), Big(255), reduce(0, 255));
      case UnOp::Cast16Signed:
        return cast(a, S == Signedness::Signed ? Big(-32768) : Big(0), Big(32767),
                    S == Signedness::Signed ? reduce(-32768, 32767)
                                            : Lifted<Interval>(top()));
      case UnOp::Cast16Unsigned:
        return cast(a, Big(0), Big(65535), reduce(0, 65535));
      case UnOp::Neg:
        if constexpr (S == Signedness::Signed) {
          if (a.is_singleton() && a.lo == min_signed) return Lifted<Interval>(a);
          if (a.lo == min_signed) return Lifted<Interval>(top());
          return fit(-a.hi, -a.lo);
        } else {
          if (a.is_singleton() && a.lo == 0) return Lifted<Interval>(a);
          if (a.lo >= 1) return fit(two_to_32 - a.hi, two_to_32 - a.lo);
          return Lifted<Interval>(top());
        }
      case UnOp::Not:
        if constexpr (S == Signedness::Signed) {
          return fit(-a.hi - 1, -a.lo - 1);
        } else {
          return fit(max_unsigned - a.hi, max_unsigned - a.lo);
        }
      case UnOp::BoolVal:
        if (!a.contains(0)) return reduce(1, 1);
        if (a.is_singleton()) return reduce(0, 0);
        return reduce(0, 1);
      case UnOp::BoolNot:
        if (!a.contains(0)) return reduce(0, 0);
        if (a.is_singleton()) return reduce(1, 1);
        return reduce(0, 1);
    }
    return Lifted<Interval>(top());
  }

  static Lifted<Interval> forward_binop(BinOp op, const Interval& a, const Interval& b) {
    switch (op) {
      case BinOp::Add: return fit(a.lo + b.lo, a.hi + b.hi);
      case BinOp::Sub: return fit(a.lo - b.hi, a.hi - b.lo);
      case BinOp::Mul:
        return fit_hull({a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi});
      case BinOp::Shl: {
        Interval s = to_view(b, Signedness::Unsigned);
        if (s.lo < 0 || s.hi > 31) return Lifted<Interval>(top());
        int smin = s.lo.convert_to<int>(), smax = s.hi.convert_to<int>();
        Big pmin = Big(1) << smin, pmax = Big(1) << smax;
        return fit_hull({a.lo * pmin, a.lo * pmax, a.hi * pmin, a.hi * pmax});
      }
      case BinOp::DivS:
      case BinOp::RemS:
      case BinOp::ShrS:
        return in_view<Signedness::Signed>(
            a, b, [op](const Interval& x, const Interval& y) {
              return IntervalDomain<Signedness::Signed>::native_arith(op, x, y);
            });
      case BinOp::DivU:
      case BinOp::RemU:
      case BinOp::ShrU:
        return in_view<Signedness::Unsigned>(
            a, b, [op](const Interval& x, const Interval& y) {
              return IntervalDomain<Signedness::Unsigned>::native_arith(op, x, y);
            });
      case BinOp::And:
      case BinOp::Or:
      case BinOp::Xor:
        return bitwise(op, a, b);
      default:
        break;
    }
    assert(is_comparison(op));
    Rel r = comparison_rel(op);
    if (is_unsigned_comparison(op)) {
      return Lifted<Interval>(compare(r, to_view(a, Signedness::Unsigned),
                                      to_view(b, Signedness::Unsigned)));
    }
    return Lifted<Interval>(
        compare(r, to_view(a, Signedness::Signed), to_view(b, Signedness::Signed)));
  }

  // ---- backward transfer ----------------------------------------------
  //
  // Given the value of the operand(s) and a bound z on the result, shrink
  // the operand intervals to the part that can actually produce a result
  // in z.  Bottom means the combination is impossible.

  static Lifted<Interval> backward_unop(UnOp op, const Interval& x, const Interval& z) {
    switch (op) {
      case UnOp::BoolVal: {
        bool can_zero = z.contains(0), can_one = z.contains(1);
        if (!can_zero && !can_one) return Lifted<Interval>::bottom();
        if (!can_zero) return drop_zero(x);
        if (!can_one) return meet(x, Interval(Big(0), Big(0)));
        return Lifted<Interval>(x);
      }
      case UnOp::BoolNot: {
        bool can_zero = z.contains(0), can_one = z.contains(1);
        if (!can_zero && !can_one) return Lifted<Interval>::bottom();
        if (!can_zero) return meet(x, Interval(Big(0), Big(0)));
        if (!can_one) return drop_zero(x);
        return Lifted<Interval>(x);
      }
      case UnOp::Not:
        if constexpr (S == Signedness::Signed) {
          return meet(x, Interval(-z.hi - 1, -z.lo - 1));
        } else {
          return meet(x, Interval(max_unsigned - z.hi, max_unsigned - z.lo));
        }
      case UnOp::Neg:
        if constexpr (S == Signedness::Signed) {
          if (z.contains(min_signed)) return Lifted<Interval>(x);
          return meet(x, Interval(-z.hi, -z.lo));
        } else {
          if (z.is_singleton() && z.lo == 0) return meet(x, Interval(Big(0), Big(0)));
          if (!z.contains(0)) return meet(x, Interval(two_to_32 - z.hi, two_to_32 - z.lo));
          return Lifted<Interval>(x);
        }
      case UnOp::Cast8Signed:
        return backward_cast(x, z, S == Signedness::Signed ? Big(-128) : Big(0), Big(127));
      case UnOp::Cast8Unsigned:
        return backward_cast(x, z, Big(0), Big(255));
      case UnOp::Cast16Signed:
        return backward_cast(x, z, S == Signedness::Signed ? Big(-32768) : Big(0),
                             Big(32767));
      case UnOp::Cast16Unsigned:
        return backward_cast(x, z, Big(0), Big(65535));
    }
    return Lifted<Interval>(x);
  }

  static std::pair<Lifted<Interval>, Lifted<Interval>> backward_binop(
      BinOp op, const Interval& x, const Interval& y, const Interval& z) {
    if (is_comparison(op)) {
      bool can_false = z.contains(0), can_true = z.contains(1);
      if (!can_false && !can_true)
        return {Lifted<Interval>::bottom(), Lifted<Interval>::bottom()};
      if (can_false && can_true) return {Lifted<Interval>(x), Lifted<Interval>(y)};
      Rel r = comparison_rel(op);
      if (can_false) r = negate_rel(r);
      Signedness native =
          is_unsigned_comparison(op) ? Signedness::Unsigned : Signedness::Signed;
      if (native == S) {
        auto [xr, yr] = refine_rel(r, x, y);
        return {xr.and_then([&](const Interval& i) { return meet(x, i); }),
                yr.and_then([&](const Interval& i) { return meet(y, i); })};
      }
      // Refine in the native instance, then pull the result back into this
      // view; the pull-back is a hull, so this only ever drops information.
      auto refined = native == Signedness::Unsigned
                         ? IntervalDomain<Signedness::Unsigned>::refine_rel(
                               r, to_view(x, native), to_view(y, native))
                         : IntervalDomain<Signedness::Signed>::refine_rel(
                               r, to_view(x, native), to_view(y, native));
      auto back = [&](const Lifted<Interval>& ref,
                      const Interval& orig) -> Lifted<Interval> {
        return ref.and_then([&](const Interval& i) {
          Interval pulled = native == Signedness::Unsigned
                                ? IntervalDomain<Signedness::Unsigned>::to_view(i, S)
                                : IntervalDomain<Signedness::Signed>::to_view(i, S);
          return meet(orig, pulled);
        });
      };
      return {back(refined.first, x), back(refined.second, y)};
    }
    switch (op) {
      case BinOp::Add:
        // Only when no operand combination wraps is z - y a faithful
        // pre-image for x.
        if (a_plus_b_fits(x, y)) {
          return {meet(x, Interval(z.lo - y.hi, z.hi - y.lo)),
                  meet(y, Interval(z.lo - x.hi, z.hi - x.lo))};
        }
        break;
      case BinOp::Sub:
        if (a_minus_b_fits(x, y)) {
          return {meet(x, Interval(z.lo + y.lo, z.hi + y.hi)),
                  meet(y, Interval(x.lo - z.hi, x.hi - z.lo))};
        }
        break;
      default:
        break;
    }
    return {Lifted<Interval>(x), Lifted<Interval>(y)};
  }

  // Operand refinement for "x r y holds", in this instance's views.
  static std::pair<Lifted<Interval>, Lifted<Interval>> refine_rel(
      Rel r, const Interval& x, const Interval& y) {
    switch (r) {
      case Rel::Lt:
        return {reduce(x.lo, std::min(x.hi, Big(y.hi - 1))),
                reduce(std::max(y.lo, Big(x.lo + 1)), y.hi)};
      case Rel::Le:
        return {reduce(x.lo, std::min(x.hi, y.hi)),
                reduce(std::max(y.lo, x.lo), y.hi)};
      case Rel::Gt:
        return {reduce(std::max(x.lo, Big(y.lo + 1)), x.hi),
                reduce(y.lo, std::min(y.hi, Big(x.hi - 1)))};
      case Rel::Ge:
        return {reduce(std::max(x.lo, y.lo), x.hi),
                reduce(y.lo, std::min(y.hi, x.hi))};
      case Rel::Eq: {
        auto m = meet(x, y);
        return {m, m};
      }
      case Rel::Ne: {
        Lifted<Interval> xr(x), yr(y);
        if (y.is_singleton()) xr = drop_point(x, y.lo);
        if (x.is_singleton()) yr = drop_point(y, x.lo);
        return {xr, yr};
      }
    }
    return {Lifted<Interval>(x), Lifted<Interval>(y)};
  }

  // ---- shared helpers --------------------------------------------------

  // Result hull for an exact integer computation: keep it if every value is
  // representable in this view, otherwise give up to top (wrap-around).
  static Lifted<Interval> fit(Big lo, Big hi) {
    assert(lo <= hi);
    if (lo < view_min() || hi > view_max()) return Lifted<Interval>(top());
    return Lifted<Interval>(Interval(std::move(lo), std::move(hi)));
  }

  static Lifted<Interval> fit_hull(std::initializer_list<Big> corners) {
    Big lo = std::min(corners), hi = std::max(corners);
    return fit(std::move(lo), std::move(hi));
  }

  // Division-family semantics in this instance's own views; callers from
  // the other instance come through in_view.
  static Lifted<Interval> native_arith(BinOp op, const Interval& a, const Interval& b) {
    switch (op) {
      case BinOp::DivS: {
        if (b.contains(0)) return Lifted<Interval>(top());
        if (a.contains(min_signed) && b.contains(-1)) return Lifted<Interval>(top());
        return fit_hull({tdiv(a.lo, b.lo), tdiv(a.lo, b.hi), tdiv(a.hi, b.lo),
                         tdiv(a.hi, b.hi)});
      }
      case BinOp::RemS: {
        if (b.contains(0)) return Lifted<Interval>(top());
        if (a.contains(min_signed) && b.contains(-1)) return Lifted<Interval>(top());
        if (a.is_singleton() && b.is_singleton()) {
          Big r = a.lo - tdiv(a.lo, b.lo) * b.lo;
          return fit(r, r);
        }
        Big m = std::max(abs_big(b.lo), abs_big(b.hi)) - 1;
        Big lo = a.lo >= 0 ? Big(0) : std::max(a.lo, Big(-m));
        Big hi = a.hi <= 0 ? Big(0) : std::min(a.hi, m);
        return fit(std::move(lo), std::move(hi));
      }
      case BinOp::DivU:
        if (b.contains(0)) return Lifted<Interval>(top());
        return fit(tdiv(a.lo, b.hi), tdiv(a.hi, b.lo));
      case BinOp::RemU:
        if (b.contains(0)) return Lifted<Interval>(top());
        if (a.is_singleton() && b.is_singleton()) {
          Big r = a.lo - tdiv(a.lo, b.lo) * b.lo;
          return fit(r, r);
        }
        return fit(Big(0), std::min(a.hi, Big(b.hi - 1)));
      case BinOp::ShrS:
      case BinOp::ShrU: {
        Interval s = to_view(b, Signedness::Unsigned);
        if (s.lo < 0 || s.hi > 31) return Lifted<Interval>(top());
        Big pmin = Big(1) << s.lo.convert_to<int>();
        Big pmax = Big(1) << s.hi.convert_to<int>();
        return fit_hull({fdiv(a.lo, pmin), fdiv(a.lo, pmax), fdiv(a.hi, pmin),
                         fdiv(a.hi, pmax)});
      }
      default:
        assert(false);
        return Lifted<Interval>(top());
    }
  }

private:
  static Big abs_big(const Big& v) { return v < 0 ? -v : v; }

  // Truncated (machine) division; both here and below b != 0.
  static Big tdiv(const Big& a, const Big& b) {
    Big q = abs_big(a) / abs_big(b);
    return ((a < 0) != (b < 0)) ? -q : q;
  }

  // Floor division (right shifts).
  static Big fdiv(const Big& a, const Big& b) {
    Big q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) q -= 1;
    return q;
  }

  static const std::vector<Big>& ladder() {
    static const std::vector<Big> signed_rungs = {
        Big(min_signed), Big(-65536), Big(-1), Big(0),
        Big(1),          Big(65536),  Big(max_signed)};
    static const std::vector<Big> unsigned_rungs = {
        Big(0), Big(1), Big(65536), Big(max_signed), Big(max_unsigned)};
    return S == Signedness::Signed ? signed_rungs : unsigned_rungs;
  }

  static Big rung_below(const Big& v) {
    const auto& l = ladder();
    Big best = l.front();
    for (const Big& r : l)
      if (r <= v) best = r;
    return best;
  }

  static Big rung_above(const Big& v) {
    const auto& l = ladder();
    Big best = l.back();
    for (auto it = l.rbegin(); it != l.rend(); ++it)
      if (*it >= v) best = *it;
    return best;
  }

  // Casts act as the identity on `ident`; anywhere else the result is only
  // known to land in `fallback`.
  static Lifted<Interval> cast(const Interval& a, Big ident_lo, Big ident_hi,
                               Lifted<Interval> fallback) {
    if (a.lo >= ident_lo && a.hi <= ident_hi) return Lifted<Interval>(a);
    return fallback;
  }

  static Lifted<Interval> backward_cast(const Interval& x, const Interval& z,
                                        Big ident_lo, Big ident_hi) {
    if (x.lo >= ident_lo && x.hi <= ident_hi) return meet(x, z);
    return Lifted<Interval>(x);
  }

  // Run f in instance N on converted operands, then convert its result back.
  template <Signedness N, class F>
  static Lifted<Interval> in_view(const Interval& a, const Interval& b, F f) {
    if constexpr (N == S) {
      return f(a, b);
    } else {
      Lifted<Interval> r = f(to_view(a, N), to_view(b, N));
      return r.map(
          [](const Interval& i) { return IntervalDomain<N>::to_view(i, S); });
    }
  }

  static Interval compare(Rel r, const Interval& a, const Interval& b) {
    auto definitely = [&](Rel q) {
      switch (q) {
        case Rel::Lt: return a.hi < b.lo;
        case Rel::Le: return a.hi <= b.lo;
        case Rel::Gt: return a.lo > b.hi;
        case Rel::Ge: return a.lo >= b.hi;
        case Rel::Eq: return a.is_singleton() && b.is_singleton() && a.lo == b.lo;
        case Rel::Ne: return a.hi < b.lo || b.hi < a.lo;
      }
      return false;
    };
    if (definitely(r)) return Interval(Big(1), Big(1));
    if (definitely(negate_rel(r))) return Interval(Big(0), Big(0));
    return Interval(Big(0), Big(1));
  }

  static Lifted<Interval> bitwise(BinOp op, const Interval& a, const Interval& b) {
    if (a.is_singleton() && b.is_singleton()) {
      auto r = eval_binop(op, MachineInt::from_integer(a.lo.convert_to<std::int64_t>()),
                          MachineInt::from_integer(b.lo.convert_to<std::int64_t>()));
      assert(r.has_value());  // bitwise ops are total
      Big v(r->view(S));
      return Lifted<Interval>(Interval(v, v));
    }
    if (a.lo >= 0 && b.lo >= 0) {
      switch (op) {
        case BinOp::And:
          return Lifted<Interval>(Interval(Big(0), std::min(a.hi, b.hi)));
        case BinOp::Or:
          return Lifted<Interval>(
              Interval(std::max(a.lo, b.lo), pow2_mask(std::max(a.hi, b.hi))));
        default:
          return Lifted<Interval>(Interval(Big(0), pow2_mask(std::max(a.hi, b.hi))));
      }
    }
    return Lifted<Interval>(top());
  }

  // Smallest 2^k - 1 that is >= v.
  static Big pow2_mask(const Big& v) {
    Big m = 0;
    while (m < v) m = m * 2 + 1;
    return m;
  }

  static Lifted<Interval> drop_zero(const Interval& x) {
    if (x.is_singleton() && x.lo == 0) return Lifted<Interval>::bottom();
    if (x.lo == 0) return Lifted<Interval>(Interval(Big(1), x.hi));
    if (x.hi == 0) return Lifted<Interval>(Interval(x.lo, Big(-1)));
    return Lifted<Interval>(x);
  }

  static Lifted<Interval> drop_point(const Interval& x, const Big& p) {
    if (x.is_singleton() && x.lo == p) return Lifted<Interval>::bottom();
    if (x.lo == p) return Lifted<Interval>(Interval(x.lo + 1, x.hi));
    if (x.hi == p) return Lifted<Interval>(Interval(x.lo, x.hi - 1));
    return Lifted<Interval>(x);
  }

  static bool a_plus_b_fits(const Interval& a, const Interval& b) {
    return a.lo + b.lo >= view_min() && a.hi + b.hi <= view_max();
  }

  static bool a_minus_b_fits(const Interval& a, const Interval& b) {
    return a.lo - b.hi >= view_min() && a.hi - b.lo <= view_max();
  }

  template <Signedness>
  friend struct IntervalDomain;
};

using SignedIntervals = IntervalDomain<Signedness::Signed>;
using UnsignedIntervals = IntervalDomain<Signedness::Unsigned>;

}  // namespace varan
