// Laws of the domain combinators, verified exhaustively against two tiny
// model domains whose concretizations can be enumerated outright.  The
// model concrete space is the integers 0..15; the first domain tracks a
// range, the second a parity, so the product genuinely combines
// incomparable information.

#include "varan/domain.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

using namespace varan;

namespace {

constexpr int kLo = 0, kHi = 15;

struct SmallRange {
  int lo, hi;
  friend bool operator==(const SmallRange&, const SmallRange&) = default;
};

struct SmallRangeDomain {
  using value_type = SmallRange;
  static SmallRange top() { return {kLo, kHi}; }
  static bool le(SmallRange a, SmallRange b) { return b.lo <= a.lo && a.hi <= b.hi; }
  static SmallRange join(SmallRange a, SmallRange b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
  }
  static SmallRange widen(SmallRange a, SmallRange b) {
    return {b.lo < a.lo ? kLo : a.lo, b.hi > a.hi ? kHi : a.hi};
  }
  static Lifted<SmallRange> meet(SmallRange a, SmallRange b) {
    int lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
    if (lo > hi) return Lifted<SmallRange>::bottom();
    return Lifted<SmallRange>(SmallRange{lo, hi});
  }
};

bool in_range(SmallRange a, int k) { return a.lo <= k && k <= a.hi; }

enum class Par { Even, Odd, Either };

struct Parity {
  Par p;
  friend bool operator==(const Parity&, const Parity&) = default;
};

struct ParityDomain {
  using value_type = Parity;
  static Parity top() { return {Par::Either}; }
  static bool le(Parity a, Parity b) { return a == b || b.p == Par::Either; }
  static Parity join(Parity a, Parity b) { return a == b ? a : Parity{Par::Either}; }
  static Parity widen(Parity a, Parity b) { return join(a, b); }
  static Lifted<Parity> meet(Parity a, Parity b) {
    if (a.p == Par::Either) return Lifted<Parity>(b);
    if (b.p == Par::Either) return Lifted<Parity>(a);
    if (a == b) return Lifted<Parity>(a);
    return Lifted<Parity>::bottom();
  }
};

bool in_parity(Parity a, int k) {
  return a.p == Par::Either || (k % 2 == 0) == (a.p == Par::Even);
}

std::vector<SmallRange> all_ranges() {
  std::vector<SmallRange> out;
  for (int lo = kLo; lo <= kHi; ++lo)
    for (int hi = lo; hi <= kHi; ++hi) out.push_back({lo, hi});
  return out;
}

const std::vector<Parity> kAllParities = {{Par::Even}, {Par::Odd}, {Par::Either}};

}  // namespace

TEST_CASE("bottom lift laws, exhaustively", "[domain]") {
  using D = LiftBottom<SmallRangeDomain>;
  std::vector<D::value_type> values = {D::bottom()};
  for (SmallRange r : all_ranges()) values.emplace_back(r);

  auto gamma = [](const D::value_type& v, int k) {
    return !v.is_bottom() && in_range(v.value(), k);
  };

  for (int k = kLo; k <= kHi; ++k) CHECK(gamma(D::top(), k));

  for (const auto& a : values) {
    CHECK(D::le(a, a));
    CHECK(D::le(D::bottom(), a));
    for (const auto& b : values) {
      bool le = D::le(a, b);
      auto j = D::join(a, b);
      auto m = D::meet(a, b);
      for (int k = kLo; k <= kHi; ++k) {
        if (le && gamma(a, k)) CHECK(gamma(b, k));
        if (gamma(a, k) || gamma(b, k)) CHECK(gamma(j, k));
        CHECK((gamma(a, k) && gamma(b, k)) == gamma(m, k));  // meet is exact here
      }
      // Widening is an upper bound of both arguments.
      auto w = D::widen(a, b);
      CHECK(D::le(a, w));
      CHECK(D::le(b, w));
    }
  }
}

TEST_CASE("direct product laws, exhaustively", "[domain]") {
  using D = DirectProduct<SmallRangeDomain, ParityDomain>;
  std::vector<D::value_type> values;
  for (SmallRange r : all_ranges())
    for (Parity p : kAllParities) values.push_back({r, p});

  // The product concretizes to the intersection of the parts.
  auto gamma = [](const D::value_type& v, int k) {
    return in_range(v.first, k) && in_parity(v.second, k);
  };

  for (int k = kLo; k <= kHi; ++k) CHECK(gamma(D::top(), k));

  for (const auto& a : values) {
    for (const auto& b : values) {
      bool le = D::le(a, b);
      auto j = D::join(a, b);
      auto m = D::meet(a, b);
      for (int k = kLo; k <= kHi; ++k) {
        if (le && gamma(a, k)) CHECK(gamma(b, k));
        if (gamma(a, k) || gamma(b, k)) CHECK(gamma(j, k));
        bool both = gamma(a, k) && gamma(b, k);
        // Product meet is sound but (unlike the parts) not exact: a range
        // and a parity can be jointly empty without either being bottom.
        if (both) {
          REQUIRE_FALSE(m.is_bottom());
          CHECK(gamma(m.value(), k));
        }
      }
      auto w = D::widen(a, b);
      CHECK(D::le(a, w));
      CHECK(D::le(b, w));
    }
  }
}

TEST_CASE("reduced map: bindings, bottom collapse, canonical top", "[domain]") {
  using M = ReducedMap<int, SmallRangeDomain>;

  auto m = M::top();
  CHECK(M::get(m, 1) == Lifted<SmallRange>(SmallRangeDomain::top()));

  m = M::set(m, 1, Lifted<SmallRange>(SmallRange{2, 5}));
  CHECK(M::get(m, 1) == Lifted<SmallRange>(SmallRange{2, 5}));
  CHECK(M::get(m, 2) == Lifted<SmallRange>(SmallRangeDomain::top()));

  // Binding a key back to top erases it: maps stay canonical, so equal
  // environments compare equal.
  auto m2 = M::set(m, 1, Lifted<SmallRange>(SmallRangeDomain::top()));
  CHECK(m2 == M::top());

  // Binding any key to bottom collapses the whole environment.
  auto mb = M::set(m, 2, Lifted<SmallRange>::bottom());
  CHECK(mb.is_bottom());
  CHECK(M::get(mb, 1).is_bottom());

  CHECK(M::le(M::bottom(), m));
  CHECK_FALSE(M::le(m, M::bottom()));
  CHECK(M::set(M::bottom(), 1, Lifted<SmallRange>(SmallRange{1, 2})).is_bottom());
}

TEST_CASE("reduced map laws over sampled environments", "[domain]") {
  using M = ReducedMap<int, SmallRangeDomain>;
  const std::vector<int> keys = {1, 2};

  // A concrete environment assigns one small integer to each key; an
  // abstract environment concretizes to a set of them, unbound = anything.
  auto gamma = [&](const M::value_type& m, int v1, int v2) {
    if (m.is_bottom()) return false;
    auto g1 = M::get(m, 1), g2 = M::get(m, 2);
    return in_range(g1.value(), v1) && in_range(g2.value(), v2);
  };

  std::mt19937 rng(2024);
  auto ranges = all_ranges();
  auto random_env = [&]() -> M::value_type {
    auto m = M::top();
    for (int k : keys) {
      int pick = static_cast<int>(rng() % (ranges.size() + 1));
      if (pick == static_cast<int>(ranges.size())) continue;  // leave unbound
      m = M::set(m, k, Lifted<SmallRange>(ranges[pick]));
    }
    return m;
  };

  for (int trial = 0; trial < 4000; ++trial) {
    auto a = random_env(), b = random_env();
    bool le = M::le(a, b);
    auto j = M::join(a, b);
    auto w = M::widen(a, b);
    auto m = M::meet(a, b);
    for (int v1 = kLo; v1 <= kHi; ++v1) {
      for (int v2 = kLo; v2 <= kHi; ++v2) {
        bool ga = gamma(a, v1, v2), gb = gamma(b, v1, v2);
        if (le && ga) CHECK(gb);
        if (ga || gb) CHECK(gamma(j, v1, v2));
        if (ga && gb) CHECK(gamma(m, v1, v2));
      }
    }
    CHECK(M::le(a, j));
    CHECK(M::le(b, j));
    CHECK(M::le(a, w));
    CHECK(M::le(b, w));
    CHECK(M::le(a, a));
  }
}

TEST_CASE("lifted carrier basics", "[domain]") {
  Lifted<int> b = Lifted<int>::bottom();
  Lifted<int> v(7);
  CHECK(b.is_bottom());
  CHECK_FALSE(v.is_bottom());
  CHECK(v.value() == 7);
  CHECK(v.map([](int x) { return x + 1; }) == Lifted<int>(8));
  CHECK(b.map([](int x) { return x + 1; }).is_bottom());
  CHECK(v.and_then([](int) { return Lifted<int>::bottom(); }).is_bottom());
  CHECK(b != v);
}
