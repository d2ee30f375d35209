#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "asymclock/intervals.hpp"
#include "doctest.h"

using namespace asymclock::intervals;

TEST_CASE("construction and predicates") {
  CHECK_THROWS(Interval::make(1.0, 0.0));
  Interval e = Interval::empty();
  CHECK(e.is_empty());
  CHECK(Interval::checked(1.0, 0.0).is_empty());
  CHECK_FALSE(Interval::checked(0.0, 1.0).is_empty());
  CHECK_FALSE(Interval::make(2.0, 2.0).is_empty());  // degenerate point is not empty

  CHECK(width(e) == 0.0);
  CHECK(width(Interval::make(-1.0, 3.0)) == 4.0);
  CHECK_THROWS(midpoint(e));
  CHECK(midpoint(Interval::make(-1.0, 3.0)) == 1.0);
  CHECK(contains(Interval::make(0.0, 1.0), 0.0));
  CHECK(contains(Interval::make(0.0, 1.0), 1.0));
  CHECK_FALSE(contains(Interval::make(0.0, 1.0), 1.5));
  CHECK_FALSE(contains(e, 0.0));
}

TEST_CASE("affine follows the sign-flip rule") {
  Interval iv = Interval::make(1.0, 2.0);
  Interval neg = affine(iv, -1.0, 0.0);
  CHECK(neg.lo == -2.0);
  CHECK(neg.hi == -1.0);
  Interval shifted = affine(iv, 1.0, 3.0);
  CHECK(shifted.lo == 4.0);
  CHECK(shifted.hi == 5.0);
  CHECK(affine(Interval::empty(), -2.0, 7.0).is_empty());
  // scale 0 collapses to the offset point
  Interval pt = affine(iv, 0.0, 3.0);
  CHECK(pt.lo == 3.0);
  CHECK(pt.hi == 3.0);
}

TEST_CASE("intersect") {
  Interval a = Interval::make(0.0, 2.0), b = Interval::make(1.0, 3.0);
  Interval ab = intersect(a, b);
  CHECK(ab.lo == 1.0);
  CHECK(ab.hi == 2.0);
  CHECK(intersect(a, Interval::make(3.0, 4.0)).is_empty());
  CHECK(intersect(a, Interval::empty()).is_empty());
  // touching endpoints give a point, not empty
  Interval touch = intersect(Interval::make(0.0, 1.0), Interval::make(1.0, 2.0));
  CHECK_FALSE(touch.is_empty());
  CHECK(touch.lo == 1.0);
  CHECK(touch.hi == 1.0);
}

TEST_CASE("intersect_all is permutation-invariant bitwise") {
  std::mt19937_64 g(42);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Interval> ivs;
    for (int i = 0; i < 8; ++i) {
      double x = u(g), y = u(g);
      ivs.push_back(Interval::make(std::min(x, y), std::max(x, y)));
    }
    Interval base = intersect_all(ivs);
    for (int s = 0; s < 10; ++s) {
      std::shuffle(ivs.begin(), ivs.end(), g);
      Interval perm = intersect_all(ivs);
      if (base.is_empty()) {
        CHECK(perm.is_empty());
      } else {
        CHECK(perm.lo == base.lo);
        CHECK(perm.hi == base.hi);
      }
    }
  }
  CHECK_THROWS(intersect_all({}));
}

TEST_CASE("clock interval from the trivial bound") {
  const double r = 0.25;
  Interval t1 = clock_interval(r, r);  // asym equal to the RTT
  CHECK(t1.lo == 0.0);
  CHECK(t1.hi == r);
  Interval t2 = clock_interval(r, -r);
  CHECK(t2.lo == -r);
  CHECK(t2.hi == 0.0);
  Interval t0 = clock_interval(r, 0.0);
  CHECK(t0.lo == -0.5 * r);
  CHECK(t0.hi == 0.5 * r);
}

TEST_CASE("clock interval from a reading matches the hand formula") {
  // reading value at true time zero is (a_true - a_param)/2 + ... here chosen
  // directly; interval = value - (bound - a_param)/2
  ClockReading rd{0.375, 0.125, Interval::make(-0.25, 0.5)};
  Interval t = clock_interval(rd);
  CHECK(t.lo == 0.375 - (0.5 - 0.125) / 2.0);
  CHECK(t.hi == 0.375 - (-0.25 - 0.125) / 2.0);
  // true time lies inside whenever the bound holds: a_true = 0.5 gives
  // value=(0.5-0.125)/2 at t*=0
  ClockReading rd2{(0.5 - 0.125) / 2.0, 0.125, Interval::make(-0.25, 0.5)};
  CHECK(contains(clock_interval(rd2), 0.0));
}

TEST_CASE("two-clock single-point reconciliation recovers asymmetry exactly") {
  // equal RTTs r, true asymmetries +r and -r, both clocks parameterized a=0
  const double r = 0.125;
  ClockReading c1{r / 2.0, 0.0, Interval::make(-r, r)};
  ClockReading c2{-r / 2.0, 0.0, Interval::make(-r, r)};
  Interval t1 = clock_interval(c1), t2 = clock_interval(c2);
  CHECK(t1.lo == 0.0);
  CHECK(t1.hi == r);
  CHECK(t2.lo == -r);
  CHECK(t2.hi == 0.0);
  Interval rec = intersect_all({t1, t2});
  CHECK(rec.lo == 0.0);
  CHECK(rec.hi == 0.0);
  Interval a1 = update_asym_bound(c1, rec);
  Interval a2 = update_asym_bound(c2, rec);
  CHECK(a1.lo == r);
  CHECK(a1.hi == r);
  CHECK(a2.lo == -r);
  CHECK(a2.hi == -r);
}

TEST_CASE("known asymmetry to one server transfers exactly to another") {
  // clock 1 knows its asymmetry exactly (point bound), clock 2 starts from
  // the trivial bound; reconciliation pins true time and recovers asym 2
  const double r1 = 0.5, a1 = 0.1875;
  const double r2 = 1.0, a2 = -0.4375;
  ClockReading c1{a1 / 2.0, 0.0, Interval::make(a1, a1)};
  ClockReading c2{a2 / 2.0, 0.0, Interval::make(-r2, r2)};
  CHECK(width(clock_interval(c1)) == 0.0);
  Interval rec = intersect_all({clock_interval(c1), clock_interval(c2)});
  CHECK(rec.lo == 0.0);
  CHECK(rec.hi == 0.0);
  Interval upd = update_asym_bound(c2, rec);
  CHECK(upd.lo == a2);
  CHECK(upd.hi == a2);
  (void)r1;
}

TEST_CASE("update width identity: twice the reconciled width") {
  SUBCASE("dyadic values, bitwise") {
    for (int i = -16; i <= 16; ++i) {
      for (int j = i; j <= 16; ++j) {
        Interval rec{i / 8.0, j / 8.0};
        ClockReading rd{3.0 / 4.0, 1.0 / 8.0, Interval::make(-2.0, 2.0)};
        Interval upd = update_asym_bound(rd, rec);
        CHECK(width(upd) == 2.0 * width(rec));
      }
    }
  }
  SUBCASE("random values, exact within an ulp scale") {
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
      double lo = u(g), hi = lo + std::abs(u(g));
      ClockReading rd{u(g), u(g), Interval::make(-4.0, 4.0)};
      Interval upd = update_asym_bound(rd, Interval{lo, hi});
      CHECK(width(upd) == doctest::Approx(2.0 * (hi - lo)).epsilon(1e-12));
    }
  }
}

TEST_CASE("reconciled interval nests inside every input") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<Interval> ivs;
    for (int i = 0; i < 5; ++i) {
      double x = u(g);
      ivs.push_back(Interval::make(x, x + 8.0));  // spans the draw range: overlap guaranteed
    }
    Interval rec = intersect_all(ivs);
    REQUIRE_FALSE(rec.is_empty());
    for (const Interval& iv : ivs) {
      CHECK(rec.lo >= iv.lo);
      CHECK(rec.hi <= iv.hi);
    }
  }
}
