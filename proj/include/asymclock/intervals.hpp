#pragma once

#include <vector>

namespace asymclock::intervals {

// Closed interval [lo, hi]. Empty is a first-class value distinct from any
// degenerate [x, x]; it is canonically lo = +inf, hi = -inf.
struct Interval {
  double lo, hi;

  static Interval empty();
  // Throws when lo > hi.
  static Interval make(double lo, double hi);
  // Empty when lo > hi.
  static Interval checked(double lo, double hi);

  bool is_empty() const { return lo > hi; }
};

double width(const Interval& iv);     // 0 for Empty
double midpoint(const Interval& iv);  // throws on Empty
bool contains(const Interval& iv, double x);
// scale * iv + offset; Empty maps to Empty.
Interval affine(const Interval& iv, double scale, double offset);
Interval intersect(const Interval& a, const Interval& b);
// Throws on an empty list; Empty inputs propagate.
Interval intersect_all(const std::vector<Interval>& ivs);

// A clock reading at true time zero. The clock runs at the true rate but was
// set assuming path asymmetry a_param, so its offset is (a_true - a_param)/2;
// asym_interval is the current bound on a_true.
struct ClockReading {
  double value;
  double a_param;
  Interval asym_interval;
};

// True-time interval implied by one reading; contains true time whenever
// asym_interval contains the true asymmetry.
Interval clock_interval(const ClockReading& r);
// Reading of a clock set with a_param = 0 under the trivial bound
// [-r_min, r_min]: equals [asym/2 - r_min/2, asym/2 + r_min/2].
Interval clock_interval(double r_min, double asym);
// Tightened asymmetry bound implied by a reconciled true-time interval;
// result width is exactly twice the reconciled width.
Interval update_asym_bound(const ClockReading& r, const Interval& reconciled);

}  // namespace asymclock::intervals
