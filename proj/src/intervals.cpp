#include "asymclock/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace asymclock::intervals {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Interval Interval::empty() { return {kInf, -kInf}; }

Interval Interval::make(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw std::invalid_argument("interval bound is NaN");
  if (lo > hi) throw std::invalid_argument("interval bounds inverted");
  return {lo, hi};
}

Interval Interval::checked(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw std::invalid_argument("interval bound is NaN");
  if (lo > hi) return empty();
  return {lo, hi};
}

double width(const Interval& iv) { return iv.is_empty() ? 0.0 : iv.hi - iv.lo; }

double midpoint(const Interval& iv) {
  if (iv.is_empty()) throw std::invalid_argument("midpoint of empty interval");
  return 0.5 * (iv.lo + iv.hi);
}

bool contains(const Interval& iv, double x) { return !iv.is_empty() && iv.lo <= x && x <= iv.hi; }

Interval affine(const Interval& iv, double scale, double offset) {
  if (iv.is_empty()) return Interval::empty();
  double a = scale * iv.lo + offset;
  double b = scale * iv.hi + offset;
  return scale >= 0.0 ? Interval{a, b} : Interval{b, a};
}

Interval intersect(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return Interval::checked(std::max(a.lo, b.lo), std::min(a.hi, b.hi));
}

Interval intersect_all(const std::vector<Interval>& ivs) {
  if (ivs.empty()) throw std::invalid_argument("intersect_all of no intervals");
  Interval acc = ivs.front();
  for (std::size_t i = 1; i < ivs.size(); ++i) acc = intersect(acc, ivs[i]);
  return acc;
}

Interval clock_interval(const ClockReading& r) {
  if (r.asym_interval.is_empty()) throw std::invalid_argument("empty asymmetry bound");
  // value - (asym_interval - a_param)/2
  return affine(r.asym_interval, -0.5, r.value + 0.5 * r.a_param);
}

Interval clock_interval(double r_min, double asym) {
  if (r_min < 0.0) throw std::invalid_argument("negative r_min");
  if (std::abs(asym) > r_min) throw std::invalid_argument("asymmetry exceeds r_min");
  return {0.5 * asym - 0.5 * r_min, 0.5 * asym + 0.5 * r_min};
}

Interval update_asym_bound(const ClockReading& r, const Interval& reconciled) {
  if (reconciled.is_empty()) throw std::invalid_argument("empty reconciled interval");
  return affine(reconciled, -2.0, 2.0 * r.value + r.a_param);
}

}  // namespace asymclock::intervals
