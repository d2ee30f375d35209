#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "asymclock/geo.hpp"
#include "asymclock/intervals.hpp"
#include "asymclock/path_sim.hpp"
#include "asymclock/rng.hpp"

namespace asymclock::boundest {

using geo::GeoPoint;
using pathsim::PathParams;
using pathsim::TimestampExchange;

// Raw offset constraint fold; hi < lo marks an inconsistent bound.
struct OffsetBound {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool inconsistent() const { return hi < lo; }
  double estimate() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  intervals::Interval as_interval() const { return intervals::Interval::checked(lo, hi); }
};

// Offset bound from one exchange given per-direction delay lower bounds:
// [t_a - t_s + lb_up, t_f - t_s - lb_down].
OffsetBound exchange_bound(const TimestampExchange& ex, double lb_up_s, double lb_down_s);

// Pointwise max-lo / min-hi across bounds; unconstrained when empty.
OffsetBound fold(const std::vector<OffsetBound>& bounds);

// Piecewise-linear lower convex hull of (distance, min OWD) landmark pairs.
// Queries inside the distance gate return max(hull, SoL); outside, SoL alone.
struct LandmarkMap {
  std::vector<double> xs, ys;
  double gate_lo_km = 0.0;
  double gate_hi_km = 0.0;
  double query(double distance_km) const;
};

// samples are (distance_km, min_owd_s) pairs for one landmark in one fixed
// direction; one map per landmark per direction.
LandmarkMap build_landmark_map(const std::vector<std::pair<double, double>>& samples);

struct LbbeResult {
  OffsetBound combined;
  std::size_t relaxed = 0;
  bool fallback = false;
};

// Fold per-landmark bounds, relaxing the binding landmark to its SoL bound
// until the fold is consistent. Bounds already inconsistent on their own are
// relaxed up front. If every binding landmark is relaxed and the fold is still
// empty, collapse to the midpoint as a point bound.
LbbeResult lbbe_reconcile(const std::vector<OffsetBound>& landmark_bounds,
                          const std::vector<OffsetBound>& sol_bounds);

// Asymmetric route pair between two endpoints: n intermediate nodes per
// direction, displaced off the great circle so each direction's hop-sum delay
// through all nodes matches that direction's minimum delay from below.
struct Route {
  std::vector<GeoPoint> up_nodes;
  std::vector<GeoPoint> down_nodes;
  std::vector<std::size_t> known_order;
  double p_up = 0.0;
  double p_down = 0.0;
};

Route gen_route(const GeoPoint& client, const GeoPoint& server, const PathParams& path,
                std::size_t n_nodes, Rng& rng);

// Hop-sum delay a -> nodes... -> b, accumulated left to right.
double route_delay_s(const GeoPoint& a, const std::vector<GeoPoint>& nodes, const GeoPoint& b);

struct DirBounds {
  double up_s;
  double down_s;
};

// Per-direction delay lower bounds through the first k revealed nodes.
// k = 0 degrades to the direct SoL bound; k = n recovers the route delay.
DirBounds ksbbe_bounds(const GeoPoint& client, const GeoPoint& server, const Route& route,
                       std::size_t k_known);

}  // namespace asymclock::boundest
