#include "asymclock/bound_est.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace asymclock::boundest {

namespace {

constexpr double kRadPerDeg = 3.14159265358979323846 / 180.0;

struct Vec3 {
  double x, y, z;
};

Vec3 to_vec(const GeoPoint& p) {
  double lat = p.lat_deg * kRadPerDeg, lon = p.lon_deg * kRadPerDeg;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

GeoPoint to_point(const Vec3& v) {
  return {std::atan2(v.z, std::hypot(v.x, v.y)) / kRadPerDeg, std::atan2(v.y, v.x) / kRadPerDeg};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 scaled(const Vec3& v, double s) { return {v.x * s, v.y * s, v.z * s}; }

Vec3 unit(const Vec3& v) {
  double n = norm(v);
  if (n < 1e-12) throw std::invalid_argument("degenerate route geometry");
  return scaled(v, 1.0 / n);
}

Vec3 slerp(const Vec3& a, const Vec3& b, double f) {
  double omega = std::atan2(norm(cross(a, b)), dot(a, b));
  if (omega < 1e-15) return a;
  double s = std::sin(omega);
  Vec3 v = {0, 0, 0};
  v.x = (std::sin((1.0 - f) * omega) * a.x + std::sin(f * omega) * b.x) / s;
  v.y = (std::sin((1.0 - f) * omega) * a.y + std::sin(f * omega) * b.y) / s;
  v.z = (std::sin((1.0 - f) * omega) * a.z + std::sin(f * omega) * b.z) / s;
  return unit(v);
}

double quantile_sorted(const std::vector<double>& v, double q) {
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  double f = pos - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

double turn(double ox, double oy, double ax, double ay, double bx, double by) {
  return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

}  // namespace

OffsetBound exchange_bound(const TimestampExchange& ex, double lb_up_s, double lb_down_s) {
  return {ex.t_a_client - ex.t_s_server + lb_up_s, ex.t_f_client - ex.t_s_server - lb_down_s};
}

OffsetBound fold(const std::vector<OffsetBound>& bounds) {
  OffsetBound out;
  for (const auto& b : bounds) {
    out.lo = std::max(out.lo, b.lo);
    out.hi = std::min(out.hi, b.hi);
  }
  return out;
}

double LandmarkMap::query(double distance_km) const {
  double sol = geo::sol_delay_s(distance_km);
  if (distance_km < gate_lo_km || distance_km > gate_hi_km) return sol;
  double m;
  if (xs.size() == 1 || distance_km <= xs.front()) {
    m = ys.front();
  } else if (distance_km >= xs.back()) {
    m = ys.back();
  } else {
    std::size_t i = std::upper_bound(xs.begin(), xs.end(), distance_km) - xs.begin() - 1;
    double f = (distance_km - xs[i]) / (xs[i + 1] - xs[i]);
    m = ys[i] + f * (ys[i + 1] - ys[i]);
  }
  return std::max(m, sol);
}

LandmarkMap build_landmark_map(const std::vector<std::pair<double, double>>& samples) {
  if (samples.empty()) throw std::invalid_argument("no landmark samples");
  std::vector<std::pair<double, double>> pts(samples);
  std::vector<double> dists(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) dists[i] = samples[i].first;
  std::sort(dists.begin(), dists.end());
  std::sort(pts.begin(), pts.end());
  LandmarkMap map;
  map.gate_lo_km = quantile_sorted(dists, 0.2);
  map.gate_hi_km = quantile_sorted(dists, 0.8);
  // lower convex hull, monotone chain; equal-x points keep only the lowest
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    if (!hull.empty() && hull.back().first == p.first) continue;
    while (hull.size() >= 2 &&
           turn(hull[hull.size() - 2].first, hull[hull.size() - 2].second, hull.back().first,
                hull.back().second, p.first, p.second) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  for (const auto& [x, y] : hull) {
    map.xs.push_back(x);
    map.ys.push_back(y);
  }
  return map;
}

LbbeResult lbbe_reconcile(const std::vector<OffsetBound>& landmark_bounds,
                          const std::vector<OffsetBound>& sol_bounds) {
  std::size_t n = landmark_bounds.size();
  if (n == 0 || sol_bounds.size() != n)
    throw std::invalid_argument("bound lists must be same nonempty size");
  std::vector<OffsetBound> cur(landmark_bounds);
  std::vector<char> relaxed(n, 0);
  LbbeResult res;
  for (std::size_t i = 0; i < n; ++i) {
    if (cur[i].inconsistent()) {
      cur[i] = sol_bounds[i];
      relaxed[i] = 1;
      ++res.relaxed;
    }
  }
  for (;;) {
    OffsetBound f = fold(cur);
    if (!f.inconsistent()) {
      res.combined = f;
      return res;
    }
    std::size_t i_lo = 0, i_hi = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (cur[i].lo > cur[i_lo].lo) i_lo = i;
      if (cur[i].hi < cur[i_hi].hi) i_hi = i;
    }
    std::size_t pick = n;
    if (!relaxed[i_lo] && !relaxed[i_hi]) {
      pick = std::min(i_lo, i_hi);
    } else if (!relaxed[i_lo]) {
      pick = i_lo;
    } else if (!relaxed[i_hi]) {
      pick = i_hi;
    }
    if (pick == n) {
      double m = f.estimate();
      res.combined = {m, m};
      res.fallback = true;
      return res;
    }
    cur[pick] = sol_bounds[pick];
    relaxed[pick] = 1;
    ++res.relaxed;
  }
}

double route_delay_s(const GeoPoint& a, const std::vector<GeoPoint>& nodes, const GeoPoint& b) {
  double total = 0.0;
  const GeoPoint* prev = &a;
  for (const auto& node : nodes) {
    total += geo::sol_delay_s(geo::great_circle_km(*prev, node));
    prev = &node;
  }
  total += geo::sol_delay_s(geo::great_circle_km(*prev, b));
  return total;
}

Route gen_route(const GeoPoint& client, const GeoPoint& server, const PathParams& path,
                std::size_t n_nodes, Rng& rng) {
  if (n_nodes == 0) throw std::invalid_argument("route needs at least one node");
  if (!(path.d_up_min > 0.0) || !(path.d_down_min > 0.0))
    throw std::invalid_argument("nonpositive path minima");
  double dist = geo::great_circle_km(client, server);
  if (!(dist > 0.0)) throw std::invalid_argument("coincident route endpoints");
  Vec3 uc = to_vec(client), us = to_vec(server);
  Vec3 axis = unit(cross(uc, us));

  std::size_t n = n_nodes;
  std::vector<double> weight(n);
  double sum = 0.0;
  for (auto& w : weight) {
    w = uniform(rng, 0.0, 1.0);
    sum += w;
  }
  if (!(sum > 0.0)) throw std::runtime_error("degenerate displacement weights");
  for (auto& w : weight) w /= sum;
  std::vector<double> side(n);
  for (auto& s : side) s = uniform_index(rng, 2) ? 1.0 : -1.0;

  Route route;
  route.known_order.resize(n);
  for (std::size_t i = 0; i < n; ++i) route.known_order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(route.known_order[i - 1], route.known_order[j]);
  }

  std::vector<Vec3> base(n);
  for (std::size_t i = 0; i < n; ++i)
    base[i] = slerp(uc, us, static_cast<double>(i + 1) / static_cast<double>(n + 1));

  auto materialize = [&](double p) {
    std::vector<GeoPoint> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
      double ang = p * weight[i] * dist / geo::kEarthRadiusKm;
      Vec3 v = {0, 0, 0};
      double c = std::cos(ang), s = side[i] * std::sin(ang);
      v.x = c * base[i].x + s * axis.x;
      v.y = c * base[i].y + s * axis.y;
      v.z = c * base[i].z + s * axis.z;
      nodes[i] = to_point(unit(v));
    }
    return nodes;
  };

  // Largest p whose materialized hop-sum delay stays at or below target,
  // found by bracket doubling plus bisection on the exact objective.
  auto solve = [&](double target_s, std::vector<GeoPoint>& out) {
    std::vector<GeoPoint> lo_nodes = materialize(0.0);
    double lo = 0.0, d_lo = route_delay_s(client, lo_nodes, server);
    if (d_lo >= target_s) {
      out = std::move(lo_nodes);
      return lo;
    }
    double hi = 1.0;
    std::vector<GeoPoint> hi_nodes = materialize(hi);
    double d_hi = route_delay_s(client, hi_nodes, server);
    int guard = 0;
    while (d_hi < target_s) {
      lo = hi;
      d_lo = d_hi;
      lo_nodes = std::move(hi_nodes);
      hi *= 2.0;
      hi_nodes = materialize(hi);
      d_hi = route_delay_s(client, hi_nodes, server);
      if (++guard > 60) throw std::runtime_error("route displacement bracket failed");
    }
    for (int it = 0; it < 200 && d_hi - d_lo > 0.25e-9 && hi - lo > 1e-15 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      std::vector<GeoPoint> mid_nodes = materialize(mid);
      double d_mid = route_delay_s(client, mid_nodes, server);
      if (d_mid <= target_s) {
        lo = mid;
        d_lo = d_mid;
        lo_nodes = std::move(mid_nodes);
      } else {
        hi = mid;
        d_hi = d_mid;
      }
    }
    out = std::move(lo_nodes);
    return lo;
  };
  route.p_up = solve(path.d_up_min, route.up_nodes);
  route.p_down = solve(path.d_down_min, route.down_nodes);
  return route;
}

DirBounds ksbbe_bounds(const GeoPoint& client, const GeoPoint& server, const Route& route,
                       std::size_t k_known) {
  std::size_t n = route.up_nodes.size();
  if (route.down_nodes.size() != n || route.known_order.size() != n)
    throw std::invalid_argument("malformed route");
  if (k_known > n) throw std::invalid_argument("known node count exceeds route size");
  std::vector<std::size_t> subset(route.known_order.begin(),
                                  route.known_order.begin() + k_known);
  std::sort(subset.begin(), subset.end());
  std::vector<GeoPoint> up, down;
  up.reserve(k_known);
  down.reserve(k_known);
  for (std::size_t i : subset) {
    up.push_back(route.up_nodes[i]);
    down.push_back(route.down_nodes[i]);
  }
  return {route_delay_s(client, up, server), route_delay_s(client, down, server)};
}

}  // namespace asymclock::boundest
