#include "asymclock/geo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asymclock::geo {

namespace {

constexpr double kPi = 3.14159265358979323846;

double rad(double d) { return d * (kPi / 180.0); }
double deg(double r) { return r * (180.0 / kPi); }

double wrap_lon(double lon) {
  lon = std::fmod(lon + 180.0, 360.0);
  if (lon < 0.0) lon += 360.0;
  return lon - 180.0;
}

struct Vec3 {
  double x, y, z;
};

Vec3 to_vec(const GeoPoint& p) {
  double lat = rad(p.lat_deg), lon = rad(p.lon_deg);
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

GeoPoint to_point(const Vec3& v) {
  double lat = std::atan2(v.z, std::hypot(v.x, v.y));
  double lon = std::atan2(v.y, v.x);
  return {deg(lat), wrap_lon(deg(lon))};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

void validate_region(const Region& r) {
  if (!(r.lat_lo < r.lat_hi) || !(r.lon_lo < r.lon_hi)) {
    throw std::invalid_argument("region bounds inverted");
  }
  if (r.lat_lo < -90.0 || r.lat_hi > 90.0 || r.lon_lo < -180.0 || r.lon_hi > 180.0) {
    throw std::invalid_argument("region outside valid coordinates");
  }
}

}  // namespace

GeoPoint make_point(double lat_deg, double lon_deg) {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) {
    throw std::invalid_argument("latitude out of [-90, 90]");
  }
  return {lat_deg, wrap_lon(lon_deg)};
}

double great_circle_km(const GeoPoint& a, const GeoPoint& b) {
  double lat1 = rad(a.lat_deg), lat2 = rad(b.lat_deg);
  double dlat = lat2 - lat1;
  double dlon = rad(b.lon_deg) - rad(a.lon_deg);
  double s1 = std::sin(dlat * 0.5), s2 = std::sin(dlon * 0.5);
  double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  // clamp keeps near-antipodal arguments inside asin's domain
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double sol_delay_s(double distance_km) {
  if (distance_km < 0.0) throw std::invalid_argument("negative distance");
  return distance_km / kFibreKmPerSec;
}

double sol_delay_s(const GeoPoint& a, const GeoPoint& b) {
  return sol_delay_s(great_circle_km(a, b));
}

double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b) {
  double lat1 = rad(a.lat_deg), lat2 = rad(b.lat_deg);
  double dlon = rad(b.lon_deg) - rad(a.lon_deg);
  double y = std::sin(dlon) * std::cos(lat2);
  double x = std::cos(lat1) * std::sin(lat2) - std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
  double brg = deg(std::atan2(y, x));
  if (brg < 0.0) brg += 360.0;
  if (brg >= 360.0) brg -= 360.0;
  return brg;
}

GeoPoint displace(const GeoPoint& p, double bearing_deg, double distance_km) {
  if (distance_km < 0.0) throw std::invalid_argument("negative distance");
  if (distance_km == 0.0) return p;
  double delta = distance_km / kEarthRadiusKm;
  double theta = rad(bearing_deg);
  double lat1 = rad(p.lat_deg), lon1 = rad(p.lon_deg);
  double sin_lat2 = std::sin(lat1) * std::cos(delta) + std::cos(lat1) * std::sin(delta) * std::cos(theta);
  sin_lat2 = std::clamp(sin_lat2, -1.0, 1.0);
  double lat2 = std::asin(sin_lat2);
  double lon2 = lon1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(lat1),
                                  std::cos(delta) - std::sin(lat1) * sin_lat2);
  return {deg(lat2), wrap_lon(deg(lon2))};
}

GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("fraction outside [0, 1]");
  if (f == 0.0) return a;
  if (f == 1.0) return b;
  Vec3 va = to_vec(a), vb = to_vec(b);
  double omega = std::atan2(norm(cross(va, vb)), dot(va, vb));
  if (omega < 1e-15) return a;
  double s = std::sin(omega);
  double ca = std::sin((1.0 - f) * omega) / s;
  double cb = std::sin(f * omega) / s;
  Vec3 v{ca * va.x + cb * vb.x, ca * va.y + cb * vb.y, ca * va.z + cb * vb.z};
  double n = norm(v);
  return to_point({v.x / n, v.y / n, v.z / n});
}

GeoPoint sample_region(const Region& r, Rng& rng) {
  validate_region(r);
  double lat = uniform(rng, r.lat_lo, r.lat_hi);
  double lon = uniform(rng, r.lon_lo, r.lon_hi);
  return {lat, lon};
}

}  // namespace asymclock::geo
