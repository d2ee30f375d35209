#pragma once

#include "asymclock/rng.hpp"

namespace asymclock::geo {

inline constexpr double kEarthRadiusKm = 6371.0;
// Propagation speed in fibre, two thirds of c.
inline constexpr double kFibreKmPerSec = 199861.63866666667;

struct GeoPoint {
  double lat_deg = 0.0;  // [-90, 90]
  double lon_deg = 0.0;  // [-180, 180)
};

// Validates latitude, wraps longitude into [-180, 180).
GeoPoint make_point(double lat_deg, double lon_deg);

struct Region {
  double lat_lo = 0.0, lat_hi = 0.0;
  double lon_lo = 0.0, lon_hi = 0.0;
};

inline constexpr Region kMainlandUs{25.0, 49.0, -124.0, -67.0};

double great_circle_km(const GeoPoint& a, const GeoPoint& b);

double sol_delay_s(double distance_km);
double sol_delay_s(const GeoPoint& a, const GeoPoint& b);

// Forward azimuth a -> b, degrees in [0, 360).
double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b);

GeoPoint displace(const GeoPoint& p, double bearing_deg, double distance_km);

// Point at fraction f in [0, 1] of the great-circle arc a -> b.
GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double f);

// Coordinate-uniform: lat and lon each uniform over the box.
GeoPoint sample_region(const Region& r, Rng& rng);

}  // namespace asymclock::geo
