#include "asymclock/path_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace asymclock::pathsim {

PathParams gen_path(const geo::GeoPoint& client, const geo::GeoPoint& server,
                    const PathSpec& spec, Rng& rng) {
  if (!(spec.f_lo >= 1.0) || !(spec.f_hi >= spec.f_lo)) {
    throw std::invalid_argument("inflation range must satisfy 1 <= f_lo <= f_hi");
  }
  if (!(spec.distance_scale > 0.0)) throw std::invalid_argument("distance_scale must be positive");
  double dist_km = spec.distance_scale * geo::great_circle_km(client, server);
  if (dist_km == 0.0) throw std::invalid_argument("coincident endpoints");
  double d_sol = geo::sol_delay_s(dist_km);

  double f = uniform(rng, spec.f_lo, spec.f_hi);
  double excess = f * 2.0 * d_sol - 2.0 * d_sol;  // r_min - 2 d_sol, >= 0
  double t_limit = 1.0 - 1.0 / f;

  // s in [-1, 1] is the asymmetry position inside the feasible band, so the
  // realized relative asymmetry is s * t_limit
  double s;
  if (spec.asym.mode == AsymmetrySpec::Mode::kModel) {
    double t = asymmodel::sample_t_limited(spec.asym.model, t_limit, rng);
    s = t_limit > 0.0 ? t / t_limit : 0.0;
  } else {
    const auto& a = spec.asym;
    if (!(a.z_lo >= 0.0 && a.z_hi <= 1.0 && a.z_lo <= a.z_hi)) {
      throw std::invalid_argument("z interval must satisfy 0 <= z_lo <= z_hi <= 1");
    }
    double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    s = sign * uniform(rng, a.z_lo, a.z_hi);
  }

  PathParams p;
  p.d_sol = d_sol;
  // nonnegative products keep both directed minima >= d_sol exactly
  p.d_up_min = d_sol + 0.5 * excess * (1.0 + s);
  p.d_down_min = d_sol + 0.5 * excess * (1.0 - s);
  p.r_min = p.d_up_min + p.d_down_min;
  p.asym = p.d_up_min - p.d_down_min;
  p.inflation = f;
  p.t_rel = p.r_min > 0.0 ? p.asym / p.r_min : 0.0;
  p.z = t_limit > 0.0 ? std::abs(s) : 0.0;
  return p;
}

PathParams reverse(const PathParams& path) {
  PathParams r = path;
  r.d_up_min = path.d_down_min;
  r.d_down_min = path.d_up_min;
  r.asym = -path.asym;
  r.t_rel = -path.t_rel;
  return r;
}

TimestampExchange exchange(const ClockModel& clock, const PathParams& path,
                           double congestion_mean, Rng& rng, double server_internal) {
  if (congestion_mean < 0.0) throw std::invalid_argument("negative congestion mean");
  if (server_internal < 0.0) throw std::invalid_argument("negative server internal delay");
  double q_up = exponential(rng, congestion_mean);
  double q_down = exponential(rng, congestion_mean);
  double t_arrive = path.d_up_min + q_up;
  double t_back = t_arrive + server_internal + path.d_down_min + q_down;
  return {clock.true_offset, t_arrive, t_back + clock.true_offset};
}

}  // namespace asymclock::pathsim
