#pragma once

#include "asymclock/asym_model.hpp"
#include "asymclock/geo.hpp"
#include "asymclock/rng.hpp"

namespace asymclock::pathsim {

// Ground truth of one directed network path. Invariants (exact, by
// construction): r_min = d_up_min + d_down_min, asym = d_up_min - d_down_min,
// d_up_min >= d_sol, d_down_min >= d_sol.
struct PathParams {
  double r_min = 0.0;
  double asym = 0.0;
  double d_up_min = 0.0;
  double d_down_min = 0.0;
  double d_sol = 0.0;      // one-way propagation lower bound
  double inflation = 1.0;  // F = r_min / (2 d_sol)
  double t_rel = 0.0;      // T = asym / r_min
  double z = 0.0;          // |T| / t_limit where t_limit = 1 - 1/F
};

struct AsymmetrySpec {
  enum class Mode { kModel, kZInterval };
  Mode mode = Mode::kModel;
  asymmodel::MixtureModel model{};
  // z_interval mode: Z ~ U[z_lo, z_hi] with a uniform random sign
  double z_lo = 0.0, z_hi = 0.0;
};

struct PathSpec {
  AsymmetrySpec asym{};
  double f_lo = 1.2, f_hi = 1.8;
  double distance_scale = 1.0;
};

PathParams gen_path(const geo::GeoPoint& client, const geo::GeoPoint& server,
                    const PathSpec& spec, Rng& rng);

// Same path seen from the other endpoint: directions swap, asymmetry negates.
PathParams reverse(const PathParams& path);

struct ClockModel {
  double true_offset = 0.0;  // E: client reads true time plus this
};

struct ServerModel {
  geo::GeoPoint location{};
  double internal_delay = 0.0;
};

// One request/reply exchange sent at true time zero. The server clock is
// exact; congestion adds iid exponential delay per direction.
struct TimestampExchange {
  double t_a_client;  // client clock at send
  double t_s_server;  // server clock at receive
  double t_f_client;  // client clock at reply arrival
};

TimestampExchange exchange(const ClockModel& clock, const PathParams& path,
                           double congestion_mean, Rng& rng, double server_internal = 0.0);

}  // namespace asymclock::pathsim
