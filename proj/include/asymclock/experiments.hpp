#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "asymclock/asym_model.hpp"
#include "asymclock/bound_est.hpp"
#include "asymclock/geo.hpp"
#include "asymclock/path_sim.hpp"
#include "asymclock/run_config.hpp"

namespace asymclock::experiments {

// Substream ids hashed under the per-placement seed (placement itself under
// the master seed). Every random quantity is keyed by the indexes noted, so
// work items can run in any order on any worker count with identical output.
inline constexpr std::uint64_t kStreamPlacement = 0;   // {0, placement} under cfg.seed
inline constexpr std::uint64_t kStreamServers = 1;
inline constexpr std::uint64_t kStreamClients = 2;
inline constexpr std::uint64_t kStreamOffsets = 3;
inline constexpr std::uint64_t kStreamPaths = 4;       // {4, client, server}
inline constexpr std::uint64_t kStreamSsPaths = 5;     // {5, i, j}, i < j
inline constexpr std::uint64_t kStreamSelection = 6;   // {6, client}
inline constexpr std::uint64_t kStreamGeoloc = 7;      // {7, client}
inline constexpr std::uint64_t kStreamCongestion = 8;  // {8, replication, client}
inline constexpr std::uint64_t kStreamRoutes = 9;      // {9, client, server}
inline constexpr std::uint64_t kStreamJitter = 10;     // {10, replication} under the master seed

struct ClientRecord {
  double e_true = 0.0;
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool inconsistent = false;  // e_true outside [lo, hi]
  bool relaxed = false;       // lbbe: at least one landmark bound was relaxed
};

struct Metrics {
  double rmse = 0.0;
  double mean_bound_width = 0.0;
  double mean_abs_error = 0.0;
  double inconsistent_fraction = 0.0;
  double mean_inconsistent_edge_distance = 0.0;
  std::vector<ClientRecord> records;
};

Metrics compute_metrics(std::vector<ClientRecord> records);

// One placement's frozen world: geometry, clocks, true paths, and whatever
// estimator inputs the configured method needs (landmark maps, routes).
struct Scenario {
  std::uint64_t pseed = 0;
  std::vector<geo::GeoPoint> servers;
  std::vector<geo::GeoPoint> clients;
  std::vector<geo::GeoPoint> believed;  // client positions as the estimator sees them
  std::vector<double> offsets;
  std::vector<std::vector<pathsim::PathParams>> paths;  // [client][server]
  std::vector<std::vector<std::size_t>> order;          // [client] server visit order
  std::vector<boundest::LandmarkMap> inbound;           // [server] peer->landmark min-OWD map
  std::vector<boundest::LandmarkMap> outbound;          // [server] landmark->peer min-OWD map
  std::vector<std::vector<boundest::Route>> routes;     // [client][visit slot], first n_servers_used
};

Scenario build_scenario(const RunConfig& cfg, std::size_t placement);

// All replications of one placement; records laid out client-major.
std::vector<ClientRecord> run_placement(const RunConfig& cfg, std::size_t placement);

std::vector<Metrics> run_placements(const RunConfig& cfg);  // [placement]
Metrics run_scenario(const RunConfig& cfg);                 // pooled over placements

// Grid runs share one draw sequence per client and fold nested prefixes, so
// along each grid the bound width is non-increasing exactly, not just in
// expectation. Grids must be strictly increasing. Records are dropped.
std::vector<std::vector<Metrics>> run_m_grid(const RunConfig& cfg,
                                             const std::vector<std::size_t>& m_grid);
std::vector<std::vector<Metrics>> run_server_grid(const RunConfig& cfg,
                                                  const std::vector<std::size_t>& n_grid);
std::vector<std::vector<Metrics>> run_ksbbe_grid(const RunConfig& cfg,
                                                 const std::vector<std::size_t>& k_grid);

// Server pool for the jitter/tightening experiments: either model-generated
// (r uniform in the annulus [0.8 r*, 1.2 r*], a = r·T) or rows of measured
// (r_hat, a_hat) estimates filtered to the annulus.
struct PoolSource {
  bool model_mode = true;
  asymmodel::MixtureModel model{};
  std::vector<std::pair<double, double>> data;  // (r_hat seconds, a_hat seconds)
};

struct JitterResult {
  double r_star = 0.0;
  std::size_t n_s = 0;
  double mean_error_range = 0.0;  // mean of (max a - min a)/2 over replications
  double stderr_ = 0.0;
  bool flagged = false;  // data mode: annulus pool smaller than n_s
};

struct TightenResult {
  double r_star = 0.0;
  std::size_t n_s = 0;
  double mean_rho = 0.0;  // reconciled width over loosest initial width
  double stderr_ = 0.0;
  bool flagged = false;
};

// n_s_list must be strictly increasing; draws are nested prefixes, so the
// jitter range is non-decreasing and rho non-increasing along the list,
// replication by replication. Model mode draws are scale-free: rho is
// bit-identical across r_star and the jitter range exactly proportional.
std::vector<JitterResult> jitter_experiment(const PoolSource& src, double r_star,
                                            const std::vector<std::size_t>& n_s_list,
                                            std::size_t replications, std::uint64_t seed);
std::vector<TightenResult> tighten_experiment(const PoolSource& src, double r_star,
                                              const std::vector<std::size_t>& n_s_list,
                                              std::size_t replications, std::uint64_t seed);

struct SweepRow {
  std::string x_name;
  double x = 0.0;
  std::string series;
  std::string method;
  std::string metric;
  double value = 0.0;
  double stderr_ = 0.0;
};

std::vector<std::string> preset_names();

// Runs one named preset on top of the base config (seed, scale knobs, and
// workers are taken from base; swept keys are overridden per cell). Values
// are means of the per-placement metric; stderr_ the standard error across
// placements (across replications for jitter/tighten). `full` switches
// jitter/tighten replications from 10^4 to 10^5.
std::vector<SweepRow> sweep(const std::string& preset, const RunConfig& base, bool full);

}  // namespace asymclock::experiments
