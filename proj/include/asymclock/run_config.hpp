#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace asymclock {

// Usage/config errors exit with code 2; other runtime failures with 1.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t n_servers = 50;
  std::size_t n_clients = 250;
  double region_lat_lo = 25.0;
  double region_lat_hi = 49.0;
  double region_lon_lo = -124.0;
  double region_lon_hi = -67.0;
  double f_lo = 1.2;
  double f_hi = 1.8;
  double offset_bound_ms = 10.0;
  double congestion_mean_ms = 1.0;
  std::string asym_mode = "model";  // model | z_interval
  double z_lo = 0.0;
  double z_hi = 0.0;
  double model_w = 0.00136;
  double model_b = 0.0450;
  double model_p = 0.274;
  double distance_scale = 1.0;
  std::string method = "sbbe";       // sbbe | lbbe | ksbbe
  std::string selection = "ordered";  // ordered (by r_min) | random
  std::size_t n_servers_used = 20;
  std::size_t m_exchanges = 16;
  std::size_t replications = 5;  // congestion replications; 1 used when mean is 0
  std::size_t placements = 20;   // independent placement repeats
  std::size_t route_nodes = 20;
  std::size_t k_known = 10;
  double geoloc_error_km = 0.0;
  int workers = 0;  // 0 = all hardware threads
};

// Flat `key = value` file; '#' starts a comment. Unknown keys are rejected.
RunConfig load_config_file(const std::string& path);

// Applies one key=value pair; throws ConfigError naming the key on failure.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

void validate(const RunConfig& cfg);

std::map<std::string, std::string> to_map(const RunConfig& cfg);

}  // namespace asymclock
