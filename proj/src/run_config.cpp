#include "asymclock/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <vector>

namespace asymclock {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for key '" + key + "': " + value);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size() || (!value.empty() && value[0] == '-')) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for key '" + key + "': " + value);
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto d = [&] { return parse_double(key, value); };
  const auto u = [&] { return parse_u64(key, value); };
  const auto z = [&] { return static_cast<std::size_t>(parse_u64(key, value)); };

  if (key == "seed") cfg.seed = u();
  else if (key == "n_servers") cfg.n_servers = z();
  else if (key == "n_clients") cfg.n_clients = z();
  else if (key == "region_lat_lo") cfg.region_lat_lo = d();
  else if (key == "region_lat_hi") cfg.region_lat_hi = d();
  else if (key == "region_lon_lo") cfg.region_lon_lo = d();
  else if (key == "region_lon_hi") cfg.region_lon_hi = d();
  else if (key == "f_lo") cfg.f_lo = d();
  else if (key == "f_hi") cfg.f_hi = d();
  else if (key == "offset_bound_ms") cfg.offset_bound_ms = d();
  else if (key == "congestion_mean_ms") cfg.congestion_mean_ms = d();
  else if (key == "asym_mode") cfg.asym_mode = value;
  else if (key == "z_lo") cfg.z_lo = d();
  else if (key == "z_hi") cfg.z_hi = d();
  else if (key == "model_w") cfg.model_w = d();
  else if (key == "model_b") cfg.model_b = d();
  else if (key == "model_p") cfg.model_p = d();
  else if (key == "distance_scale") cfg.distance_scale = d();
  else if (key == "method") cfg.method = value;
  else if (key == "selection") cfg.selection = value;
  else if (key == "n_servers_used") cfg.n_servers_used = z();
  else if (key == "m_exchanges") cfg.m_exchanges = z();
  else if (key == "replications") cfg.replications = z();
  else if (key == "placements") cfg.placements = z();
  else if (key == "route_nodes") cfg.route_nodes = z();
  else if (key == "k_known") cfg.k_known = z();
  else if (key == "geoloc_error_km") cfg.geoloc_error_km = d();
  else if (key == "workers") {
    const double v = d();
    cfg.workers = static_cast<int>(v);
    if (static_cast<double>(cfg.workers) != v) throw ConfigError("invalid integer for key 'workers': " + value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_override(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(cfg.n_servers >= 1, "n_servers must be >= 1");
  require(cfg.n_clients >= 1, "n_clients must be >= 1");
  require(cfg.region_lat_lo >= -90.0 && cfg.region_lat_hi <= 90.0 &&
              cfg.region_lat_lo < cfg.region_lat_hi,
          "region latitude bounds must satisfy -90 <= lo < hi <= 90");
  require(cfg.region_lon_lo >= -180.0 && cfg.region_lon_hi <= 180.0 &&
              cfg.region_lon_lo < cfg.region_lon_hi,
          "region longitude bounds must satisfy -180 <= lo < hi <= 180");
  require(cfg.f_lo >= 1.0 && cfg.f_hi >= cfg.f_lo, "inflation range must satisfy 1 <= f_lo <= f_hi");
  require(cfg.offset_bound_ms >= 0.0, "offset_bound_ms must be >= 0");
  require(cfg.congestion_mean_ms >= 0.0, "congestion_mean_ms must be >= 0");
  require(cfg.asym_mode == "model" || cfg.asym_mode == "z_interval",
          "asym_mode must be 'model' or 'z_interval'");
  require(cfg.z_lo >= 0.0 && cfg.z_hi <= 1.0 && cfg.z_lo <= cfg.z_hi,
          "z interval must satisfy 0 <= z_lo <= z_hi <= 1");
  require(cfg.model_w >= 0.0, "model_w must be >= 0");
  require(cfg.model_b > 0.0, "model_b must be > 0");
  require(cfg.model_p >= 0.0 && cfg.model_p <= 1.0, "model_p must be in [0, 1]");
  require(cfg.distance_scale > 0.0, "distance_scale must be > 0");
  require(cfg.method == "sbbe" || cfg.method == "lbbe" || cfg.method == "ksbbe",
          "method must be 'sbbe', 'lbbe', or 'ksbbe'");
  require(cfg.selection == "ordered" || cfg.selection == "random",
          "selection must be 'ordered' or 'random'");
  require(cfg.n_servers_used >= 1 && cfg.n_servers_used <= cfg.n_servers,
          "n_servers_used must be in [1, n_servers]");
  require(cfg.m_exchanges >= 1, "m_exchanges must be >= 1");
  require(cfg.replications >= 1, "replications must be >= 1");
  require(cfg.placements >= 1, "placements must be >= 1");
  require(cfg.route_nodes >= 1, "route_nodes must be >= 1");
  require(cfg.k_known <= cfg.route_nodes, "k_known must be <= route_nodes");
  require(cfg.geoloc_error_km >= 0.0, "geoloc_error_km must be >= 0");
  require(cfg.method != "ksbbe" || cfg.distance_scale == 1.0,
          "method 'ksbbe' requires distance_scale = 1");
}

std::map<std::string, std::string> to_map(const RunConfig& cfg) {
  return {
      {"seed", std::to_string(cfg.seed)},
      {"n_servers", std::to_string(cfg.n_servers)},
      {"n_clients", std::to_string(cfg.n_clients)},
      {"region_lat_lo", fmt(cfg.region_lat_lo)},
      {"region_lat_hi", fmt(cfg.region_lat_hi)},
      {"region_lon_lo", fmt(cfg.region_lon_lo)},
      {"region_lon_hi", fmt(cfg.region_lon_hi)},
      {"f_lo", fmt(cfg.f_lo)},
      {"f_hi", fmt(cfg.f_hi)},
      {"offset_bound_ms", fmt(cfg.offset_bound_ms)},
      {"congestion_mean_ms", fmt(cfg.congestion_mean_ms)},
      {"asym_mode", cfg.asym_mode},
      {"z_lo", fmt(cfg.z_lo)},
      {"z_hi", fmt(cfg.z_hi)},
      {"model_w", fmt(cfg.model_w)},
      {"model_b", fmt(cfg.model_b)},
      {"model_p", fmt(cfg.model_p)},
      {"distance_scale", fmt(cfg.distance_scale)},
      {"method", cfg.method},
      {"selection", cfg.selection},
      {"n_servers_used", std::to_string(cfg.n_servers_used)},
      {"m_exchanges", std::to_string(cfg.m_exchanges)},
      {"replications", std::to_string(cfg.replications)},
      {"placements", std::to_string(cfg.placements)},
      {"route_nodes", std::to_string(cfg.route_nodes)},
      {"k_known", std::to_string(cfg.k_known)},
      {"geoloc_error_km", fmt(cfg.geoloc_error_km)},
      {"workers", std::to_string(cfg.workers)},
  };
}

}  // namespace asymclock
