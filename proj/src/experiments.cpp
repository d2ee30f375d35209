#include "asymclock/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "asymclock/parallel.hpp"
#include "asymclock/rng.hpp"

namespace asymclock::experiments {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Method { kSbbe, kLbbe, kKsbbe };

Method parse_method(const std::string& m) {
  if (m == "sbbe") return Method::kSbbe;
  if (m == "lbbe") return Method::kLbbe;
  if (m == "ksbbe") return Method::kKsbbe;
  throw ConfigError("unknown method '" + m + "'");
}

pathsim::PathSpec make_pspec(const RunConfig& cfg) {
  pathsim::PathSpec spec;
  spec.f_lo = cfg.f_lo;
  spec.f_hi = cfg.f_hi;
  spec.distance_scale = cfg.distance_scale;
  if (cfg.asym_mode == "model") {
    spec.asym.mode = pathsim::AsymmetrySpec::Mode::kModel;
    spec.asym.model = asymmodel::MixtureModel{cfg.model_w, cfg.model_b, cfg.model_p};
  } else {
    spec.asym.mode = pathsim::AsymmetrySpec::Mode::kZInterval;
    spec.asym.z_lo = cfg.z_lo;
    spec.asym.z_hi = cfg.z_hi;
  }
  return spec;
}

// One replication suffices when congestion is off: exchanges are then
// deterministic given the placement.
std::size_t reps_for(const RunConfig& cfg) {
  return cfg.congestion_mean_ms == 0.0 ? 1 : cfg.replications;
}

struct Lbs {
  double up;
  double dn;
  double sol;
};

// Per-direction delay lower bounds the configured estimator would use for
// visit slot u of client c, plus the plain SoL bound (lbbe relaxation target).
Lbs server_lbs(const RunConfig& cfg, const Scenario& sc, Method method, std::size_t c,
               std::size_t u) {
  const std::size_t s = sc.order[c][u];
  const double dist = cfg.distance_scale * geo::great_circle_km(sc.believed[c], sc.servers[s]);
  const double sol = geo::sol_delay_s(dist);
  switch (method) {
    case Method::kSbbe:
      return {sol, sol, sol};
    case Method::kLbbe:
      return {sc.inbound[s].query(dist), sc.outbound[s].query(dist), sol};
    case Method::kKsbbe: {
      const boundest::DirBounds db =
          boundest::ksbbe_bounds(sc.believed[c], sc.servers[s], sc.routes[c][u], cfg.k_known);
      return {db.up_s, db.down_s, sol};
    }
  }
  throw std::logic_error("unreachable");
}

ClientRecord make_record(double e_true, const boundest::OffsetBound& b, bool relaxed) {
  ClientRecord r;
  r.e_true = e_true;
  r.estimate = b.estimate();
  r.lo = b.lo;
  r.hi = b.hi;
  r.inconsistent = e_true < b.lo || e_true > b.hi;
  r.relaxed = relaxed;
  return r;
}

void check_grid(const std::vector<std::size_t>& grid, const char* name) {
  if (grid.empty()) throw ConfigError(std::string(name) + " grid must be non-empty");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (grid[i] >= grid[i + 1])
      throw ConfigError(std::string(name) + " grid must be strictly increasing");
}

Metrics strip_records(Metrics m) {
  m.records.clear();
  m.records.shrink_to_fit();
  return m;
}

}  // namespace

Metrics compute_metrics(std::vector<ClientRecord> records) {
  Metrics m;
  m.records = std::move(records);
  if (m.records.empty()) return m;
  double se = 0.0, sw = 0.0, sa = 0.0, sedge = 0.0;
  std::size_t n_inc = 0;
  for (const ClientRecord& r : m.records) {
    const double err = r.estimate - r.e_true;
    se += err * err;
    sw += r.hi - r.lo;
    sa += std::abs(err);
    if (r.inconsistent) {
      ++n_inc;
      sedge += std::min(std::abs(r.e_true - r.lo), std::abs(r.e_true - r.hi));
    }
  }
  const double n = static_cast<double>(m.records.size());
  m.rmse = std::sqrt(se / n);
  m.mean_bound_width = sw / n;
  m.mean_abs_error = sa / n;
  m.inconsistent_fraction = static_cast<double>(n_inc) / n;
  m.mean_inconsistent_edge_distance = n_inc == 0 ? 0.0 : sedge / static_cast<double>(n_inc);
  return m;
}

Scenario build_scenario(const RunConfig& cfg, std::size_t placement) {
  validate(cfg);
  const Method method = parse_method(cfg.method);
  const pathsim::PathSpec pspec = make_pspec(cfg);
  const geo::Region region{cfg.region_lat_lo, cfg.region_lat_hi, cfg.region_lon_lo,
                           cfg.region_lon_hi};
  Scenario sc;
  sc.pseed = substream_seed(cfg.seed, {kStreamPlacement, placement});

  {
    Rng rng = make_rng(sc.pseed, {kStreamServers});
    sc.servers.reserve(cfg.n_servers);
    for (std::size_t i = 0; i < cfg.n_servers; ++i)
      sc.servers.push_back(geo::sample_region(region, rng));
  }
  {
    Rng rng = make_rng(sc.pseed, {kStreamClients});
    sc.clients.reserve(cfg.n_clients);
    for (std::size_t i = 0; i < cfg.n_clients; ++i)
      sc.clients.push_back(geo::sample_region(region, rng));
  }
  {
    Rng rng = make_rng(sc.pseed, {kStreamOffsets});
    const double bound = cfg.offset_bound_ms * 1e-3;
    sc.offsets.reserve(cfg.n_clients);
    for (std::size_t i = 0; i < cfg.n_clients; ++i)
      sc.offsets.push_back(uniform(rng, -bound, bound));
  }
  sc.believed.resize(cfg.n_clients);
  for (std::size_t c = 0; c < cfg.n_clients; ++c) {
    Rng rng = make_rng(sc.pseed, {kStreamGeoloc, c});
    const double bearing = uniform(rng, 0.0, 360.0);
    sc.believed[c] = geo::displace(sc.clients[c], bearing, cfg.geoloc_error_km);
  }

  sc.paths.assign(cfg.n_clients, std::vector<pathsim::PathParams>(cfg.n_servers));
  parallel_for(cfg.n_clients, cfg.workers, [&](std::size_t c) {
    for (std::size_t s = 0; s < cfg.n_servers; ++s) {
      Rng rng = make_rng(sc.pseed, {kStreamPaths, c, s});
      sc.paths[c][s] = pathsim::gen_path(sc.clients[c], sc.servers[s], pspec, rng);
    }
  });

  sc.order.assign(cfg.n_clients, {});
  for (std::size_t c = 0; c < cfg.n_clients; ++c) {
    std::vector<std::size_t>& ord = sc.order[c];
    ord.resize(cfg.n_servers);
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    if (cfg.selection == "ordered") {
      std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
        const double ra = sc.paths[c][a].r_min, rb = sc.paths[c][b].r_min;
        return ra != rb ? ra < rb : a < b;
      });
    } else {
      Rng rng = make_rng(sc.pseed, {kStreamSelection, c});
      for (std::size_t i = ord.size(); i >= 2; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(ord[i - 1], ord[j]);
      }
    }
  }

  if (method == Method::kLbbe) {
    const std::size_t ns = cfg.n_servers;
    std::vector<std::vector<pathsim::PathParams>> ss(ns, std::vector<pathsim::PathParams>(ns));
    parallel_for(ns, cfg.workers, [&](std::size_t i) {
      for (std::size_t j = i + 1; j < ns; ++j) {
        Rng rng = make_rng(sc.pseed, {kStreamSsPaths, i, j});
        ss[i][j] = pathsim::gen_path(sc.servers[i], sc.servers[j], pspec, rng);
      }
    });
    sc.inbound.resize(ns);
    sc.outbound.resize(ns);
    parallel_for(ns, cfg.workers, [&](std::size_t j) {
      std::vector<std::pair<double, double>> in, out;
      in.reserve(ns - 1);
      out.reserve(ns - 1);
      for (std::size_t k = 0; k < ns; ++k) {
        if (k == j) continue;
        const double dist = cfg.distance_scale * geo::great_circle_km(sc.servers[k], sc.servers[j]);
        in.emplace_back(dist, k < j ? ss[k][j].d_up_min : ss[j][k].d_down_min);
        out.emplace_back(dist, j < k ? ss[j][k].d_up_min : ss[k][j].d_down_min);
      }
      sc.inbound[j] = boundest::build_landmark_map(in);
      sc.outbound[j] = boundest::build_landmark_map(out);
    });
  }

  if (method == Method::kKsbbe) {
    sc.routes.assign(cfg.n_clients, {});
    parallel_for(cfg.n_clients, cfg.workers, [&](std::size_t c) {
      sc.routes[c].reserve(cfg.n_servers_used);
      for (std::size_t u = 0; u < cfg.n_servers_used; ++u) {
        const std::size_t s = sc.order[c][u];
        Rng rng = make_rng(sc.pseed, {kStreamRoutes, c, s});
        sc.routes[c].push_back(
            boundest::gen_route(sc.clients[c], sc.servers[s], sc.paths[c][s], cfg.route_nodes, rng));
      }
    });
  }

  return sc;
}

std::vector<ClientRecord> run_placement(const RunConfig& cfg, std::size_t placement) {
  const Scenario sc = build_scenario(cfg, placement);
  const Method method = parse_method(cfg.method);
  const std::size_t reps = reps_for(cfg);
  const std::size_t nu = cfg.n_servers_used;
  const double mu = cfg.congestion_mean_ms * 1e-3;
  std::vector<ClientRecord> out(cfg.n_clients * reps);
  parallel_for(cfg.n_clients, cfg.workers, [&](std::size_t c) {
    const pathsim::ClockModel clock{sc.offsets[c]};
    std::vector<boundest::OffsetBound> land(nu), sols(nu);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      Rng rng = make_rng(sc.pseed, {kStreamCongestion, rep, c});
      for (std::size_t u = 0; u < nu; ++u) {
        const Lbs lb = server_lbs(cfg, sc, method, c, u);
        const pathsim::PathParams& path = sc.paths[c][sc.order[c][u]];
        double a = -kInf, b = kInf;
        for (std::size_t m = 0; m < cfg.m_exchanges; ++m) {
          const pathsim::TimestampExchange ex = pathsim::exchange(clock, path, mu, rng);
          a = std::max(a, ex.t_a_client - ex.t_s_server);
          b = std::min(b, ex.t_f_client - ex.t_s_server);
        }
        land[u] = {a + lb.up, b - lb.dn};
        if (method == Method::kLbbe) sols[u] = {a + lb.sol, b - lb.sol};
      }
      boundest::OffsetBound fin;
      bool relaxed = false;
      if (method == Method::kLbbe) {
        const boundest::LbbeResult res = boundest::lbbe_reconcile(land, sols);
        fin = res.combined;
        relaxed = res.relaxed > 0;
      } else {
        fin = boundest::fold(land);
      }
      out[c * reps + rep] = make_record(sc.offsets[c], fin, relaxed);
    }
  });
  return out;
}

std::vector<Metrics> run_placements(const RunConfig& cfg) {
  validate(cfg);
  std::vector<Metrics> out;
  out.reserve(cfg.placements);
  for (std::size_t p = 0; p < cfg.placements; ++p)
    out.push_back(compute_metrics(run_placement(cfg, p)));
  return out;
}

Metrics run_scenario(const RunConfig& cfg) {
  validate(cfg);
  std::vector<ClientRecord> all;
  for (std::size_t p = 0; p < cfg.placements; ++p) {
    std::vector<ClientRecord> recs = run_placement(cfg, p);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return compute_metrics(std::move(all));
}

std::vector<std::vector<Metrics>> run_m_grid(const RunConfig& cfg,
                                             const std::vector<std::size_t>& m_grid) {
  validate(cfg);
  check_grid(m_grid, "m_exchanges");
  if (m_grid.front() < 1) throw ConfigError("m_exchanges grid values must be >= 1");
  const Method method = parse_method(cfg.method);
  const std::size_t G = m_grid.size();
  const std::size_t m_max = m_grid.back();
  const std::size_t nu = cfg.n_servers_used;
  const double mu = cfg.congestion_mean_ms * 1e-3;

  std::vector<std::vector<Metrics>> out(cfg.placements);
  for (std::size_t p = 0; p < cfg.placements; ++p) {
    const Scenario sc = build_scenario(cfg, p);
    const std::size_t reps = reps_for(cfg);
    std::vector<std::vector<ClientRecord>> recs(G,
                                                std::vector<ClientRecord>(cfg.n_clients * reps));
    parallel_for(cfg.n_clients, cfg.workers, [&](std::size_t c) {
      const pathsim::ClockModel clock{sc.offsets[c]};
      std::vector<boundest::OffsetBound> land(G * nu), sols(G * nu);
      for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng = make_rng(sc.pseed, {kStreamCongestion, rep, c});
        for (std::size_t u = 0; u < nu; ++u) {
          const Lbs lb = server_lbs(cfg, sc, method, c, u);
          const pathsim::PathParams& path = sc.paths[c][sc.order[c][u]];
          double a = -kInf, b = kInf;
          std::size_t gi = 0;
          for (std::size_t m = 1; m <= m_max; ++m) {
            const pathsim::TimestampExchange ex = pathsim::exchange(clock, path, mu, rng);
            a = std::max(a, ex.t_a_client - ex.t_s_server);
            b = std::min(b, ex.t_f_client - ex.t_s_server);
            if (m == m_grid[gi]) {
              land[gi * nu + u] = {a + lb.up, b - lb.dn};
              sols[gi * nu + u] = {a + lb.sol, b - lb.sol};
              ++gi;
            }
          }
        }
        for (std::size_t gi = 0; gi < G; ++gi) {
          boundest::OffsetBound fin;
          bool relaxed = false;
          if (method == Method::kLbbe) {
            const std::vector<boundest::OffsetBound> lv(land.begin() + gi * nu,
                                                        land.begin() + (gi + 1) * nu);
            const std::vector<boundest::OffsetBound> sv(sols.begin() + gi * nu,
                                                        sols.begin() + (gi + 1) * nu);
            const boundest::LbbeResult res = boundest::lbbe_reconcile(lv, sv);
            fin = res.combined;
            relaxed = res.relaxed > 0;
          } else {
            for (std::size_t u = 0; u < nu; ++u) {
              fin.lo = std::max(fin.lo, land[gi * nu + u].lo);
              fin.hi = std::min(fin.hi, land[gi * nu + u].hi);
            }
          }
          recs[gi][c * reps + rep] = make_record(sc.offsets[c], fin, relaxed);
        }
      }
    });
    out[p].reserve(G);
    for (std::size_t gi = 0; gi < G; ++gi)
      out[p].push_back(strip_records(compute_metrics(std::move(recs[gi]))));
  }
  return out;
}

std::vector<std::vector<Metrics>> run_server_grid(const RunConfig& cfg,
                                                  const std::vector<std::size_t>& n_grid) {
  validate(cfg);
  check_grid(n_grid, "n_servers_used");
  if (n_grid.front() < 1) throw ConfigError("n_servers_used grid values must be >= 1");
  if (n_grid.back() > cfg.n_servers)
    throw ConfigError("n_servers_used grid exceeds n_servers");
  const Method method = parse_method(cfg.method);
  if (method == Method::kKsbbe)
    throw ConfigError("server grid supports methods 'sbbe' and 'lbbe'");
  const std::size_t G = n_grid.size();
  const std::size_t n_max = n_grid.back();
  const double mu = cfg.congestion_mean_ms * 1e-3;

  std::vector<std::vector<Metrics>> out(cfg.placements);
  for (std::size_t p = 0; p < cfg.placements; ++p) {
    const Scenario sc = build_scenario(cfg, p);
    const std::size_t reps = reps_for(cfg);
    std::vector<std::vector<ClientRecord>> recs(G,
                                                std::vector<ClientRecord>(cfg.n_clients * reps));
    parallel_for(cfg.n_clients, cfg.workers, [&](std::size_t c) {
      const pathsim::ClockModel clock{sc.offsets[c]};
      std::vector<boundest::OffsetBound> land(n_max), sols(n_max);
      for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng = make_rng(sc.pseed, {kStreamCongestion, rep, c});
        for (std::size_t u = 0; u < n_max; ++u) {
          const Lbs lb = server_lbs(cfg, sc, method, c, u);
          const pathsim::PathParams& path = sc.paths[c][sc.order[c][u]];
          double a = -kInf, b = kInf;
          for (std::size_t m = 0; m < cfg.m_exchanges; ++m) {
            const pathsim::TimestampExchange ex = pathsim::exchange(clock, path, mu, rng);
            a = std::max(a, ex.t_a_client - ex.t_s_server);
            b = std::min(b, ex.t_f_client - ex.t_s_server);
          }
          land[u] = {a + lb.up, b - lb.dn};
          sols[u] = {a + lb.sol, b - lb.sol};
        }
        boundest::OffsetBound running;
        std::size_t gi = 0;
        for (std::size_t n = 1; n <= n_max; ++n) {
          running.lo = std::max(running.lo, land[n - 1].lo);
          running.hi = std::min(running.hi, land[n - 1].hi);
          if (n == n_grid[gi]) {
            boundest::OffsetBound fin = running;
            bool relaxed = false;
            if (method == Method::kLbbe) {
              const std::vector<boundest::OffsetBound> lv(land.begin(), land.begin() + n);
              const std::vector<boundest::OffsetBound> sv(sols.begin(), sols.begin() + n);
              const boundest::LbbeResult res = boundest::lbbe_reconcile(lv, sv);
              fin = res.combined;
              relaxed = res.relaxed > 0;
            }
            recs[gi][c * reps + rep] = make_record(sc.offsets[c], fin, relaxed);
            ++gi;
          }
        }
      }
    });
    out[p].reserve(G);
    for (std::size_t gi = 0; gi < G; ++gi)
      out[p].push_back(strip_records(compute_metrics(std::move(recs[gi]))));
  }
  return out;
}

std::vector<std::vector<Metrics>> run_ksbbe_grid(const RunConfig& cfg,
                                                 const std::vector<std::size_t>& k_grid) {
  validate(cfg);
  if (parse_method(cfg.method) != Method::kKsbbe)
    throw ConfigError("k grid requires method 'ksbbe'");
  check_grid(k_grid, "k_known");
  if (k_grid.back() > cfg.route_nodes) throw ConfigError("k_known grid exceeds route_nodes");
  const std::size_t G = k_grid.size();
  const std::size_t nu = cfg.n_servers_used;
  const double mu = cfg.congestion_mean_ms * 1e-3;

  std::vector<std::vector<Metrics>> out(cfg.placements);
  for (std::size_t p = 0; p < cfg.placements; ++p) {
    const Scenario sc = build_scenario(cfg, p);
    const std::size_t reps = reps_for(cfg);
    std::vector<std::vector<ClientRecord>> recs(G,
                                                std::vector<ClientRecord>(cfg.n_clients * reps));
    parallel_for(cfg.n_clients, cfg.workers, [&](std::size_t c) {
      const pathsim::ClockModel clock{sc.offsets[c]};
      std::vector<boundest::OffsetBound> land(G * nu);
      for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng = make_rng(sc.pseed, {kStreamCongestion, rep, c});
        for (std::size_t u = 0; u < nu; ++u) {
          const std::size_t s = sc.order[c][u];
          const pathsim::PathParams& path = sc.paths[c][s];
          double a = -kInf, b = kInf;
          for (std::size_t m = 0; m < cfg.m_exchanges; ++m) {
            const pathsim::TimestampExchange ex = pathsim::exchange(clock, path, mu, rng);
            a = std::max(a, ex.t_a_client - ex.t_s_server);
            b = std::min(b, ex.t_f_client - ex.t_s_server);
          }
          // Nested subsets: running max keeps the per-direction bounds (and so
          // the fold) monotone in k exactly, not only in real arithmetic.
          double lb_up = -kInf, lb_dn = -kInf;
          for (std::size_t gi = 0; gi < G; ++gi) {
            const boundest::DirBounds db =
                boundest::ksbbe_bounds(sc.believed[c], sc.servers[s], sc.routes[c][u], k_grid[gi]);
            lb_up = std::max(lb_up, db.up_s);
            lb_dn = std::max(lb_dn, db.down_s);
            land[gi * nu + u] = {a + lb_up, b - lb_dn};
          }
        }
        for (std::size_t gi = 0; gi < G; ++gi) {
          boundest::OffsetBound fin;
          for (std::size_t u = 0; u < nu; ++u) {
            fin.lo = std::max(fin.lo, land[gi * nu + u].lo);
            fin.hi = std::min(fin.hi, land[gi * nu + u].hi);
          }
          recs[gi][c * reps + rep] = make_record(sc.offsets[c], fin, false);
        }
      }
    });
    out[p].reserve(G);
    for (std::size_t gi = 0; gi < G; ++gi)
      out[p].push_back(strip_records(compute_metrics(std::move(recs[gi]))));
  }
  return out;
}

namespace {

void check_pool_args(const std::vector<std::size_t>& n_s_list, std::size_t replications,
                     double r_star) {
  check_grid(n_s_list, "n_s");
  if (n_s_list.front() < 1) throw ConfigError("n_s values must be >= 1");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (!(r_star > 0.0)) throw ConfigError("r_star must be > 0");
}

std::vector<std::pair<double, double>> filter_pool(const PoolSource& src, double r_star) {
  std::vector<std::pair<double, double>> pool;
  for (const auto& [r, a] : src.data)
    if (r >= 0.8 * r_star && r <= 1.2 * r_star && std::abs(a) <= r) pool.push_back({r, a});
  return pool;
}

struct RepStats {
  std::vector<double> sum, sumsq;
  explicit RepStats(std::size_t g) : sum(g, 0.0), sumsq(g, 0.0) {}
  void add(std::size_t gi, double v) {
    sum[gi] += v;
    sumsq[gi] += v * v;
  }
  // mean and standard error over n replications
  std::pair<double, double> agg(std::size_t gi, std::size_t n) const {
    const double mean = sum[gi] / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    const double var =
        std::max(0.0, (sumsq[gi] - static_cast<double>(n) * mean * mean) /
                          static_cast<double>(n - 1));
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
};

}  // namespace

std::vector<JitterResult> jitter_experiment(const PoolSource& src, double r_star,
                                            const std::vector<std::size_t>& n_s_list,
                                            std::size_t replications, std::uint64_t seed) {
  check_pool_args(n_s_list, replications, r_star);
  const std::size_t G = n_s_list.size();
  const std::size_t n_max = n_s_list.back();
  std::vector<JitterResult> out(G);
  for (std::size_t gi = 0; gi < G; ++gi) out[gi] = {r_star, n_s_list[gi], 0.0, 0.0, false};

  std::vector<std::pair<double, double>> pool;
  if (!src.model_mode) {
    pool = filter_pool(src, r_star);
    for (std::size_t gi = 0; gi < G; ++gi) out[gi].flagged = pool.size() < n_s_list[gi];
    if (pool.empty()) {
      for (JitterResult& r : out) r.mean_error_range = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
  }

  RepStats stats(G);
  std::vector<std::size_t> idx(pool.size());
  const std::size_t n_draw = src.model_mode ? n_max : std::min(n_max, pool.size());
  for (std::size_t rep = 0; rep < replications; ++rep) {
    Rng rng = make_rng(seed, {kStreamJitter, rep});
    if (!src.model_mode) std::iota(idx.begin(), idx.end(), 0);
    double a_min = kInf, a_max = -kInf;
    std::size_t gi = 0;
    for (std::size_t i = 0; i < n_draw; ++i) {
      double a;
      if (src.model_mode) {
        // scale-free draw: a is the asymmetry in units of r_star
        const double u = uniform(rng, 0.8, 1.2);
        a = u * asymmodel::sample_t(src.model, rng);
      } else {
        // server sets draw without replacement, nested across n_s
        std::size_t j = i + uniform_index(rng, pool.size() - i);
        std::swap(idx[i], idx[j]);
        a = pool[idx[i]].second;
      }
      a_min = std::min(a_min, a);
      a_max = std::max(a_max, a);
      if (gi < G && i + 1 == n_s_list[gi]) {
        stats.add(gi, 0.5 * (a_max - a_min));
        ++gi;
      }
    }
  }
  for (std::size_t gi = 0; gi < G; ++gi) {
    if (out[gi].flagged) {
      out[gi].mean_error_range = std::numeric_limits<double>::quiet_NaN();
      out[gi].stderr_ = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    auto [mean, se] = stats.agg(gi, replications);
    const double scale = src.model_mode ? r_star : 1.0;
    out[gi].mean_error_range = scale * mean;
    out[gi].stderr_ = scale * se;
  }
  return out;
}

std::vector<TightenResult> tighten_experiment(const PoolSource& src, double r_star,
                                              const std::vector<std::size_t>& n_s_list,
                                              std::size_t replications, std::uint64_t seed) {
  check_pool_args(n_s_list, replications, r_star);
  const std::size_t G = n_s_list.size();
  const std::size_t n_max = n_s_list.back();
  std::vector<TightenResult> out(G);
  for (std::size_t gi = 0; gi < G; ++gi) out[gi] = {r_star, n_s_list[gi], 0.0, 0.0, false};

  std::vector<std::pair<double, double>> pool;
  if (!src.model_mode) {
    pool = filter_pool(src, r_star);
    for (std::size_t gi = 0; gi < G; ++gi) out[gi].flagged = pool.size() < n_s_list[gi];
    if (pool.empty()) {
      for (TightenResult& r : out) r.mean_rho = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
  }

  RepStats stats(G);
  std::vector<std::size_t> idx(pool.size());
  const std::size_t n_draw = src.model_mode ? n_max : std::min(n_max, pool.size());
  for (std::size_t rep = 0; rep < replications; ++rep) {
    Rng rng = make_rng(seed, {kStreamJitter, rep});
    if (!src.model_mode) std::iota(idx.begin(), idx.end(), 0);
    double lo = -kInf, hi = kInf, r_loosest = 0.0;
    std::size_t gi = 0;
    for (std::size_t i = 0; i < n_draw; ++i) {
      double r, a;
      if (src.model_mode) {
        // scale-free: r in units of r_star
        r = uniform(rng, 0.8, 1.2);
        a = r * asymmodel::sample_t(src.model, rng);
      } else {
        // server sets draw without replacement, nested across n_s
        std::size_t j = i + uniform_index(rng, pool.size() - i);
        std::swap(idx[i], idx[j]);
        const auto& [rr, aa] = pool[idx[i]];
        r = rr;
        a = aa;
      }
      // default asymmetry interval [-r, r] gives the offset interval
      // [(a-r)/2, (a+r)/2], which always contains zero
      lo = std::max(lo, 0.5 * (a - r));
      hi = std::min(hi, 0.5 * (a + r));
      r_loosest = std::max(r_loosest, r);
      if (gi < G && i + 1 == n_s_list[gi]) {
        stats.add(gi, std::min(1.0, (hi - lo) / r_loosest));
        ++gi;
      }
    }
  }
  for (std::size_t gi = 0; gi < G; ++gi) {
    if (out[gi].flagged) {
      out[gi].mean_rho = std::numeric_limits<double>::quiet_NaN();
      out[gi].stderr_ = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    auto [mean, se] = stats.agg(gi, replications);
    out[gi].mean_rho = mean;
    out[gi].stderr_ = se;
  }
  return out;
}

namespace {

double metric_value(const Metrics& m, const std::string& name) {
  if (name == "rmse") return m.rmse;
  if (name == "mean_bound_width") return m.mean_bound_width;
  if (name == "mean_abs_error") return m.mean_abs_error;
  if (name == "inconsistent_fraction") return m.inconsistent_fraction;
  if (name == "mean_inconsistent_edge_distance") return m.mean_inconsistent_edge_distance;
  throw ConfigError("unknown metric '" + name + "'");
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

void add_rows(std::vector<SweepRow>& rows, const std::vector<Metrics>& per_placement,
              const std::string& x_name, double x, const std::string& series,
              const std::string& method, const std::vector<std::string>& metrics) {
  for (const std::string& metric : metrics) {
    std::vector<double> values;
    values.reserve(per_placement.size());
    for (const Metrics& m : per_placement) values.push_back(metric_value(m, metric));
    const auto [mean, se] = mean_se(values);
    rows.push_back({x_name, x, series, method, metric, mean, se});
  }
}

// pm is [placement][grid]; emits one row per grid point per metric
void add_grid_rows(std::vector<SweepRow>& rows, const std::vector<std::vector<Metrics>>& pm,
                   const std::vector<std::size_t>& grid, const std::string& x_name,
                   const std::string& series, const std::string& method,
                   const std::vector<std::string>& metrics) {
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (const std::string& metric : metrics) {
      std::vector<double> values;
      values.reserve(pm.size());
      for (const std::vector<Metrics>& placement : pm)
        values.push_back(metric_value(placement[gi], metric));
      const auto [mean, se] = mean_se(values);
      rows.push_back({x_name, static_cast<double>(grid[gi]), series, method, metric, mean, se});
    }
  }
}

std::string label(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

const std::vector<double> kRStarMs = {5, 10, 20, 50, 100, 200, 400};
const std::vector<std::size_t> kMGrid = {1, 2, 4, 8, 16, 32, 64};
const std::vector<std::size_t> kServerGrid = {1, 2,  3,  4,  5,  6,  8, 10,
                                              12, 15, 20, 25, 30, 40, 50};

std::vector<std::size_t> k_grid_for(std::size_t n_nodes) {
  const std::size_t step = std::max<std::size_t>(1, n_nodes / 10);
  std::vector<std::size_t> grid;
  for (std::size_t k = 0; k < n_nodes; k += step) grid.push_back(k);
  grid.push_back(n_nodes);
  return grid;
}

std::vector<std::size_t> k_series_for(std::size_t n_nodes) {
  std::vector<std::size_t> ks = {0, n_nodes / 4, n_nodes / 2, 3 * n_nodes / 4, n_nodes};
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

PoolSource model_pool(const RunConfig& base) {
  PoolSource src;
  src.model_mode = true;
  src.model = asymmodel::MixtureModel{base.model_w, base.model_b, base.model_p};
  return src;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"table1", "table2",     "fig5",        "fig6",    "fig7",  "fig8",
          "fig10",  "fig12-left", "fig12-right", "density", "geoloc"};
}

std::vector<SweepRow> sweep(const std::string& preset, const RunConfig& base, bool full) {
  std::vector<SweepRow> rows;
  const std::size_t jt_reps = full ? 100000 : 10000;

  if (preset == "table1") {
    for (double mu_ms : {0.0, 0.5, 1.0, 5.0, 10.0, 50.0}) {
      for (const std::string method : {"sbbe", "lbbe"}) {
        RunConfig cfg = base;
        cfg.asym_mode = "model";
        cfg.selection = "ordered";
        cfg.congestion_mean_ms = mu_ms;
        cfg.method = method;
        add_rows(rows, run_placements(cfg), "congestion_mean_ms", mu_ms, "", method, {"rmse"});
      }
    }
  } else if (preset == "table2") {
    const std::vector<std::pair<double, double>> levels = {
        {0.6, 0.7}, {0.7, 0.8}, {0.8, 0.9}, {0.9, 1.0}, {0.99, 1.0}};
    for (std::size_t li = 0; li <= levels.size(); ++li) {
      for (const std::string method : {"sbbe", "lbbe"}) {
        RunConfig cfg = base;
        cfg.selection = "ordered";
        cfg.congestion_mean_ms = 0.0;
        cfg.method = method;
        std::string series = "model";
        if (li > 0) {
          cfg.asym_mode = "z_interval";
          cfg.z_lo = levels[li - 1].first;
          cfg.z_hi = levels[li - 1].second;
          series = "level" + std::to_string(li);
        } else {
          cfg.asym_mode = "model";
        }
        add_rows(rows, run_placements(cfg), "level", static_cast<double>(li), series, method,
                 {"rmse"});
      }
    }
  } else if (preset == "fig5") {
    const std::vector<std::size_t> n_s_list = {2, 4, 8, 16};
    const PoolSource src = model_pool(base);
    for (double r_ms : kRStarMs) {
      for (const JitterResult& r :
           jitter_experiment(src, r_ms * 1e-3, n_s_list, jt_reps, base.seed)) {
        rows.push_back({"r_star_ms", r_ms, "n_s=" + std::to_string(r.n_s), "", "mean_error_range",
                        r.mean_error_range, r.stderr_});
      }
    }
  } else if (preset == "fig6") {
    const std::vector<std::size_t> n_s_list = {2, 4, 8, 32, 128, 512};
    const PoolSource src = model_pool(base);
    for (double r_ms : kRStarMs) {
      for (const TightenResult& r :
           tighten_experiment(src, r_ms * 1e-3, n_s_list, jt_reps, base.seed)) {
        rows.push_back({"n_s", static_cast<double>(r.n_s), "r_star_ms=" + label("%g", r_ms), "",
                        "mean_rho", r.mean_rho, r.stderr_});
      }
    }
  } else if (preset == "fig7") {
    for (const std::string method : {"lbbe", "sbbe"}) {
      RunConfig cfg = base;
      cfg.asym_mode = "model";
      cfg.selection = "ordered";
      cfg.method = method;
      add_grid_rows(rows, run_m_grid(cfg, kMGrid), kMGrid, "m_exchanges", "", method,
                    {"inconsistent_fraction", "mean_inconsistent_edge_distance"});
    }
  } else if (preset == "fig8") {
    std::vector<std::size_t> grid;
    for (std::size_t n : kServerGrid)
      if (n <= base.n_servers) grid.push_back(n);
    for (const std::string selection : {"ordered", "random"}) {
      for (const std::string method : {"sbbe", "lbbe"}) {
        RunConfig cfg = base;
        cfg.asym_mode = "model";
        cfg.selection = selection;
        cfg.method = method;
        add_grid_rows(rows, run_server_grid(cfg, grid), grid, "n_servers_used", selection, method,
                      {"mean_bound_width", "rmse"});
      }
    }
  } else if (preset == "fig10") {
    for (const std::string method : {"sbbe", "lbbe"}) {
      RunConfig cfg = base;
      cfg.asym_mode = "model";
      cfg.selection = "ordered";
      cfg.method = method;
      add_grid_rows(rows, run_m_grid(cfg, kMGrid), kMGrid, "m_exchanges", "", method,
                    {"mean_bound_width", "rmse"});
    }
  } else if (preset == "fig12-left") {
    const std::vector<std::size_t> k_grid = k_grid_for(base.route_nodes);
    struct Series {
      std::string name;
      bool model;
      double f, z;
    };
    std::vector<Series> series = {{"model", true, 0.0, 0.0}};
    for (double f : {1.2, 1.4, 1.6, 1.8, 2.0})
      for (double z : {0.0, 0.6, 0.9})
        series.push_back({"F=" + label("%g", f) + " Z=" + label("%g", z), false, f, z});
    for (const Series& s : series) {
      RunConfig cfg = base;
      cfg.method = "ksbbe";
      cfg.selection = "ordered";
      cfg.congestion_mean_ms = 0.0;
      if (s.model) {
        cfg.asym_mode = "model";
      } else {
        cfg.asym_mode = "z_interval";
        cfg.z_lo = cfg.z_hi = s.z;
        cfg.f_lo = cfg.f_hi = s.f;
      }
      add_grid_rows(rows, run_ksbbe_grid(cfg, k_grid), k_grid, "k_known", s.name, "ksbbe",
                    {"mean_bound_width", "rmse"});
    }
  } else if (preset == "fig12-right") {
    const std::vector<std::size_t> k_series = k_series_for(base.route_nodes);
    for (int zi = 0; zi <= 20; ++zi) {
      const double z = static_cast<double>(zi) / 20.0;
      RunConfig cfg = base;
      cfg.method = "ksbbe";
      cfg.selection = "ordered";
      cfg.congestion_mean_ms = 0.0;
      cfg.asym_mode = "z_interval";
      cfg.z_lo = cfg.z_hi = z;
      cfg.f_lo = cfg.f_hi = 1.4;
      const std::vector<std::vector<Metrics>> pm = run_ksbbe_grid(cfg, k_series);
      for (std::size_t gi = 0; gi < k_series.size(); ++gi) {
        std::vector<double> values;
        values.reserve(pm.size());
        for (const std::vector<Metrics>& placement : pm) values.push_back(placement[gi].rmse);
        const auto [mean, se] = mean_se(values);
        rows.push_back(
            {"z", z, "K=" + std::to_string(k_series[gi]), "ksbbe", "rmse", mean, se});
      }
    }
  } else if (preset == "density") {
    for (double scale : {1.0, 0.1}) {
      for (const std::string method : {"sbbe", "lbbe"}) {
        RunConfig cfg = base;
        cfg.asym_mode = "model";
        cfg.selection = "ordered";
        cfg.distance_scale = scale;
        cfg.method = method;
        add_rows(rows, run_placements(cfg), "distance_scale", scale, "", method, {"rmse"});
      }
    }
  } else if (preset == "geoloc") {
    for (double err_km : {0.0, 0.25, 0.5, 1.0, 2.0, 5.0}) {
      RunConfig cfg = base;
      cfg.asym_mode = "model";
      cfg.selection = "ordered";
      cfg.method = "sbbe";
      cfg.congestion_mean_ms = 0.0;
      cfg.geoloc_error_km = err_km;
      add_rows(rows, run_placements(cfg), "geoloc_error_km", err_km, "", "sbbe",
               {"mean_abs_error", "rmse"});
    }
  } else {
    std::string names;
    for (const std::string& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + preset + "'; available: " + names);
  }
  return rows;
}

}  // namespace asymclock::experiments
