#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "asymclock/asym_model.hpp"
#include "asymclock/cz_detect.hpp"
#include "asymclock/experiments.hpp"
#include "asymclock/run_config.hpp"

namespace {

using asymclock::ConfigError;
using asymclock::RunConfig;
using json = nlohmann::json;
namespace fs = std::filesystem;
namespace experiments = asymclock::experiments;
namespace czdetect = asymclock::czdetect;
namespace asymmodel = asymclock::asymmodel;

constexpr const char* kVersion = "asymclock-0.1.0";
const std::vector<double> kRStarMs = {5, 10, 20, 50, 100, 200, 400};

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool full = false;
  std::vector<std::string> sets;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

RunConfig build_cfg(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : asymclock::load_config_file(c.config_path);
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + kv);
    asymclock::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  if (c.full) {
    cfg.replications = 100;
    cfg.n_clients = 1000;
  }
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(pos)));
      break;
    }
    fields.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return fields;
}

bool parse_num(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

double field_num(const std::vector<std::string>& row, std::size_t col, std::size_t lineno) {
  double v;
  if (col >= row.size() || !parse_num(row[col], v))
    throw std::runtime_error("malformed CSV row " + std::to_string(lineno));
  return v;
}

struct Table {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<std::string>> rows;
  std::size_t first_data_line = 1;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Table t;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> row = split_row(line);
    if (first) {
      first = false;
      double v;
      if (!parse_num(row[0], v)) {
        t.header = std::move(row);
        t.first_data_line = lineno + 1;
        continue;
      }
      t.first_data_line = lineno;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::size_t header_col(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw std::runtime_error("CSV is missing a '" + name + "' column");
}

// One bare column of T values, or any catalogue with a t_hat column.
std::vector<double> read_t_samples(const std::string& path) {
  const Table t = read_table(path);
  std::size_t col = 0;
  if (!t.header.empty()) {
    col = header_col(t, t.header.size() == 1 ? t.header[0] : "t_hat");
  } else if (!t.rows.empty() && t.rows[0].size() != 1) {
    throw std::runtime_error("expected a single-column CSV or a header naming t_hat");
  }
  std::vector<double> samples;
  samples.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    samples.push_back(field_num(t.rows[i], col, t.first_data_line + i));
  return samples;
}

// (r_hat, a_hat) pool rows: a headered catalogue or a bare two-column CSV.
std::vector<std::pair<double, double>> read_pool(const std::string& path) {
  const Table t = read_table(path);
  std::size_t rcol = 0, acol = 1;
  if (!t.header.empty()) {
    rcol = header_col(t, "r_hat");
    acol = header_col(t, "a_hat");
  } else if (!t.rows.empty() && t.rows[0].size() != 2) {
    throw std::runtime_error("expected r_hat,a_hat columns or a bare two-column CSV");
  }
  std::vector<std::pair<double, double>> pool;
  pool.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::size_t lineno = t.first_data_line + i;
    pool.emplace_back(field_num(t.rows[i], rcol, lineno), field_num(t.rows[i], acol, lineno));
  }
  return pool;
}

experiments::PoolSource make_pool(const RunConfig& cfg, const std::string& data_path) {
  experiments::PoolSource src;
  if (data_path.empty()) {
    src.model_mode = true;
    src.model = asymmodel::MixtureModel{cfg.model_w, cfg.model_b, cfg.model_p};
  } else {
    src.model_mode = false;
    src.data = read_pool(data_path);
  }
  return src;
}

void cmd_simulate(const RunConfig& cfg, const fs::path& out_dir, json& manifest) {
  const experiments::Metrics m = experiments::run_scenario(cfg);
  {
    std::ofstream out = open_out(out_dir / "records.csv");
    out << "e_true,estimate,lo,hi,inconsistent,relaxed\n";
    for (const experiments::ClientRecord& r : m.records) {
      out << fmt(r.e_true) << ',' << fmt(r.estimate) << ',' << fmt(r.lo) << ',' << fmt(r.hi) << ','
          << (r.inconsistent ? 1 : 0) << ',' << (r.relaxed ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream out = open_out(out_dir / "summary.csv");
    out << "metric,value\n";
    out << "rmse," << fmt(m.rmse) << '\n';
    out << "mean_bound_width," << fmt(m.mean_bound_width) << '\n';
    out << "mean_abs_error," << fmt(m.mean_abs_error) << '\n';
    out << "inconsistent_fraction," << fmt(m.inconsistent_fraction) << '\n';
    out << "mean_inconsistent_edge_distance," << fmt(m.mean_inconsistent_edge_distance) << '\n';
    out << "n_records," << m.records.size() << '\n';
  }
  manifest["outputs"] = {"records.csv", "summary.csv"};
}

void cmd_preset(const RunConfig& cfg, const std::string& name, bool full, const fs::path& out_dir,
                json& manifest) {
  const std::vector<experiments::SweepRow> rows = experiments::sweep(name, cfg, full);
  const std::string file = name + ".csv";
  std::ofstream out = open_out(out_dir / file);
  out << "x_name,x,series,method,metric,value,stderr\n";
  for (const experiments::SweepRow& r : rows) {
    out << r.x_name << ',' << fmt(r.x) << ',' << r.series << ',' << r.method << ',' << r.metric
        << ',' << fmt(r.value) << ',' << fmt(r.stderr_) << '\n';
  }
  manifest["outputs"] = {file};
}

void cmd_czdetect(const std::string& trace_path, const std::string& server_id,
                  const fs::path& out_dir, json& manifest) {
  const czdetect::DelayTrace trace = czdetect::read_trace_csv(trace_path);
  if (trace.size() == 0) throw std::runtime_error("empty trace: " + trace_path);
  const std::vector<czdetect::ClearZone> zones = czdetect::harvest(trace, czdetect::HarvestConfig{});
  czdetect::write_cz_csv((out_dir / "zones.csv").string(), server_id, trace, zones);
  manifest["outputs"] = {"zones.csv"};
  manifest["n_samples"] = trace.size();
  manifest["n_zones"] = zones.size();
}

void cmd_fitmodel(const std::string& samples_path, bool defaults, json& manifest) {
  asymmodel::MixtureModel m;
  if (defaults) {
    m = asymmodel::default_model();
  } else {
    if (samples_path.empty()) throw ConfigError("fitmodel needs a samples CSV or --defaults");
    m = asymmodel::fit(read_t_samples(samples_path));
  }
  const json result = {{"w", m.w}, {"b", m.b}, {"p", m.p}};
  std::cout << result.dump(2) << '\n';
  manifest["result"] = result;
}

void cmd_jitter(const RunConfig& cfg, const std::string& data_path, bool full,
                const fs::path& out_dir, json& manifest) {
  const experiments::PoolSource src = make_pool(cfg, data_path);
  const std::size_t reps = full ? 100000 : 10000;
  const std::vector<std::size_t> n_s_list = {2, 4, 8, 16};
  std::ofstream out = open_out(out_dir / "jitter.csv");
  out << "r_star_ms,n_s,mean_error_range,stderr,flagged\n";
  for (double r_ms : kRStarMs) {
    for (const experiments::JitterResult& r :
         experiments::jitter_experiment(src, r_ms * 1e-3, n_s_list, reps, cfg.seed)) {
      out << fmt(r_ms) << ',' << r.n_s << ',' << fmt(r.mean_error_range) << ',' << fmt(r.stderr_)
          << ',' << (r.flagged ? 1 : 0) << '\n';
    }
  }
  manifest["outputs"] = {"jitter.csv"};
}

void cmd_tighten(const RunConfig& cfg, const std::string& data_path, bool full,
                 const fs::path& out_dir, json& manifest) {
  const experiments::PoolSource src = make_pool(cfg, data_path);
  const std::size_t reps = full ? 100000 : 10000;
  const std::vector<std::size_t> n_s_list = {2, 4, 8, 32, 128, 512};
  std::ofstream out = open_out(out_dir / "tighten.csv");
  out << "r_star_ms,n_s,mean_rho,stderr,flagged\n";
  for (double r_ms : kRStarMs) {
    for (const experiments::TightenResult& r :
         experiments::tighten_experiment(src, r_ms * 1e-3, n_s_list, reps, cfg.seed)) {
      out << fmt(r_ms) << ',' << r.n_s << ',' << fmt(r.mean_rho) << ',' << fmt(r.stderr_) << ','
          << (r.flagged ? 1 : 0) << '\n';
    }
  }
  manifest["outputs"] = {"tighten.csv"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clock-offset error bounds under network path asymmetry"};
  app.require_subcommand(1);

  Common c;
  std::string preset_name, trace_path, samples_path, data_path, server_id = "s0";
  bool fit_defaults = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config_path, "config file of key = value lines");
    sub->add_option("--seed", c.seed, "master seed override");
    sub->add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", c.workers, "worker threads (0 = all cores)");
    sub->add_flag("--full", c.full, "paper-scale client and replication counts");
    sub->add_option("--set", c.sets, "config override key=value (repeatable)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one scenario; write records + summary");
  add_common(simulate);

  CLI::App* preset = app.add_subcommand("preset", "run a named experiment preset");
  preset->add_option("name", preset_name, "preset name")->required();
  add_common(preset);

  CLI::App* czd = app.add_subcommand("czdetect", "harvest clear zones from a delay trace CSV");
  czd->add_option("trace", trace_path, "input trace CSV")->required();
  czd->add_option("--server-id", server_id, "label for the zone catalogue")->capture_default_str();
  add_common(czd);

  CLI::App* fitm = app.add_subcommand("fitmodel", "fit the asymmetry mixture model to T samples");
  fitm->add_option("samples", samples_path, "CSV of T values (single column or t_hat column)");
  fitm->add_flag("--defaults", fit_defaults, "print the built-in default parameters");
  add_common(fitm);

  CLI::App* jit = app.add_subcommand("jitter", "asymmetry jitter versus server-set size");
  jit->add_option("--data", data_path, "zone catalogue CSV (default: model-generated pools)");
  add_common(jit);

  CLI::App* tig = app.add_subcommand("tighten", "reconciled-interval tightening versus set size");
  tig->add_option("--data", data_path, "zone catalogue CSV (default: model-generated pools)");
  add_common(tig);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  json manifest;
  manifest["command"] = app.get_subcommands().front()->get_name();
  manifest["version"] = kVersion;
  int code = 0;
  RunConfig cfg;
  bool have_cfg = false;
  const fs::path out_dir = c.out_dir;
  try {
    fs::create_directories(out_dir);
    cfg = build_cfg(c);
    have_cfg = true;
    if (simulate->parsed()) {
      cmd_simulate(cfg, out_dir, manifest);
    } else if (preset->parsed()) {
      cmd_preset(cfg, preset_name, c.full, out_dir, manifest);
    } else if (czd->parsed()) {
      cmd_czdetect(trace_path, server_id, out_dir, manifest);
    } else if (fitm->parsed()) {
      cmd_fitmodel(samples_path, fit_defaults, manifest);
    } else if (jit->parsed()) {
      cmd_jitter(cfg, data_path, c.full, out_dir, manifest);
    } else {
      cmd_tighten(cfg, data_path, c.full, out_dir, manifest);
    }
  } catch (const ConfigError& e) {
    manifest["error"] = e.what();
    std::cerr << "error: " << e.what() << '\n';
    code = 2;
  } catch (const std::exception& e) {
    manifest["error"] = e.what();
    std::cerr << "error: " << e.what() << '\n';
    code = 1;
  }
  if (have_cfg) {
    manifest["seed"] = cfg.seed;
    manifest["full"] = c.full;
    manifest["config"] = asymclock::to_map(cfg);
  }
  manifest["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    std::ofstream out = open_out(out_dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (code == 0) code = 1;
  }
  return code;
}
