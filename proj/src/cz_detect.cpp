#include "asymclock/cz_detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace asymclock::czdetect {

namespace {

constexpr std::size_t kCalWindow = 256;  // running-min window for p(lambda)
constexpr double kPFloor = 1e-4, kPCeil = 0.9999;
constexpr double kCzdTargets[3] = {0.02, 0.05, 0.2};

// Trailing-window minimum over [max(0, i - w + 1), i], monotonic deque.
std::vector<double> running_min(const double* x, std::size_t n, std::size_t w) {
  std::vector<double> out(n);
  std::deque<std::size_t> q;
  for (std::size_t i = 0; i < n; ++i) {
    while (!q.empty() && x[q.back()] >= x[i]) q.pop_back();
    q.push_back(i);
    if (q.front() + w <= i) q.pop_front();
    out[i] = x[q.front()];
  }
  return out;
}

std::vector<double> deviations(const double* x, std::size_t n) {
  std::vector<double> rm = running_min(x, n, kCalWindow);
  for (std::size_t i = 0; i < n; ++i) rm[i] = x[i] - rm[i];
  return rm;
}

double threshold_prob(const double* x, std::size_t n, double lambda) {
  std::vector<double> dev = deviations(x, n);
  std::size_t c = 0;
  for (double v : dev) {
    if (v <= lambda) ++c;
  }
  return static_cast<double>(c) / static_cast<double>(n);
}

double deviation_quantile(const double* x, std::size_t n, double q) {
  std::vector<double> dev = deviations(x, n);
  std::sort(dev.begin(), dev.end());
  double pos = q * static_cast<double>(n - 1);
  std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= n) return dev.back();
  double f = pos - static_cast<double>(i);
  return dev[i] * (1.0 - f) + dev[i + 1] * f;
}

// Core two-window comparison; series must hold at least 2w samples.
std::vector<std::size_t> detect_shifts(const double* x, std::size_t n, std::size_t w,
                                       double lambda) {
  // prev[i] = min x[i-w, i), next[i] = min x[i, i+w) for i in [w, n-w]
  std::vector<double> trail = running_min(x, n, w);
  std::vector<double> lead(n);
  {
    std::deque<std::size_t> q;
    for (std::size_t j = n; j-- > 0;) {
      while (!q.empty() && x[q.back()] >= x[j]) q.pop_back();
      q.push_back(j);
      if (q.front() >= j + w) q.pop_front();
      lead[j] = x[q.front()];
    }
  }
  std::vector<std::size_t> shifts;
  std::size_t last = 0;
  double best = 0.0;
  std::size_t best_i = 0;
  bool open = false;
  for (std::size_t i = w; i + w <= n; ++i) {
    double stat = std::abs(lead[i] - trail[i - 1]);
    if (stat <= lambda) continue;
    if (open && i - last >= w) {
      shifts.push_back(best_i);
      open = false;
    }
    if (!open || stat > best) {
      best = stat;
      best_i = i;
    }
    open = true;
    last = i;
  }
  if (open) shifts.push_back(best_i);
  return shifts;
}

void check_range(const DelayTrace& trace, std::size_t begin, std::size_t end) {
  if (begin > end || end > trace.size()) throw std::invalid_argument("bad trace range");
}

struct Baseline {
  // step function: value at i is base + sum of deltas with index <= i
  std::vector<LevelShift> shifts;
  double base;
  double at(std::size_t i) const {
    double v = base;
    for (const auto& s : shifts) {
      if (s.index <= i) v += s.delta;
    }
    return v;
  }
};

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::size_t shift_window(double alpha, double p) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha outside (0, 1)");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p outside (0, 1)");
  double w = std::ceil(std::log(alpha) / std::log1p(-p));
  return std::max<std::size_t>(static_cast<std::size_t>(w), 2);
}

LsdResult lsd(const std::vector<double>& series, const LsdConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("alpha outside (0, 1)");
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("negative lambda");
  LsdResult res;
  if (series.empty()) {
    res.window = 2;
    res.short_series = true;
    return res;
  }
  double p = std::clamp(threshold_prob(series.data(), series.size(), cfg.lambda), kPFloor, kPCeil);
  res.window = shift_window(cfg.alpha, p);
  if (series.size() < 2 * res.window) {
    res.short_series = true;
    return res;
  }
  res.shifts = detect_shifts(series.data(), series.size(), res.window, cfg.lambda);
  return res;
}

bool czd(const DelayTrace& trace, std::size_t begin, std::size_t end, double alpha) {
  check_range(trace, begin, end);
  std::size_t n = end - begin;
  if (n == 0) return false;
  for (const std::vector<double>* series : {&trace.d_up, &trace.d_down}) {
    const double* x = series->data() + begin;
    for (double p : kCzdTargets) {
      std::size_t w = shift_window(alpha, p);
      if (n < 2 * w) continue;  // window does not fit, no detections possible
      double lambda = deviation_quantile(x, n, p);
      if (!detect_shifts(x, n, w, lambda).empty()) return false;
    }
  }
  return true;
}

std::vector<ClearZone> harvest(const DelayTrace& trace, const HarvestConfig& cfg) {
  std::size_t n = trace.size();
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  if (n > 0) {
    std::size_t nb = std::max<std::size_t>(1, std::min(cfg.coarse_blocks, n));
    for (std::size_t b = 0; b < nb; ++b) {
      std::size_t s = b * n / nb;
      std::size_t e = (b + 1) * n / nb;
      if (s >= e) continue;
      if (czd(trace, s, e, cfg.alpha)) {
        candidates.emplace_back(s, e);
        continue;
      }
      // partition the failed block at detected shifts, trimming one window on
      // each side so localization slop cannot leak a shift into a zone
      LsdConfig lc{cfg.alpha, cfg.partition_lambda};
      std::vector<std::pair<std::size_t, std::size_t>> cuts;  // (index, window)
      for (const std::vector<double>* series : {&trace.d_up, &trace.d_down}) {
        std::vector<double> block(series->begin() + s, series->begin() + e);
        LsdResult r = lsd(block, lc);
        for (std::size_t idx : r.shifts) cuts.emplace_back(s + idx, r.window);
      }
      std::sort(cuts.begin(), cuts.end());
      std::size_t cur = s;
      auto consider = [&](std::size_t lo, std::size_t hi) {
        if (lo < hi && czd(trace, lo, hi, cfg.alpha)) candidates.emplace_back(lo, hi);
      };
      for (const auto& [idx, w] : cuts) {
        std::size_t left_end = idx > w ? idx - w : 0;
        if (left_end > cur) consider(cur, std::min(left_end, e));
        cur = std::max(cur, std::min(idx + w, e));
      }
      consider(cur, e);
    }
  }
  std::vector<ClearZone> zones;
  for (const auto& [s, e] : candidates) {
    std::size_t valid = 0;
    for (std::size_t i = s; i < e; ++i) {
      if (trace.stratum1[i] && trace.usable[i]) ++valid;
    }
    if (valid >= cfg.min_valid_samples) zones.push_back({s, e, valid});
  }
  return zones;
}

CzEstimate estimate_cz(const DelayTrace& trace, const ClearZone& zone) {
  check_range(trace, zone.begin, zone.end);
  double inf = std::numeric_limits<double>::infinity();
  double up = inf, srv = inf, down = inf, rtt = inf;
  bool any = false;
  for (std::size_t i = zone.begin; i < zone.end; ++i) {
    if (!trace.stratum1[i] || !trace.usable[i]) continue;
    any = true;
    up = std::min(up, trace.d_up[i]);
    srv = std::min(srv, trace.d_srv[i]);
    down = std::min(down, trace.d_down[i]);
    rtt = std::min(rtt, trace.rtt[i]);
  }
  if (!any) throw std::invalid_argument("zone has no valid samples");
  CzEstimate est;
  est.r_hat = std::min(up + srv + down, rtt);
  est.a_hat = up - down;
  est.t_hat = est.a_hat / est.r_hat;
  return est;
}

SynthTrace synth_trace(const SynthSpec& spec, Rng& rng) {
  if (spec.length == 0) throw std::invalid_argument("empty synthetic trace");
  if (spec.congestion_mean < 0.0) throw std::invalid_argument("negative congestion mean");
  SynthTrace out;
  DelayTrace& t = out.trace;
  std::size_t n = spec.length;
  t.d_up.resize(n);
  t.d_srv.assign(n, spec.d_srv);
  t.d_down.resize(n);
  t.rtt.resize(n);
  t.stratum1.assign(n, 1);
  t.usable.assign(n, 1);
  Baseline up{spec.up_shifts, spec.d_up_base};
  Baseline down{spec.down_shifts, spec.d_down_base};
  double e = spec.clock_offset;
  for (std::size_t i = 0; i < n; ++i) {
    double qu = exponential(rng, spec.congestion_mean);
    double qd = exponential(rng, spec.congestion_mean);
    double du = up.at(i) + qu;
    double dd = down.at(i) + qd;
    t.d_up[i] = du - e;
    t.d_down[i] = dd + e;
    t.rtt[i] = du + spec.d_srv + dd;
  }
  out.truth.r_min = spec.d_up_base + spec.d_srv + spec.d_down_base;
  out.truth.asym = spec.d_up_base - spec.d_down_base;
  out.truth.measured_asym = out.truth.asym - 2.0 * e;
  for (const auto& s : spec.up_shifts) out.truth.shift_indexes.push_back(s.index);
  for (const auto& s : spec.down_shifts) out.truth.shift_indexes.push_back(s.index);
  std::sort(out.truth.shift_indexes.begin(), out.truth.shift_indexes.end());
  return out;
}

DelayTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  DelayTrace t;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f = split_csv_row(line);
    double ta;
    if (first && !f.empty() && !parse_double(f[0], ta)) {
      first = false;  // header row
      continue;
    }
    first = false;
    std::ostringstream err;
    err << "trace row " << row << ": ";
    if (f.size() != 6) {
      err << "expected 6 fields, got " << f.size();
      throw std::runtime_error(err.str());
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!parse_double(f[i], v[i])) {
        err << "bad number in field " << i + 1;
        throw std::runtime_error(err.str());
      }
    }
    double stratum, valid;
    if (!parse_double(f[4], stratum) || !parse_double(f[5], valid)) {
      err << "bad flag field";
      throw std::runtime_error(err.str());
    }
    double t_a = v[0], t_si = v[1], t_so = v[2], t_f = v[3];
    t.d_up.push_back(t_si - t_a);
    t.d_srv.push_back(t_so - t_si);
    t.d_down.push_back(t_f - t_so);
    t.rtt.push_back(t_f - t_a);
    t.stratum1.push_back(stratum == 1.0 ? 1 : 0);
    t.usable.push_back(valid != 0.0 ? 1 : 0);
  }
  return t;
}

void write_cz_csv(const std::string& path, const std::string& server_id,
                  const DelayTrace& trace, const std::vector<ClearZone>& zones) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write zone file: " + path);
  out << "server,begin,end,valid_count,r_hat,a_hat,t_hat\n";
  for (const auto& z : zones) {
    CzEstimate e = estimate_cz(trace, z);
    out << server_id << ',' << z.begin << ',' << z.end << ',' << z.valid_count << ','
        << fmt(e.r_hat) << ',' << fmt(e.a_hat) << ',' << fmt(e.t_hat) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace asymclock::czdetect
