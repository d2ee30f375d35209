#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "asymclock/rng.hpp"

namespace asymclock::czdetect {

// Per-exchange delay series derived from raw timestamps, seconds. d_up and
// d_down are as measured by the client clock: a constant client offset E
// shifts d_up by -E and d_down by +E; rtt and d_srv are offset-free.
struct DelayTrace {
  std::vector<double> d_up, d_srv, d_down, rtt;
  std::vector<std::uint8_t> stratum1;  // server advertised the reference stratum
  std::vector<std::uint8_t> usable;    // not excluded by the fault catalogue
  std::size_t size() const { return d_up.size(); }
};

struct ClearZone {
  std::size_t begin = 0, end = 0;  // [begin, end) sample indexes
  std::size_t valid_count = 0;
};

struct LsdConfig {
  double alpha = 1e-6;   // window-level false-positive probability
  double lambda = 1e-4;  // shift threshold, seconds
};

struct LsdResult {
  std::vector<std::size_t> shifts;  // one index per detected level shift
  std::size_t window = 0;
  bool short_series = false;  // fewer than two windows of samples
};

// Smallest W with (1 - p)^W <= alpha: W consecutive above-threshold samples
// are misread as a shift with probability at most alpha.
std::size_t shift_window(double alpha, double p);

// Level-shift detection: compares the minimum over a trailing window of W
// samples against the preceding window; a shift is declared where the
// difference exceeds lambda. W is sized from alpha and the series' observed
// threshold probability p(lambda). Detection runs of the same shift are
// merged; the reported index maximizes the statistic.
LsdResult lsd(const std::vector<double>& series, const LsdConfig& cfg);

// True when neither direction of trace[begin, end) shows a level shift at any
// of the three thresholds calibrated to p(lambda) = 0.02, 0.05, 0.2. A
// threshold whose window does not fit the block contributes no detections.
bool czd(const DelayTrace& trace, std::size_t begin, std::size_t end, double alpha);

struct HarvestConfig {
  double alpha = 1e-6;
  double partition_lambda = 1e-4;  // threshold of the partitioning pass
  std::size_t coarse_blocks = 200;
  std::size_t min_valid_samples = 100;
};

// Coarse blocks are tested whole; failed blocks are partitioned at detected
// shifts (one window trimmed on each side) and the pieces retested. Zones
// need min_valid_samples valid samples, valid = stratum1 && usable.
std::vector<ClearZone> harvest(const DelayTrace& trace, const HarvestConfig& cfg);

struct CzEstimate {
  double r_hat, a_hat, t_hat;
};

// Minima over valid samples of the zone:
// r_hat = min(min d_up + min d_srv + min d_down, min rtt),
// a_hat = min d_up - min d_down, t_hat = a_hat / r_hat.
CzEstimate estimate_cz(const DelayTrace& trace, const ClearZone& zone);

struct LevelShift {
  std::size_t index;  // first sample with the new baseline
  double delta;
};

struct SynthSpec {
  std::size_t length = 0;
  double d_up_base = 0.0, d_down_base = 0.0, d_srv = 0.0;
  double congestion_mean = 0.0;
  double clock_offset = 0.0;
  std::vector<LevelShift> up_shifts, down_shifts;
};

struct SynthTruth {
  double r_min = 0.0, asym = 0.0;
  double measured_asym = 0.0;  // asym - 2 * clock_offset, what minima recover
  std::vector<std::size_t> shift_indexes;  // both directions, sorted
};

struct SynthTrace {
  DelayTrace trace;
  SynthTruth truth;
};

SynthTrace synth_trace(const SynthSpec& spec, Rng& rng);

// Exchange CSV, one row per exchange: t_a, t_si, t_so, t_f, stratum, valid.
// An optional header row is skipped. Malformed rows raise with the row number.
DelayTrace read_trace_csv(const std::string& path);

// Zone catalogue CSV: server, begin, end, valid_count, r_hat, a_hat, t_hat.
void write_cz_csv(const std::string& path, const std::string& server_id,
                  const DelayTrace& trace, const std::vector<ClearZone>& zones);

}  // namespace asymclock::czdetect
