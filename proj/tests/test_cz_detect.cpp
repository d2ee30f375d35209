#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "asymclock/cz_detect.hpp"
#include "doctest.h"

using namespace asymclock;
using namespace asymclock::czdetect;

namespace {

SynthSpec base_spec(std::size_t n) {
  SynthSpec s;
  s.length = n;
  s.d_up_base = 0.015625;
  s.d_down_base = 0.0078125;
  s.d_srv = 0.00390625;
  return s;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/asymclock_test_") + name;
}

}  // namespace

TEST_CASE("shift_window reference values") {
  CHECK(shift_window(1e-6, 0.02) == 684);
  CHECK(shift_window(1e-6, 0.05) == 270);
  CHECK(shift_window(1e-6, 0.2) == 62);
  // never below two samples
  CHECK(shift_window(0.5, 0.9999) == 2);
  CHECK_THROWS(shift_window(0.0, 0.1));
  CHECK_THROWS(shift_window(1.0, 0.1));
  CHECK_THROWS(shift_window(1e-6, 0.0));
  CHECK_THROWS(shift_window(1e-6, 1.0));
}

TEST_CASE("lsd window calibration from the series") {
  SUBCASE("constant series saturates p and shrinks the window") {
    std::vector<double> xs(1000, 0.25);
    LsdResult r = lsd(xs, {});
    CHECK(r.window == 2);
    CHECK(!r.short_series);
    CHECK(r.shifts.empty());
  }
  SUBCASE("half the samples above threshold") {
    std::vector<double> xs(1000);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = (i % 2) ? 1.0 : 0.0;
    LsdResult r = lsd(xs, {});
    // p = 0.5: ceil(ln 1e-6 / ln 0.5) = 20
    CHECK(r.window == 20);
    CHECK(r.shifts.empty());
  }
  SUBCASE("series shorter than two windows") {
    std::vector<double> xs(30);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = (i % 2) ? 1.0 : 0.0;
    LsdResult r = lsd(xs, {});
    CHECK(r.short_series);
    CHECK(r.shifts.empty());
  }
  SUBCASE("empty series") {
    LsdResult r = lsd({}, {});
    CHECK(r.short_series);
  }
  CHECK_THROWS(lsd(std::vector<double>(10, 0.0), LsdConfig{0.0, 1e-4}));
  CHECK_THROWS(lsd(std::vector<double>(10, 0.0), LsdConfig{1e-6, -1.0}));
}

TEST_CASE("lsd pinpoints a clean step") {
  // constant baseline, no noise; the step inflates deviations for one
  // calibration window (256 samples), which sets p and hence W
  std::vector<double> xs(400, 0.5);
  for (std::size_t i = 137; i < xs.size(); ++i) xs[i] = 0.5 + 0.01;
  LsdResult r = lsd(xs, {});
  // p = (137 + 8) / 400: ceil(ln 1e-6 / ln(1 - 0.3625)) = 31
  CHECK(r.window == 31);
  REQUIRE(r.shifts.size() == 1);
  CHECK(std::llabs(static_cast<long long>(r.shifts[0]) - 137) <=
        static_cast<long long>(r.window));

  SUBCASE("negative steps count too") {
    for (std::size_t i = 300; i < xs.size(); ++i) xs[i] -= 0.02;
    LsdResult r2 = lsd(xs, {});
    REQUIRE(r2.shifts.size() == 2);
    CHECK(std::llabs(static_cast<long long>(r2.shifts[1]) - 300) <=
          static_cast<long long>(r2.window));
  }

  SUBCASE("long series localize exactly") {
    std::vector<double> ys(6000, 0.5);
    for (std::size_t i = 3000; i < ys.size(); ++i) ys[i] = 0.5 + 0.01;
    LsdResult r3 = lsd(ys, {});
    // p = (6000 - 256) / 6000 -> W = 5; runs merge, first maximum wins
    CHECK(r3.window == 5);
    REQUIRE(r3.shifts.size() == 1);
    CHECK(r3.shifts[0] == 3000);
  }
}

TEST_CASE("lsd under congestion noise") {
  LsdConfig cfg;
  const std::size_t n = 2000;
  SUBCASE("step of ten lambda is found within one window") {
    Rng rng = make_rng(21, {1});
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> xs(n);
      std::size_t step = 700 + 30 * static_cast<std::size_t>(trial);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = 0.01 + (i >= step ? 10 * cfg.lambda : 0.0) + exponential(rng, 0.001);
      }
      LsdResult r = lsd(xs, cfg);
      REQUIRE(r.shifts.size() == 1);
      CHECK(std::llabs(static_cast<long long>(r.shifts[0]) - static_cast<long long>(step)) <=
            static_cast<long long>(r.window));
    }
  }
  SUBCASE("no step, no detections") {
    Rng rng = make_rng(21, {2});
    int false_hits = 0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> xs(n);
      for (double& x : xs) x = 0.01 + exponential(rng, 0.001);
      false_hits += !lsd(xs, cfg).shifts.empty();
    }
    CHECK(false_hits == 0);
  }
}

TEST_CASE("czd verdicts") {
  SUBCASE("constant block is clean") {
    Rng rng = make_rng(21, {3});
    SynthTrace st = synth_trace(base_spec(4000), rng);
    CHECK(czd(st.trace, 0, st.trace.size(), 1e-6));
  }
  SUBCASE("noisy shift-free block is clean") {
    Rng rng = make_rng(21, {4});
    SynthSpec sp = base_spec(4000);
    sp.congestion_mean = 0.001;
    SynthTrace st = synth_trace(sp, rng);
    CHECK(czd(st.trace, 0, st.trace.size(), 1e-6));
  }
  SUBCASE("up-direction shift flips the verdict") {
    Rng rng = make_rng(21, {5});
    SynthSpec sp = base_spec(4000);
    sp.congestion_mean = 0.001;
    sp.up_shifts.push_back({2000, 0.01});
    SynthTrace st = synth_trace(sp, rng);
    CHECK(!czd(st.trace, 0, st.trace.size(), 1e-6));
    // the pre-shift half is still clean
    CHECK(czd(st.trace, 0, 1900, 1e-6));
  }
  SUBCASE("down-direction shift flips the verdict") {
    Rng rng = make_rng(21, {6});
    SynthSpec sp = base_spec(4000);
    sp.congestion_mean = 0.001;
    sp.down_shifts.push_back({2000, -0.01});
    SynthTrace st = synth_trace(sp, rng);
    CHECK(!czd(st.trace, 0, st.trace.size(), 1e-6));
  }
  Rng rng = make_rng(21, {7});
  SynthTrace st = synth_trace(base_spec(10), rng);
  CHECK(!czd(st.trace, 0, 0, 1e-6));               // empty range
  CHECK_THROWS(czd(st.trace, 5, 20, 1e-6));        // out of range
  CHECK_THROWS(czd(st.trace, 7, 3, 1e-6));         // inverted
}

TEST_CASE("synth_trace ground truth") {
  SUBCASE("congestion-free series are constant") {
    Rng rng = make_rng(21, {8});
    SynthSpec sp = base_spec(100);
    sp.clock_offset = 0.001953125;
    SynthTrace st = synth_trace(sp, rng);
    for (std::size_t i = 0; i < st.trace.size(); ++i) {
      CHECK(st.trace.d_up[i] == sp.d_up_base - sp.clock_offset);
      CHECK(st.trace.d_down[i] == sp.d_down_base + sp.clock_offset);
      CHECK(st.trace.d_srv[i] == sp.d_srv);
      CHECK(st.trace.rtt[i] == sp.d_up_base + sp.d_srv + sp.d_down_base);
    }
    CHECK(st.truth.r_min == sp.d_up_base + sp.d_srv + sp.d_down_base);
    CHECK(st.truth.asym == sp.d_up_base - sp.d_down_base);
    CHECK(st.truth.measured_asym == st.truth.asym - 2.0 * sp.clock_offset);
  }
  SUBCASE("a shift moves the baseline by exactly its delta") {
    Rng rng = make_rng(21, {9});
    SynthSpec sp = base_spec(8000);
    sp.up_shifts.push_back({5000, 0.0009765625});
    SynthTrace st = synth_trace(sp, rng);
    CHECK(st.trace.d_up[5000] - st.trace.d_up[4999] == 0.0009765625);
    CHECK(st.trace.d_up[4999] == sp.d_up_base);
    CHECK(st.trace.d_up[5000] == sp.d_up_base + 0.0009765625);
    CHECK(st.truth.shift_indexes == std::vector<std::size_t>{5000});
  }
  SUBCASE("seeded determinism") {
    SynthSpec sp = base_spec(500);
    sp.congestion_mean = 0.001;
    Rng a = make_rng(33, {4, 2});
    Rng b = make_rng(33, {4, 2});
    SynthTrace ta = synth_trace(sp, a);
    SynthTrace tb = synth_trace(sp, b);
    CHECK(ta.trace.d_up == tb.trace.d_up);
    CHECK(ta.trace.d_down == tb.trace.d_down);
    CHECK(ta.trace.rtt == tb.trace.rtt);
  }
  Rng rng = make_rng(21, {10});
  CHECK_THROWS(synth_trace(SynthSpec{}, rng));  // empty
  SynthSpec bad = base_spec(10);
  bad.congestion_mean = -1.0;
  CHECK_THROWS(synth_trace(bad, rng));
}

TEST_CASE("estimate_cz") {
  SUBCASE("congestion-free recovery is exact") {
    Rng rng = make_rng(21, {11});
    SynthSpec sp = base_spec(200);
    sp.clock_offset = 0.001953125;
    SynthTrace st = synth_trace(sp, rng);
    CzEstimate e = estimate_cz(st.trace, {0, st.trace.size(), st.trace.size()});
    CHECK(e.r_hat == st.truth.r_min);
    CHECK(e.a_hat == st.truth.measured_asym);
    CHECK(e.t_hat == st.truth.measured_asym / st.truth.r_min);
  }
  SUBCASE("invalid samples are excluded from minima") {
    DelayTrace t;
    t.d_up = {0.5, 0.4375, 0.25};
    t.d_srv = {0.125, 0.125, 0.0625};
    t.d_down = {0.25, 0.3125, 0.125};
    t.rtt = {1.0, 0.875, 0.5};
    t.stratum1 = {1, 1, 0};
    t.usable = {1, 1, 1};
    CzEstimate e = estimate_cz(t, {0, 3, 2});
    CHECK(e.r_hat == 0.8125);   // sum of minima beats min rtt 0.875
    CHECK(e.a_hat == 0.1875);
    CHECK(e.t_hat == 0.1875 / 0.8125);
  }
  SUBCASE("rtt can be the binding minimum") {
    DelayTrace t;
    t.d_up = {0.5, 0.4375};
    t.d_srv = {0.125, 0.125};
    t.d_down = {0.25, 0.3125};
    t.rtt = {0.75, 0.875};
    t.stratum1 = {1, 1};
    t.usable = {1, 1};
    CzEstimate e = estimate_cz(t, {0, 2, 2});
    CHECK(e.r_hat == 0.75);
  }
  SUBCASE("congestion bias is bounded by the minimum order statistic") {
    Rng rng = make_rng(21, {12});
    SynthSpec sp = base_spec(10000);
    sp.congestion_mean = 0.001;
    SynthTrace st = synth_trace(sp, rng);
    CzEstimate e = estimate_cz(st.trace, {0, st.trace.size(), st.trace.size()});
    // min of n iid Exp(mu) is Exp(mu/n): |a_hat - truth| exceeds t with
    // probability exp(-t n / mu); 20 mu / n keeps that below 1e-8
    double tol = 20.0 * sp.congestion_mean / static_cast<double>(sp.length);
    CHECK(std::abs(e.a_hat - st.truth.measured_asym) <= tol);
    CHECK(e.r_hat >= st.truth.r_min);
    CHECK(e.r_hat <= st.truth.r_min + 2.0 * tol);
  }
  SUBCASE("symmetric paths estimate near-zero asymmetry") {
    Rng rng = make_rng(21, {13});
    SynthSpec sp = base_spec(10000);
    sp.d_down_base = sp.d_up_base;
    sp.congestion_mean = 0.001;
    double mean = 0.0;
    const int reps = 100;
    for (int i = 0; i < reps; ++i) {
      SynthTrace st = synth_trace(sp, rng);
      mean += estimate_cz(st.trace, {0, st.trace.size(), st.trace.size()}).a_hat;
    }
    mean /= reps;
    CHECK(std::abs(mean) < 1e-7);
  }
  DelayTrace t;
  t.d_up = {0.5};
  t.d_srv = {0.1};
  t.d_down = {0.25};
  t.rtt = {0.9};
  t.stratum1 = {0};
  t.usable = {1};
  CHECK_THROWS(estimate_cz(t, {0, 1, 0}));  // no valid samples
  CHECK_THROWS(estimate_cz(t, {0, 5, 0}));  // out of range
}

TEST_CASE("harvest") {
  HarvestConfig cfg;
  SUBCASE("shift-free trace is covered nearly whole") {
    Rng rng = make_rng(21, {14});
    SynthSpec sp = base_spec(200000);
    sp.congestion_mean = 0.001;
    SynthTrace st = synth_trace(sp, rng);
    std::vector<ClearZone> zones = harvest(st.trace, cfg);
    std::size_t covered = 0, prev_end = 0;
    for (const auto& z : zones) {
      CHECK(z.begin >= prev_end);  // disjoint, ordered
      CHECK(czd(st.trace, z.begin, z.end, cfg.alpha));
      CHECK(z.valid_count >= cfg.min_valid_samples);
      covered += z.end - z.begin;
      prev_end = z.end;
    }
    CHECK(covered >= static_cast<std::size_t>(0.95 * static_cast<double>(sp.length)));
  }
  SUBCASE("zones avoid injected shifts") {
    Rng rng = make_rng(21, {15});
    SynthSpec sp = base_spec(200000);
    sp.congestion_mean = 0.001;
    std::vector<std::size_t> steps = {13400, 37860, 52110, 76550, 91020,
                                      113480, 138700, 153260, 177420, 191870};
    for (std::size_t i = 0; i < steps.size(); ++i) {
      double delta = (i % 2 ? -0.01 : 0.01);
      if (i % 3 == 0) sp.down_shifts.push_back({steps[i], delta});
      else sp.up_shifts.push_back({steps[i], delta});
    }
    SynthTrace st = synth_trace(sp, rng);
    std::vector<ClearZone> zones = harvest(st.trace, cfg);
    CHECK(!zones.empty());
    for (const auto& z : zones) {
      CHECK(czd(st.trace, z.begin, z.end, cfg.alpha));
      for (std::size_t s : st.truth.shift_indexes) {
        CHECK(!(z.begin < s && s < z.end));  // never straddles a shift
      }
    }
  }
  SUBCASE("valid-sample floor filters zones") {
    Rng rng = make_rng(21, {16});
    SynthSpec sp = base_spec(2000);
    sp.congestion_mean = 0.001;
    SynthTrace st = synth_trace(sp, rng);
    // knock out stratum-1 on the first half: those blocks fall short
    for (std::size_t i = 0; i < 1000; ++i) st.trace.stratum1[i] = 0;
    HarvestConfig small = cfg;
    small.coarse_blocks = 10;
    std::vector<ClearZone> zones = harvest(st.trace, small);
    for (const auto& z : zones) {
      CHECK(z.begin >= 1000);
      CHECK(z.valid_count == z.end - z.begin);
    }
    CHECK(!zones.empty());
  }
  SUBCASE("short trace yields nothing") {
    Rng rng = make_rng(21, {17});
    SynthTrace st = synth_trace(base_spec(80), rng);
    CHECK(harvest(st.trace, cfg).empty());
  }
  SUBCASE("empty trace") {
    DelayTrace t;
    CHECK(harvest(t, cfg).empty());
  }
}

TEST_CASE("trace csv round trip") {
  std::string path = temp_path("trace.csv");
  {
    std::ofstream out(path);
    out << "t_a,t_si,t_so,t_f,stratum,valid\n";
    out << "0,0.015625,0.017578125,0.02734375,1,1\n";
    out << "0.5,0.517578125,0.51953125,0.53125,1,0\n";
    out << "1,1.015625,1.015625,1.0234375,2,1\n";
  }
  DelayTrace t = read_trace_csv(path);
  REQUIRE(t.size() == 3);
  CHECK(t.d_up[0] == 0.015625);
  CHECK(t.d_srv[0] == 0.001953125);
  CHECK(t.d_down[0] == 0.009765625);
  CHECK(t.rtt[0] == 0.02734375);
  CHECK(t.d_up[1] == 0.017578125);
  CHECK(t.stratum1[0] == 1);
  CHECK(t.usable[1] == 0);
  CHECK(t.stratum1[2] == 0);  // stratum 2 is not the reference stratum
  CHECK(t.usable[2] == 1);
  std::remove(path.c_str());
}

TEST_CASE("trace csv errors name the row") {
  std::string path = temp_path("trace_bad.csv");
  SUBCASE("wrong field count") {
    {
      std::ofstream out(path);
      out << "t_a,t_si,t_so,t_f,stratum,valid\n";
      out << "0,0.1,0.2,0.3,1,1\n";
      out << "0,0.1,0.2,0.3,1\n";
    }
    CHECK_THROWS_WITH_AS(read_trace_csv(path), doctest::Contains("row 3"), std::runtime_error);
  }
  SUBCASE("non-numeric field") {
    {
      std::ofstream out(path);
      out << "0,0.1,0.2,0.3,1,1\n";
      out << "0,oops,0.2,0.3,1,1\n";
    }
    CHECK_THROWS_WITH_AS(read_trace_csv(path), doctest::Contains("row 2"), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS(read_trace_csv(temp_path("no_such_file.csv")));
  }
  std::remove(path.c_str());
}

TEST_CASE("zone csv output") {
  Rng rng = make_rng(21, {18});
  SynthSpec sp = base_spec(300);
  SynthTrace st = synth_trace(sp, rng);
  std::vector<ClearZone> zones = {{0, 150, 150}, {150, 300, 150}};
  std::string path = temp_path("zones.csv");
  write_cz_csv(path, "srv-7", st.trace, zones);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "server,begin,end,valid_count,r_hat,a_hat,t_hat");
  REQUIRE(std::getline(in, line));
  CzEstimate e = estimate_cz(st.trace, zones[0]);
  char want[256];
  std::snprintf(want, sizeof want, "srv-7,0,150,150,%.12g,%.12g,%.12g", e.r_hat, e.a_hat, e.t_hat);
  CHECK(line == want);
  REQUIRE(std::getline(in, line));
  CHECK(line.substr(0, 14) == "srv-7,150,300,");
  CHECK(!std::getline(in, line));
  std::remove(path.c_str());
}
