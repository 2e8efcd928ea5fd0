#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "mgems/timeseries.hpp"

using namespace mgems;

namespace {

TimeSeriesFrame make_frame(int step, int slots, int node = 1) {
    TimeSeriesFrame f;
    f.step_min = step;
    f.slots = slots;
    f.start_min = 0;
    f.node(node);
    return f;
}

}  // namespace

TEST_CASE("resample: constant series is invariant both ways") {
    TimeSeriesFrame f = make_frame(1, 60);
    for (int t = 0; t < 60; ++t)
        for (int p = 0; p < kPhases; ++p) f.node(1).load_kw[p][t] = 100.0;
    TimeSeriesFrame down = resample(f, 30);
    REQUIRE(down.slots == 2);
    CHECK(down.node(1).load_kw[0][0] == doctest::Approx(100.0));
    CHECK(down.node(1).load_kw[0][1] == doctest::Approx(100.0));
}

TEST_CASE("resample: mean downsampling (15 min at 60, 15 min at 120 -> 90)") {
    TimeSeriesFrame f = make_frame(1, 30);
    for (int t = 0; t < 30; ++t) f.node(1).load_kw[0][t] = t < 15 ? 60.0 : 120.0;
    TimeSeriesFrame down = resample(f, 30);
    REQUIRE(down.slots == 1);
    // oracle: arithmetic mean of the minute values
    double mean = 0;
    for (int t = 0; t < 30; ++t) mean += f.node(1).load_kw[0][t];
    mean /= 30;
    CHECK(down.node(1).load_kw[0][0] == doctest::Approx(mean));
    CHECK(mean == doctest::Approx(90.0));
}

TEST_CASE("resample: constant hold on upsample") {
    TimeSeriesFrame f = make_frame(30, 1);
    f.node(1).load_kw[0][0] = 80.0;
    TimeSeriesFrame up = resample(f, 5);
    REQUIRE(up.slots == 6);
    for (int t = 0; t < 6; ++t) CHECK(up.node(1).load_kw[0][t] == 80.0);
}

TEST_CASE("resample: incompatible steps rejected") {
    TimeSeriesFrame f = make_frame(7, 10);
    CHECK_THROWS_AS(resample(f, 30), ScenarioError);
}

TEST_CASE("property: downsample(upsample(f)) recovers f") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        TimeSeriesFrame f = make_frame(30, 16);
        for (int p = 0; p < kPhases; ++p)
            for (int s = 0; s < 16; ++s) {
                f.node(1).load_kw[p][s] = (rng() >> 11) * 0x1.0p-53 * 500.0;
                f.node(1).pv_kw[p][s] = (rng() >> 11) * 0x1.0p-53 * 300.0;
            }
        TimeSeriesFrame round = resample(resample(f, 5), 30);
        for (int p = 0; p < kPhases; ++p)
            for (int s = 0; s < 16; ++s) {
                CHECK(round.node(1).load_kw[p][s] ==
                      doctest::Approx(f.node(1).load_kw[p][s]).epsilon(1e-12));
                CHECK(round.node(1).pv_kw[p][s] ==
                      doctest::Approx(f.node(1).pv_kw[p][s]).epsilon(1e-12));
            }
    }
}

TEST_CASE("series csv round trip") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "mgems_ts_test";
    fs::create_directories(dir);
    const auto path = (dir / "series.csv").string();

    TimeSeriesFrame f = make_frame(30, 4, 42);
    f.start_min = parse_iso_minutes("2024-07-01T00:00:00");
    for (int s = 0; s < 4; ++s) {
        f.node(42).load_kw[0][s] = 10.0 * (s + 1);
        f.node(42).pv_kw[1][s] = 3.5 * s;
        f.node(42).q_kvar[0][s] = 1.25;
    }
    write_series_csv(path, f, true);
    TimeSeriesFrame g = read_series_csv(path, SeriesKind::truth, 0.95);
    REQUIRE(g.slots == 4);
    CHECK(g.step_min == 30);
    CHECK(g.start_min == f.start_min);
    for (int s = 0; s < 4; ++s) {
        CHECK(g.node(42).load_kw[0][s] == f.node(42).load_kw[0][s]);
        CHECK(g.node(42).pv_kw[1][s] == f.node(42).pv_kw[1][s]);
        CHECK(g.node(42).q_kvar[0][s] == f.node(42).q_kvar[0][s]);
    }
}

TEST_CASE("series csv: q derived from power factor when absent") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "mgems_ts_test";
    fs::create_directories(dir);
    const auto path = (dir / "noq.csv").string();
    {
        std::ofstream out(path);
        out << "timestamp,node,phase,load_kw,pv_kw\n";
        out << "2024-07-01T00:00:00,1,1,95,0\n";
    }
    TimeSeriesFrame f = read_series_csv(path, SeriesKind::truth, 0.95);
    const double expect = 95.0 * std::tan(std::acos(0.95));
    CHECK(f.node(1).q_kvar[0][0] == doctest::Approx(expect));
}

TEST_CASE("iso timestamps parse and format") {
    const int64_t m = parse_iso_minutes("2024-07-01T06:30:00");
    CHECK(format_iso_minutes(m) == "2024-07-01T06:30:00");
    CHECK(parse_iso_minutes("2024-07-01 06:30") == m);
    CHECK_THROWS_AS(parse_iso_minutes("not-a-time"), ScenarioError);
    CHECK_THROWS_AS(parse_iso_minutes("2024-07-01T06:30:30"), ScenarioError);
}
