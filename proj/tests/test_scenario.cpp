#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "mgems/scenario.hpp"
#include "mgems/synth.hpp"

using namespace mgems;
namespace fs = std::filesystem;

namespace {

// A 24h single-group config with CSV series on disk.
fs::path write_minimal_config(const fs::path& dir, int pv_hours = 24) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "truth.csv");
        out << "timestamp,node,phase,load_kw,pv_kw\n";
        for (int s = 0; s < 24 * 60; s += 30)  // 30-min truth, upsampled by the loader
            for (int p = 1; p <= 3; ++p) {
                const int64_t m = parse_iso_minutes("2024-07-01T00:00:00") + s;
                out << format_iso_minutes(m) << ",10," << p << ",100,"
                    << (s < pv_hours * 60 ? 20 : 20) << "\n";
            }
    }
    for (const char* name : {"stage1.csv", "stage2.csv"}) {
        std::ofstream out(dir / name);
        out << "timestamp,node,phase,load_kw,pv_kw\n";
        const int last_min = pv_hours * 60;
        for (int s = 0; s < last_min; s += 30)
            for (int p = 1; p <= 3; ++p) {
                const int64_t m = parse_iso_minutes("2024-07-01T00:00:00") + s;
                out << format_iso_minutes(m) << ",10," << p << ",100,20\n";
            }
    }
    std::ofstream out(dir / "scenario.json");
    out << R"({
  "grids": {"dt_sched_min": 30, "dt_disp_min": 5, "dt_rt_min": 1,
            "start": "2024-07-01T00:00:00", "end": "2024-07-02T00:00:00"},
  "groups": [{"id": 1, "weight": 0.4, "nodes": [10], "critical_nodes": []}],
  "resources": {
    "es": [{"id": "mes", "kva": 2000, "kwh": 8000, "soc_init": 0.5}],
    "dg": [{"id": "dg", "kva": 4000, "fuel_init": 10000, "fuel_max": 10000,
            "fuel_final": 500}]
  },
  "policy": {"reserve_mode": "fixed", "gamma_fixed": 0.8},
  "series": {"truth": "truth.csv", "stage1": "stage1.csv", "stage2": "stage2.csv"}
})";
    return dir / "scenario.json";
}

}  // namespace

TEST_CASE("load_scenario: minimal config gives a 48-slot day") {
    const auto dir = fs::temp_directory_path() / "mgems_cfg_min";
    const auto cfg = write_minimal_config(dir);
    Scenario sc = load_scenario(cfg.string());
    CHECK(sc.grids.sched_slots() == 48);
    CHECK(sc.grids.total_min == 1440);
    CHECK(sc.groups.size() == 1);
    CHECK(sc.es_units.size() == 1);
    // upsampled truth sits on the 1-min grid
    CHECK(sc.truth.step_min == 1);
    CHECK(sc.truth.slots == 1440);
    CHECK(sc.es_units[0].kva_rating == 2000.0);
    CHECK(sc.dg_units[0].fuel_init == 10000.0);
}

TEST_CASE("load_scenario: series stopping early is a coverage error naming the issue") {
    const auto dir = fs::temp_directory_path() / "mgems_cfg_short";
    const auto cfg = write_minimal_config(dir, 20);  // forecasts stop at hour 20
    try {
        load_scenario(cfg.string());
        FAIL("expected a coverage error");
    } catch (const ScenarioError& e) {
        CHECK(e.code() == "series.coverage");
    }
}

TEST_CASE("load_scenario: missing file") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/nowhere.json"), IoError);
}

TEST_CASE("validate: type invariants become coded errors") {
    Scenario sc = fixtures::mini_scenario({});
    SUBCASE("bad soc bounds") {
        sc.es_units[0].soc_min = 0.9;
        sc.es_units[0].soc_max = 0.2;
        try {
            sc.validate();
            FAIL("expected");
        } catch (const ScenarioError& e) {
            CHECK(e.code() == "es.soc_bounds");
        }
    }
    SUBCASE("fuel ordering") {
        sc.dg_units[0].fuel_init = -5;
        try {
            sc.validate();
            FAIL("expected");
        } catch (const ScenarioError& e) {
            CHECK(e.code() == "dg.fuel_bounds");
        }
    }
    SUBCASE("non-positive weight") {
        sc.groups[0].weight = 0.0;
        try {
            sc.validate();
            FAIL("expected");
        } catch (const ScenarioError& e) {
            CHECK(e.code() == "group.weight");
        }
    }
}

TEST_CASE("validate: parent cycles rejected") {
    Scenario sc = fixtures::mini_scenario({.groups = 3, .chain_parents = true});
    sc.groups[0].parent = 3;  // 1 -> 3 -> 2 -> 1
    try {
        sc.validate();
        FAIL("expected");
    } catch (const ScenarioError& e) {
        CHECK(e.code() == "group.cycle");
    }
}

TEST_CASE("synthetic generator: table-style resources and determinism") {
    SynthSpec spec;
    spec.days = 1;
    Scenario a = generate_synthetic_scenario(spec, 42);
    Scenario b = generate_synthetic_scenario(spec, 42);
    CHECK(a.groups.size() == 5);
    CHECK(a.es_units[0].kva_rating == 2000.0);
    CHECK(a.es_units[0].energy_kwh == 8000.0);
    CHECK(a.dg_units[0].kva_rating == 4000.0);
    CHECK(a.dg_units[0].fuel_init == 10000.0);
    int crit = 0;
    for (const auto& g : a.groups) crit += int(g.critical_nodes.size());
    CHECK(crit == 3);
    // same seed, same bytes
    for (const auto& [id, ns] : a.truth.nodes) {
        const auto* other = b.truth.find(id);
        REQUIRE(other != nullptr);
        for (int p = 0; p < kPhases; ++p)
            for (int s = 0; s < a.truth.slots; ++s) {
                REQUIRE(ns.load_kw[p][s] == other->load_kw[p][s]);
                REQUIRE(ns.pv_kw[p][s] == other->pv_kw[p][s]);
            }
    }
}

TEST_CASE("synthetic generator: zero knobs make forecasts equal resampled truth") {
    SynthSpec spec;
    spec.days = 1;
    Scenario sc = generate_synthetic_scenario(spec, 7);
    TimeSeriesFrame expect = resample(sc.truth, 30);
    for (const auto& [id, ns] : sc.fc_stage1.nodes) {
        const auto* e = expect.find(id);
        for (int p = 0; p < kPhases; ++p)
            for (int s = 0; s < sc.fc_stage1.slots; ++s) {
                REQUIRE(ns.load_kw[p][s] == e->load_kw[p][s]);
                REQUIRE(ns.pv_kw[p][s] == e->pv_kw[p][s]);
            }
    }
}

TEST_CASE("synthetic generator: pv bias energy equals the constructed error") {
    SynthSpec plain, biased;
    plain.days = 1;
    biased.days = 1;
    biased.pv_bias_frac = 0.2;
    Scenario a = generate_synthetic_scenario(plain, 9);
    Scenario c = generate_synthetic_scenario(biased, 9);
    double pv_plain = 0, err = 0;
    for (int s = 0; s < a.fc_stage1.slots; ++s) {
        for (const auto& [id, ns] : a.fc_stage1.nodes)
            for (int p = 0; p < kPhases; ++p) pv_plain += ns.pv_kw[p][s];
        const double net_a = a.net_load(a.fc_stage1, s);
        const double net_c = c.net_load(c.fc_stage1, s);
        err += net_a - net_c;  // biased forecast has lower net load
    }
    CHECK(err == doctest::Approx(0.2 * pv_plain).epsilon(1e-9));
}

TEST_CASE("synthetic generator: save and reload round trip") {
    SynthSpec spec;
    spec.days = 1;
    spec.cloud_spikes_per_day = 4;
    Scenario sc = generate_synthetic_scenario(spec, 5);
    const auto dir = fs::temp_directory_path() / "mgems_synth_save";
    save_scenario(sc, dir.string());
    Scenario back = load_scenario((dir / "scenario.json").string());
    CHECK(back.groups.size() == sc.groups.size());
    CHECK(back.grids.total_min == sc.grids.total_min);
    CHECK(back.truth.slots == sc.truth.slots);
    for (const auto& [id, ns] : sc.truth.nodes) {
        const auto* o = back.truth.find(id);
        REQUIRE(o != nullptr);
        for (int s = 0; s < sc.truth.slots; s += 97)
            CHECK(ns.load_kw[0][s] == doctest::Approx(o->load_kw[0][s]).epsilon(1e-9));
    }
}
