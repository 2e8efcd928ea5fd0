#pragma once

#include <numbers>
#include <random>

#include "mgems/scenario.hpp"

// Small in-memory scenarios for the model tests. Everything is balanced
// three-phase unless a test perturbs it.

namespace fixtures {

using namespace mgems;

inline double unit(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

struct MiniSpec {
    int groups = 1;
    int slots = 48;            // restoration length in scheduling slots
    double load_kw = 300.0;    // per group, all phases
    double pv_kw = 0.0;        // per group
    double es_kva = 2000.0;
    double es_kwh = 8000.0;
    double soc_init = 0.5;
    double dg_kva = 4000.0;
    double dg_fuel = 10000.0;
    bool with_dg = true;
    bool chain_parents = false;
};

// Constant-profile scenario; forecast frames equal the truth means exactly.
inline Scenario mini_scenario(const MiniSpec& ms) {
    Scenario sc;
    sc.name = "mini";
    sc.grids.dt_sched_min = 30;
    sc.grids.dt_disp_min = 5;
    sc.grids.dt_rt_min = 1;
    sc.grids.horizon_sched = 48;
    sc.grids.horizon_disp = 6;
    sc.grids.start_min = parse_iso_minutes("2024-07-01T00:00:00");
    sc.grids.total_min = ms.slots * 30;
    sc.grids.days = (sc.grids.total_min + 1439) / 1440;

    for (int g = 0; g < ms.groups; ++g) {
        LoadGroupSpec lg;
        lg.id = g + 1;
        lg.weight = 0.1 + 0.1 * g;
        if (ms.chain_parents && g > 0) lg.parent = g;
        lg.nodes = {10 * (g + 1)};
        sc.groups.push_back(lg);
    }

    EsSpec es;
    es.id = "es1";
    es.kva_rating = ms.es_kva;
    es.energy_kwh = ms.es_kwh;
    es.soc_min = 0.1;
    es.soc_max = 0.9;
    es.soc_init = ms.soc_init;
    es.efficiency = 0.95;
    es.grid_forming = true;
    sc.es_units.push_back(es);

    if (ms.with_dg) {
        DgSpec dg;
        dg.id = "dg1";
        dg.kva_rating = ms.dg_kva;
        dg.pf_angle = std::acos(0.95);
        dg.fuel_init = ms.dg_fuel;
        dg.fuel_min = 0.0;
        dg.fuel_max = ms.dg_fuel;
        dg.fuel_final = 500.0;
        dg.idle_lph = 84.87;
        dg.prop_lpkwh = 0.20;
        dg.startup_cost = 6.0;
        dg.min_up_slots = 2;
        sc.dg_units.push_back(dg);
    }

    const double tanphi = std::tan(std::acos(sc.policy.q_power_factor));
    // Mild per-slot ramp (multiplier 1.0 at slot 0) so scheduling models are
    // not slot-symmetric; flat profiles make the MILP degenerate in ways no
    // real feeder is. Constant within each scheduling slot across all grids.
    auto ramp = [&](int minute) {
        const int s1 = minute / sc.grids.dt_sched_min;
        return 1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * s1 / 7.0);
    };
    auto fill = [&](TimeSeriesFrame& f, int step, SeriesKind kind) {
        f.kind = kind;
        f.step_min = step;
        f.start_min = sc.grids.start_min;
        f.slots = sc.grids.total_min / step;
        for (int g = 0; g < ms.groups; ++g) {
            auto& ns = f.node(10 * (g + 1));
            for (int p = 0; p < kPhases; ++p)
                for (int s = 0; s < f.slots; ++s) {
                    const double m = ramp(s * step);
                    ns.load_kw[p][s] = ms.load_kw / 3.0 * m;
                    ns.pv_kw[p][s] = ms.pv_kw / 3.0;
                    ns.q_kvar[p][s] = ms.load_kw / 3.0 * m * tanphi;
                }
        }
    };
    fill(sc.truth, 1, SeriesKind::truth);
    fill(sc.fc_stage1, 30, SeriesKind::stage1_forecast);
    fill(sc.fc_stage2, 5, SeriesKind::stage2_forecast);
    sc.validate();
    return sc;
}

// Random small scenario with unbalanced phases, for the property suites.
inline Scenario random_scenario(std::mt19937_64& rng, int max_groups = 4,
                                int max_slots = 12) {
    MiniSpec ms;
    ms.groups = 1 + int(unit(rng) * max_groups);
    if (ms.groups > max_groups) ms.groups = max_groups;
    ms.slots = 48;  // grids require a 24h horizon; windows may be shorter
    ms.chain_parents = unit(rng) < 0.5;
    ms.es_kva = 500.0 + unit(rng) * 2000.0;
    ms.es_kwh = 2000.0 + unit(rng) * 8000.0;
    ms.soc_init = 0.3 + unit(rng) * 0.4;
    ms.with_dg = unit(rng) < 0.8;
    ms.dg_kva = 1000.0 + unit(rng) * 3000.0;
    ms.dg_fuel = 2000.0 + unit(rng) * 8000.0;
    Scenario sc = mini_scenario(ms);
    (void)max_slots;

    std::mt19937_64 noise(rng());
    for (auto* frame : {&sc.fc_stage1, &sc.fc_stage2, &sc.truth}) {
        for (auto& [id, ns] : frame->nodes) {
            std::mt19937_64 node_rng(id * 7919 + 13);  // same base pattern per node
            for (int s = 0; s < frame->slots; ++s) {
                // piecewise-constant at 30 min so all grids agree
                std::mt19937_64 slot_rng(id * 104729 + (s * frame->step_min / 30) * 31 + 7);
                for (int p = 0; p < kPhases; ++p) {
                    const double load = 40.0 + unit(slot_rng) * 250.0;
                    const double pv = unit(slot_rng) * 150.0;
                    ns.load_kw[p][s] = load;
                    ns.pv_kw[p][s] = pv;
                    ns.q_kvar[p][s] = load * 0.3;
                }
            }
        }
        (void)noise;
    }
    return sc;
}

}  // namespace fixtures
