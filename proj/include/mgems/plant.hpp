#pragma once

#include <array>
#include <string>
#include <vector>

#include "mgems/scenario.hpp"

namespace mgems {

enum class EventKind {
    group_shed,
    microgrid_shutdown_unscheduled,
    microgrid_shutdown_scheduled,
    dg_start,
    dg_stop,
    restart
};

const char* to_string(EventKind k);

struct PlantEvent {
    EventKind kind;
    int minute = 0;
    int subject = -1;  // group index or dg index, -1 for microgrid-wide
    std::string cause;
};

// Outage lasting 30 minutes after an under-frequency trip.
constexpr int kUnscheduledShutdownMin = 30;

struct PlantState {
    std::vector<double> soc;        // per ES
    std::vector<double> fuel;       // per DG
    std::vector<uint8_t> group_on;  // per group
    std::vector<uint8_t> dg_on;     // per DG
    bool in_unscheduled_shutdown = false;
    int shutdown_remaining_min = 0;
    int minute = 0;  // minutes since restoration start

    static PlantState initial(const Scenario& scenario);
};

// First-slot commands extracted from a dispatch plan.
struct Commands {
    std::vector<uint8_t> group_on;               // per group
    std::vector<uint8_t> dg_on;                  // per DG
    std::vector<double> p_dg;                    // per DG, kW
    std::vector<std::array<double, kPhases>> p_es_gfl;  // per ES (GFM entries ignored)

    static Commands all_off(const Scenario& scenario);
};

// What actually happened during one real-time step.
struct StepResult {
    std::vector<uint8_t> served;  // per group, after protection
    double served_load_kw = 0.0;  // sum over served groups, all phases
    double served_pv_kw = 0.0;
    double p_dg_kw = 0.0;   // total DG output
    double p_gfl_kw = 0.0;  // total grid-following ES output
    double p_gfm_kw = 0.0;  // slack picked up by the grid-forming ES
    double q_gfm_kvar = 0.0;
    std::vector<PlantEvent> events;
};

// Advances the plant by one dt_rt step using the truth series at the state's
// current minute. The grid-forming ES absorbs the power imbalance; protection
// sheds groups (lowest weight first) when its rating or SoC bounds would be
// violated, and trips the whole microgrid for 30 minutes when shedding down to
// the last group is not enough.
StepResult plant_step(const Scenario& scenario, PlantState& state, const Commands& commands);

}  // namespace mgems
