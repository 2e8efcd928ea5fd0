#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mgems/timeseries.hpp"

namespace mgems {

// The three nested control grids: scheduling step dt_sched, dispatch step
// dt_disp, real-time plant step dt_rt. dt_sched is a multiple of dt_disp,
// dt_disp a multiple of dt_rt.
struct TimeGrids {
    int dt_sched_min = 30;
    int dt_disp_min = 5;
    int dt_rt_min = 1;
    int horizon_sched = 48;  // scheduler window length in dt_sched slots
    int horizon_disp = 6;    // dispatcher window length in dt_disp slots
    int days = 2;
    int64_t start_min = 0;   // restoration start, minutes since epoch
    int total_min = 2880;    // restoration length in minutes

    int sched_slots() const { return total_min / dt_sched_min; }
    int disp_slots() const { return total_min / dt_disp_min; }
    int slots_per_day() const { return 1440 / dt_sched_min; }
    double dt_sched_hours() const { return dt_sched_min / 60.0; }
    double dt_disp_hours() const { return dt_disp_min / 60.0; }
};

struct LoadGroupSpec {
    int id = 0;
    double weight = 0.0;         // w_n, service priority
    double switch_weight = 0.0;  // w_n_sw; <= 0 means "derive the default"
    std::optional<int> parent;   // upstream group, radiality precedence
    std::vector<int> nodes;
    std::vector<int> critical_nodes;
};

struct EsSpec {
    std::string id;
    double kva_rating = 0.0;   // inverter apparent-power limit
    double energy_kwh = 0.0;   // usable energy rating
    double soc_min = 0.0, soc_max = 1.0, soc_init = 0.5;
    double efficiency = 0.95;
    bool grid_forming = true;
    double p_charge_max = -1.0;  // charge-side kW limit; < 0 means kva_rating
    double q_max = -1.0;         // kvar bound; < 0 means kva_rating
    std::optional<int> host_group;  // switch the unit sits behind, if any

    double charge_limit() const { return p_charge_max < 0 ? kva_rating : p_charge_max; }
    double q_limit() const { return q_max < 0 ? kva_rating : q_max; }
};

struct DgSpec {
    std::string id;
    double kva_rating = 0.0;
    double kva_min = 0.0;
    double pf_angle = 0.0;  // radians; output held at this power factor
    double fuel_init = 0.0, fuel_min = 0.0, fuel_max = 0.0;
    double fuel_final = 0.0;   // reserve to keep at restoration end
    double idle_lph = 0.0;     // liters/hour while running
    double prop_lpkwh = 0.0;   // liters/kWh of output
    double startup_cost = 0.0;
    int min_up_slots = 2;      // dt_sched slots
    std::optional<int> host_group;

    double p_max() const { return kva_rating * std::cos(pf_angle); }
    double p_min() const { return kva_min * std::cos(pf_angle); }
};

enum class ReserveMode { fixed, netload_fraction, dynamic_ma };
enum class FuelMode { fixed_target, rationed };

struct PolicyConfig {
    ReserveMode reserve_mode = ReserveMode::fixed;
    double gamma_fixed = 0.8;
    double netload_fraction = 0.2;
    double reserve_alpha = 0.05;    // minimum reserve fraction, Algorithm line 5
    double gamma_lo = 0.5, gamma_hi = 0.95;
    bool correction_enabled = false;
    int correction_window = 10;     // K, dt_sched slots
    int ma_order = 3;               // q
    int ma_fit_window = 12;         // dt_sched slots
    FuelMode fuel_mode = FuelMode::rationed;
    double fuel_fixed_target = 500.0;  // liters, fixed-target mode
    int msd_slots = 4;              // minimum service duration, dt_sched slots
    double q_power_factor = 0.95;   // used when q_kvar absent from input
    bool soc_rationing = false;     // apply the fuel interpolation to GFL SoC
    double dg_dev_weight = 1.0;  // stage-2 DG tracking penalty weight
    // Relative gap for the scheduling MILP. The rolling loop re-solves every
    // cycle, so a percent of schedule optimality buys a large speedup;
    // dispatch solves always run at the kernel's tight default.
    double milp_gap = 1e-2;
    // Nodes per scheduling solve before settling for the incumbent; the loop
    // carries on with a near-optimal schedule rather than stalling.
    long milp_node_limit = 150;
};

struct Scenario {
    std::string name;
    TimeGrids grids;
    std::vector<LoadGroupSpec> groups;
    std::vector<EsSpec> es_units;
    std::vector<DgSpec> dg_units;
    PolicyConfig policy;
    TimeSeriesFrame truth;      // at dt_rt
    TimeSeriesFrame fc_stage1;  // at dt_sched
    TimeSeriesFrame fc_stage2;  // at dt_disp

    int group_index(int id) const;
    int gfm_index() const;  // first grid-forming ES; -1 if none

    // Aggregated group power at one slot of a frame, kW/kvar per phase.
    struct GroupPower {
        double load[kPhases] = {0, 0, 0};
        double pv[kPhases] = {0, 0, 0};
        double q[kPhases] = {0, 0, 0};
        double total_load() const { return load[0] + load[1] + load[2]; }
        double total_pv() const { return pv[0] + pv[1] + pv[2]; }
    };
    GroupPower group_power(const TimeSeriesFrame& frame, int group_idx, int slot) const;

    // Net load over every node and phase at one slot of a frame.
    double net_load(const TimeSeriesFrame& frame, int slot) const;

    // Full invariant check; throws ScenarioError with a reason code.
    void validate() const;
};

// Reads, resamples and validates a scenario from a JSON config file. Series
// paths in the config are resolved relative to the config file's directory.
Scenario load_scenario(const std::string& config_path);

void save_scenario(const Scenario& scenario, const std::string& dir);

}  // namespace mgems
