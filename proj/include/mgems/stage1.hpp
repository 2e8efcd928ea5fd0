#pragma once

#include <array>
#include <string>
#include <vector>

#include "mgems/linear_model.hpp"
#include "mgems/scenario.hpp"

namespace mgems {

// One scheduling window: where it sits on the restoration timeline, the
// feedback state it starts from, and the commitment memory carried in from
// actuation history.
struct Stage1Instance {
    int start_slot = 0;  // dt_sched slots since restoration start
    int len = 0;         // window length; horizon_sched except when receding
    std::vector<double> soc_init;   // per ES
    std::vector<double> fuel_init;  // per DG
    std::vector<uint8_t> x_prev;    // per group, status just before the window
    std::vector<uint8_t> y_prev;    // per DG
    std::vector<int> msd_carry;     // per group, slots still pinned on
    std::vector<int> minup_carry;   // per DG
    std::vector<double> gamma;      // per window slot, reserve factor
    std::vector<double> fuel_target;     // per DG, floor on end-of-window fuel
    std::vector<double> soc_target_gfl;  // per ES, end-of-window SoC floor (<=0: off)

    static Stage1Instance fresh(const Scenario& scenario, int start_slot, int len);
};

struct Stage1Schedule {
    int start_slot = 0;
    int len = 0;
    SolveStatus status = SolveStatus::infeasible;
    double objective = 0.0;
    std::string diagnosis;
    std::vector<std::vector<uint8_t>> x;  // [group][slot]
    std::vector<std::vector<uint8_t>> y;  // [dg][slot]
    std::vector<std::vector<double>> p_dg, q_dg, fuel, start_cost;  // [dg][slot]
    std::vector<std::vector<double>> soc;                           // [es][slot]
    std::vector<std::vector<std::array<double, kPhases>>> p_es, q_es;  // [es][slot][phase]
    SolverStats stats;
};

// 24h rolling window, receding on the final day. Throws ScenarioError
// ("window.empty") past the end of the restoration.
std::pair<int, int> rolling_window(const Scenario& scenario, int start_slot);

struct Stage1Build {
    LinearModel model;
    // Variable index maps, [asset][window slot] (phases innermost).
    std::vector<std::vector<int>> vx, vy, vpdg, vfuel, vcost, vsoc;
    std::vector<std::vector<std::array<int, kPhases>>> vpes, vqes;
};

Stage1Build build_stage1(const Scenario& scenario, const Stage1Instance& inst);

Stage1Schedule solve_stage1(const Scenario& scenario, const Stage1Instance& inst);

// Slot-by-slot recheck of a schedule against the scenario data, independent
// of the LP path: balance residuals, SoC/fuel recursions, MSD and min-up
// patterns, radiality, the reserve-scaled polygon capacity, startup costs.
struct ReplayReport {
    double max_p_residual_kw = 0.0;
    double max_q_residual_kvar = 0.0;
    double max_soc_residual = 0.0;
    double max_fuel_residual = 0.0;
    bool msd_ok = true, minup_ok = true, radial_ok = true;
    bool polygon_ok = true, startup_ok = true, bounds_ok = true;
    bool ok(double power_tol = 1e-6) const {
        return max_p_residual_kw < power_tol && max_q_residual_kvar < power_tol &&
               max_soc_residual < 1e-6 && max_fuel_residual < 1e-6 && msd_ok && minup_ok &&
               radial_ok && polygon_ok && startup_ok && bounds_ok;
    }
};

ReplayReport replay_stage1(const Scenario& scenario, const Stage1Instance& inst,
                           const Stage1Schedule& sched);

}  // namespace mgems
