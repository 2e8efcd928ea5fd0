#pragma once

#include <array>
#include <string>
#include <vector>

#include "mgems/linear_model.hpp"
#include "mgems/plant.hpp"
#include "mgems/scenario.hpp"

namespace mgems {

// Correction factor and its per-group split. lambda sums to 1 over the
// energized groups (all zero when nothing is energized or no load).
struct CorrectionInput {
    double eps_hat_kw = 0.0;
    std::vector<double> lambda;
};

// lambda_n proportional to the stage-1 forecast connected load of each
// energized group at `slot`; zero for de-energized groups.
CorrectionInput allocate_lambda(const Scenario& scenario,
                                const std::vector<uint8_t>& energized, int slot,
                                double eps_hat_kw);

struct Stage2Instance {
    int start_kslot = 0;  // dt_disp slots since restoration start
    int len = 0;
    std::vector<double> soc_init;   // per ES
    std::vector<double> fuel_init;  // per DG
    std::vector<uint8_t> x_prev;
    std::vector<uint8_t> y_prev;
    std::vector<int> msd_carry;    // dt_disp slots still pinned on
    std::vector<int> minup_carry;  // dt_disp slots
    std::vector<double> gamma;     // per window slot
    std::vector<std::vector<uint8_t>> xhat;    // [group][k] stage-1 switch plan
    std::vector<std::vector<double>> pdg_hat;  // [dg][k] stage-1 DG plan
    CorrectionInput correction;
};

struct DispatchPlan {
    int start_kslot = 0;
    int len = 0;
    SolveStatus status = SolveStatus::infeasible;
    double objective = 0.0;
    std::string diagnosis;
    std::vector<std::vector<uint8_t>> x;
    std::vector<std::vector<uint8_t>> y;
    std::vector<std::vector<double>> p_dg, q_dg, fuel;
    std::vector<std::vector<double>> soc;
    std::vector<std::vector<std::array<double, kPhases>>> p_es, q_es;
    SolverStats stats;

    Commands first_slot(const Scenario& scenario) const;
};

struct Stage2Build {
    LinearModel model;
    double obj_offset = 0.0;  // constants dropped from the switch-deviation terms
    std::vector<std::vector<int>> vx, vy, vpdg, vfuel, vsoc;
    std::vector<std::vector<std::array<int, kPhases>>> vpes, vqes;
};

Stage2Build build_stage2(const Scenario& scenario, const Stage2Instance& inst);

DispatchPlan solve_stage2(const Scenario& scenario, const Stage2Instance& inst);

struct Stage2Replay {
    double max_p_residual_kw = 0.0;
    double max_q_residual_kvar = 0.0;
    double max_soc_residual = 0.0;
    double max_fuel_residual = 0.0;
    bool ok(double tol = 1e-6) const {
        return max_p_residual_kw < tol && max_q_residual_kvar < tol &&
               max_soc_residual < 1e-6 && max_fuel_residual < 1e-6;
    }
};

Stage2Replay replay_stage2(const Scenario& scenario, const Stage2Instance& inst,
                           const DispatchPlan& plan);

}  // namespace mgems
