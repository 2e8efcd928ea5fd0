#pragma once

#include <string>
#include <vector>

#include "mgems/plant.hpp"
#include "mgems/robust.hpp"
#include "mgems/scenario.hpp"
#include "mgems/stage1.hpp"
#include "mgems/stage2.hpp"

namespace mgems {

// One case = the three policy axes of the study matrix. Everything else in
// the scenario stays fixed across a comparison run.
struct CaseConfig {
    std::string name = "base";
    bool correction = false;
    FuelMode fuel_mode = FuelMode::fixed_target;
    double fuel_fixed_target = 500.0;
    ReserveMode reserve_mode = ReserveMode::fixed;
    double gamma_fixed = 0.8;
    double netload_fraction = 0.2;

    // The four named setups of the study matrix.
    static CaseConfig base_case();
    static CaseConfig case1();
    static CaseConfig case2();
    static CaseConfig case3();
    static CaseConfig by_name(const std::string& name);
};

struct MinuteRow {
    int minute = 0;
    uint32_t served_mask = 0;
    uint32_t commanded_mask = 0;
    double served_load_kw = 0, served_pv_kw = 0;
    double p_dg_kw = 0, p_gfm_kw = 0, p_gfl_kw = 0, q_gfm_kvar = 0;
    double soc_gfm = 0, fuel = 0;
    bool unscheduled_shutdown = false;
};

// Diagnostics recorded once per scheduling slot.
struct SlotDiag {
    int slot = 0;
    double dp_estimate_kw = 0;   // SoC-feedback error estimate for the slot just ended
    bool dp_valid = false;
    double eps_hat_kw = 0;       // correction applied over the coming cycle
    double predicted_error_kw = 0;
    double gamma = 1.0;
    double fuel_target_l = 0;
    double soc_feedback = 0;     // plant SoC fed into the stage-1 solve
    double sched_end_fuel_l = 0; // stage-1 scheduled fuel at its window end
    double stage1_objective = 0;
    long stage1_nodes = 0;
};

struct RunLog {
    std::string case_name;
    std::vector<MinuteRow> minutes;
    std::vector<PlantEvent> events;
    std::vector<SlotDiag> slots;
    long stage1_solves = 0, stage2_solves = 0;
};

struct Metrics {
    double p_cl_pct = 0, p_ncl_pct = 0, p_pv_pct = 0;
    double t_cl_min = 0, t_ncl_min = 0;
    int n_cl = 0;
    int n_ug_sch = 0, n_ug_unsch = 0;
    double t_ug_sch_min = 0, t_ug_unsch_min = 0;
    double t_ug_total_min = 0;
    double served_load_kwh = 0, served_pv_kwh = 0;
    double total_load_kwh = 0, total_pv_kwh = 0;
};

RunLog run_restoration(const Scenario& scenario, const CaseConfig& cfg);

Metrics compute_metrics(const RunLog& log, const Scenario& scenario);

// metrics.csv, trace.csv, events.csv and diagnostics.csv under out_dir.
void export_report(const RunLog& log, const Metrics& metrics, const Scenario& scenario,
                   const std::string& out_dir);

// Runs every case on the same scenario (in parallel) and writes per-case
// reports plus a side-by-side comparison.csv.
std::vector<std::pair<CaseConfig, Metrics>> run_compare(const Scenario& scenario,
                                                        const std::vector<CaseConfig>& cases,
                                                        const std::string& out_dir);

}  // namespace mgems
