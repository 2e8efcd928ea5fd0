#include "mgems/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

namespace mgems {

namespace fs = std::filesystem;

CaseConfig CaseConfig::base_case() {
    CaseConfig c;
    c.name = "base";
    c.correction = false;
    c.fuel_mode = FuelMode::fixed_target;
    c.fuel_fixed_target = 500.0;
    c.reserve_mode = ReserveMode::fixed;
    c.gamma_fixed = 0.8;
    return c;
}

CaseConfig CaseConfig::case1() {
    CaseConfig c = base_case();
    c.name = "case1";
    c.correction = true;
    c.fuel_mode = FuelMode::rationed;
    return c;
}

CaseConfig CaseConfig::case2() {
    CaseConfig c = base_case();
    c.name = "case2";
    c.correction = false;
    c.fuel_mode = FuelMode::rationed;
    c.reserve_mode = ReserveMode::netload_fraction;
    c.netload_fraction = 0.2;
    return c;
}

CaseConfig CaseConfig::case3() {
    CaseConfig c = base_case();
    c.name = "case3";
    c.correction = true;
    c.fuel_mode = FuelMode::rationed;
    c.reserve_mode = ReserveMode::dynamic_ma;
    return c;
}

CaseConfig CaseConfig::by_name(const std::string& name) {
    if (name == "base") return base_case();
    if (name == "case1") return case1();
    if (name == "case2") return case2();
    if (name == "case3") return case3();
    throw ScenarioError("case.name", "unknown case '" + name + "' (base|case1|case2|case3)");
}

namespace {

double clamp_gamma(const PolicyConfig& p, double g) {
    return std::clamp(g, p.gamma_lo, p.gamma_hi);
}

double fraction_gamma(const Scenario& sc, const PolicyConfig& p, double frac, int slot) {
    const double net = std::max(forecast_net_load(sc, slot), 0.0);
    const double rating = sc.es_units[sc.gfm_index()].kva_rating;
    return clamp_gamma(p, 1.0 - frac * net / rating);
}

}  // namespace

RunLog run_restoration(const Scenario& scenario, const CaseConfig& cfg) {
    Scenario sc = scenario;
    sc.policy.correction_enabled = cfg.correction;
    sc.policy.fuel_mode = cfg.fuel_mode;
    sc.policy.fuel_fixed_target = cfg.fuel_fixed_target;
    sc.policy.reserve_mode = cfg.reserve_mode;
    sc.policy.gamma_fixed = cfg.gamma_fixed;
    sc.policy.netload_fraction = cfg.netload_fraction;
    const PolicyConfig& pol = sc.policy;

    const int gfm = sc.gfm_index();
    if (gfm < 0) throw ScenarioError("harness.gfm", "no grid-forming ES in scenario");
    const auto& gfm_es = sc.es_units[gfm];
    const int dt = sc.grids.dt_sched_min;
    const int dk = sc.grids.dt_disp_min;
    const int dh = sc.grids.dt_rt_min;
    const int total_min = sc.grids.total_min;
    const int slots_per_day = sc.grids.slots_per_day();
    const int ng = int(sc.groups.size());
    const int nd = int(sc.dg_units.size());

    RunLog log;
    log.case_name = cfg.name;

    PlantState state = PlantState::initial(sc);
    ErrorHistory hist;
    Commands cmd = Commands::all_off(sc);
    Stage1Schedule sched;
    double eps_hat = 0.0;
    double gamma_cycle = clamp_gamma(pol, 1.0 - pol.reserve_alpha);
    double prev_soc_sched_end = 0.0;
    bool have_sched = false;
    bool slot_tracked = true;  // dispatch matched the schedule all slot long

    ReserveState rstate;
    rstate.gamma_lo = pol.gamma_lo;
    rstate.gamma_hi = pol.gamma_hi;
    rstate.alpha = pol.reserve_alpha;

    std::vector<int> msd_rem(ng, 0), minup_rem(nd, 0);
    std::vector<uint8_t> prev_served(ng, 0), prev_dg(nd, 0);

    double cycle_net_accum = 0.0;
    int cycle_net_count = 0;
    double prev_cycle_net_meas = 0.0;
    bool have_prev_cycle = false;

    for (int minute = 0; minute < total_min; minute += dh) {
        const int slot = minute / dt;

        if (minute % dt == 0) {
            SlotDiag diag;
            diag.slot = slot;

            // Close out the slot that just ended: SoC-feedback error estimate.
            if (have_sched && slot > 0) {
                const double dp = estimate_interval_error(
                    state.soc[gfm], prev_soc_sched_end, gfm_es.energy_kwh,
                    gfm_es.efficiency, sc.grids.dt_sched_hours());
                diag.dp_estimate_kw = dp;
                diag.dp_valid = slot_tracked;
                if (slot_tracked) hist.push(slot - 1, dp);
            }
            slot_tracked = true;

            eps_hat = pol.correction_enabled ? correction_factor(hist, pol.correction_window)
                                             : 0.0;
            const MaModel ma = fit_ma(hist, pol.ma_order, pol.ma_fit_window);
            const double predicted = predict_error(ma, hist);
            const double predicted_excess = -predicted;  // positive = load above forecast

            if (pol.reserve_mode == ReserveMode::dynamic_ma) {
                if (have_prev_cycle) {
                    const double net_fc_prev = forecast_net_load(sc, slot - 1);
                    gamma_cycle = dynamic_reserve(prev_cycle_net_meas, net_fc_prev,
                                                  predicted_excess, gfm_es.kva_rating, rstate);
                } else {
                    gamma_cycle = clamp_gamma(pol, 1.0 - pol.reserve_alpha);
                }
            } else if (pol.reserve_mode == ReserveMode::fixed) {
                gamma_cycle = pol.gamma_fixed;
            } else {
                gamma_cycle = fraction_gamma(sc, pol, pol.netload_fraction, slot);
            }

            // Stage-1 solve for the window starting now.
            auto [wstart, wlen] = rolling_window(sc, slot);
            Stage1Instance inst;
            inst.start_slot = wstart;
            inst.len = wlen;
            inst.soc_init.resize(sc.es_units.size());
            for (size_t e = 0; e < sc.es_units.size(); ++e)
                inst.soc_init[e] =
                    std::clamp(state.soc[e], sc.es_units[e].soc_min, sc.es_units[e].soc_max);
            inst.fuel_init = state.fuel;
            inst.x_prev = state.group_on;
            inst.y_prev = state.dg_on;
            inst.msd_carry.resize(ng);
            for (int n = 0; n < ng; ++n)
                inst.msd_carry[n] = std::min((msd_rem[n] + dt - 1) / dt, wlen);
            inst.minup_carry.resize(nd);
            for (int i = 0; i < nd; ++i)
                inst.minup_carry[i] = std::min((minup_rem[i] + dt - 1) / dt, wlen);
            inst.gamma.resize(wlen);
            for (int s = 0; s < wlen; ++s) {
                if (pol.reserve_mode == ReserveMode::fixed)
                    inst.gamma[s] = pol.gamma_fixed;
                else if (pol.reserve_mode == ReserveMode::netload_fraction)
                    inst.gamma[s] = fraction_gamma(sc, pol, pol.netload_fraction, wstart + s);
                else
                    inst.gamma[s] = gamma_cycle;
            }
            inst.fuel_target.resize(nd);
            const int day = minute / 1440 + 1;
            const int t_in_day = (minute % 1440) / dt + 1;
            for (int i = 0; i < nd; ++i) {
                const auto& dg = sc.dg_units[i];
                if (pol.fuel_mode == FuelMode::rationed)
                    inst.fuel_target[i] =
                        fuel_reserve_target(state.fuel[i], dg.fuel_final, t_in_day, day,
                                            slots_per_day, sc.grids.days);
                else
                    inst.fuel_target[i] = std::max(pol.fuel_fixed_target, dg.fuel_min);
            }
            inst.soc_target_gfl.assign(sc.es_units.size(), 0.0);
            if (pol.soc_rationing) {
                for (size_t e = 0; e < sc.es_units.size(); ++e) {
                    if (sc.es_units[e].grid_forming) continue;
                    const double frac =
                        double(int64_t(slots_per_day) * day + t_in_day - 1) /
                        (double(slots_per_day) * sc.grids.days);
                    inst.soc_target_gfl[e] =
                        day >= sc.grids.days
                            ? sc.es_units[e].soc_min
                            : state.soc[e] - (state.soc[e] - sc.es_units[e].soc_min) * frac;
                }
            }

            sched = solve_stage1(sc, inst);
            ++log.stage1_solves;
            if (sched.status == SolveStatus::infeasible ||
                (sched.status == SolveStatus::iteration_limit && sched.x.empty())) {
                std::string dump = "stage-1 solver failure at slot " + std::to_string(slot) +
                                   " (" + to_string(sched.status) + "): " + sched.diagnosis +
                                   "; checkpoint soc=" + format_double(state.soc[gfm]) +
                                   " fuel=" + format_double(nd ? state.fuel[0] : 0.0);
                throw std::runtime_error(dump);
            }
            have_sched = true;
            prev_soc_sched_end = sched.soc[gfm][0];

            diag.eps_hat_kw = eps_hat;
            diag.predicted_error_kw = predicted;
            diag.gamma = gamma_cycle;
            diag.fuel_target_l = nd ? inst.fuel_target[0] : 0.0;
            diag.soc_feedback = inst.soc_init[gfm];
            diag.sched_end_fuel_l = nd ? sched.fuel[0][wlen - 1] : 0.0;
            diag.stage1_objective = sched.objective;
            diag.stage1_nodes = sched.stats.nodes;
            log.slots.push_back(diag);

            if (cycle_net_count > 0) {
                prev_cycle_net_meas = cycle_net_accum / cycle_net_count;
                have_prev_cycle = true;
            }
            cycle_net_accum = 0.0;
            cycle_net_count = 0;
        }

        if (minute % dk == 0) {
            if (!state.in_unscheduled_shutdown) {
                const int kslot = minute / dk;
                const int sidx = slot - sched.start_slot;
                double gamma_k = gamma_cycle;
                if (pol.reserve_mode == ReserveMode::fixed) gamma_k = pol.gamma_fixed;
                if (pol.reserve_mode == ReserveMode::netload_fraction)
                    gamma_k = fraction_gamma(sc, pol, pol.netload_fraction, slot);

                std::vector<uint8_t> energized(ng, 0);
                for (int n = 0; n < ng; ++n) energized[n] = sched.x[n][sidx];
                CorrectionInput corr;
                if (pol.correction_enabled)
                    corr = allocate_lambda(sc, energized, slot, eps_hat);
                else
                    corr.lambda.assign(ng, 0.0);

                Stage2Instance k_inst;
                k_inst.start_kslot = kslot;
                k_inst.len = std::min(sc.grids.horizon_disp, sc.grids.disp_slots() - kslot);
                k_inst.soc_init.resize(sc.es_units.size());
                for (size_t e = 0; e < sc.es_units.size(); ++e)
                    k_inst.soc_init[e] = std::clamp(state.soc[e], sc.es_units[e].soc_min,
                                                    sc.es_units[e].soc_max);
                k_inst.fuel_init = state.fuel;
                k_inst.x_prev = state.group_on;
                k_inst.y_prev = state.dg_on;
                k_inst.msd_carry.resize(ng);
                for (int n = 0; n < ng; ++n)
                    k_inst.msd_carry[n] = std::min((msd_rem[n] + dk - 1) / dk, k_inst.len);
                k_inst.minup_carry.resize(nd);
                for (int i = 0; i < nd; ++i)
                    k_inst.minup_carry[i] = std::min((minup_rem[i] + dk - 1) / dk, k_inst.len);
                k_inst.gamma.assign(k_inst.len, gamma_k);
                k_inst.xhat.assign(ng, std::vector<uint8_t>(k_inst.len, 0));
                k_inst.pdg_hat.assign(nd, std::vector<double>(k_inst.len, 0.0));
                for (int k = 0; k < k_inst.len; ++k) {
                    const int s_abs = (kslot + k) * dk / dt;
                    const int s = std::min(s_abs - sched.start_slot, sched.len - 1);
                    for (int n = 0; n < ng; ++n) k_inst.xhat[n][k] = sched.x[n][s];
                    for (int i = 0; i < nd; ++i) k_inst.pdg_hat[i][k] = sched.p_dg[i][s];
                }
                k_inst.correction = corr;

                DispatchPlan plan = solve_stage2(sc, k_inst);
                ++log.stage2_solves;
                if (plan.status == SolveStatus::infeasible) {
                    // Pinned commitments can be impossible against a shrunken
                    // reserve; relax them before giving up (protection is the
                    // real enforcement backstop).
                    Stage2Instance relaxed = k_inst;
                    relaxed.msd_carry.assign(ng, 0);
                    relaxed.minup_carry.assign(nd, 0);
                    plan = solve_stage2(sc, relaxed);
                    ++log.stage2_solves;
                }
                if (plan.status == SolveStatus::infeasible) {
                    cmd = Commands::all_off(sc);
                } else if (plan.x.empty()) {
                    throw std::runtime_error("stage-2 solver failure at dispatch slot " +
                                             std::to_string(kslot));
                } else {
                    cmd = plan.first_slot(sc);
                }
            } else {
                cmd = Commands::all_off(sc);
            }
        }

        const bool shutdown_before = state.in_unscheduled_shutdown;
        StepResult res = plant_step(sc, state, cmd);

        // Commitment memory from what was actually served.
        for (int n = 0; n < ng; ++n) {
            if (res.served[n] && !prev_served[n])
                msd_rem[n] = pol.msd_slots * dt - dh;
            else if (res.served[n])
                msd_rem[n] = std::max(0, msd_rem[n] - dh);
            else
                msd_rem[n] = 0;
        }
        for (int i = 0; i < nd; ++i) {
            if (state.dg_on[i] && !prev_dg[i])
                minup_rem[i] = sc.dg_units[i].min_up_slots * dt - dh;
            else if (state.dg_on[i])
                minup_rem[i] = std::max(0, minup_rem[i] - dh);
            else
                minup_rem[i] = 0;
        }
        prev_served = res.served;
        prev_dg = state.dg_on;

        // Did dispatch track the schedule this minute? (shutdowns, sheds and
        // re-dispatched DG output all invalidate the coming SoC estimate)
        if (have_sched) {
            const int sidx = slot - sched.start_slot;
            for (int n = 0; n < ng && slot_tracked; ++n)
                if (res.served[n] != sched.x[n][sidx]) slot_tracked = false;
            for (int i = 0; i < nd && slot_tracked; ++i) {
                if (state.dg_on[i] != sched.y[i][sidx]) slot_tracked = false;
                const double phat = sched.p_dg[i][sidx];
                if (std::fabs(cmd.p_dg[i] - phat) > 1e-3 * (1.0 + std::fabs(phat)))
                    slot_tracked = false;
            }
        }
        if (shutdown_before || state.in_unscheduled_shutdown) slot_tracked = false;

        cycle_net_accum += sc.net_load(sc.truth, minute / sc.truth.step_min);
        ++cycle_net_count;

        MinuteRow row;
        row.minute = minute;
        for (int n = 0; n < ng; ++n)
            if (res.served[n]) row.served_mask |= 1u << n;
        for (int n = 0; n < ng; ++n)
            if (n < int(cmd.group_on.size()) && cmd.group_on[n]) row.commanded_mask |= 1u << n;
        row.served_load_kw = res.served_load_kw;
        row.served_pv_kw = res.served_pv_kw;
        row.p_dg_kw = res.p_dg_kw;
        row.p_gfm_kw = res.p_gfm_kw;
        row.p_gfl_kw = res.p_gfl_kw;
        row.q_gfm_kvar = res.q_gfm_kvar;
        row.soc_gfm = state.soc[gfm];
        row.fuel = nd ? state.fuel[0] : 0.0;
        row.unscheduled_shutdown = shutdown_before || state.in_unscheduled_shutdown;
        log.minutes.push_back(row);
        for (auto& ev : res.events) log.events.push_back(ev);
    }
    return log;
}

Metrics compute_metrics(const RunLog& log, const Scenario& sc) {
    Metrics m;
    if (log.minutes.empty()) return m;
    const double h = sc.grids.dt_rt_min / 60.0;
    const int ng = int(sc.groups.size());

    double crit_total = 0, crit_served = 0, ncl_total = 0, ncl_served = 0;
    std::vector<double> node_served_min;  // per critical node, minutes served
    std::vector<double> ncl_node_served_min;
    std::vector<int> crit_groups;
    for (int n = 0; n < ng; ++n)
        if (!sc.groups[n].critical_nodes.empty()) crit_groups.push_back(n);

    // Served minutes per group.
    std::vector<double> group_minutes(ng, 0.0);
    for (const auto& row : log.minutes)
        for (int n = 0; n < ng; ++n)
            if (row.served_mask & (1u << n)) group_minutes[n] += sc.grids.dt_rt_min;

    for (const auto& row : log.minutes) {
        const int ts = row.minute / sc.truth.step_min;
        for (int n = 0; n < ng; ++n) {
            const bool on = row.served_mask & (1u << n);
            for (int node : sc.groups[n].nodes) {
                const auto* ns = sc.truth.find(node);
                double load = 0;
                for (int p = 0; p < kPhases; ++p) load += ns->load_kw[p][ts];
                const bool crit =
                    std::find(sc.groups[n].critical_nodes.begin(),
                              sc.groups[n].critical_nodes.end(),
                              node) != sc.groups[n].critical_nodes.end();
                if (crit) {
                    crit_total += load * h;
                    if (on) crit_served += load * h;
                } else {
                    ncl_total += load * h;
                    if (on) ncl_served += load * h;
                }
            }
        }
        m.served_load_kwh += row.served_load_kw * h;
        m.served_pv_kwh += row.served_pv_kw * h;
    }
    // Totals over every node regardless of service.
    double total_load = 0, total_pv = 0;
    for (const auto& row : log.minutes) {
        const int ts = row.minute / sc.truth.step_min;
        for (const auto& [id, ns] : sc.truth.nodes)
            for (int p = 0; p < kPhases; ++p) {
                total_load += ns.load_kw[p][ts] * h;
                total_pv += ns.pv_kw[p][ts] * h;
            }
    }
    m.total_load_kwh = total_load;
    m.total_pv_kwh = total_pv;

    m.p_cl_pct = crit_total > 0 ? 100.0 * crit_served / crit_total : 0.0;
    m.p_ncl_pct = ncl_total > 0 ? 100.0 * ncl_served / ncl_total : 0.0;
    m.p_pv_pct = m.total_pv_kwh > 0 ? 100.0 * m.served_pv_kwh / m.total_pv_kwh : 0.0;

    // Average served duration per node class.
    int crit_nodes = 0, ncl_nodes = 0;
    double crit_minutes = 0, ncl_minutes = 0;
    for (int n = 0; n < ng; ++n)
        for (int node : sc.groups[n].nodes) {
            const bool crit = std::find(sc.groups[n].critical_nodes.begin(),
                                        sc.groups[n].critical_nodes.end(),
                                        node) != sc.groups[n].critical_nodes.end();
            if (crit) {
                ++crit_nodes;
                crit_minutes += group_minutes[n];
            } else {
                ++ncl_nodes;
                ncl_minutes += group_minutes[n];
            }
        }
    m.t_cl_min = crit_nodes ? crit_minutes / crit_nodes : 0.0;
    m.t_ncl_min = ncl_nodes ? ncl_minutes / ncl_nodes : 0.0;

    // Interruptions of critical service: served -> unserved transitions.
    for (int n : crit_groups) {
        bool prev = false;
        for (const auto& row : log.minutes) {
            const bool on = row.served_mask & (1u << n);
            if (prev && !on) ++m.n_cl;
            prev = on;
        }
    }

    // Shutdown bookkeeping: optimizer-commanded all-off counts as scheduled.
    bool prev_sch = false, prev_unsch = false;
    for (const auto& row : log.minutes) {
        const bool unsch = row.unscheduled_shutdown;
        const bool sch = !unsch && row.commanded_mask == 0;
        if (unsch) m.t_ug_unsch_min += sc.grids.dt_rt_min;
        if (sch) m.t_ug_sch_min += sc.grids.dt_rt_min;
        if (sch && !prev_sch) ++m.n_ug_sch;
        prev_sch = sch;
        prev_unsch = unsch;
    }
    (void)prev_unsch;
    for (const auto& ev : log.events)
        if (ev.kind == EventKind::microgrid_shutdown_unscheduled) ++m.n_ug_unsch;
    m.t_ug_total_min = m.t_ug_sch_min + m.t_ug_unsch_min;
    return m;
}

namespace {

void write_metrics_csv(std::ofstream& out, const Metrics& m) {
    out << "metric,value\n";
    out << "p_cl_pct," << format_double(m.p_cl_pct) << '\n';
    out << "p_ncl_pct," << format_double(m.p_ncl_pct) << '\n';
    out << "p_pv_pct," << format_double(m.p_pv_pct) << '\n';
    out << "t_cl_min," << format_double(m.t_cl_min) << '\n';
    out << "t_ncl_min," << format_double(m.t_ncl_min) << '\n';
    out << "n_cl," << m.n_cl << '\n';
    out << "n_ug_sch," << m.n_ug_sch << '\n';
    out << "n_ug_unsch," << m.n_ug_unsch << '\n';
    out << "t_ug_sch_min," << format_double(m.t_ug_sch_min) << '\n';
    out << "t_ug_unsch_min," << format_double(m.t_ug_unsch_min) << '\n';
    out << "t_ug_total_min," << format_double(m.t_ug_total_min) << '\n';
    out << "served_load_kwh," << format_double(m.served_load_kwh) << '\n';
    out << "served_pv_kwh," << format_double(m.served_pv_kwh) << '\n';
    out << "total_load_kwh," << format_double(m.total_load_kwh) << '\n';
    out << "total_pv_kwh," << format_double(m.total_pv_kwh) << '\n';
}

}  // namespace

void export_report(const RunLog& log, const Metrics& metrics, const Scenario& sc,
                   const std::string& out_dir) {
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "metrics.csv", std::ios::binary);
        if (!out) throw IoError("cannot write metrics.csv in " + out_dir);
        write_metrics_csv(out, metrics);
    }
    {
        std::ofstream out(fs::path(out_dir) / "trace.csv", std::ios::binary);
        if (!out) throw IoError("cannot write trace.csv in " + out_dir);
        out << "minute,served_mask,commanded_mask,served_load_kw,served_pv_kw,p_dg_kw,"
               "p_gfm_kw,p_gfl_kw,q_gfm_kvar,soc_gfm,fuel_l,unscheduled\n";
        for (const auto& r : log.minutes)
            out << r.minute << ',' << r.served_mask << ',' << r.commanded_mask << ','
                << format_double(r.served_load_kw) << ',' << format_double(r.served_pv_kw)
                << ',' << format_double(r.p_dg_kw) << ',' << format_double(r.p_gfm_kw) << ','
                << format_double(r.p_gfl_kw) << ',' << format_double(r.q_gfm_kvar) << ','
                << format_double(r.soc_gfm) << ',' << format_double(r.fuel) << ','
                << (r.unscheduled_shutdown ? 1 : 0) << '\n';
    }
    {
        std::ofstream out(fs::path(out_dir) / "events.csv", std::ios::binary);
        if (!out) throw IoError("cannot write events.csv in " + out_dir);
        out << "minute,kind,subject,cause\n";
        for (const auto& e : log.events)
            out << e.minute << ',' << to_string(e.kind) << ',' << e.subject << ',' << e.cause
                << '\n';
    }
    {
        std::ofstream out(fs::path(out_dir) / "diagnostics.csv", std::ios::binary);
        if (!out) throw IoError("cannot write diagnostics.csv in " + out_dir);
        out << "slot,dp_estimate_kw,dp_valid,eps_hat_kw,predicted_error_kw,gamma,"
               "fuel_target_l,sched_end_fuel_l,soc_feedback,stage1_objective,stage1_nodes\n";
        for (const auto& d : log.slots)
            out << d.slot << ',' << format_double(d.dp_estimate_kw) << ','
                << (d.dp_valid ? 1 : 0) << ',' << format_double(d.eps_hat_kw) << ','
                << format_double(d.predicted_error_kw) << ',' << format_double(d.gamma) << ','
                << format_double(d.fuel_target_l) << ',' << format_double(d.sched_end_fuel_l)
                << ',' << format_double(d.soc_feedback) << ','
                << format_double(d.stage1_objective) << ',' << d.stage1_nodes << '\n';
    }
    (void)sc;
}

std::vector<std::pair<CaseConfig, Metrics>> run_compare(const Scenario& sc,
                                                        const std::vector<CaseConfig>& cases,
                                                        const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<RunLog> logs(cases.size());
    std::vector<std::string> errors(cases.size());
    std::vector<std::thread> threads;
    threads.reserve(cases.size());
    for (size_t c = 0; c < cases.size(); ++c)
        threads.emplace_back([&, c]() {
            try {
                logs[c] = run_restoration(sc, cases[c]);
            } catch (const std::exception& e) {
                errors[c] = e.what();
            }
        });
    for (auto& t : threads) t.join();
    for (size_t c = 0; c < cases.size(); ++c)
        if (!errors[c].empty())
            throw std::runtime_error("case '" + cases[c].name + "' failed: " + errors[c]);

    std::vector<std::pair<CaseConfig, Metrics>> out;
    for (size_t c = 0; c < cases.size(); ++c) {
        Metrics m = compute_metrics(logs[c], sc);
        export_report(logs[c], m, sc, (fs::path(out_dir) / cases[c].name).string());
        out.emplace_back(cases[c], m);
    }

    std::ofstream cmp(fs::path(out_dir) / "comparison.csv", std::ios::binary);
    if (!cmp) throw IoError("cannot write comparison.csv in " + out_dir);
    cmp << "metric";
    for (const auto& [cc, m] : out) cmp << ',' << cc.name;
    cmp << '\n';
    auto row = [&](const char* name, auto getter) {
        cmp << name;
        for (const auto& [cc, m] : out) cmp << ',' << getter(m);
        cmp << '\n';
    };
    row("p_cl_pct", [](const Metrics& m) { return format_double(m.p_cl_pct); });
    row("p_ncl_pct", [](const Metrics& m) { return format_double(m.p_ncl_pct); });
    row("p_pv_pct", [](const Metrics& m) { return format_double(m.p_pv_pct); });
    row("t_cl_min", [](const Metrics& m) { return format_double(m.t_cl_min); });
    row("t_ncl_min", [](const Metrics& m) { return format_double(m.t_ncl_min); });
    row("n_cl", [](const Metrics& m) { return std::to_string(m.n_cl); });
    row("n_ug_sch", [](const Metrics& m) { return std::to_string(m.n_ug_sch); });
    row("n_ug_unsch", [](const Metrics& m) { return std::to_string(m.n_ug_unsch); });
    row("t_ug_sch_min", [](const Metrics& m) { return format_double(m.t_ug_sch_min); });
    row("t_ug_unsch_min", [](const Metrics& m) { return format_double(m.t_ug_unsch_min); });
    row("t_ug_total_min", [](const Metrics& m) { return format_double(m.t_ug_total_min); });
    row("served_load_kwh", [](const Metrics& m) { return format_double(m.served_load_kwh); });
    row("served_pv_kwh", [](const Metrics& m) { return format_double(m.served_pv_kwh); });
    return out;
}

}  // namespace mgems
