#include "mgems/plant.hpp"

#include <algorithm>
#include <cmath>

namespace mgems {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::group_shed: return "group_shed";
        case EventKind::microgrid_shutdown_unscheduled: return "microgrid_shutdown_unscheduled";
        case EventKind::microgrid_shutdown_scheduled: return "microgrid_shutdown_scheduled";
        case EventKind::dg_start: return "dg_start";
        case EventKind::dg_stop: return "dg_stop";
        case EventKind::restart: return "restart";
    }
    return "?";
}

PlantState PlantState::initial(const Scenario& sc) {
    PlantState st;
    for (const auto& es : sc.es_units) st.soc.push_back(es.soc_init);
    for (const auto& dg : sc.dg_units) st.fuel.push_back(dg.fuel_init);
    st.group_on.assign(sc.groups.size(), 0);
    st.dg_on.assign(sc.dg_units.size(), 0);
    return st;
}

Commands Commands::all_off(const Scenario& sc) {
    Commands c;
    c.group_on.assign(sc.groups.size(), 0);
    c.dg_on.assign(sc.dg_units.size(), 0);
    c.p_dg.assign(sc.dg_units.size(), 0.0);
    c.p_es_gfl.assign(sc.es_units.size(), {0.0, 0.0, 0.0});
    return c;
}

namespace {

// Opening a switch de-energizes everything downstream of it.
void shed_with_descendants(const Scenario& sc, std::vector<uint8_t>& served, int g,
                           int minute, const char* cause, std::vector<PlantEvent>& events) {
    served[g] = 0;
    events.push_back({EventKind::group_shed, minute, g, cause});
    for (size_t c = 0; c < sc.groups.size(); ++c) {
        if (!served[c] || !sc.groups[c].parent) continue;
        const int pidx = sc.group_index(*sc.groups[c].parent);
        if (pidx == g) shed_with_descendants(sc, served, int(c), minute, "radial", events);
    }
}

int lowest_priority_served(const Scenario& sc, const std::vector<uint8_t>& served) {
    int pick = -1;
    for (size_t g = 0; g < sc.groups.size(); ++g) {
        if (!served[g]) continue;
        if (pick < 0 || sc.groups[g].weight < sc.groups[pick].weight ||
            (sc.groups[g].weight == sc.groups[pick].weight &&
             sc.groups[g].id < sc.groups[pick].id))
            pick = int(g);
    }
    return pick;
}

}  // namespace

StepResult plant_step(const Scenario& sc, PlantState& st, const Commands& cmd) {
    StepResult res;
    res.served.assign(sc.groups.size(), 0);
    const int dt_min = sc.grids.dt_rt_min;
    const double dt_h = dt_min / 60.0;
    const int truth_slot = st.minute / sc.truth.step_min;

    if (st.in_unscheduled_shutdown) {
        st.shutdown_remaining_min -= dt_min;
        st.group_on.assign(sc.groups.size(), 0);
        st.dg_on.assign(sc.dg_units.size(), 0);
        if (st.shutdown_remaining_min <= 0) {
            st.in_unscheduled_shutdown = false;
            st.shutdown_remaining_min = 0;
            res.events.push_back({EventKind::restart, st.minute + dt_min, -1, "shutdown elapsed"});
        }
        st.minute += dt_min;
        return res;
    }

    const int gfm = sc.gfm_index();

    // DG output honoring commands and the fuel floor.
    std::vector<uint8_t> dg_on(sc.dg_units.size(), 0);
    std::vector<double> p_dg(sc.dg_units.size(), 0.0);
    double p_dg_total = 0.0, q_dg_total = 0.0;
    for (size_t i = 0; i < sc.dg_units.size(); ++i) {
        const auto& dg = sc.dg_units[i];
        if (!cmd.dg_on.empty() && cmd.dg_on[i]) {
            const double p = std::clamp(cmd.p_dg[i], 0.0, dg.p_max());
            const double burn = (dg.idle_lph + dg.prop_lpkwh * p) * dt_h;
            if (st.fuel[i] - burn >= dg.fuel_min - 1e-9) {
                dg_on[i] = 1;
                p_dg[i] = p;
                p_dg_total += p;
                q_dg_total += p * std::tan(dg.pf_angle);
            } else {
                res.events.push_back({EventKind::dg_stop, st.minute, int(i), "fuel floor"});
            }
        }
        if (dg_on[i] && !st.dg_on[i])
            res.events.push_back({EventKind::dg_start, st.minute, int(i), "command"});
        if (!dg_on[i] && st.dg_on[i] && (cmd.dg_on.empty() || !cmd.dg_on[i]))
            res.events.push_back({EventKind::dg_stop, st.minute, int(i), "command"});
    }

    // Grid-following ES track their setpoints, clamped at their SoC bounds.
    std::vector<double> p_gfl(sc.es_units.size(), 0.0);
    double p_gfl_total = 0.0;
    for (size_t i = 0; i < sc.es_units.size(); ++i) {
        if (int(i) == gfm) continue;
        const auto& es = sc.es_units[i];
        double p = 0.0;
        if (!cmd.p_es_gfl.empty())
            p = cmd.p_es_gfl[i][0] + cmd.p_es_gfl[i][1] + cmd.p_es_gfl[i][2];
        const double denom = es.energy_kwh * es.efficiency;
        double next = st.soc[i] - p * dt_h / denom;
        if (next < es.soc_min) p = (st.soc[i] - es.soc_min) * denom / dt_h;
        if (next > es.soc_max) p = (st.soc[i] - es.soc_max) * denom / dt_h;
        p_gfl[i] = p;
        p_gfl_total += p;
    }

    // Radially consistent served set from the commands.
    std::vector<uint8_t> served = cmd.group_on;
    served.resize(sc.groups.size(), 0);
    for (size_t g = 0; g < sc.groups.size(); ++g) {
        std::optional<int> cur = sc.groups[g].parent;
        while (served[g] && cur) {
            const int pidx = sc.group_index(*cur);
            if (!served[pidx]) served[g] = 0;
            cur = sc.groups[pidx].parent;
        }
    }

    // Protection: shed until the slack unit's rating and SoC both survive the
    // coming step, or trip the microgrid when one group is already too much.
    bool tripped = false;
    double p_gfm_total = 0.0, q_gfm_total = 0.0, load_total = 0.0, pv_total = 0.0;
    while (true) {
        load_total = pv_total = 0.0;
        double q_total = 0.0;
        for (size_t g = 0; g < sc.groups.size(); ++g) {
            if (!served[g]) continue;
            const auto gp = sc.group_power(sc.truth, int(g), truth_slot);
            for (int p = 0; p < kPhases; ++p) {
                load_total += gp.load[p];
                pv_total += gp.pv[p];
                q_total += gp.q[p];
            }
        }
        p_gfm_total = load_total - pv_total - p_dg_total - p_gfl_total;
        q_gfm_total = q_total - q_dg_total;

        bool violated = false;
        const char* cause = "";
        if (gfm >= 0) {
            const auto& es = sc.es_units[gfm];
            if (std::fabs(p_gfm_total) > es.kva_rating + 1e-9) {
                violated = true;
                cause = "rating";
            } else {
                const double next =
                    st.soc[gfm] - p_gfm_total * dt_h / (es.energy_kwh * es.efficiency);
                if (next < es.soc_min - 1e-12 || next > es.soc_max + 1e-12) {
                    violated = true;
                    cause = "soc";
                }
            }
        } else if (std::fabs(p_gfm_total) > 1e-9) {
            violated = true;  // no slack unit: any imbalance trips
            cause = "no slack";
        }
        if (!violated) break;

        const int n_served = int(std::count(served.begin(), served.end(), uint8_t(1)));
        if (n_served > 1) {
            shed_with_descendants(sc, served, lowest_priority_served(sc, served), st.minute,
                                  cause, res.events);
            continue;
        }
        if (n_served == 1) {
            res.events.push_back(
                {EventKind::microgrid_shutdown_unscheduled, st.minute, -1, cause});
            tripped = true;
            break;
        }
        // Nothing served: a DG or GFL unit is pushing the battery around.
        bool adjusted = false;
        for (size_t i = 0; i < sc.dg_units.size() && !adjusted; ++i)
            if (dg_on[i]) {
                res.events.push_back({EventKind::dg_stop, st.minute, int(i), cause});
                p_dg_total -= p_dg[i];
                q_dg_total -= p_dg[i] * std::tan(sc.dg_units[i].pf_angle);
                dg_on[i] = 0;
                p_dg[i] = 0.0;
                adjusted = true;
            }
        for (size_t i = 0; i < sc.es_units.size() && !adjusted; ++i)
            if (int(i) != gfm && p_gfl[i] != 0.0) {
                p_gfl_total -= p_gfl[i];
                p_gfl[i] = 0.0;
                adjusted = true;
            }
        if (!adjusted) {
            res.events.push_back(
                {EventKind::microgrid_shutdown_unscheduled, st.minute, -1, cause});
            tripped = true;
            break;
        }
    }

    if (tripped) {
        st.in_unscheduled_shutdown = true;
        // The trip minute itself serves nothing, so 30 minutes total.
        st.shutdown_remaining_min = kUnscheduledShutdownMin - dt_min;
        st.group_on.assign(sc.groups.size(), 0);
        st.dg_on.assign(sc.dg_units.size(), 0);
        st.minute += dt_min;
        res.served.assign(sc.groups.size(), 0);
        return res;
    }

    // Integrate.
    if (gfm >= 0) {
        const auto& es = sc.es_units[gfm];
        st.soc[gfm] -= p_gfm_total * dt_h / (es.energy_kwh * es.efficiency);
        st.soc[gfm] = std::clamp(st.soc[gfm], es.soc_min, es.soc_max);
    }
    for (size_t i = 0; i < sc.es_units.size(); ++i) {
        if (int(i) == gfm) continue;
        const auto& es = sc.es_units[i];
        st.soc[i] -= p_gfl[i] * dt_h / (es.energy_kwh * es.efficiency);
        st.soc[i] = std::clamp(st.soc[i], es.soc_min, es.soc_max);
    }
    for (size_t i = 0; i < sc.dg_units.size(); ++i) {
        if (!dg_on[i]) continue;
        const auto& dg = sc.dg_units[i];
        st.fuel[i] -= (dg.idle_lph + dg.prop_lpkwh * p_dg[i]) * dt_h;
        st.fuel[i] = std::max(st.fuel[i], dg.fuel_min);
    }
    st.group_on = served;
    st.dg_on = dg_on;
    st.minute += dt_min;

    res.served = served;
    res.served_load_kw = load_total;
    res.served_pv_kw = pv_total;
    res.p_dg_kw = p_dg_total;
    res.p_gfl_kw = p_gfl_total;
    res.p_gfm_kw = p_gfm_total;
    res.q_gfm_kvar = q_gfm_total;
    return res;
}

}  // namespace mgems
