#include "mgems/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mgems/polygon.hpp"

namespace mgems {

Stage1Instance Stage1Instance::fresh(const Scenario& sc, int start_slot, int len) {
    Stage1Instance inst;
    inst.start_slot = start_slot;
    inst.len = len;
    for (const auto& es : sc.es_units) inst.soc_init.push_back(es.soc_init);
    for (const auto& dg : sc.dg_units) inst.fuel_init.push_back(dg.fuel_init);
    inst.x_prev.assign(sc.groups.size(), 0);
    inst.y_prev.assign(sc.dg_units.size(), 0);
    inst.msd_carry.assign(sc.groups.size(), 0);
    inst.minup_carry.assign(sc.dg_units.size(), 0);
    inst.gamma.assign(len, sc.policy.gamma_fixed);
    for (const auto& dg : sc.dg_units) inst.fuel_target.push_back(dg.fuel_min);
    inst.soc_target_gfl.assign(sc.es_units.size(), 0.0);
    return inst;
}

std::pair<int, int> rolling_window(const Scenario& sc, int start_slot) {
    const int total = sc.grids.sched_slots();
    if (start_slot >= total)
        throw ScenarioError("window.empty", "window starts after the restoration end");
    return {start_slot, std::min(sc.grids.horizon_sched, total - start_slot)};
}

namespace {

std::string slotname(const char* base, int a, int s) {
    return std::string(base) + std::to_string(a) + "_" + std::to_string(s);
}

void check_instance(const Scenario& sc, const Stage1Instance& inst) {
    if (inst.len < 1) throw ScenarioError("stage1.window", "empty scheduling window");
    if (inst.start_slot + inst.len > sc.grids.sched_slots())
        throw ScenarioError("stage1.window", "window extends past restoration end");
    if (int(inst.gamma.size()) != inst.len)
        throw ScenarioError("stage1.gamma", "reserve profile length mismatch");
    for (size_t e = 0; e < sc.es_units.size(); ++e) {
        const auto& es = sc.es_units[e];
        if (inst.soc_init[e] < es.soc_min - 1e-9 || inst.soc_init[e] > es.soc_max + 1e-9)
            throw ScenarioError("stage1.soc_init",
                                es.id + ": initial SoC " + format_double(inst.soc_init[e]) +
                                    " outside bounds");
    }
    for (size_t i = 0; i < sc.dg_units.size(); ++i) {
        const auto& dg = sc.dg_units[i];
        if (inst.fuel_init[i] < dg.fuel_min - 1e-9 || inst.fuel_init[i] > dg.fuel_max + 1e-9)
            throw ScenarioError("stage1.fuel_init", dg.id + ": initial fuel outside bounds");
    }
    for (double g : inst.gamma)
        if (g <= 0.0 || g > 1.0)
            throw ScenarioError("stage1.gamma", "reserve factor outside (0,1]");
}

}  // namespace

Stage1Build build_stage1(const Scenario& sc, const Stage1Instance& inst) {
    check_instance(sc, inst);
    const int L = inst.len;
    const int ng = int(sc.groups.size());
    const int ne = int(sc.es_units.size());
    const int nd = int(sc.dg_units.size());
    const double dt_h = sc.grids.dt_sched_hours();
    const int msd = sc.policy.msd_slots;

    Stage1Build b;
    LinearModel& m = b.model;
    m.set_obj_sense(ObjSense::maximize);

    // Aggregated group forecasts over the window.
    std::vector<std::vector<Scenario::GroupPower>> gp(ng, std::vector<Scenario::GroupPower>(L));
    for (int n = 0; n < ng; ++n)
        for (int s = 0; s < L; ++s)
            gp[n][s] = sc.group_power(sc.fc_stage1, n, inst.start_slot + s);

    b.vx.assign(ng, std::vector<int>(L));
    b.vy.assign(nd, std::vector<int>(L));
    b.vpdg.assign(nd, std::vector<int>(L));
    b.vfuel.assign(nd, std::vector<int>(L));
    b.vcost.assign(nd, std::vector<int>(L));
    b.vsoc.assign(ne, std::vector<int>(L));
    b.vpes.assign(ne, std::vector<std::array<int, kPhases>>(L));
    b.vqes.assign(ne, std::vector<std::array<int, kPhases>>(L));

    for (int n = 0; n < ng; ++n)
        for (int s = 0; s < L; ++s) {
            b.vx[n][s] = m.add_binary(slotname("x", sc.groups[n].id, s));
            if (s < inst.msd_carry[n]) m.set_bounds(b.vx[n][s], 1.0, 1.0);
            m.set_obj(b.vx[n][s], sc.groups[n].weight * gp[n][s].total_load() * dt_h);
        }
    for (int i = 0; i < nd; ++i) {
        const auto& dg = sc.dg_units[i];
        for (int s = 0; s < L; ++s) {
            b.vy[i][s] = m.add_binary(slotname("y", i, s));
            if (s < inst.minup_carry[i]) m.set_bounds(b.vy[i][s], 1.0, 1.0);
            b.vpdg[i][s] = m.add_var(slotname("pdg", i, s), 0.0, dg.p_max());
            b.vfuel[i][s] = m.add_var(slotname("fuel", i, s), dg.fuel_min, dg.fuel_max);
            b.vcost[i][s] = m.add_var(slotname("cup", i, s), 0.0, kInf);
            m.set_obj(b.vcost[i][s], -1.0);
        }
        // End-of-window fuel floor; unreachable targets relax to "burn nothing".
        const double target = std::min(inst.fuel_target[i], inst.fuel_init[i]);
        m.set_bounds(b.vfuel[i][L - 1], std::max(dg.fuel_min, target), dg.fuel_max);
    }
    for (int e = 0; e < ne; ++e) {
        const auto& es = sc.es_units[e];
        for (int s = 0; s < L; ++s) {
            b.vsoc[e][s] = m.add_var(slotname("soc", e, s), es.soc_min, es.soc_max);
            for (int p = 0; p < kPhases; ++p) {
                b.vpes[e][s][p] = m.add_var(slotname("pes", e, s) + "_" + std::to_string(p),
                                            -es.charge_limit(), es.kva_rating);
                b.vqes[e][s][p] = m.add_var(slotname("qes", e, s) + "_" + std::to_string(p),
                                            -es.q_limit(), es.q_limit());
            }
        }
        if (!es.grid_forming && inst.soc_target_gfl[e] > 0.0) {
            const double target = std::min(inst.soc_target_gfl[e], inst.soc_init[e]);
            m.set_bounds(b.vsoc[e][L - 1], std::max(es.soc_min, target), es.soc_max);
        }
    }

    for (int s = 0; s < L; ++s) {
        // Per-phase real and reactive balance.
        for (int p = 0; p < kPhases; ++p) {
            std::vector<std::pair<int, double>> prow, qrow;
            for (int e = 0; e < ne; ++e) {
                prow.push_back({b.vpes[e][s][p], 1.0});
                qrow.push_back({b.vqes[e][s][p], 1.0});
            }
            for (int i = 0; i < nd; ++i) {
                prow.push_back({b.vpdg[i][s], 1.0 / 3.0});
                qrow.push_back({b.vpdg[i][s], std::tan(sc.dg_units[i].pf_angle) / 3.0});
            }
            for (int n = 0; n < ng; ++n) {
                const double net = gp[n][s].load[p] - gp[n][s].pv[p];
                if (net != 0.0) prow.push_back({b.vx[n][s], -net});
                if (gp[n][s].q[p] != 0.0) qrow.push_back({b.vx[n][s], -gp[n][s].q[p]});
            }
            m.add_row(slotname("pbal", p, s), std::move(prow), RowSense::eq, 0.0);
            m.add_row(slotname("qbal", p, s), std::move(qrow), RowSense::eq, 0.0);
        }

        for (int e = 0; e < ne; ++e) {
            const auto& es = sc.es_units[e];
            const int hostx = es.host_group ? b.vx[sc.group_index(*es.host_group)][s] : -1;
            auto with_host = [&](std::vector<std::pair<int, double>> terms, double coeff) {
                if (hostx >= 0) terms.push_back({hostx, coeff});
                return terms;
            };
            std::vector<std::pair<int, double>> psum, qsum;
            for (int p = 0; p < kPhases; ++p) {
                psum.push_back({b.vpes[e][s][p], 1.0});
                qsum.push_back({b.vqes[e][s][p], 1.0});
            }
            // (3a)/(3b): discharge/charge and reactive limits, scaled by the
            // host switch when the unit sits behind one. Rows the hexagon
            // already dominates at this slot's reserve are not emitted.
            const double reach = inst.gamma[s] * es.kva_rating;
            if (hostx >= 0) {
                m.add_row(slotname("esphi", e, s), with_host(psum, -es.kva_rating),
                          RowSense::le, 0.0);
                m.add_row(slotname("esplo", e, s), with_host(psum, es.charge_limit()),
                          RowSense::ge, 0.0);
                m.add_row(slotname("esqhi", e, s), with_host(qsum, -es.q_limit()),
                          RowSense::le, 0.0);
            } else {
                if (es.kva_rating < reach)
                    m.add_row(slotname("esphi", e, s), psum, RowSense::le, es.kva_rating);
                if (es.charge_limit() < reach)
                    m.add_row(slotname("esplo", e, s), psum, RowSense::ge, -es.charge_limit());
                if (es.q_limit() < reach * std::sin(std::numbers::pi / 3.0))
                    m.add_row(slotname("esqhi", e, s), qsum, RowSense::le, es.q_limit());
            }
            m.add_row(slotname("esqlo", e, s), qsum, RowSense::ge, 0.0);

            // (3c) linearized: inscribed hexagon at the reserve-scaled rating.
            const auto cuts = polygon_ball(inst.gamma[s] * es.kva_rating, 6);
            for (size_t c = 0; c < cuts.size(); ++c) {
                std::vector<std::pair<int, double>> row;
                for (int p = 0; p < kPhases; ++p) {
                    row.push_back({b.vpes[e][s][p], cuts[c].a});
                    row.push_back({b.vqes[e][s][p], cuts[c].b});
                }
                if (hostx >= 0) {
                    row.push_back({hostx, -cuts[c].rhs});
                    m.add_row(slotname("hex", e, s) + "_" + std::to_string(c), std::move(row),
                              RowSense::le, 0.0);
                } else {
                    m.add_row(slotname("hex", e, s) + "_" + std::to_string(c), std::move(row),
                              RowSense::le, cuts[c].rhs);
                }
            }

            // (4a) SoC recursion.
            const double k = dt_h / (es.energy_kwh * es.efficiency);
            std::vector<std::pair<int, double>> soc_row;
            soc_row.push_back({b.vsoc[e][s], 1.0});
            for (int p = 0; p < kPhases; ++p) soc_row.push_back({b.vpes[e][s][p], k});
            if (s > 0) {
                soc_row.push_back({b.vsoc[e][s - 1], -1.0});
                m.add_row(slotname("socdyn", e, s), std::move(soc_row), RowSense::eq, 0.0);
            } else {
                m.add_row(slotname("socdyn", e, s), std::move(soc_row), RowSense::eq,
                          inst.soc_init[e]);
            }
        }

        for (int i = 0; i < nd; ++i) {
            const auto& dg = sc.dg_units[i];
            // (5a) with the commitment status.
            m.add_row(slotname("dgphi", i, s),
                      {{b.vpdg[i][s], 1.0}, {b.vy[i][s], -dg.p_max()}}, RowSense::le, 0.0);
            if (dg.p_min() > 0.0)
                m.add_row(slotname("dgplo", i, s),
                          {{b.vpdg[i][s], 1.0}, {b.vy[i][s], -dg.p_min()}}, RowSense::ge, 0.0);

            // (5c) fuel recursion.
            std::vector<std::pair<int, double>> frow;
            frow.push_back({b.vfuel[i][s], 1.0});
            frow.push_back({b.vy[i][s], dg.idle_lph * dt_h});
            frow.push_back({b.vpdg[i][s], dg.prop_lpkwh * dt_h});
            if (s > 0) {
                frow.push_back({b.vfuel[i][s - 1], -1.0});
                m.add_row(slotname("fueldyn", i, s), std::move(frow), RowSense::eq, 0.0);
            } else {
                m.add_row(slotname("fueldyn", i, s), std::move(frow), RowSense::eq,
                          inst.fuel_init[i]);
            }

            // (7a) minimum up time, truncated at the window edge.
            {
                const int span = std::min(dg.min_up_slots, L - s);
                std::vector<std::pair<int, double>> row;
                for (int s2 = s; s2 < s + span; ++s2) row.push_back({b.vy[i][s2], 1.0});
                row.push_back({b.vy[i][s], -double(span)});
                double rhs = 0.0;
                if (s > 0)
                    row.push_back({b.vy[i][s - 1], double(span)});
                else
                    rhs = -double(span) * inst.y_prev[i];
                m.add_row(slotname("minup", i, s), std::move(row), RowSense::ge, rhs);
            }

            // (7b)/(7c) startup cost.
            {
                std::vector<std::pair<int, double>> row;
                row.push_back({b.vcost[i][s], 1.0});
                row.push_back({b.vy[i][s], -dg.startup_cost});
                double rhs = 0.0;
                if (s > 0)
                    row.push_back({b.vy[i][s - 1], dg.startup_cost});
                else
                    rhs = -dg.startup_cost * inst.y_prev[i];
                m.add_row(slotname("cup", i, s), std::move(row), RowSense::ge, rhs);
            }
        }

        for (int n = 0; n < ng; ++n) {
            // (6a) minimum service duration, truncated at the window edge.
            const int span = std::min(msd, L - s);
            std::vector<std::pair<int, double>> row;
            for (int s2 = s; s2 < s + span; ++s2) row.push_back({b.vx[n][s2], 1.0});
            row.push_back({b.vx[n][s], -double(span)});
            double rhs = 0.0;
            if (s > 0)
                row.push_back({b.vx[n][s - 1], double(span)});
            else
                rhs = -double(span) * inst.x_prev[n];
            m.add_row(slotname("msd", n, s), std::move(row), RowSense::ge, rhs);

            // Radiality precedence.
            if (sc.groups[n].parent) {
                const int pidx = sc.group_index(*sc.groups[n].parent);
                m.add_row(slotname("rad", n, s),
                          {{b.vx[n][s], 1.0}, {b.vx[pidx][s], -1.0}}, RowSense::le, 0.0);
            }
        }
    }
    return b;
}

namespace {

Stage1Schedule extract_stage1(const Scenario& sc, const Stage1Instance& inst,
                              const Stage1Build& b, const MilpSolution& sol) {
    const int L = inst.len;
    Stage1Schedule out;
    out.start_slot = inst.start_slot;
    out.len = L;
    out.status = sol.status;
    out.objective = sol.objective;
    out.stats = sol.stats;
    if (sol.x.empty()) return out;
    const auto& x = sol.x;
    const int ng = int(sc.groups.size()), ne = int(sc.es_units.size()),
              nd = int(sc.dg_units.size());
    out.x.assign(ng, std::vector<uint8_t>(L, 0));
    out.y.assign(nd, std::vector<uint8_t>(L, 0));
    out.p_dg.assign(nd, std::vector<double>(L, 0.0));
    out.q_dg.assign(nd, std::vector<double>(L, 0.0));
    out.fuel.assign(nd, std::vector<double>(L, 0.0));
    out.start_cost.assign(nd, std::vector<double>(L, 0.0));
    out.soc.assign(ne, std::vector<double>(L, 0.0));
    out.p_es.assign(ne, std::vector<std::array<double, kPhases>>(L));
    out.q_es.assign(ne, std::vector<std::array<double, kPhases>>(L));
    for (int n = 0; n < ng; ++n)
        for (int s = 0; s < L; ++s) out.x[n][s] = x[b.vx[n][s]] > 0.5;
    for (int i = 0; i < nd; ++i)
        for (int s = 0; s < L; ++s) {
            out.y[i][s] = x[b.vy[i][s]] > 0.5;
            out.p_dg[i][s] = x[b.vpdg[i][s]];
            out.q_dg[i][s] = out.p_dg[i][s] * std::tan(sc.dg_units[i].pf_angle);
            out.fuel[i][s] = x[b.vfuel[i][s]];
            out.start_cost[i][s] = x[b.vcost[i][s]];
        }
    for (int e = 0; e < ne; ++e)
        for (int s = 0; s < L; ++s) {
            out.soc[e][s] = x[b.vsoc[e][s]];
            for (int p = 0; p < kPhases; ++p) {
                out.p_es[e][s][p] = x[b.vpes[e][s][p]];
                out.q_es[e][s][p] = x[b.vqes[e][s][p]];
            }
        }
    return out;
}

}  // namespace

Stage1Schedule solve_stage1(const Scenario& sc, const Stage1Instance& inst) {
    Stage1Build b = build_stage1(sc, inst);
    MilpOptions opt;
    opt.gap = sc.policy.milp_gap;
    opt.node_limit = sc.policy.milp_node_limit;
    MilpSolution sol = solve_milp(b.model, opt);

    if (sol.status == SolveStatus::infeasible) {
        Stage1Schedule out;
        out.start_slot = inst.start_slot;
        out.len = inst.len;
        out.status = sol.status;
        out.stats = sol.stats;
        // Identify the binding resource: retry without the fuel floor, then
        // without commitment pins.
        Stage1Instance relaxed = inst;
        for (size_t i = 0; i < sc.dg_units.size(); ++i)
            relaxed.fuel_target[i] = sc.dg_units[i].fuel_min;
        MilpSolution s2 = solve_milp(build_stage1(sc, relaxed).model, opt);
        if (s2.status == SolveStatus::optimal) {
            out.diagnosis = "infeasible: end-of-window fuel target cannot be met "
                            "against the pinned service commitments";
            return out;
        }
        relaxed.msd_carry.assign(sc.groups.size(), 0);
        relaxed.minup_carry.assign(sc.dg_units.size(), 0);
        s2 = solve_milp(build_stage1(sc, relaxed).model, opt);
        if (s2.status == SolveStatus::optimal) {
            out.diagnosis = "infeasible: pinned commitments (MSD/min-up) exceed "
                            "reserve-scaled capacity";
            return out;
        }
        out.diagnosis = "infeasible: structural (check resource ratings vs forecast load)";
        return out;
    }

    Stage1Schedule out = extract_stage1(sc, inst, b, sol);
    if (!out.x.empty()) {
        ReplayReport rep = replay_stage1(sc, inst, out);
        if (!rep.ok()) out.diagnosis = "schedule failed invariant replay";
    }
    return out;
}

ReplayReport replay_stage1(const Scenario& sc, const Stage1Instance& inst,
                           const Stage1Schedule& sched) {
    ReplayReport rep;
    const int L = sched.len;
    const int ng = int(sc.groups.size()), ne = int(sc.es_units.size()),
              nd = int(sc.dg_units.size());
    const double dt_h = sc.grids.dt_sched_hours();
    const int msd = sc.policy.msd_slots;

    for (int s = 0; s < L; ++s) {
        for (int p = 0; p < kPhases; ++p) {
            double pr = 0.0, qr = 0.0;
            for (int e = 0; e < ne; ++e) {
                pr += sched.p_es[e][s][p];
                qr += sched.q_es[e][s][p];
            }
            for (int i = 0; i < nd; ++i) {
                pr += sched.p_dg[i][s] / 3.0;
                qr += sched.q_dg[i][s] / 3.0;
            }
            for (int n = 0; n < ng; ++n) {
                if (!sched.x[n][s]) continue;
                const auto gp = sc.group_power(sc.fc_stage1, n, sched.start_slot + s);
                pr -= gp.load[p] - gp.pv[p];
                qr -= gp.q[p];
            }
            rep.max_p_residual_kw = std::max(rep.max_p_residual_kw, std::fabs(pr));
            rep.max_q_residual_kvar = std::max(rep.max_q_residual_kvar, std::fabs(qr));
        }

        for (int e = 0; e < ne; ++e) {
            const auto& es = sc.es_units[e];
            double psum = 0.0, qsum = 0.0;
            for (int p = 0; p < kPhases; ++p) {
                psum += sched.p_es[e][s][p];
                qsum += sched.q_es[e][s][p];
            }
            const double prev = s > 0 ? sched.soc[e][s - 1] : inst.soc_init[e];
            rep.max_soc_residual =
                std::max(rep.max_soc_residual,
                         std::fabs(sched.soc[e][s] - prev +
                                   psum * dt_h / (es.energy_kwh * es.efficiency)));
            const double onoff = es.host_group
                                     ? double(sched.x[sc.group_index(*es.host_group)][s])
                                     : 1.0;
            const double tol = 1e-6 * (1.0 + es.kva_rating);
            if (psum > es.kva_rating * onoff + tol || psum < -es.charge_limit() * onoff - tol ||
                qsum < -tol || qsum > es.q_limit() * onoff + tol)
                rep.bounds_ok = false;
            const auto cuts = polygon_ball(inst.gamma[s] * es.kva_rating, 6);
            for (const auto& c : cuts)
                if (c.a * psum + c.b * qsum > c.rhs * onoff + tol) rep.polygon_ok = false;
            if (sched.soc[e][s] < es.soc_min - 1e-7 || sched.soc[e][s] > es.soc_max + 1e-7)
                rep.bounds_ok = false;
        }

        for (int i = 0; i < nd; ++i) {
            const auto& dg = sc.dg_units[i];
            const double prev = s > 0 ? sched.fuel[i][s - 1] : inst.fuel_init[i];
            const double burn = (dg.idle_lph * sched.y[i][s] + dg.prop_lpkwh * sched.p_dg[i][s]) * dt_h;
            rep.max_fuel_residual =
                std::max(rep.max_fuel_residual, std::fabs(sched.fuel[i][s] - prev + burn));
            const double tol = 1e-6 * (1.0 + dg.p_max());
            if (sched.p_dg[i][s] > dg.p_max() * sched.y[i][s] + tol ||
                sched.p_dg[i][s] < dg.p_min() * sched.y[i][s] - tol)
                rep.bounds_ok = false;
            if (sched.fuel[i][s] < dg.fuel_min - 1e-6 || sched.fuel[i][s] > dg.fuel_max + 1e-6)
                rep.bounds_ok = false;
            const int yprev = s > 0 ? sched.y[i][s - 1] : inst.y_prev[i];
            if (sched.start_cost[i][s] < dg.startup_cost * (sched.y[i][s] - yprev) - 1e-6 ||
                sched.start_cost[i][s] < -1e-9)
                rep.startup_ok = false;
            if (sched.y[i][s] && !yprev) {
                const int span = std::min(dg.min_up_slots, L - s);
                for (int s2 = s; s2 < s + span; ++s2)
                    if (!sched.y[i][s2]) rep.minup_ok = false;
            }
        }

        for (int n = 0; n < ng; ++n) {
            const int xprev = s > 0 ? sched.x[n][s - 1] : inst.x_prev[n];
            if (sched.x[n][s] && !xprev) {
                const int span = std::min(msd, L - s);
                for (int s2 = s; s2 < s + span; ++s2)
                    if (!sched.x[n][s2]) rep.msd_ok = false;
            }
            if (sc.groups[n].parent) {
                const int pidx = sc.group_index(*sc.groups[n].parent);
                if (sched.x[n][s] > sched.x[pidx][s]) rep.radial_ok = false;
            }
        }
    }
    return rep;
}

}  // namespace mgems
