#include "mgems/stage2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mgems/polygon.hpp"

namespace mgems {

CorrectionInput allocate_lambda(const Scenario& sc, const std::vector<uint8_t>& energized,
                                int slot, double eps_hat_kw) {
    CorrectionInput ci;
    ci.eps_hat_kw = eps_hat_kw;
    ci.lambda.assign(sc.groups.size(), 0.0);
    double total = 0.0;
    std::vector<double> load(sc.groups.size(), 0.0);
    for (size_t n = 0; n < sc.groups.size(); ++n) {
        if (!energized[n]) continue;
        load[n] = sc.group_power(sc.fc_stage1, int(n), slot).total_load();
        total += load[n];
    }
    if (total <= 0.0) {
        ci.eps_hat_kw = 0.0;  // nothing connected: no correction applied
        return ci;
    }
    for (size_t n = 0; n < sc.groups.size(); ++n)
        if (energized[n]) ci.lambda[n] = load[n] / total;
    return ci;
}

namespace {

std::string kname(const char* base, int a, int k) {
    return std::string(base) + std::to_string(a) + "_k" + std::to_string(k);
}

// Default switch-deviation weight: one flip costs about one slot of the
// group's service at peak, which discourages chatter without freezing the
// switches entirely.
double switch_weight(const Scenario& sc, int n) {
    if (sc.groups[n].switch_weight > 0.0) return sc.groups[n].switch_weight;
    double peak = 0.0;
    for (int s = 0; s < sc.fc_stage1.slots; ++s)
        peak = std::max(peak, sc.group_power(sc.fc_stage1, n, s).total_load());
    return sc.groups[n].weight * peak;
}

}  // namespace

Stage2Build build_stage2(const Scenario& sc, const Stage2Instance& inst) {
    if (inst.len < 1) throw ScenarioError("stage2.window", "empty dispatch window");
    if (int(inst.xhat.size()) != int(sc.groups.size()) ||
        (inst.xhat.size() && int(inst.xhat[0].size()) != inst.len))
        throw ScenarioError("stage2.horizon", "stage-1 slice does not cover the window");
    const int L = inst.len;
    const int ng = int(sc.groups.size());
    const int ne = int(sc.es_units.size());
    const int nd = int(sc.dg_units.size());
    const double dk_h = sc.grids.dt_disp_hours();
    const int ratio = sc.grids.dt_sched_min / sc.grids.dt_disp_min;
    const int msd_k = sc.policy.msd_slots * ratio;

    Stage2Build b;
    LinearModel& m = b.model;
    m.set_obj_sense(ObjSense::maximize);

    std::vector<std::vector<Scenario::GroupPower>> gp(ng, std::vector<Scenario::GroupPower>(L));
    for (int n = 0; n < ng; ++n)
        for (int k = 0; k < L; ++k)
            gp[n][k] = sc.group_power(sc.fc_stage2, n, inst.start_kslot + k);

    b.vx.assign(ng, std::vector<int>(L));
    b.vy.assign(nd, std::vector<int>(L));
    b.vpdg.assign(nd, std::vector<int>(L));
    b.vfuel.assign(nd, std::vector<int>(L));
    b.vsoc.assign(ne, std::vector<int>(L));
    b.vpes.assign(ne, std::vector<std::array<int, kPhases>>(L));
    b.vqes.assign(ne, std::vector<std::array<int, kPhases>>(L));

    for (int n = 0; n < ng; ++n) {
        const double wsw = switch_weight(sc, n);
        for (int k = 0; k < L; ++k) {
            b.vx[n][k] = m.add_binary(kname("x", sc.groups[n].id, k));
            if (k < inst.msd_carry[n]) m.set_bounds(b.vx[n][k], 1.0, 1.0);
            double obj = sc.groups[n].weight * gp[n][k].total_load();
            // |xhat - x| is linear on binaries: xhat=1 -> 1-x, xhat=0 -> x.
            if (inst.xhat[n][k]) {
                obj += wsw;
                b.obj_offset -= wsw;
            } else {
                obj -= wsw;
            }
            m.set_obj(b.vx[n][k], obj);
        }
    }
    for (int i = 0; i < nd; ++i) {
        const auto& dg = sc.dg_units[i];
        for (int k = 0; k < L; ++k) {
            b.vy[i][k] = m.add_binary(kname("y", i, k));
            if (k < inst.minup_carry[i]) m.set_bounds(b.vy[i][k], 1.0, 1.0);
            b.vpdg[i][k] = m.add_var(kname("pdg", i, k), 0.0, dg.p_max());
            b.vfuel[i][k] = m.add_var(kname("fuel", i, k), dg.fuel_min, dg.fuel_max);
            // DG tracking deviation |pdg_hat - pdg| via an epigraph variable.
            const int dev = m.add_var(kname("dev", i, k), 0.0, kInf,
                                      VarKind::continuous, -sc.policy.dg_dev_weight);
            m.add_row(kname("devlo", i, k), {{dev, 1.0}, {b.vpdg[i][k], 1.0}}, RowSense::ge,
                      inst.pdg_hat[i][k]);
            m.add_row(kname("devhi", i, k), {{dev, 1.0}, {b.vpdg[i][k], -1.0}}, RowSense::ge,
                      -inst.pdg_hat[i][k]);
        }
    }
    for (int e = 0; e < ne; ++e) {
        const auto& es = sc.es_units[e];
        for (int k = 0; k < L; ++k) {
            b.vsoc[e][k] = m.add_var(kname("soc", e, k), es.soc_min, es.soc_max);
            for (int p = 0; p < kPhases; ++p) {
                b.vpes[e][k][p] = m.add_var(kname("pes", e, k) + "_" + std::to_string(p),
                                            -es.charge_limit(), es.kva_rating);
                b.vqes[e][k][p] = m.add_var(kname("qes", e, k) + "_" + std::to_string(p),
                                            -es.q_limit(), es.q_limit());
            }
        }
    }

    const double lambda_total =
        std::accumulate(inst.correction.lambda.begin(), inst.correction.lambda.end(), 0.0);
    const double corr_rhs = -lambda_total * inst.correction.eps_hat_kw / 3.0;

    for (int k = 0; k < L; ++k) {
        for (int p = 0; p < kPhases; ++p) {
            std::vector<std::pair<int, double>> prow, qrow;
            for (int e = 0; e < ne; ++e) {
                prow.push_back({b.vpes[e][k][p], 1.0});
                qrow.push_back({b.vqes[e][k][p], 1.0});
            }
            for (int i = 0; i < nd; ++i) {
                prow.push_back({b.vpdg[i][k], 1.0 / 3.0});
                qrow.push_back({b.vpdg[i][k], std::tan(sc.dg_units[i].pf_angle) / 3.0});
            }
            for (int n = 0; n < ng; ++n) {
                const double net = gp[n][k].load[p] - gp[n][k].pv[p];
                if (net != 0.0) prow.push_back({b.vx[n][k], -net});
                if (gp[n][k].q[p] != 0.0) qrow.push_back({b.vx[n][k], -gp[n][k].q[p]});
            }
            m.add_row(kname("pbal", p, k), std::move(prow), RowSense::eq, corr_rhs);
            m.add_row(kname("qbal", p, k), std::move(qrow), RowSense::eq, 0.0);
        }

        for (int e = 0; e < ne; ++e) {
            const auto& es = sc.es_units[e];
            const int hostx = es.host_group ? b.vx[sc.group_index(*es.host_group)][k] : -1;
            std::vector<std::pair<int, double>> psum, qsum;
            for (int p = 0; p < kPhases; ++p) {
                psum.push_back({b.vpes[e][k][p], 1.0});
                qsum.push_back({b.vqes[e][k][p], 1.0});
            }
            const double reach = inst.gamma[k] * es.kva_rating;
            if (hostx >= 0) {
                auto r1 = psum;
                r1.push_back({hostx, -es.kva_rating});
                m.add_row(kname("esphi", e, k), std::move(r1), RowSense::le, 0.0);
                auto r2 = psum;
                r2.push_back({hostx, es.charge_limit()});
                m.add_row(kname("esplo", e, k), std::move(r2), RowSense::ge, 0.0);
                auto r3 = qsum;
                r3.push_back({hostx, -es.q_limit()});
                m.add_row(kname("esqhi", e, k), std::move(r3), RowSense::le, 0.0);
            } else {
                if (es.kva_rating < reach)
                    m.add_row(kname("esphi", e, k), psum, RowSense::le, es.kva_rating);
                if (es.charge_limit() < reach)
                    m.add_row(kname("esplo", e, k), psum, RowSense::ge, -es.charge_limit());
                if (es.q_limit() < reach * std::sin(std::numbers::pi / 3.0))
                    m.add_row(kname("esqhi", e, k), qsum, RowSense::le, es.q_limit());
            }
            m.add_row(kname("esqlo", e, k), qsum, RowSense::ge, 0.0);

            const auto cuts = polygon_ball(inst.gamma[k] * es.kva_rating, 6);
            for (size_t c = 0; c < cuts.size(); ++c) {
                std::vector<std::pair<int, double>> row;
                for (int p = 0; p < kPhases; ++p) {
                    row.push_back({b.vpes[e][k][p], cuts[c].a});
                    row.push_back({b.vqes[e][k][p], cuts[c].b});
                }
                if (hostx >= 0) {
                    row.push_back({hostx, -cuts[c].rhs});
                    m.add_row(kname("hex", e, k) + "_" + std::to_string(c), std::move(row),
                              RowSense::le, 0.0);
                } else {
                    m.add_row(kname("hex", e, k) + "_" + std::to_string(c), std::move(row),
                              RowSense::le, cuts[c].rhs);
                }
            }

            const double kk = dk_h / (es.energy_kwh * es.efficiency);
            std::vector<std::pair<int, double>> soc_row;
            soc_row.push_back({b.vsoc[e][k], 1.0});
            for (int p = 0; p < kPhases; ++p) soc_row.push_back({b.vpes[e][k][p], kk});
            if (k > 0) {
                soc_row.push_back({b.vsoc[e][k - 1], -1.0});
                m.add_row(kname("socdyn", e, k), std::move(soc_row), RowSense::eq, 0.0);
            } else {
                m.add_row(kname("socdyn", e, k), std::move(soc_row), RowSense::eq,
                          inst.soc_init[e]);
            }
        }

        for (int i = 0; i < nd; ++i) {
            const auto& dg = sc.dg_units[i];
            m.add_row(kname("dgphi", i, k),
                      {{b.vpdg[i][k], 1.0}, {b.vy[i][k], -dg.p_max()}}, RowSense::le, 0.0);
            if (dg.p_min() > 0.0)
                m.add_row(kname("dgplo", i, k),
                          {{b.vpdg[i][k], 1.0}, {b.vy[i][k], -dg.p_min()}}, RowSense::ge, 0.0);

            std::vector<std::pair<int, double>> frow;
            frow.push_back({b.vfuel[i][k], 1.0});
            frow.push_back({b.vy[i][k], dg.idle_lph * dk_h});
            frow.push_back({b.vpdg[i][k], dg.prop_lpkwh * dk_h});
            if (k > 0) {
                frow.push_back({b.vfuel[i][k - 1], -1.0});
                m.add_row(kname("fueldyn", i, k), std::move(frow), RowSense::eq, 0.0);
            } else {
                m.add_row(kname("fueldyn", i, k), std::move(frow), RowSense::eq,
                          inst.fuel_init[i]);
            }

            const int span = std::min(dg.min_up_slots * ratio, L - k);
            std::vector<std::pair<int, double>> row;
            for (int k2 = k; k2 < k + span; ++k2) row.push_back({b.vy[i][k2], 1.0});
            row.push_back({b.vy[i][k], -double(span)});
            double rhs = 0.0;
            if (k > 0)
                row.push_back({b.vy[i][k - 1], double(span)});
            else
                rhs = -double(span) * inst.y_prev[i];
            m.add_row(kname("minup", i, k), std::move(row), RowSense::ge, rhs);
        }

        for (int n = 0; n < ng; ++n) {
            const int span = std::min(msd_k, L - k);
            std::vector<std::pair<int, double>> row;
            for (int k2 = k; k2 < k + span; ++k2) row.push_back({b.vx[n][k2], 1.0});
            row.push_back({b.vx[n][k], -double(span)});
            double rhs = 0.0;
            if (k > 0)
                row.push_back({b.vx[n][k - 1], double(span)});
            else
                rhs = -double(span) * inst.x_prev[n];
            m.add_row(kname("msd", n, k), std::move(row), RowSense::ge, rhs);

            if (sc.groups[n].parent) {
                const int pidx = sc.group_index(*sc.groups[n].parent);
                m.add_row(kname("rad", n, k), {{b.vx[n][k], 1.0}, {b.vx[pidx][k], -1.0}},
                          RowSense::le, 0.0);
            }
        }
    }
    return b;
}

DispatchPlan solve_stage2(const Scenario& sc, const Stage2Instance& inst) {
    Stage2Build b = build_stage2(sc, inst);
    MilpOptions opt;  // dispatch models are small: keep the tight default gap
    opt.node_limit = sc.policy.milp_node_limit;
    MilpSolution sol = solve_milp(b.model, opt);

    DispatchPlan out;
    out.start_kslot = inst.start_kslot;
    out.len = inst.len;
    out.status = sol.status;
    out.objective = sol.objective + b.obj_offset;
    out.stats = sol.stats;
    if (sol.status == SolveStatus::infeasible) {
        out.diagnosis = "dispatch infeasible: pinned commitments vs reserve-scaled capacity";
        return out;
    }
    if (sol.x.empty()) return out;
    const int L = inst.len;
    const int ng = int(sc.groups.size()), ne = int(sc.es_units.size()),
              nd = int(sc.dg_units.size());
    out.x.assign(ng, std::vector<uint8_t>(L, 0));
    out.y.assign(nd, std::vector<uint8_t>(L, 0));
    out.p_dg.assign(nd, std::vector<double>(L, 0.0));
    out.q_dg.assign(nd, std::vector<double>(L, 0.0));
    out.fuel.assign(nd, std::vector<double>(L, 0.0));
    out.soc.assign(ne, std::vector<double>(L, 0.0));
    out.p_es.assign(ne, std::vector<std::array<double, kPhases>>(L));
    out.q_es.assign(ne, std::vector<std::array<double, kPhases>>(L));
    for (int n = 0; n < ng; ++n)
        for (int k = 0; k < L; ++k) out.x[n][k] = sol.x[b.vx[n][k]] > 0.5;
    for (int i = 0; i < nd; ++i)
        for (int k = 0; k < L; ++k) {
            out.y[i][k] = sol.x[b.vy[i][k]] > 0.5;
            out.p_dg[i][k] = sol.x[b.vpdg[i][k]];
            out.q_dg[i][k] = out.p_dg[i][k] * std::tan(sc.dg_units[i].pf_angle);
            out.fuel[i][k] = sol.x[b.vfuel[i][k]];
        }
    for (int e = 0; e < ne; ++e)
        for (int k = 0; k < L; ++k) {
            out.soc[e][k] = sol.x[b.vsoc[e][k]];
            for (int p = 0; p < kPhases; ++p) {
                out.p_es[e][k][p] = sol.x[b.vpes[e][k][p]];
                out.q_es[e][k][p] = sol.x[b.vqes[e][k][p]];
            }
        }
    return out;
}

Commands DispatchPlan::first_slot(const Scenario& sc) const {
    Commands c = Commands::all_off(sc);
    if (x.empty()) return c;
    for (size_t n = 0; n < x.size(); ++n) c.group_on[n] = x[n][0];
    for (size_t i = 0; i < y.size(); ++i) {
        c.dg_on[i] = y[i][0];
        c.p_dg[i] = p_dg[i][0];
    }
    const int gfm = sc.gfm_index();
    for (size_t e = 0; e < p_es.size(); ++e) {
        if (int(e) == gfm) continue;
        c.p_es_gfl[e] = p_es[e][0];
    }
    return c;
}

Stage2Replay replay_stage2(const Scenario& sc, const Stage2Instance& inst,
                           const DispatchPlan& plan) {
    Stage2Replay rep;
    const int L = plan.len;
    const int ng = int(sc.groups.size()), ne = int(sc.es_units.size()),
              nd = int(sc.dg_units.size());
    const double dk_h = sc.grids.dt_disp_hours();
    const double lambda_total =
        std::accumulate(inst.correction.lambda.begin(), inst.correction.lambda.end(), 0.0);
    const double corr = lambda_total * inst.correction.eps_hat_kw / 3.0;
    for (int k = 0; k < L; ++k) {
        for (int p = 0; p < kPhases; ++p) {
            double pr = corr, qr = 0.0;
            for (int e = 0; e < ne; ++e) {
                pr += plan.p_es[e][k][p];
                qr += plan.q_es[e][k][p];
            }
            for (int i = 0; i < nd; ++i) {
                pr += plan.p_dg[i][k] / 3.0;
                qr += plan.q_dg[i][k] / 3.0;
            }
            for (int n = 0; n < ng; ++n) {
                if (!plan.x[n][k]) continue;
                const auto gp = sc.group_power(sc.fc_stage2, n, plan.start_kslot + k);
                pr -= gp.load[p] - gp.pv[p];
                qr -= gp.q[p];
            }
            rep.max_p_residual_kw = std::max(rep.max_p_residual_kw, std::fabs(pr));
            rep.max_q_residual_kvar = std::max(rep.max_q_residual_kvar, std::fabs(qr));
        }
        for (int e = 0; e < ne; ++e) {
            const auto& es = sc.es_units[e];
            double psum = 0.0;
            for (int p = 0; p < kPhases; ++p) psum += plan.p_es[e][k][p];
            const double prev = k > 0 ? plan.soc[e][k - 1] : inst.soc_init[e];
            rep.max_soc_residual = std::max(
                rep.max_soc_residual, std::fabs(plan.soc[e][k] - prev +
                                                psum * dk_h / (es.energy_kwh * es.efficiency)));
        }
        for (int i = 0; i < nd; ++i) {
            const auto& dg = sc.dg_units[i];
            const double prev = k > 0 ? plan.fuel[i][k - 1] : inst.fuel_init[i];
            const double burn =
                (dg.idle_lph * plan.y[i][k] + dg.prop_lpkwh * plan.p_dg[i][k]) * dk_h;
            rep.max_fuel_residual =
                std::max(rep.max_fuel_residual, std::fabs(plan.fuel[i][k] - prev + burn));
        }
    }
    return rep;
}

}  // namespace mgems
