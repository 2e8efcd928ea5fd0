// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier closed-loop criteria reuse each other's runs where the
// setup allows it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "mgems/harness.hpp"
#include "mgems/linear_model.hpp"
#include "mgems/stage1.hpp"
#include "mgems/synth.hpp"

using namespace mgems;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double unit(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------- criterion 1

struct EnumResult {
    bool feasible = false;
    double objective = 0.0;
};

EnumResult enumerate_binary(const LinearModel& m) {
    EnumResult best;
    const int n = m.num_vars();
    std::vector<double> x(n, 0.0);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        for (int j = 0; j < n; ++j) x[j] = (mask >> j) & 1 ? 1.0 : 0.0;
        bool ok = true;
        for (int i = 0; i < m.num_rows() && ok; ++i) {
            double lhs = 0;
            for (const auto& [j, c] : m.row(i).terms) lhs += c * x[j];
            switch (m.row(i).sense) {
                case RowSense::le: ok = lhs <= m.row(i).rhs + 1e-9; break;
                case RowSense::ge: ok = lhs >= m.row(i).rhs - 1e-9; break;
                case RowSense::eq: ok = std::fabs(lhs - m.row(i).rhs) <= 1e-9; break;
            }
        }
        if (!ok) continue;
        const double obj = m.objective_value(x);
        if (!best.feasible ||
            (m.obj_sense() == ObjSense::maximize ? obj > best.objective
                                                 : obj < best.objective)) {
            best.feasible = true;
            best.objective = obj;
        }
    }
    return best;
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240701);
    int checked = 0;
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 60 && ok; ++trial) {
        const int n = 3 + int(unit(rng) * 8);
        const int mr = 1 + int(unit(rng) * 10);
        LinearModel m;
        for (int j = 0; j < n; ++j) m.add_binary("b" + std::to_string(j), unit(rng) * 10 - 5);
        m.set_obj_sense(trial % 2 ? ObjSense::maximize : ObjSense::minimize);
        for (int i = 0; i < std::min(mr, 10); ++i) {
            std::vector<std::pair<int, double>> row;
            for (int j = 0; j < n; ++j)
                if (unit(rng) < 0.7) row.push_back({j, unit(rng) * 6.0 - 3.0});
            if (row.empty()) row.push_back({0, 1.0});
            m.add_row("r" + std::to_string(i), std::move(row),
                      unit(rng) < 0.5 ? RowSense::le : RowSense::ge, unit(rng) * 6.0 - 2.0);
        }
        EnumResult oracle = enumerate_binary(m);
        MilpSolution s = solve_milp(m);
        if (!oracle.feasible) {
            ok = ok && s.status == SolveStatus::infeasible;
            continue;
        }
        if (s.status != SolveStatus::optimal) {
            ok = false;
            break;
        }
        worst = std::max(worst, std::fabs(s.objective - oracle.objective));
        ok = ok && std::fabs(s.objective - oracle.objective) <= 1e-6;
        ++checked;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && checked >= 50 && secs < 10.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "milp oracle equivalence: %d feasible instances, worst gap %.2e, %.2f s",
                  checked, worst, secs);
    report(1, ok, buf);
}

// ---------------------------------------------------------------- criterion 2

void criterion2() {
    bool ok = true;
    std::string detail = "estimator vs injected bias:";
    for (double bias : {-200.0, -50.0, 50.0, 200.0}) {
        SynthSpec spec;
        spec.hours = 8;
        spec.peak_load_kw = 2500.0;
        spec.pv_penetration = 0.0;  // lossless conditions: error is the bias alone
        spec.net_bias_kw = bias;
        Scenario sc = generate_synthetic_scenario(spec, 11);
        CaseConfig cfg = CaseConfig::case1();  // correction on, fixed reserve
        RunLog log = run_restoration(sc, cfg);
        double worst = 0.0;
        int used = 0;
        bool all_valid = true;
        for (const auto& d : log.slots) {
            if (d.slot < 2) continue;  // the first interval has no prior solve
            if (!d.dp_valid) {
                all_valid = false;
                continue;
            }
            worst = std::max(worst, std::fabs(d.dp_estimate_kw - bias));
            ++used;
        }
        const bool pass = all_valid && used >= 10 && worst <= 0.01 * std::fabs(bias);
        ok = ok && pass;
        char buf[64];
        std::snprintf(buf, sizeof buf, " b=%+.0f worst |err| %.3f kW;", bias, worst);
        detail += buf;
    }
    report(2, ok, detail);
}

// ---------------------------------------------------------------- criterion 3

void criterion3() {
    SynthSpec spec;  // table-scale two-day setup
    spec.days = 2;
    Scenario sc = generate_synthetic_scenario(spec, 21);
    CaseConfig cfg = CaseConfig::case1();  // rationed fuel
    RunLog log = run_restoration(sc, cfg);
    bool every_target_met = true;
    double worst_slack = 1e18;
    for (const auto& d : log.slots) {
        const double slack = d.sched_end_fuel_l - d.fuel_target_l;
        worst_slack = std::min(worst_slack, slack);
        if (slack < -1e-4) every_target_met = false;
    }
    const double first_target = log.slots.empty() ? 0.0 : log.slots[0].fuel_target_l;
    const double boundary_fuel = log.slots.empty() ? 0.0 : log.slots[0].sched_end_fuel_l;
    const bool midpoint_ok = std::fabs(first_target - 5250.0) < 1e-6;
    const bool boundary_ok = boundary_fuel >= 5250.0 - 1e-4;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "fuel rationing: min end-fuel slack %.3f L, first target %.1f L, "
                  "day-boundary scheduled fuel %.1f L",
                  worst_slack, first_target, boundary_fuel);
    report(3, every_target_met && midpoint_ok && boundary_ok, buf);
}

// ---------------------------------------------------------------- criterion 4

void criterion4() {
    SynthSpec spec;
    spec.days = 1;
    spec.pv_bias_frac = 0.20;
    spec.pv_penetration = 1.0;
    spec.es_kwh = 4000.0;  // tighter energy buffer makes persistent bias costly
    Scenario sc = generate_synthetic_scenario(spec, 31);

    CaseConfig off = CaseConfig::case1();
    off.name = "corr_off";
    off.correction = false;
    CaseConfig on = CaseConfig::case1();
    on.name = "corr_on";

    const auto dir = fs::temp_directory_path() / "mgems_acc_c4";
    fs::remove_all(dir);
    auto results = run_compare(sc, {off, on}, dir.string());
    const Metrics& a = results[0].second;
    const Metrics& b = results[1].second;
    const double served_a = 100.0 * a.served_load_kwh / a.total_load_kwh;
    const double served_b = 100.0 * b.served_load_kwh / b.total_load_kwh;
    const bool ok = served_b >= served_a + 2.0 && b.p_pv_pct >= a.p_pv_pct + 2.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "correction efficacy: served %.2f%% -> %.2f%% (+%.2f), PV %.2f%% -> %.2f%% "
                  "(+%.2f)",
                  served_a, served_b, served_b - served_a, a.p_pv_pct, b.p_pv_pct,
                  b.p_pv_pct - a.p_pv_pct);
    report(4, ok, buf);
}

// ---------------------------------------------------------------- criterion 5

void criterion5() {
    SynthSpec spec;
    spec.days = 1;
    spec.pv_penetration = 1.0;
    spec.cloud_spikes_per_day = 8;
    spec.cloud_depth = 0.5;
    spec.cloud_len_min = 20;
    Scenario sc = generate_synthetic_scenario(spec, 41);

    CaseConfig dyn = CaseConfig::case3();
    CaseConfig lo = CaseConfig::case1();  // thin fixed reserve
    lo.name = "fixed95";
    lo.gamma_fixed = 0.95;
    CaseConfig hi = CaseConfig::case1();  // thick fixed reserve
    hi.name = "fixed80";
    hi.gamma_fixed = 0.80;

    const auto dir = fs::temp_directory_path() / "mgems_acc_c5";
    fs::remove_all(dir);
    auto results = run_compare(sc, {dyn, lo, hi}, dir.string());
    const Metrics& m_dyn = results[0].second;
    const Metrics& m_lo = results[1].second;
    const Metrics& m_hi = results[2].second;
    const bool ok = m_dyn.n_ug_unsch <= m_lo.n_ug_unsch &&
                    m_dyn.served_load_kwh >= m_hi.served_load_kwh - 1e-9;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "dynamic reserve: unsch %d (dyn) vs %d (gamma .95); served %.0f kWh (dyn) vs "
                  "%.0f kWh (gamma .80)",
                  m_dyn.n_ug_unsch, m_lo.n_ug_unsch, m_dyn.served_load_kwh,
                  m_hi.served_load_kwh);
    report(5, ok, buf);
}

// ---------------------------------------------------------------- criterion 6

void criterion6() {
    std::mt19937_64 rng(61);
    bool ok = true;
    double worst_balance = 0.0;
    int done = 0;
    for (int trial = 0; trial < 100; ++trial) {
        // Randomized small scenario with unbalanced phases.
        const int groups = 1 + int(unit(rng) * 4);
        SynthSpec spec;
        spec.hours = 24;
        spec.peak_load_kw = 800.0 + unit(rng) * 2500.0;
        spec.pv_penetration = unit(rng);
        spec.es_kva = 800.0 + unit(rng) * 1600.0;
        spec.es_kwh = 2000.0 + unit(rng) * 6000.0;
        spec.dg_kva = 1000.0 + unit(rng) * 3000.0;
        spec.dg_fuel = 1000.0 + unit(rng) * 9000.0;
        Scenario sc = generate_synthetic_scenario(spec, 1000 + trial);
        // Perturb phases so the per-phase balance is genuinely three rows.
        for (auto& [id, ns] : sc.fc_stage1.nodes)
            for (int s = 0; s < sc.fc_stage1.slots; ++s) {
                const double shift = 0.3 * unit(rng);
                ns.load_kw[0][s] *= 1.0 + shift;
                ns.load_kw[1][s] *= 1.0 - shift;
            }
        while (int(sc.groups.size()) > groups) sc.groups.pop_back();
        for (auto& g : sc.groups)
            if (g.parent && *g.parent > int(sc.groups.size())) g.parent.reset();

        const int len = 4 + int(unit(rng) * 8);
        Stage1Instance inst = Stage1Instance::fresh(sc, 0, len);
        inst.gamma.assign(len, 0.6 + 0.4 * unit(rng));
        Stage1Schedule sched = solve_stage1(sc, inst);
        if (sched.x.empty()) {  // a schedule is required; a proven optimum is not
            ok = false;
            break;
        }
        ReplayReport rep = replay_stage1(sc, inst, sched);
        worst_balance = std::max({worst_balance, rep.max_p_residual_kw,
                                  rep.max_q_residual_kvar});
        if (!rep.ok()) {
            ok = false;
            break;
        }
        ++done;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "constraint replay on %d randomized scenarios, worst balance residual %.2e kW",
                  done, worst_balance);
    report(6, ok && done == 100, buf);
}

// ------------------------------------------------------- criteria 7 and 8

void criterion7_8() {
    SynthSpec spec;  // full 48 h desk case with weather
    spec.days = 2;
    spec.pv_bias_frac = 0.15;
    spec.cloud_spikes_per_day = 6;
    spec.cloud_depth = 0.4;
    Scenario sc = generate_synthetic_scenario(spec, 71);

    const auto t0 = std::chrono::steady_clock::now();
    RunLog log = run_restoration(sc, CaseConfig::case3());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double worst = 0.0;
    bool bounds_ok = true;
    const auto& es = sc.es_units[0];
    for (const auto& row : log.minutes) {
        const double residual = row.served_load_kw - (row.served_pv_kw + row.p_dg_kw +
                                                      row.p_gfm_kw + row.p_gfl_kw);
        worst = std::max(worst, std::fabs(residual));
        if (row.soc_gfm < es.soc_min - 1e-12 || row.soc_gfm > es.soc_max + 1e-12)
            bounds_ok = false;
        if (row.fuel < sc.dg_units[0].fuel_min - 1e-9 ||
            row.fuel > sc.dg_units[0].fuel_max + 1e-9)
            bounds_ok = false;
    }
    char buf7[160];
    std::snprintf(buf7, sizeof buf7,
                  "plant conservation over %zu minutes: worst residual %.2e kW, bounds %s",
                  log.minutes.size(), worst, bounds_ok ? "held" : "violated");
    report(7, worst < 1e-9 && bounds_ok && log.minutes.size() == 2880, buf7);

    char buf8[160];
    std::snprintf(buf8, sizeof buf8,
                  "48 h closed loop (5 groups, 30/5/1 min): %.1f s, %ld stage-1 and %ld "
                  "stage-2 solves",
                  secs, log.stage1_solves, log.stage2_solves);
    report(8, secs < 600.0 && log.stage1_solves == 96, buf8);
}

// ---------------------------------------------------------------- criterion 9

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "<missing " + p.string() + ">";
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void criterion9() {
    SynthSpec spec;
    spec.days = 1;
    spec.pv_bias_frac = 0.1;
    spec.cloud_spikes_per_day = 4;
    const auto dir_a = fs::temp_directory_path() / "mgems_acc_c9a";
    const auto dir_b = fs::temp_directory_path() / "mgems_acc_c9b";
    bool ok = true;
    std::string mismatch;
    for (const auto& d : {dir_a, dir_b}) {
        fs::remove_all(d);
        Scenario sc = generate_synthetic_scenario(spec, 91);
        run_compare(sc, {CaseConfig::base_case(), CaseConfig::case3()}, d.string());
    }
    std::vector<fs::path> rel;
    for (const auto& e : fs::recursive_directory_iterator(dir_a))
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), dir_a));
    std::sort(rel.begin(), rel.end());
    for (const auto& r : rel)
        if (slurp(dir_a / r) != slurp(dir_b / r)) {
            ok = false;
            mismatch = r.string();
            break;
        }
    char buf[160];
    std::snprintf(buf, sizeof buf, "determinism: %zu report files byte-identical%s%s",
                  rel.size(), ok ? "" : "; first mismatch ", mismatch.c_str());
    report(9, ok && rel.size() >= 10, buf);
}

}  // namespace

int main() {
    try {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        criterion6();
        criterion7_8();
        criterion9();
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance aborted: %s\n", e.what());
        return 99;
    }
    std::printf("%s\n", g_failures == 0 ? "all criteria passed" : "criteria failed");
    return g_failures;
}
