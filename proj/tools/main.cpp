#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mgems/harness.hpp"
#include "mgems/synth.hpp"

// Exit codes: 0 ok, 2 config/validation error, 3 infeasible model or solver
// failure, 4 I/O error.

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

void print_metrics(const std::string& name, const mgems::Metrics& m) {
    std::printf("case %-8s  P_CL %6.2f%%  P_NCL %6.2f%%  P_PV %6.2f%%  N_CL %2d  "
                "unsch %d (%.0f min)  sch %d (%.0f min)\n",
                name.c_str(), m.p_cl_pct, m.p_ncl_pct, m.p_pv_pct, m.n_cl, m.n_ug_unsch,
                m.t_ug_unsch_min, m.n_ug_sch, m.t_ug_sch_min);
}

mgems::Scenario load_or_generate(const std::string& scenario_path, uint64_t seed,
                                 int horizon_days) {
    if (!scenario_path.empty()) return mgems::load_scenario(scenario_path);
    mgems::SynthSpec spec;
    if (horizon_days > 0) spec.days = horizon_days;
    return mgems::generate_synthetic_scenario(spec, seed);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feeder-microgrid restoration scheduler and closed-loop simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", case_name = "base";
    uint64_t seed = 1;
    int horizon_days = 0;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--scenario", scenario_path,
                        "scenario config (JSON); omit to use a built-in synthetic one");
        sub->add_option("--seed", seed, "seed for synthetic generation");
        sub->add_option("--horizon-days", horizon_days, "override synthetic day count");
        if (needs_out) sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* run = app.add_subcommand("run", "run one case closed-loop and export reports");
    add_common(run, true);
    run->add_option("--case", case_name, "base|case1|case2|case3");

    CLI::App* compare = app.add_subcommand("compare", "run the full case matrix");
    add_common(compare, true);
    std::vector<std::string> case_list = {"base", "case1", "case2", "case3"};
    compare->add_option("--cases", case_list, "subset of cases to run");

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic scenario to disk");
    add_common(gen, true);
    mgems::SynthSpec spec;
    gen->add_option("--days", spec.days, "restoration days");
    gen->add_option("--peak-kw", spec.peak_load_kw, "feeder peak load");
    gen->add_option("--pv-penetration", spec.pv_penetration, "installed PV / peak load");
    gen->add_option("--pv-bias", spec.pv_bias_frac, "PV over-forecast fraction, e.g. 0.2");
    gen->add_option("--net-bias-kw", spec.net_bias_kw, "constant net-load forecast bias");
    gen->add_option("--cloud-spikes", spec.cloud_spikes_per_day, "cloud dips per day");
    gen->add_option("--cloud-depth", spec.cloud_depth, "dip depth fraction of PV");

    CLI::App* validate = app.add_subcommand("validate", "lint a scenario config");
    validate->add_option("--scenario", scenario_path, "scenario config (JSON)")->required();

    CLI::App* solve = app.add_subcommand("solve", "solve one stage-1 window and print it");
    add_common(solve, false);
    int solve_slot = 0;
    std::string lp_dump;
    solve->add_option("--slot", solve_slot, "window start, scheduling slots");
    solve->add_option("--dump-lp", lp_dump, "write the model in LP text format");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            mgems::Scenario sc = mgems::generate_synthetic_scenario(spec, seed);
            mgems::save_scenario(sc, out_dir);
            std::printf("wrote scenario '%s' to %s\n", sc.name.c_str(), out_dir.c_str());
            return 0;
        }
        if (validate->parsed()) {
            mgems::Scenario sc = mgems::load_scenario(scenario_path);
            std::printf("ok: %d groups, %zu ES, %zu DG, %d min window\n",
                        int(sc.groups.size()), sc.es_units.size(), sc.dg_units.size(),
                        sc.grids.total_min);
            return 0;
        }
        if (run->parsed()) {
            mgems::Scenario sc = load_or_generate(scenario_path, seed, horizon_days);
            mgems::CaseConfig cfg = mgems::CaseConfig::by_name(case_name);
            mgems::RunLog log = mgems::run_restoration(sc, cfg);
            mgems::Metrics m = mgems::compute_metrics(log, sc);
            mgems::export_report(log, m, sc, out_dir);
            print_metrics(cfg.name, m);
            return 0;
        }
        if (compare->parsed()) {
            mgems::Scenario sc = load_or_generate(scenario_path, seed, horizon_days);
            std::vector<mgems::CaseConfig> cases;
            for (const auto& name : case_list) cases.push_back(mgems::CaseConfig::by_name(name));
            auto results = mgems::run_compare(sc, cases, out_dir);
            for (const auto& [cc, m] : results) print_metrics(cc.name, m);
            return 0;
        }
        if (solve->parsed()) {
            mgems::Scenario sc = load_or_generate(scenario_path, seed, horizon_days);
            auto [wstart, wlen] = mgems::rolling_window(sc, solve_slot);
            mgems::Stage1Instance inst = mgems::Stage1Instance::fresh(sc, wstart, wlen);
            if (!lp_dump.empty()) {
                mgems::Stage1Build b = mgems::build_stage1(sc, inst);
                std::FILE* f = std::fopen(lp_dump.c_str(), "wb");
                if (!f) throw mgems::IoError("cannot write " + lp_dump);
                const std::string text = b.model.to_lp_format();
                std::fwrite(text.data(), 1, text.size(), f);
                std::fclose(f);
            }
            mgems::Stage1Schedule sched = mgems::solve_stage1(sc, inst);
            std::printf("status %s  objective %.4f  nodes %ld  lp-iterations %ld\n",
                        mgems::to_string(sched.status), sched.objective, sched.stats.nodes,
                        sched.stats.lp_iterations);
            if (!sched.diagnosis.empty()) std::printf("%s\n", sched.diagnosis.c_str());
            if (sched.status == mgems::SolveStatus::infeasible) return kExitSolver;
            for (int s = 0; s < sched.len; ++s) {
                std::printf("slot %3d  x=", wstart + s);
                for (size_t n = 0; n < sched.x.size(); ++n)
                    std::printf("%d", int(sched.x[n][s]));
                std::printf("  dg=%.0f kW  soc=%.3f  fuel=%.0f L\n",
                            sched.p_dg.empty() ? 0.0 : sched.p_dg[0][s],
                            sched.soc.empty() ? 0.0 : sched.soc[0][s],
                            sched.fuel.empty() ? 0.0 : sched.fuel[0][s]);
            }
            return 0;
        }
    } catch (const mgems::ScenarioError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const mgems::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolver;
    }
    return 0;
}
