#include "mgems/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

namespace mgems {

namespace fs = std::filesystem;
using nlohmann::json;

int Scenario::group_index(int id) const {
    for (size_t i = 0; i < groups.size(); ++i)
        if (groups[i].id == id) return int(i);
    return -1;
}

int Scenario::gfm_index() const {
    for (size_t i = 0; i < es_units.size(); ++i)
        if (es_units[i].grid_forming) return int(i);
    return -1;
}

Scenario::GroupPower Scenario::group_power(const TimeSeriesFrame& frame, int group_idx,
                                           int slot) const {
    GroupPower gp;
    const auto& g = groups.at(group_idx);
    for (int node : g.nodes) {
        const auto* ns = frame.find(node);
        if (!ns) continue;
        for (int p = 0; p < kPhases; ++p) {
            gp.load[p] += ns->load_kw[p][slot];
            gp.pv[p] += ns->pv_kw[p][slot];
            gp.q[p] += ns->q_kvar[p][slot];
        }
    }
    return gp;
}

double Scenario::net_load(const TimeSeriesFrame& frame, int slot) const {
    double net = 0.0;
    for (const auto& [id, ns] : frame.nodes)
        for (int p = 0; p < kPhases; ++p)
            net += ns.load_kw[p][slot] - ns.pv_kw[p][slot];
    return net;
}

void Scenario::validate() const {
    const auto& g = grids;
    if (g.dt_sched_min <= 0 || g.dt_disp_min <= 0 || g.dt_rt_min <= 0)
        throw ScenarioError("grids.step", "time steps must be positive");
    if (g.dt_sched_min % g.dt_disp_min != 0)
        throw ScenarioError("grids.divisibility", "dt_sched must be a multiple of dt_disp");
    if (g.dt_disp_min % g.dt_rt_min != 0)
        throw ScenarioError("grids.divisibility", "dt_disp must be a multiple of dt_rt");
    if (g.horizon_sched * g.dt_sched_min != 1440)
        throw ScenarioError("grids.horizon", "scheduler horizon must cover 24h");
    if (g.total_min <= 0 || g.total_min % g.dt_sched_min != 0)
        throw ScenarioError("grids.window",
                            "restoration window must be a whole number of dt_sched slots");
    if (g.days != (g.total_min + 1439) / 1440)
        throw ScenarioError("grids.days", "day count inconsistent with the window length");

    if (groups.empty()) throw ScenarioError("groups.empty", "no load groups");
    std::set<int> ids;
    for (const auto& lg : groups) {
        if (!ids.insert(lg.id).second)
            throw ScenarioError("group.duplicate", "duplicate group id " + std::to_string(lg.id));
        if (lg.weight <= 0.0)
            throw ScenarioError("group.weight",
                                "group " + std::to_string(lg.id) + " has non-positive weight");
        for (int cn : lg.critical_nodes)
            if (std::find(lg.nodes.begin(), lg.nodes.end(), cn) == lg.nodes.end())
                throw ScenarioError("group.critical",
                                    "critical node " + std::to_string(cn) +
                                        " not in group " + std::to_string(lg.id));
    }
    // Parent references form a forest with no cycles.
    for (const auto& lg : groups) {
        if (!lg.parent) continue;
        if (ids.count(*lg.parent) == 0)
            throw ScenarioError("group.parent",
                                "group " + std::to_string(lg.id) + " has unknown parent " +
                                    std::to_string(*lg.parent));
        int hops = 0;
        std::optional<int> cur = lg.parent;
        while (cur) {
            if (*cur == lg.id)
                throw ScenarioError("group.cycle",
                                    "radiality precedence cycle through group " +
                                        std::to_string(lg.id));
            cur = groups[group_index(*cur)].parent;
            if (++hops > int(groups.size()))
                throw ScenarioError("group.cycle", "radiality precedence cycle");
        }
    }

    for (const auto& es : es_units) {
        if (es.kva_rating <= 0 || es.energy_kwh <= 0)
            throw ScenarioError("es.rating", es.id + ": ratings must be positive");
        if (!(0.0 <= es.soc_min && es.soc_min < es.soc_max && es.soc_max <= 1.0))
            throw ScenarioError("es.soc_bounds", es.id + ": need 0 <= soc_min < soc_max <= 1");
        if (es.soc_init < es.soc_min || es.soc_init > es.soc_max)
            throw ScenarioError("es.soc_init", es.id + ": initial SoC outside bounds");
        if (!(0.0 < es.efficiency && es.efficiency <= 1.0))
            throw ScenarioError("es.efficiency", es.id + ": efficiency outside (0,1]");
        if (es.host_group && ids.count(*es.host_group) == 0)
            throw ScenarioError("es.host", es.id + ": unknown host group");
    }
    for (const auto& dg : dg_units) {
        if (dg.kva_rating <= 0)
            throw ScenarioError("dg.rating", dg.id + ": rating must be positive");
        if (!(dg.fuel_min <= dg.fuel_init && dg.fuel_init <= dg.fuel_max))
            throw ScenarioError("dg.fuel_bounds",
                                dg.id + ": need fuel_min <= fuel_init <= fuel_max");
        if (dg.idle_lph < 0 || dg.prop_lpkwh < 0)
            throw ScenarioError("dg.fuel_coeff", dg.id + ": fuel coefficients must be >= 0");
        if (dg.fuel_final < dg.fuel_min)
            throw ScenarioError("dg.fuel_final", dg.id + ": final reserve below fuel_min");
        if (dg.min_up_slots < 1)
            throw ScenarioError("dg.min_up", dg.id + ": min-up must be at least one slot");
        if (dg.host_group && ids.count(*dg.host_group) == 0)
            throw ScenarioError("dg.host", dg.id + ": unknown host group");
    }
    if (!(policy.gamma_lo <= policy.gamma_hi && policy.gamma_hi <= 1.0 && policy.gamma_lo > 0.0))
        throw ScenarioError("policy.gamma", "need 0 < gamma_lo <= gamma_hi <= 1");
    if (policy.msd_slots < 1) throw ScenarioError("policy.msd", "msd_slots must be >= 1");

    // Series coverage: every node of every group across the whole window, on
    // each frame's own grid.
    const int64_t from = grids.start_min;
    const int64_t to = grids.start_min + grids.total_min;
    struct FrameReq {
        const TimeSeriesFrame* f;
        int step;
        const char* what;
    };
    const FrameReq reqs[] = {{&truth, grids.dt_rt_min, "truth"},
                             {&fc_stage1, grids.dt_sched_min, "stage1 forecast"},
                             {&fc_stage2, grids.dt_disp_min, "stage2 forecast"}};
    for (const auto& r : reqs) {
        if (r.f->step_min != r.step)
            throw ScenarioError("series.step", std::string(r.what) + " not on its grid (" +
                                                   std::to_string(r.f->step_min) + " vs " +
                                                   std::to_string(r.step) + " min)");
        if (!r.f->covers(from, to))
            throw ScenarioError("series.coverage",
                                std::string(r.what) + " does not cover the restoration window");
        r.f->validate();
        for (const auto& lg : groups)
            for (int node : lg.nodes)
                if (!r.f->find(node))
                    throw ScenarioError("series.coverage",
                                        std::string(r.what) + " missing node " +
                                            std::to_string(node) + " of group " +
                                            std::to_string(lg.id));
    }
}

namespace {

double jget(const json& j, const char* key, double dflt) {
    return j.contains(key) ? j.at(key).get<double>() : dflt;
}

TimeSeriesFrame load_and_fit(const fs::path& path, SeriesKind kind, const TimeGrids& g,
                             int target_step, double qpf) {
    TimeSeriesFrame f = read_series_csv(path.string(), kind, qpf);
    if (f.step_min != target_step) {
        if ((target_step % f.step_min != 0) && (f.step_min % target_step != 0))
            throw ScenarioError("series.step",
                                path.string() + ": step " + std::to_string(f.step_min) +
                                    " incompatible with grid step " + std::to_string(target_step));
        // Trim to whole target slots before mean-downsampling.
        f = resample(f, target_step);
    }
    if (!f.covers(g.start_min, g.start_min + g.total_min))
        throw ScenarioError("series.coverage",
                            path.string() + " does not cover the restoration window");
    return f;
}

ReserveMode reserve_mode_from(const std::string& s) {
    if (s == "fixed") return ReserveMode::fixed;
    if (s == "netload_fraction") return ReserveMode::netload_fraction;
    if (s == "dynamic") return ReserveMode::dynamic_ma;
    throw ScenarioError("policy.reserve_mode", "unknown reserve mode '" + s + "'");
}

FuelMode fuel_mode_from(const std::string& s) {
    if (s == "fixed") return FuelMode::fixed_target;
    if (s == "rationed") return FuelMode::rationed;
    throw ScenarioError("policy.fuel_mode", "unknown fuel mode '" + s + "'");
}

const char* to_string(ReserveMode m) {
    switch (m) {
        case ReserveMode::fixed: return "fixed";
        case ReserveMode::netload_fraction: return "netload_fraction";
        case ReserveMode::dynamic_ma: return "dynamic";
    }
    return "?";
}

const char* to_string(FuelMode m) {
    return m == FuelMode::fixed_target ? "fixed" : "rationed";
}

}  // namespace

Scenario load_scenario(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config: " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ScenarioError("config.parse", config_path + ": " + e.what());
    }

    Scenario sc;
    sc.name = j.value("name", fs::path(config_path).stem().string());
    try {
        const json& jg = j.at("grids");
        sc.grids.dt_sched_min = jg.value("dt_sched_min", 30);
        sc.grids.dt_disp_min = jg.value("dt_disp_min", 5);
        sc.grids.dt_rt_min = jg.value("dt_rt_min", 1);
        sc.grids.start_min = parse_iso_minutes(jg.at("start").get<std::string>());
        int64_t end = parse_iso_minutes(jg.at("end").get<std::string>());
        if (end <= sc.grids.start_min)
            throw ScenarioError("grids.window", "end must be after start");
        sc.grids.total_min = int(end - sc.grids.start_min);
        sc.grids.days = (sc.grids.total_min + 1439) / 1440;
        sc.grids.horizon_sched = 1440 / sc.grids.dt_sched_min;
        sc.grids.horizon_disp = jg.value("horizon_disp", sc.grids.dt_sched_min / sc.grids.dt_disp_min);

        for (const json& je : j.at("groups")) {
            LoadGroupSpec lg;
            lg.id = je.at("id").get<int>();
            lg.weight = je.at("weight").get<double>();
            lg.switch_weight = jget(je, "switch_weight", 0.0);
            if (je.contains("parent") && !je.at("parent").is_null())
                lg.parent = je.at("parent").get<int>();
            lg.nodes = je.at("nodes").get<std::vector<int>>();
            if (je.contains("critical_nodes"))
                lg.critical_nodes = je.at("critical_nodes").get<std::vector<int>>();
            sc.groups.push_back(std::move(lg));
        }

        const json& jr = j.at("resources");
        if (jr.contains("es"))
            for (const json& je : jr.at("es")) {
                EsSpec es;
                es.id = je.value("id", "es" + std::to_string(sc.es_units.size() + 1));
                es.kva_rating = je.at("kva").get<double>();
                es.energy_kwh = je.at("kwh").get<double>();
                es.soc_min = jget(je, "soc_min", 0.1);
                es.soc_max = jget(je, "soc_max", 0.9);
                es.soc_init = jget(je, "soc_init", 0.5);
                es.efficiency = jget(je, "eta", 0.95);
                es.grid_forming = je.value("grid_forming", sc.es_units.empty());
                es.p_charge_max = jget(je, "p_charge_max", -1.0);
                es.q_max = jget(je, "q_max", -1.0);
                if (je.contains("host_group") && !je.at("host_group").is_null())
                    es.host_group = je.at("host_group").get<int>();
                sc.es_units.push_back(std::move(es));
            }
        if (jr.contains("dg"))
            for (const json& je : jr.at("dg")) {
                DgSpec dg;
                dg.id = je.value("id", "dg" + std::to_string(sc.dg_units.size() + 1));
                dg.kva_rating = je.at("kva").get<double>();
                dg.kva_min = jget(je, "kva_min", 0.0);
                if (je.contains("pf_angle_rad"))
                    dg.pf_angle = je.at("pf_angle_rad").get<double>();
                else
                    dg.pf_angle = std::acos(jget(je, "pf", 0.95));
                dg.fuel_init = je.at("fuel_init").get<double>();
                dg.fuel_min = jget(je, "fuel_min", 0.0);
                dg.fuel_max = jget(je, "fuel_max", dg.fuel_init);
                dg.fuel_final = jget(je, "fuel_final", 0.0);
                dg.idle_lph = jget(je, "alpha_lph", 84.87);
                dg.prop_lpkwh = jget(je, "beta_lpkwh", 0.20);
                dg.startup_cost = jget(je, "startup_cost", 6.0);
                dg.min_up_slots = int(jget(je, "min_up_slots", 2));
                if (je.contains("host_group") && !je.at("host_group").is_null())
                    dg.host_group = je.at("host_group").get<int>();
                sc.dg_units.push_back(std::move(dg));
            }

        if (j.contains("policy")) {
            const json& jp = j.at("policy");
            PolicyConfig& p = sc.policy;
            if (jp.contains("reserve_mode"))
                p.reserve_mode = reserve_mode_from(jp.at("reserve_mode").get<std::string>());
            p.gamma_fixed = jget(jp, "gamma_fixed", p.gamma_fixed);
            p.netload_fraction = jget(jp, "netload_fraction", p.netload_fraction);
            p.reserve_alpha = jget(jp, "reserve_alpha", p.reserve_alpha);
            p.gamma_lo = jget(jp, "gamma_lo", p.gamma_lo);
            p.gamma_hi = jget(jp, "gamma_hi", p.gamma_hi);
            p.correction_enabled = jp.value("correction", p.correction_enabled);
            p.correction_window = int(jget(jp, "correction_window", p.correction_window));
            p.ma_order = int(jget(jp, "ma_order", p.ma_order));
            p.ma_fit_window = int(jget(jp, "ma_fit_window", p.ma_fit_window));
            if (jp.contains("fuel_mode"))
                p.fuel_mode = fuel_mode_from(jp.at("fuel_mode").get<std::string>());
            p.fuel_fixed_target = jget(jp, "fuel_fixed_target", p.fuel_fixed_target);
            p.msd_slots = int(jget(jp, "msd_slots", p.msd_slots));
            p.q_power_factor = jget(jp, "q_power_factor", p.q_power_factor);
            p.soc_rationing = jp.value("soc_rationing", p.soc_rationing);
            p.dg_dev_weight = jget(jp, "dg_dev_weight", p.dg_dev_weight);
            p.milp_gap = jget(jp, "milp_gap", p.milp_gap);
            p.milp_node_limit = long(jget(jp, "milp_node_limit", double(p.milp_node_limit)));
        }

        const json& js = j.at("series");
        const fs::path base = fs::path(config_path).parent_path();
        sc.truth = load_and_fit(base / js.at("truth").get<std::string>(), SeriesKind::truth,
                                sc.grids, sc.grids.dt_rt_min, sc.policy.q_power_factor);
        sc.fc_stage1 = load_and_fit(base / js.at("stage1").get<std::string>(),
                                    SeriesKind::stage1_forecast, sc.grids,
                                    sc.grids.dt_sched_min, sc.policy.q_power_factor);
        sc.fc_stage2 = load_and_fit(base / js.at("stage2").get<std::string>(),
                                    SeriesKind::stage2_forecast, sc.grids,
                                    sc.grids.dt_disp_min, sc.policy.q_power_factor);
    } catch (const json::exception& e) {
        throw ScenarioError("config.schema", config_path + ": " + e.what());
    }

    sc.validate();
    return sc;
}

void save_scenario(const Scenario& sc, const std::string& dir) {
    fs::create_directories(dir);
    json j;
    j["name"] = sc.name;
    j["grids"] = {{"dt_sched_min", sc.grids.dt_sched_min},
                  {"dt_disp_min", sc.grids.dt_disp_min},
                  {"dt_rt_min", sc.grids.dt_rt_min},
                  {"horizon_disp", sc.grids.horizon_disp},
                  {"start", format_iso_minutes(sc.grids.start_min)},
                  {"end", format_iso_minutes(sc.grids.start_min + sc.grids.total_min)}};
    j["groups"] = json::array();
    for (const auto& g : sc.groups) {
        json je = {{"id", g.id},
                   {"weight", g.weight},
                   {"switch_weight", g.switch_weight},
                   {"nodes", g.nodes},
                   {"critical_nodes", g.critical_nodes}};
        if (g.parent) je["parent"] = *g.parent;
        j["groups"].push_back(je);
    }
    json jes = json::array(), jdg = json::array();
    for (const auto& es : sc.es_units)
        jes.push_back({{"id", es.id},
                       {"kva", es.kva_rating},
                       {"kwh", es.energy_kwh},
                       {"soc_min", es.soc_min},
                       {"soc_max", es.soc_max},
                       {"soc_init", es.soc_init},
                       {"eta", es.efficiency},
                       {"grid_forming", es.grid_forming}});
    for (const auto& dg : sc.dg_units)
        jdg.push_back({{"id", dg.id},
                       {"kva", dg.kva_rating},
                       {"kva_min", dg.kva_min},
                       {"pf_angle_rad", dg.pf_angle},
                       {"fuel_init", dg.fuel_init},
                       {"fuel_min", dg.fuel_min},
                       {"fuel_max", dg.fuel_max},
                       {"fuel_final", dg.fuel_final},
                       {"alpha_lph", dg.idle_lph},
                       {"beta_lpkwh", dg.prop_lpkwh},
                       {"startup_cost", dg.startup_cost},
                       {"min_up_slots", dg.min_up_slots}});
    j["resources"] = {{"es", jes}, {"dg", jdg}};
    const PolicyConfig& p = sc.policy;
    j["policy"] = {{"reserve_mode", to_string(p.reserve_mode)},
                   {"gamma_fixed", p.gamma_fixed},
                   {"netload_fraction", p.netload_fraction},
                   {"reserve_alpha", p.reserve_alpha},
                   {"gamma_lo", p.gamma_lo},
                   {"gamma_hi", p.gamma_hi},
                   {"correction", p.correction_enabled},
                   {"correction_window", p.correction_window},
                   {"ma_order", p.ma_order},
                   {"ma_fit_window", p.ma_fit_window},
                   {"fuel_mode", to_string(p.fuel_mode)},
                   {"fuel_fixed_target", p.fuel_fixed_target},
                   {"msd_slots", p.msd_slots},
                   {"q_power_factor", p.q_power_factor},
                   {"soc_rationing", p.soc_rationing},
                   {"dg_dev_weight", p.dg_dev_weight},
                   {"milp_gap", p.milp_gap},
                   {"milp_node_limit", p.milp_node_limit}};
    j["series"] = {{"truth", "truth.csv"}, {"stage1", "stage1.csv"}, {"stage2", "stage2.csv"}};

    std::ofstream out(fs::path(dir) / "scenario.json", std::ios::binary);
    if (!out) throw IoError("cannot write scenario config in " + dir);
    out << j.dump(2) << '\n';
    write_series_csv((fs::path(dir) / "truth.csv").string(), sc.truth, true);
    write_series_csv((fs::path(dir) / "stage1.csv").string(), sc.fc_stage1, true);
    write_series_csv((fs::path(dir) / "stage2.csv").string(), sc.fc_stage2, true);
}

}  // namespace mgems
