#include "mgems/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mgems {

const char* to_string(SeriesKind k) {
    switch (k) {
        case SeriesKind::truth: return "truth";
        case SeriesKind::stage1_forecast: return "stage1_forecast";
        case SeriesKind::stage2_forecast: return "stage2_forecast";
    }
    return "?";
}

TimeSeriesFrame::NodeSeries& TimeSeriesFrame::node(int id) {
    auto& ns = nodes[id];
    for (int p = 0; p < kPhases; ++p) {
        if (ns.load_kw[p].empty() && slots > 0) {
            ns.load_kw[p].assign(slots, 0.0);
            ns.pv_kw[p].assign(slots, 0.0);
            ns.q_kvar[p].assign(slots, 0.0);
        }
    }
    return ns;
}

const TimeSeriesFrame::NodeSeries* TimeSeriesFrame::find(int id) const {
    auto it = nodes.find(id);
    return it == nodes.end() ? nullptr : &it->second;
}

void TimeSeriesFrame::validate() const {
    for (const auto& [id, ns] : nodes) {
        for (int p = 0; p < kPhases; ++p) {
            if (int(ns.load_kw[p].size()) != slots || int(ns.pv_kw[p].size()) != slots ||
                int(ns.q_kvar[p].size()) != slots)
                throw ScenarioError("series.gap",
                                    "node " + std::to_string(id) + " phase " +
                                        std::to_string(p + 1) + " has gaps on the " +
                                        std::to_string(step_min) + "-min grid");
            for (int s = 0; s < slots; ++s) {
                if (ns.load_kw[p][s] < 0.0)
                    throw ScenarioError("series.negative",
                                        "negative load at node " + std::to_string(id));
                if (ns.pv_kw[p][s] < 0.0)
                    throw ScenarioError("series.negative",
                                        "negative pv at node " + std::to_string(id));
            }
        }
    }
}

namespace {

std::vector<double> resample_vec(const std::vector<double>& v, int ratio, bool down) {
    std::vector<double> out;
    if (down) {
        out.resize(v.size() / ratio);
        for (size_t i = 0; i < out.size(); ++i) {
            double s = 0.0;
            for (int j = 0; j < ratio; ++j) s += v[i * ratio + j];
            out[i] = s / ratio;
        }
    } else {
        out.resize(v.size() * ratio);
        for (size_t i = 0; i < v.size(); ++i)
            for (int j = 0; j < ratio; ++j) out[i * ratio + j] = v[i];
    }
    return out;
}

}  // namespace

TimeSeriesFrame resample(const TimeSeriesFrame& frame, int target_step_min) {
    if (target_step_min <= 0)
        throw ScenarioError("series.step", "target step must be positive");
    if (target_step_min == frame.step_min) return frame;

    const bool down = target_step_min > frame.step_min;
    const int ratio = down ? target_step_min / frame.step_min
                           : frame.step_min / target_step_min;
    if ((down && target_step_min % frame.step_min != 0) ||
        (!down && frame.step_min % target_step_min != 0))
        throw ScenarioError("series.step",
                            "incompatible steps: " + std::to_string(frame.step_min) +
                                " -> " + std::to_string(target_step_min));
    if (down && frame.slots % ratio != 0)
        throw ScenarioError("series.step",
                            "frame length not a whole number of target slots");

    TimeSeriesFrame out;
    out.step_min = target_step_min;
    out.start_min = frame.start_min;
    out.slots = down ? frame.slots / ratio : frame.slots * ratio;
    out.kind = frame.kind;
    for (const auto& [id, ns] : frame.nodes) {
        TimeSeriesFrame::NodeSeries o;
        for (int p = 0; p < kPhases; ++p) {
            o.load_kw[p] = resample_vec(ns.load_kw[p], ratio, down);
            o.pv_kw[p] = resample_vec(ns.pv_kw[p], ratio, down);
            o.q_kvar[p] = resample_vec(ns.q_kvar[p], ratio, down);
        }
        out.nodes.emplace(id, std::move(o));
    }
    return out;
}

TimeSeriesFrame read_series_csv(const std::string& path, SeriesKind kind,
                                double q_power_factor) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open series file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw IoError("empty series file: " + path);
    while (!header.empty() && (header.back() == '\r' || header.back() == '\n'))
        header.pop_back();
    bool has_q;
    if (header == "timestamp,node,phase,load_kw,pv_kw")
        has_q = false;
    else if (header == "timestamp,node,phase,load_kw,pv_kw,q_kvar")
        has_q = true;
    else
        throw ScenarioError("series.header", path + ": unexpected header '" + header + "'");

    const double tanphi = std::tan(std::acos(q_power_factor));

    struct Row {
        int64_t min;
        int node, phase;
        double load, pv, q;
    };
    std::vector<Row> rows;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::array<std::string, 6> f;
        size_t pos = 0;
        int nf = 0;
        while (nf < 6 && pos <= line.size()) {
            size_t c = line.find(',', pos);
            if (c == std::string::npos) c = line.size();
            f[nf++] = line.substr(pos, c - pos);
            pos = c + 1;
        }
        if (nf < (has_q ? 6 : 5))
            throw ScenarioError("series.row",
                                path + ":" + std::to_string(lineno) + ": short row");
        Row r;
        r.min = parse_iso_minutes(f[0]);
        r.node = std::stoi(f[1]);
        r.phase = std::stoi(f[2]);
        if (r.phase < 1 || r.phase > kPhases)
            throw ScenarioError("series.phase",
                                path + ":" + std::to_string(lineno) + ": phase " + f[2]);
        r.load = std::stod(f[3]);
        r.pv = std::stod(f[4]);
        r.q = has_q ? std::stod(f[5]) : r.load * tanphi;
        rows.push_back(r);
    }
    if (rows.empty()) throw ScenarioError("series.empty", path + ": no data rows");

    int64_t tmin = rows[0].min, tmax = rows[0].min;
    for (const auto& r : rows) {
        tmin = std::min(tmin, r.min);
        tmax = std::max(tmax, r.min);
    }
    // Infer the step from the smallest positive gap between distinct stamps.
    std::vector<int64_t> stamps;
    stamps.reserve(rows.size());
    for (const auto& r : rows) stamps.push_back(r.min);
    std::sort(stamps.begin(), stamps.end());
    stamps.erase(std::unique(stamps.begin(), stamps.end()), stamps.end());
    int64_t step = stamps.size() > 1 ? stamps[1] - stamps[0] : 1;
    for (size_t i = 1; i < stamps.size(); ++i)
        step = std::min(step, stamps[i] - stamps[i - 1]);

    TimeSeriesFrame frame;
    frame.kind = kind;
    frame.step_min = int(step);
    frame.start_min = tmin;
    frame.slots = int((tmax - tmin) / step) + 1;
    for (const auto& r : rows) {
        if ((r.min - tmin) % step != 0)
            throw ScenarioError("series.grid",
                                path + ": timestamp " + format_iso_minutes(r.min) +
                                    " off the " + std::to_string(step) + "-min grid");
        auto& ns = frame.node(r.node);
        int s = int((r.min - tmin) / step);
        ns.load_kw[r.phase - 1][s] = r.load;
        ns.pv_kw[r.phase - 1][s] = r.pv;
        ns.q_kvar[r.phase - 1][s] = r.q;
    }
    frame.validate();
    return frame;
}

void write_series_csv(const std::string& path, const TimeSeriesFrame& frame,
                      bool include_q) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write series file: " + path);
    out << (include_q ? "timestamp,node,phase,load_kw,pv_kw,q_kvar\n"
                      : "timestamp,node,phase,load_kw,pv_kw\n");
    for (const auto& [id, ns] : frame.nodes) {
        for (int p = 0; p < kPhases; ++p) {
            for (int s = 0; s < frame.slots; ++s) {
                out << format_iso_minutes(frame.start_min + int64_t(s) * frame.step_min)
                    << ',' << id << ',' << (p + 1) << ',' << format_double(ns.load_kw[p][s])
                    << ',' << format_double(ns.pv_kw[p][s]);
                if (include_q) out << ',' << format_double(ns.q_kvar[p][s]);
                out << '\n';
            }
        }
    }
}

}  // namespace mgems
