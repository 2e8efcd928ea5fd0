#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "mgems/common.hpp"

namespace mgems {

enum class SeriesKind { truth, stage1_forecast, stage2_forecast };

const char* to_string(SeriesKind k);

// Per-node, per-phase power series on a uniform minute grid. Slot s covers
// [start_min + s*step_min, start_min + (s+1)*step_min). All powers are kW /
// kvar averages over the slot.
class TimeSeriesFrame {
public:
    struct NodeSeries {
        std::array<std::vector<double>, kPhases> load_kw;
        std::array<std::vector<double>, kPhases> pv_kw;
        std::array<std::vector<double>, kPhases> q_kvar;
    };

    int step_min = 1;
    int64_t start_min = 0;  // minutes since epoch
    int slots = 0;
    SeriesKind kind = SeriesKind::truth;
    std::map<int, NodeSeries> nodes;  // ordered: deterministic iteration

    NodeSeries& node(int id);
    const NodeSeries* find(int id) const;

    bool covers(int64_t from_min, int64_t to_min) const {
        return start_min <= from_min && start_min + int64_t(slots) * step_min >= to_min;
    }

    // Validates the frame invariants: per-node arrays all of length `slots`,
    // load and pv non-negative. Throws ScenarioError with the offending node.
    void validate() const;
};

// Downsampling (target a multiple of the frame step) takes the mean of the
// contained intervals; upsampling (target divides the step) holds the value
// constant. Mean downsampling preserves interval energy.
TimeSeriesFrame resample(const TimeSeriesFrame& frame, int target_step_min);

// CSV with header `timestamp,node,phase,load_kw,pv_kw[,q_kvar]`. Rows may be
// in any order but must tile a gap-free uniform grid per (node, phase).
// Missing q_kvar is derived from load_kw at the given power factor (lagging).
TimeSeriesFrame read_series_csv(const std::string& path, SeriesKind kind,
                                double q_power_factor);

void write_series_csv(const std::string& path, const TimeSeriesFrame& frame,
                      bool include_q);

}  // namespace mgems
