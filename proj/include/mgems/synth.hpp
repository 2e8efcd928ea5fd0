#pragma once

#include <cstdint>

#include "mgems/scenario.hpp"

namespace mgems {

// Shape of a generated restoration scenario. Defaults reproduce the desk
// setup: a 3.5 MW-peak feeder in five radial load groups with three critical
// nodes, one 2000 kW / 8000 kWh grid-forming battery and one 4000 kW /
// 10000 L diesel unit.
//
// Forecast errors are constructed, not sampled from residuals: the truth is
// the base profile; the forecasts are the truth resampled plus the injected
// error terms, so with every knob at zero the forecasts equal the truth
// exactly.
struct SynthSpec {
    int days = 2;
    int hours = 0;  // when > 0, overrides days with a sub-day restoration
    double peak_load_kw = 3500.0;
    double pv_penetration = 0.9;   // installed PV vs peak load
    double pv_bias_frac = 0.0;     // forecast PV = (1+bias) * truth PV
    double net_bias_kw = 0.0;      // added to both load forecasts, spread by load share
    double cloud_spikes_per_day = 0.0;
    double cloud_depth = 0.5;      // fraction of PV lost during a spike
    int cloud_len_min = 15;
    double es_kva = 2000.0, es_kwh = 8000.0;
    double dg_kva = 4000.0, dg_fuel = 10000.0, dg_fuel_final = 500.0;
    double soc_init = 0.5;
    std::string start_iso = "2024-07-01T00:00:00";
};

Scenario generate_synthetic_scenario(const SynthSpec& spec, uint64_t seed);

}  // namespace mgems
