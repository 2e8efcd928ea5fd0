#pragma once

#include <vector>

#include "mgems/scenario.hpp"

namespace mgems {

// Per-interval net-load forecast-error estimates, one entry per completed
// scheduling slot, oldest first. Positive = forecast exceeded reality.
class ErrorHistory {
public:
    void push(int slot, double delta_p_kw) { entries_.push_back({slot, delta_p_kw}); }
    bool empty() const { return entries_.empty(); }
    int size() const { return int(entries_.size()); }
    double value(int i) const { return entries_[i].delta_p_kw; }
    double back() const { return entries_.back().delta_p_kw; }
    std::vector<double> last(int count) const;

private:
    struct Entry {
        int slot;
        double delta_p_kw;
    };
    std::vector<Entry> entries_;
};

// Moving-average predictor of the next interval error:
//   predict = mu + sum_i theta_i (dP[t-i] - mu) + (dP[t] - mu)
// i.e. the printed recursion taken around the window mean, so a constant
// history predicts itself and a zero model passes the last estimate through.
struct MaModel {
    double mu = 0.0;
    std::vector<double> theta;  // theta_1..theta_q
    int order() const { return int(theta.size()); }
};

struct ReserveState {
    double gamma = 1.0;
    double gamma_lo = 0.5, gamma_hi = 0.95;
    double alpha = 0.05;  // minimum reserve fraction
};

// Minimum fuel to hold at the end of a 24h scheduling window that starts at
// slot t (1-based) of day d (1-based): the straight line from the current
// level to the final reserve, evaluated at the fraction of the restoration
// elapsed when the window closes. Final day: the final reserve itself.
double fuel_reserve_target(double fuel_prev, double fuel_final, int t, int d, int t_len,
                           int d_len);

// Theorem-of-ss.III-B estimator: average net-load forecast error over the
// last scheduling interval from the slack battery's SoC deviation.
double estimate_interval_error(double soc_meas, double soc_sched, double energy_kwh,
                               double efficiency, double dt_hours);

// Mean of the most recent min(K, available) estimates; 0 on empty history.
double correction_factor(const ErrorHistory& history, int k);

// Conditional least squares over the trailing `window` entries. Falls back to
// theta = 0 with the window mean when there is not enough history.
MaModel fit_ma(const ErrorHistory& history, int q, int window);

// One-step-ahead prediction; requires order()+1 entries for the lag terms,
// degrades gracefully with less.
double predict_error(const MaModel& model, const ErrorHistory& history);

// Net load over every node and phase of the stage-1 forecast at `slot`.
double forecast_net_load(const Scenario& scenario, int slot);

// Reserve factor for the next control cycle. `predicted_excess_kw` is the
// predicted amount by which real net load will exceed the forecast (negative
// values are treated as zero).
double dynamic_reserve(double p_net_meas, double p_net_forecast, double predicted_excess_kw,
                       double es_rating_kva, const ReserveState& state);

}  // namespace mgems
