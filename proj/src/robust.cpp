#include "mgems/robust.hpp"

#include <algorithm>
#include <cmath>

namespace mgems {

std::vector<double> ErrorHistory::last(int count) const {
    const int take = std::min<int>(count, int(entries_.size()));
    std::vector<double> out(take);
    for (int i = 0; i < take; ++i)
        out[i] = entries_[entries_.size() - take + i].delta_p_kw;
    return out;
}

double fuel_reserve_target(double fuel_prev, double fuel_final, int t, int d, int t_len,
                           int d_len) {
    if (fuel_prev < fuel_final) return fuel_final;  // already past the reserve line
    if (d >= d_len) return fuel_final;
    const double frac = double(int64_t(t_len) * d + t - 1) / (double(t_len) * d_len);
    return fuel_prev - (fuel_prev - fuel_final) * frac;
}

double estimate_interval_error(double soc_meas, double soc_sched, double energy_kwh,
                               double efficiency, double dt_hours) {
    const double kappa = energy_kwh * efficiency / dt_hours;
    return kappa * (soc_meas - soc_sched);
}

double correction_factor(const ErrorHistory& history, int k) {
    if (history.empty() || k <= 0) return 0.0;
    const auto window = history.last(k);
    double s = 0.0;
    for (double v : window) s += v;
    return s / double(window.size());
}

MaModel fit_ma(const ErrorHistory& history, int q, int window) {
    MaModel model;
    model.theta.assign(std::max(q, 0), 0.0);
    const auto w = history.last(window);
    const int n = int(w.size());
    if (n == 0) return model;
    double mu = 0.0;
    for (double v : w) mu += v;
    mu /= n;
    model.mu = mu;
    if (q <= 0 || n < q + 2) return model;

    // Regress z_s = (dP[s] - mu) - (dP[s-1] - mu) on the q lags before s-1,
    // the residual the recursion's theta terms must explain. Normal equations
    // solved by Gaussian elimination with partial pivoting.
    const int rows = n - q - 1;
    if (rows < 1) return model;
    std::vector<std::vector<double>> ata(q, std::vector<double>(q, 0.0));
    std::vector<double> atz(q, 0.0);
    for (int s = q + 1; s < n; ++s) {
        const double z = (w[s] - mu) - (w[s - 1] - mu);
        for (int i = 0; i < q; ++i) {
            const double xi = w[s - 1 - (i + 1)] - mu;
            atz[i] += xi * z;
            for (int j = 0; j < q; ++j) ata[i][j] += xi * (w[s - 1 - (j + 1)] - mu);
        }
    }
    for (int i = 0; i < q; ++i) ata[i][i] += 1e-9;  // ridge for rank-deficient windows
    for (int col = 0; col < q; ++col) {
        int piv = col;
        for (int r = col + 1; r < q; ++r)
            if (std::fabs(ata[r][col]) > std::fabs(ata[piv][col])) piv = r;
        std::swap(ata[col], ata[piv]);
        std::swap(atz[col], atz[piv]);
        if (std::fabs(ata[col][col]) < 1e-12) return model;  // keep theta = 0
        for (int r = 0; r < q; ++r) {
            if (r == col) continue;
            const double f = ata[r][col] / ata[col][col];
            for (int c2 = col; c2 < q; ++c2) ata[r][c2] -= f * ata[col][c2];
            atz[r] -= f * atz[col];
        }
    }
    for (int i = 0; i < q; ++i) model.theta[i] = atz[i] / ata[i][i];
    return model;
}

double predict_error(const MaModel& model, const ErrorHistory& history) {
    if (history.empty()) return model.mu;
    double pred = model.mu + (history.back() - model.mu);
    const int n = history.size();
    for (int i = 0; i < model.order(); ++i) {
        const int idx = n - 1 - (i + 1);
        if (idx < 0) break;
        pred += model.theta[i] * (history.value(idx) - model.mu);
    }
    return pred;
}

double forecast_net_load(const Scenario& scenario, int slot) {
    return scenario.net_load(scenario.fc_stage1, slot);
}

double dynamic_reserve(double p_net_meas, double p_net_forecast, double predicted_excess_kw,
                       double es_rating_kva, const ReserveState& state) {
    const double excess = std::max(predicted_excess_kw, 0.0);
    double gamma;
    if (p_net_meas > p_net_forecast)
        gamma = 1.0 - excess / es_rating_kva;
    else
        gamma = 1.0 - state.alpha;
    return std::clamp(gamma, state.gamma_lo, state.gamma_hi);
}

}  // namespace mgems
