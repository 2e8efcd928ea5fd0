#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mgems/linear_model.hpp"

// Bounded-variable primal simplex on the full tableau. One logical variable
// per row turns every row into an equality:
//   <=  ->  s in [0, +inf)
//   >=  ->  s in (-inf, 0]
//   =   ->  s fixed at 0
//
// The constraint matrix is equilibrated (geometric-mean row/column scaling)
// up front; scheduling models mix kW-scale balance rows with 1e-5-scale state
// recursions and the raw tableau corrupts without it. Logical columns keep
// unit scale so the identity block stays exact.
//
// A crash pass pivots structural columns into equality rows so the fixed
// logicals start outside the basis. Phase 1 is the composite method: it
// minimizes total bound violation of the basic values, re-pricing the
// violation gradient every iteration. The ratio test is Harris-style: pass
// one finds the tightest step with bound tolerances added, pass two takes
// the largest pivot among blockers within that step. Deterministic
// throughout; Bland's rule kicks in after a run of degenerate steps.
//
// The core is reusable: set_var_bounds + resolve() re-optimizes from the
// current basis, which is what makes branch-and-bound nodes cheap.

namespace mgems::detail {

class SimplexCore {
public:
    static constexpr double kDualTol = 1e-9;
    static constexpr double kPivotSkip = 1e-11;
    static constexpr int kStallLimit = 120;
    static constexpr int kRefreshEvery = 256;

    enum State : int8_t { kBasic = 0, kAtLb = 1, kAtUb = 2, kFreeNb = 3 };

    SimplexCore(const LinearModel& model, const LpOptions& opt) : opt_(opt) {
        n_ = model.num_vars();
        m_ = model.num_rows();
        total_ = n_ + m_;
        cost_sign_ = model.obj_sense() == ObjSense::maximize ? -1.0 : 1.0;

        rscale_.assign(m_, 1.0);
        cscale_.assign(n_, 1.0);
        for (int round = 0; round < 2; ++round) {
            for (int i = 0; i < m_; ++i) {
                double lo = kInf, hi = 0.0;
                for (const auto& [j, c] : model.row(i).terms) {
                    const double a = std::fabs(c) * rscale_[i] * cscale_[j];
                    if (a > 0) {
                        lo = std::min(lo, a);
                        hi = std::max(hi, a);
                    }
                }
                if (hi > 0) rscale_[i] /= std::sqrt(lo * hi);
            }
            std::vector<double> clo(n_, kInf), chi(n_, 0.0);
            for (int i = 0; i < m_; ++i)
                for (const auto& [j, c] : model.row(i).terms) {
                    const double a = std::fabs(c) * rscale_[i] * cscale_[j];
                    if (a > 0) {
                        clo[j] = std::min(clo[j], a);
                        chi[j] = std::max(chi[j], a);
                    }
                }
            for (int j = 0; j < n_; ++j)
                if (chi[j] > 0) cscale_[j] /= std::sqrt(clo[j] * chi[j]);
        }

        lb_.resize(total_);
        ub_.resize(total_);
        cost_.assign(total_, 0.0);
        for (int j = 0; j < n_; ++j) {
            lb_[j] = model.var(j).lb / cscale_[j];
            ub_[j] = model.var(j).ub / cscale_[j];
            cost_[j] = cost_sign_ * model.var(j).obj * cscale_[j];
        }
        for (int i = 0; i < m_; ++i) {
            switch (model.row(i).sense) {
                case RowSense::le: lb_[n_ + i] = 0.0; ub_[n_ + i] = kInf; break;
                case RowSense::ge: lb_[n_ + i] = -kInf; ub_[n_ + i] = 0.0; break;
                case RowSense::eq: lb_[n_ + i] = 0.0; ub_[n_ + i] = 0.0; break;
            }
        }
        lo_tol_.resize(total_);
        hi_tol_.resize(total_);
        for (int j = 0; j < total_; ++j) refresh_tol(j);

        tab_.assign(size_t(m_) * total_, 0.0);
        bcol_.resize(m_);
        colnnz_.assign(n_, 0);
        for (int i = 0; i < m_; ++i) {
            double* row = tab_row(i);
            for (const auto& [j, c] : model.row(i).terms) {
                row[j] += c * rscale_[i] * cscale_[j];
                ++colnnz_[j];
            }
            row[n_ + i] = 1.0;
            bcol_[i] = model.row(i).rhs * rscale_[i];
        }
        basic_.resize(m_);
        state_.assign(total_, kAtLb);
        xval_.assign(total_, 0.0);
        for (int i = 0; i < m_; ++i) {
            basic_[i] = n_ + i;
            state_[n_ + i] = kBasic;
        }
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == kBasic) continue;
            rest_at_bound(j);
        }
        crash();
    }

    // Objective coefficient in the model's units and sense; takes effect at
    // the next solve() (phase 2 always rebuilds the cost row).
    void set_obj_coeff(int j, double obj) { cost_[j] = cost_sign_ * obj * cscale_[j]; }

    // Absolute bounds in the model's units; a nonbasic variable rests on the
    // new bound nearest its current value, so loosening a fixed variable does
    // not yank the point around. Call solve() afterwards.
    void set_var_bounds(int j, double lb, double ub) {
        lb_[j] = lb / cscale_[j];
        ub_[j] = ub / cscale_[j];
        refresh_tol(j);
        if (state_[j] == kBasic) return;
        const bool flb = std::isfinite(lb_[j]), fub = std::isfinite(ub_[j]);
        if (!flb && !fub) {
            state_[j] = kFreeNb;
            xval_[j] = 0.0;
            return;
        }
        const double cur = xval_[j];
        const double dlo = flb ? std::fabs(cur - lb_[j]) : kInf;
        const double dhi = fub ? std::fabs(cur - ub_[j]) : kInf;
        if (dlo <= dhi) {
            state_[j] = kAtLb;
            xval_[j] = lb_[j];
        } else {
            state_[j] = kAtUb;
            xval_[j] = ub_[j];
        }
    }

    // Optimizes from the current basis. The iteration budget is per call;
    // iterations() keeps the running total for reporting.
    SolveStatus solve() {
        budget_ = iterations_ + opt_.max_iterations;
        compute_beta();
        if (!phase1())
            return iterations_ >= budget_ ? SolveStatus::iteration_limit
                                          : SolveStatus::infeasible;
        return phase2();
    }

    std::vector<double> extract_x() const {
        std::vector<double> x(n_, 0.0);
        for (int j = 0; j < n_; ++j)
            if (state_[j] != kBasic) x[j] = xval_[j] * cscale_[j];
        for (int i = 0; i < m_; ++i)
            if (basic_[i] < n_) x[basic_[i]] = beta_[i] * cscale_[basic_[i]];
        return x;
    }

    std::vector<double> extract_duals() const {
        std::vector<double> y(m_, 0.0);
        for (int i = 0; i < m_; ++i) y[i] = -cost_sign_ * zrow_[n_ + i] * rscale_[i];
        return y;
    }

    long iterations() const { return iterations_; }

private:
    void refresh_tol(int j) {
        lo_tol_[j] = opt_.feas_tol * (1.0 + (std::isfinite(lb_[j]) ? std::fabs(lb_[j]) : 0.0));
        hi_tol_[j] = opt_.feas_tol * (1.0 + (std::isfinite(ub_[j]) ? std::fabs(ub_[j]) : 0.0));
    }

    void rest_at_bound(int j) {
        const bool flb = std::isfinite(lb_[j]), fub = std::isfinite(ub_[j]);
        if (flb && (!fub || std::fabs(lb_[j]) <= std::fabs(ub_[j]))) {
            state_[j] = kAtLb;
            xval_[j] = lb_[j];
        } else if (fub) {
            state_[j] = kAtUb;
            xval_[j] = ub_[j];
        } else {
            state_[j] = kFreeNb;
            xval_[j] = 0.0;
        }
    }

    double* tab_row(int i) { return tab_.data() + size_t(i) * total_; }
    const double* tab_row(int i) const { return tab_.data() + size_t(i) * total_; }

    void pivot_algebra(int r, int q) {
        double* prow = tab_row(r);
        const double inv = 1.0 / prow[q];
        for (int j = 0; j < total_; ++j) prow[j] *= inv;
        prow[q] = 1.0;
        bcol_[r] *= inv;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* row = tab_row(i);
            const double f = row[q];
            if (f == 0.0) continue;
            for (int j = 0; j < total_; ++j) {
                double v = row[j] - f * prow[j];
                // Scaled entries are O(1); dust this small is rounding noise
                // and keeping it would densify every later pivot.
                row[j] = std::fabs(v) < 1e-14 ? 0.0 : v;
            }
            row[q] = 0.0;
            bcol_[i] -= f * bcol_[r];
        }
        if (!zrow_.empty()) {
            const double f = zrow_[q];
            if (f != 0.0) {
                for (int j = 0; j < total_; ++j) zrow_[j] -= f * prow[j];
                zrow_[q] = 0.0;
            }
        }
    }

    void crash() {
        for (int r = 0; r < m_; ++r) {
            if (!(lb_[n_ + r] == 0.0 && ub_[n_ + r] == 0.0)) continue;
            if (basic_[r] != n_ + r) continue;
            const double* row = tab_row(r);
            double rowmax = 0.0;
            for (int j = 0; j < n_; ++j)
                if (state_[j] != kBasic) rowmax = std::max(rowmax, std::fabs(row[j]));
            if (rowmax < 1e-8) continue;
            int best = -1;
            int best_nnz = 0;
            for (int j = 0; j < n_; ++j) {
                if (state_[j] == kBasic || lb_[j] == ub_[j]) continue;
                if (std::fabs(row[j]) < 0.05 * rowmax) continue;
                if (best < 0 || colnnz_[j] < best_nnz ||
                    (colnnz_[j] == best_nnz &&
                     std::fabs(row[j]) > std::fabs(row[best]) + 1e-12)) {
                    best = j;
                    best_nnz = colnnz_[j];
                }
            }
            if (best < 0) continue;
            pivot_algebra(r, best);
            state_[n_ + r] = kAtLb;
            xval_[n_ + r] = 0.0;
            state_[best] = kBasic;
            basic_[r] = best;
        }
    }

    // beta = B^-1 b - sum over nonbasic j with nonzero value of column * value
    void compute_beta() {
        beta_ = bcol_;
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == kBasic || xval_[j] == 0.0) continue;
            const double v = xval_[j];
            for (int i = 0; i < m_; ++i) {
                const double a = tab_row(i)[j];
                if (a != 0.0) beta_[i] -= a * v;
            }
        }
    }

    void refresh_zrow() {
        zrow_ = cost_;
        for (int i = 0; i < m_; ++i) {
            const double cb = cost_[basic_[i]];
            if (cb == 0.0) continue;
            const double* row = tab_row(i);
            for (int j = 0; j < total_; ++j) zrow_[j] -= cb * row[j];
        }
        for (int i = 0; i < m_; ++i) zrow_[basic_[i]] = 0.0;
    }

    double excess_lo(int i) const {
        const int b = basic_[i];
        return std::isfinite(lb_[b]) ? (lb_[b] - beta_[i]) - lo_tol_[b] : -kInf;
    }
    double excess_hi(int i) const {
        const int b = basic_[i];
        return std::isfinite(ub_[b]) ? (beta_[i] - ub_[b]) - hi_tol_[b] : -kInf;
    }

    struct Ratio {
        double step = kInf;
        int row = -1;      // -1: own-bound flip
        int to_upper = 0;  // leaving variable lands on its upper bound
    };

    // Harris two-pass ratio test; one strided pass fills colbuf_ which
    // apply_step reuses. Infeasible basics (phase 1) block at their violated
    // bound; feasible basics block at whichever bound the movement
    // approaches.
    Ratio ratio_test(int q, int dir, bool phase1_mode) {
        colbuf_.resize(m_);
        for (int i = 0; i < m_; ++i) colbuf_[i] = tab_row(i)[q];
        blocks_.clear();
        double relaxed_limit = kInf;
        const double span = ub_[q] - lb_[q];
        for (int i = 0; i < m_; ++i) {
            const double a = colbuf_[i];
            if (std::fabs(a) < kPivotSkip) continue;
            const double rate = -dir * a;  // d beta_i / d step
            const int b = basic_[i];
            const double lo = lb_[b], hi = ub_[b];
            double strict, relaxed;
            int to_upper;
            if (phase1_mode && excess_lo(i) > 0) {
                if (rate <= 0) continue;  // worsening rows are in the gradient
                strict = (lo - beta_[i]) / rate;
                relaxed = (lo + lo_tol_[b] - beta_[i]) / rate;
                to_upper = 0;
            } else if (phase1_mode && excess_hi(i) > 0) {
                if (rate >= 0) continue;
                strict = (hi - beta_[i]) / rate;
                relaxed = (hi - hi_tol_[b] - beta_[i]) / rate;
                to_upper = 1;
            } else if (rate > 0) {
                if (!std::isfinite(hi)) continue;
                strict = (hi - beta_[i]) / rate;
                relaxed = (hi + hi_tol_[b] - beta_[i]) / rate;
                to_upper = 1;
            } else {
                if (!std::isfinite(lo)) continue;
                strict = (lo - beta_[i]) / rate;
                relaxed = (lo - lo_tol_[b] - beta_[i]) / rate;
                to_upper = 0;
            }
            if (strict < 0) strict = 0;
            if (relaxed < 0) relaxed = 0;
            blocks_.push_back({i, strict, relaxed, std::fabs(a), to_upper});
            relaxed_limit = std::min(relaxed_limit, relaxed);
        }
        Ratio best;
        if (std::isfinite(span)) best.step = span;
        if (blocks_.empty() || relaxed_limit >= best.step) return best;  // flip/unbounded

        // Largest pivot among blockers inside the relaxed step. The row that
        // attains the relaxed minimum always qualifies, so pick is never null.
        const BlockScratch* pick = nullptr;
        for (const auto& blk : blocks_) {
            if (blk.strict > relaxed_limit) continue;
            if (!pick || blk.pivot > pick->pivot + 1e-12 ||
                (std::fabs(blk.pivot - pick->pivot) <= 1e-12 && blk.row < pick->row))
                pick = &blk;
        }
        best.step = std::max(pick->strict, 0.0);
        best.row = pick->row;
        best.to_upper = pick->to_upper;
        return best;
    }

    // Requires ratio_test to have filled colbuf_ for column q.
    void apply_step(int q, int dir, const Ratio& r) {
        const double d = r.step;
        if (r.row < 0) {
            if (d != 0.0)
                for (int i = 0; i < m_; ++i) {
                    const double a = colbuf_[i];
                    if (a != 0.0) beta_[i] -= dir * a * d;
                }
            state_[q] = state_[q] == kAtLb ? kAtUb : kAtLb;
            xval_[q] = state_[q] == kAtLb ? lb_[q] : ub_[q];
            return;
        }
        const double enter_val = xval_[q] + dir * d;
        if (d != 0.0)
            for (int i = 0; i < m_; ++i) {
                if (i == r.row) continue;
                const double a = colbuf_[i];
                if (a != 0.0) beta_[i] -= dir * a * d;
            }
        const int leave = basic_[r.row];
        const double leave_val = r.to_upper ? ub_[leave] : lb_[leave];
        pivot_algebra(r.row, q);
        state_[leave] = r.to_upper ? kAtUb : kAtLb;
        xval_[leave] = leave_val;
        state_[q] = kBasic;
        basic_[r.row] = q;
        beta_[r.row] = enter_val;
    }

    bool phase1() {
        int stall = 0;
        std::vector<int> below, above;
        while (iterations_ < budget_) {
            below.clear();
            above.clear();
            for (int i = 0; i < m_; ++i) {
                if (excess_lo(i) > 0) below.push_back(i);
                else if (excess_hi(i) > 0) above.push_back(i);
            }
            if (below.empty() && above.empty()) return true;
            gvec_.assign(total_, 0.0);
            for (int i : below) {
                const double* row = tab_row(i);
                for (int j = 0; j < total_; ++j) gvec_[j] += row[j];
            }
            for (int i : above) {
                const double* row = tab_row(i);
                for (int j = 0; j < total_; ++j) gvec_[j] -= row[j];
            }
            int q = -1, dir = 0;
            double best_rate = kDualTol;
            const bool bland = stall >= kStallLimit;
            for (int j = 0; j < total_; ++j) {
                if (state_[j] == kBasic || lb_[j] == ub_[j]) continue;
                const double g = gvec_[j];
                double rate = 0.0;
                int d = 0;
                if ((state_[j] == kAtLb || state_[j] == kFreeNb) && g < -kDualTol) {
                    rate = -g;
                    d = 1;
                } else if ((state_[j] == kAtUb || state_[j] == kFreeNb) && g > kDualTol) {
                    rate = g;
                    d = -1;
                }
                if (d == 0) continue;
                if (bland) {
                    q = j;
                    dir = d;
                    break;
                }
                if (rate > best_rate + 1e-12) {
                    best_rate = rate;
                    q = j;
                    dir = d;
                }
            }
            if (q < 0) return false;  // no way to reduce violation: infeasible
            Ratio r = ratio_test(q, dir, true);
            if (!std::isfinite(r.step)) return false;
            ++iterations_;
            apply_step(q, dir, r);
            stall = r.step < 1e-10 ? stall + 1 : 0;
            if (iterations_ % kRefreshEvery == 0) compute_beta();
        }
        return false;
    }

    SolveStatus phase2() {
        refresh_zrow();
        int stall = 0;
        long last_zrow_refresh = iterations_;
        while (iterations_ < budget_) {
            int q = -1, dir = 0;
            double best = kDualTol;
            const bool bland = stall >= kStallLimit;
            for (int j = 0; j < total_; ++j) {
                if (state_[j] == kBasic || lb_[j] == ub_[j]) continue;
                const double z = zrow_[j];
                double rate = 0.0;
                int d = 0;
                if ((state_[j] == kAtLb || state_[j] == kFreeNb) && z < -kDualTol) {
                    rate = -z;
                    d = 1;
                } else if ((state_[j] == kAtUb || state_[j] == kFreeNb) && z > kDualTol) {
                    rate = z;
                    d = -1;
                }
                if (d == 0) continue;
                if (bland) {
                    q = j;
                    dir = d;
                    break;
                }
                if (rate > best + 1e-12) {
                    best = rate;
                    q = j;
                    dir = d;
                }
            }
            if (q < 0) {
                // Confirm optimality against a freshly recomputed cost row;
                // accumulated error can hide an improving column.
                if (iterations_ != last_zrow_refresh) {
                    refresh_zrow();
                    last_zrow_refresh = iterations_;
                    bool improving = false;
                    for (int j = 0; j < total_ && !improving; ++j) {
                        if (state_[j] == kBasic || lb_[j] == ub_[j]) continue;
                        if ((state_[j] == kAtLb || state_[j] == kFreeNb) &&
                            zrow_[j] < -10 * kDualTol)
                            improving = true;
                        else if ((state_[j] == kAtUb || state_[j] == kFreeNb) &&
                                 zrow_[j] > 10 * kDualTol)
                            improving = true;
                    }
                    if (improving) continue;
                }
                return SolveStatus::optimal;
            }
            Ratio r = ratio_test(q, dir, false);
            if (!std::isfinite(r.step)) return SolveStatus::unbounded;
            ++iterations_;
            apply_step(q, dir, r);
            stall = r.step < 1e-10 ? stall + 1 : 0;
            if (iterations_ % kRefreshEvery == 0) {
                compute_beta();
                refresh_zrow();
                last_zrow_refresh = iterations_;
            }
        }
        return SolveStatus::iteration_limit;
    }

    LpOptions opt_;
    int n_ = 0, m_ = 0, total_ = 0;
    double cost_sign_ = 1.0;
    std::vector<double> lb_, ub_, cost_, lo_tol_, hi_tol_, rscale_, cscale_;
    std::vector<double> tab_, bcol_, beta_, zrow_, xval_;
    std::vector<int> basic_, colnnz_;
    std::vector<int8_t> state_;
    long iterations_ = 0;
    long budget_ = 0;

    struct BlockScratch {
        int row;
        double strict, relaxed, pivot;
        int to_upper;
    };
    std::vector<BlockScratch> blocks_;
    std::vector<double> colbuf_, gvec_;
};

}  // namespace mgems::detail
