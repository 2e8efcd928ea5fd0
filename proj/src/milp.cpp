#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <vector>

#include "simplex_core.hpp"

// Branch and bound over the integer marks of a LinearModel. All node LPs run
// on one shared simplex core: a node is evaluated by moving binary bounds in
// place and re-optimizing from the current basis, which costs a few dozen
// pivots instead of a cold solve. The full-tableau core accumulates rounding
// error over long warm sequences, so it is rebuilt on a fixed cadence and
// whenever an "optimal" point fails a residual check against the original
// data.
//
// Incumbents come from dive-and-fix rounds, a feasibility pump, and a
// depth-first plunge; the tree search itself is plain best-bound with
// most-fractional branching and lowest-index ties.

namespace mgems {

namespace {

constexpr int kRebuildEvery = 48;  // node solves between fresh factorizations

struct Node {
    double bound = 0.0;  // parent LP objective, valid relaxation bound
    long id = 0;
    std::vector<std::pair<int, int8_t>> fixes;  // (index into ints, value)
};

struct NodeOrder {
    bool maximize;
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return maximize ? a.bound < b.bound : a.bound > b.bound;
        return a.id > b.id;  // FIFO on ties
    }
};

int most_fractional(const std::vector<int>& ints, const std::vector<double>& x,
                    double int_tol) {
    int pick = -1;
    double best = int_tol;
    for (size_t k = 0; k < ints.size(); ++k) {
        const double v = x[ints[k]];
        const double f = v - std::floor(v);
        const double dist = std::min(f, 1.0 - f);
        if (dist > best + 1e-15) {
            best = dist;
            pick = int(k);
        }
    }
    return pick;
}

bool within_gap(double bound, double incumbent, bool maximize, double gap) {
    const double slack = gap * std::max(1.0, std::fabs(incumbent));
    return maximize ? bound <= incumbent + slack : bound >= incumbent - slack;
}

// Shared warm solver with bookkeeping for rebuilds and applied fixes.
class NodeSolver {
public:
    NodeSolver(const LinearModel& model, const LpOptions& lp, const std::vector<int>& ints)
        : model_(model), lp_(lp), ints_(ints) {
        rebuild();
    }

    void rebuild() {
        if (core_) iters_done_ += core_->iterations();
        core_ = std::make_unique<detail::SimplexCore>(model_, lp_);
        applied_.assign(ints_.size(), -1);
        solves_since_rebuild_ = 0;
    }

    void apply_fixes(const std::vector<std::pair<int, int8_t>>& fixes) {
        std::vector<int8_t> target(ints_.size(), -1);
        for (const auto& [k, v] : fixes) target[k] = v;
        for (size_t k = 0; k < ints_.size(); ++k) {
            if (applied_[k] == target[k]) continue;
            const int j = ints_[k];
            if (target[k] < 0)
                core_->set_var_bounds(j, model_.var(j).lb, model_.var(j).ub);
            else
                core_->set_var_bounds(j, target[k], target[k]);
            applied_[k] = target[k];
        }
    }

    // Solves at the applied fixes; re-applies them after a rebuild. An
    // optimal point failing the residual check forces a fresh factorization.
    SolveStatus solve(const std::vector<std::pair<int, int8_t>>& fixes) {
        if (solves_since_rebuild_ >= kRebuildEvery) rebuild();
        apply_fixes(fixes);
        ++solves_since_rebuild_;
        SolveStatus st = core_->solve();
        if (st == SolveStatus::optimal) {
            x_ = core_->extract_x();
            if (model_.max_violation(x_) > 1e-6) {
                rebuild();
                apply_fixes(fixes);
                ++solves_since_rebuild_;
                st = core_->solve();
                if (st == SolveStatus::optimal) {
                    x_ = core_->extract_x();
                    if (model_.max_violation(x_) > 1e-6) st = SolveStatus::iteration_limit;
                }
            }
        }
        return st;
    }

    const std::vector<double>& x() const { return x_; }
    detail::SimplexCore& core() { return *core_; }
    long iterations() const { return iters_done_ + (core_ ? core_->iterations() : 0); }

private:
    const LinearModel& model_;
    LpOptions lp_;
    const std::vector<int>& ints_;
    std::unique_ptr<detail::SimplexCore> core_;
    std::vector<int8_t> applied_;
    std::vector<double> x_;
    long iters_done_ = 0;
    int solves_since_rebuild_ = 0;
};

}  // namespace

MilpSolution solve_milp(const LinearModel& model, const MilpOptions& opt) {
    std::vector<int> ints;
    for (int j = 0; j < model.num_vars(); ++j)
        if (model.var(j).kind == VarKind::binary) ints.push_back(j);
    if (ints.empty() || model.num_vars() == 0) {
        MilpSolution sol = solve_lp(model, opt.lp);
        sol.stats.nodes = 1;
        return sol;
    }

    const bool maximize = model.obj_sense() == ObjSense::maximize;
    NodeSolver solver(model, opt.lp, ints);
    long nodes = 1;
    bool bound_unsound = false;

    MilpSolution out;
    out.status = solver.solve({});
    if (out.status != SolveStatus::optimal) {
        // Distinguish a genuinely infeasible relaxation from numerical limits.
        if (out.status == SolveStatus::iteration_limit) bound_unsound = true;
        out.stats.lp_iterations = solver.iterations();
        out.stats.nodes = nodes;
        return out;
    }
    const std::vector<double> root_x = solver.x();
    const double root_obj = model.objective_value(root_x);

    MilpSolution best;
    best.status = SolveStatus::infeasible;
    bool have_inc = false;
    auto try_incumbent = [&](std::vector<double> x) {
        for (int j : ints) x[j] = std::floor(x[j] + 0.5);
        if (model.max_violation(x) > 1e-6) return;
        const double obj = model.objective_value(x);
        if (!have_inc || (maximize ? obj > best.objective : obj < best.objective)) {
            best.objective = obj;
            best.x = std::move(x);
            have_inc = true;
        }
    };

    if (most_fractional(ints, root_x, opt.int_tol) < 0) {
        try_incumbent(root_x);
        best.status = SolveStatus::optimal;
        best.best_bound = best.objective;
        best.stats.lp_iterations = solver.iterations();
        best.stats.nodes = nodes;
        return best;
    }

    // Dive and fix over a sweep of rounding thresholds, clamped to the
    // model's own bounds so pinned binaries stay pinned.
    {
        auto clamp01 = [&](size_t k, double v) {
            const auto& var = model.var(ints[k]);
            return int8_t(std::clamp(v, var.lb, var.ub) >= 0.5 ? 1 : 0);
        };
        std::vector<std::vector<std::pair<int, int8_t>>> dives;
        for (double threshold : {0.5, opt.int_tol, 0.999999, 2.0}) {  // 2.0: all off
            std::vector<std::pair<int, int8_t>> fixes;
            fixes.reserve(ints.size());
            for (size_t k = 0; k < ints.size(); ++k)
                fixes.push_back({int(k), clamp01(k, root_x[ints[k]] > threshold ? 1.0 : 0.0)});
            if (std::find(dives.begin(), dives.end(), fixes) == dives.end())
                dives.push_back(std::move(fixes));
        }
        for (const auto& fixes : dives) {
            ++nodes;
            if (solver.solve(fixes) == SolveStatus::optimal) try_incumbent(solver.x());
        }
    }

    // Staged rounding: saturate every fractional binary upward first (more
    // commitment always satisfies min-service/min-up style coupling), then
    // trim the ones that turn fractional downward (respecting resource
    // budgets), until the relaxation is integral.
    if (!have_inc || !within_gap(root_obj, best.objective, maximize, opt.gap)) {
        std::vector<std::pair<int, int8_t>> fixes;
        std::vector<int8_t> frozen(ints.size(), 0);
        std::vector<double> x = root_x;
        bool ok = true;
        for (int round = 0; round < 8 && ok; ++round) {
            bool any = false;
            for (size_t k = 0; k < ints.size(); ++k) {
                if (frozen[k]) continue;
                const double v = x[ints[k]];
                const double f = v - std::floor(v);
                if (std::min(f, 1.0 - f) <= opt.int_tol) continue;
                int8_t val = round == 0 ? 1 : 0;
                const auto& var = model.var(ints[k]);
                if (var.lb > 0.5) val = 1;
                if (var.ub < 0.5) val = 0;
                fixes.push_back({int(k), val});
                frozen[k] = 1;
                any = true;
            }
            if (!any) {
                try_incumbent(x);
                break;
            }
            ++nodes;
            ok = solver.solve(fixes) == SolveStatus::optimal;
            if (ok) x = solver.x();
        }
    }

    // Feasibility pump: alternate LP solves against a rounding target under a
    // pure distance objective until the relaxation lands on an integral
    // point, then re-optimize the true objective with that pattern fixed.
    // Generic fallback when the structured heuristics come up empty.
    if (!have_inc || !within_gap(root_obj, best.objective, maximize, opt.gap)) {
        std::vector<int8_t> target(ints.size());
        for (size_t k = 0; k < ints.size(); ++k) target[k] = root_x[ints[k]] >= 0.5;
        const double sense = maximize ? 1.0 : -1.0;
        // A sliver of the true objective rides along to break the heavy
        // degeneracy of the pure distance objective.
        double cmax = 0.0;
        for (int j = 0; j < model.num_vars(); ++j)
            cmax = std::max(cmax, std::fabs(model.var(j).obj));
        const double blend = cmax > 0 ? 0.1 / cmax : 0.0;
        for (int j = 0; j < model.num_vars(); ++j)
            solver.core().set_obj_coeff(j, model.var(j).obj * blend);
        bool landed = false;
        std::vector<double> x = root_x;
        for (int iter = 0; iter < 60 && !landed; ++iter) {
            for (size_t k = 0; k < ints.size(); ++k)
                solver.core().set_obj_coeff(
                    ints[k], sense * (target[k] ? 1.0 : -1.0) +
                                 model.var(ints[k]).obj * blend);
            ++nodes;
            solver.apply_fixes({});
            if (solver.core().solve() != SolveStatus::optimal) break;
            x = solver.core().extract_x();
            double dist = 0.0;
            std::vector<int8_t> rounded(ints.size());
            for (size_t k = 0; k < ints.size(); ++k) {
                const double v = x[ints[k]];
                const double f = v - std::floor(v);
                dist = std::max(dist, std::min(f, 1.0 - f));
                rounded[k] = v >= 0.5;
            }
            if (dist <= opt.int_tol) {
                landed = true;
                break;
            }
            if (rounded == target) {
                // Cycle: flip the entries farthest from their target.
                std::vector<std::pair<double, int>> far;
                for (size_t k = 0; k < ints.size(); ++k)
                    far.push_back({-std::fabs(x[ints[k]] - target[k]), int(k)});
                std::sort(far.begin(), far.end());
                const size_t flips = std::min<size_t>(1 + ints.size() / 10, far.size());
                for (size_t f = 0; f < flips; ++f) target[far[f].second] ^= 1;
            } else {
                target = rounded;
            }
        }
        // Near-integral pump states finish with a mini-plunge over the few
        // remaining fractionals, still under the distance objective.
        if (!landed) {
            std::vector<std::pair<int, int8_t>> fixes;
            for (size_t k = 0; k < ints.size(); ++k) {
                const double f = x[ints[k]] - std::floor(x[ints[k]]);
                if (std::min(f, 1.0 - f) <= opt.int_tol)
                    fixes.push_back({int(k), int8_t(x[ints[k]] >= 0.5 ? 1 : 0)});
            }
            for (int step = 0; step < 32; ++step) {
                const int k = most_fractional(ints, x, opt.int_tol);
                if (k < 0) {
                    landed = true;
                    break;
                }
                const int8_t v = x[ints[k]] >= 0.5 ? 1 : 0;
                fixes.push_back({k, v});
                ++nodes;
                solver.apply_fixes(fixes);
                SolveStatus st = solver.core().solve();
                if (st != SolveStatus::optimal) {
                    fixes.back().second = int8_t(1 - v);
                    ++nodes;
                    solver.apply_fixes(fixes);
                    st = solver.core().solve();
                }
                if (st != SolveStatus::optimal) break;
                x = solver.core().extract_x();
            }
        }
        for (int j = 0; j < model.num_vars(); ++j)
            solver.core().set_obj_coeff(j, model.var(j).obj);
        if (landed) {
            std::vector<std::pair<int, int8_t>> fixes;
            for (size_t k = 0; k < ints.size(); ++k)
                fixes.push_back({int(k), int8_t(x[ints[k]] >= 0.5 ? 1 : 0)});
            ++nodes;
            if (solver.solve(fixes) == SolveStatus::optimal) try_incumbent(solver.x());
        }
    }

    // Depth-first plunge: follow nearest-rounding children, falling back to
    // the sibling when a child is infeasible. Last-resort incumbent source.
    if (!have_inc) {
        std::vector<std::pair<int, int8_t>> fixes;
        ++nodes;
        SolveStatus st = solver.solve(fixes);
        std::vector<double> x = st == SolveStatus::optimal ? solver.x() : root_x;
        const size_t plunge_cap = std::max<size_t>(64, ints.size());
        for (size_t depth = 0; depth <= plunge_cap && st == SolveStatus::optimal; ++depth) {
            const int k = most_fractional(ints, x, opt.int_tol);
            if (k < 0) {
                try_incumbent(x);
                break;
            }
            const int8_t v = x[ints[k]] >= 0.5 ? 1 : 0;
            fixes.push_back({k, v});
            ++nodes;
            st = solver.solve(fixes);
            if (st != SolveStatus::optimal) {
                fixes.back().second = int8_t(1 - v);
                ++nodes;
                st = solver.solve(fixes);
            }
            if (st == SolveStatus::optimal) x = solver.x();
        }
    }

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open(NodeOrder{maximize});
    long next_id = 0;
    {
        const int k0 = most_fractional(ints, root_x, opt.int_tol);
        Node down{root_obj, next_id++, {{k0, 0}}};
        Node up{root_obj, next_id++, {{k0, 1}}};
        open.push(down);
        open.push(up);
    }

    double global_bound = root_obj;
    while (!open.empty()) {
        global_bound = open.top().bound;
        if (have_inc && within_gap(global_bound, best.objective, maximize, opt.gap)) break;
        if (nodes >= opt.node_limit) {
            best.status = SolveStatus::iteration_limit;
            best.best_bound = global_bound;
            best.stats.lp_iterations = solver.iterations();
            best.stats.nodes = nodes;
            return best;
        }
        Node node = open.top();
        open.pop();
        ++nodes;
        const SolveStatus st = solver.solve(node.fixes);
        if (st == SolveStatus::infeasible) continue;
        if (st != SolveStatus::optimal) {
            bound_unsound = true;
            continue;
        }
        std::vector<double> x = solver.x();
        const double obj = model.objective_value(x);
        const double bound = maximize ? std::min(node.bound, obj) : std::max(node.bound, obj);
        if (have_inc && within_gap(bound, best.objective, maximize, opt.gap)) continue;
        const int frac = most_fractional(ints, x, opt.int_tol);
        if (frac < 0) {
            try_incumbent(std::move(x));
            continue;
        }
        Node down{bound, next_id++, node.fixes};
        down.fixes.push_back({frac, 0});
        Node up{bound, next_id++, node.fixes};
        up.fixes.push_back({frac, 1});
        open.push(std::move(down));
        open.push(std::move(up));
    }

    if (!have_inc) {
        MilpSolution sol;
        sol.status = bound_unsound ? SolveStatus::iteration_limit : SolveStatus::infeasible;
        sol.stats.lp_iterations = solver.iterations();
        sol.stats.nodes = nodes;
        return sol;
    }
    best.status = bound_unsound ? SolveStatus::iteration_limit : SolveStatus::optimal;
    best.best_bound = open.empty() ? best.objective : global_bound;
    best.stats.lp_iterations = solver.iterations();
    best.stats.nodes = nodes;
    return best;
}

}  // namespace mgems
