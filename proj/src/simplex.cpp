#include "simplex_core.hpp"

namespace mgems {

MilpSolution solve_lp(const LinearModel& model, const LpOptions& opt) {
    if (model.num_vars() == 0) {
        MilpSolution sol;
        bool feasible = true;
        for (int i = 0; i < model.num_rows(); ++i) {
            const auto& r = model.row(i);
            if ((r.sense == RowSense::le && r.rhs < -opt.feas_tol) ||
                (r.sense == RowSense::ge && r.rhs > opt.feas_tol) ||
                (r.sense == RowSense::eq && std::fabs(r.rhs) > opt.feas_tol))
                feasible = false;
        }
        sol.status = feasible ? SolveStatus::optimal : SolveStatus::infeasible;
        sol.duals.assign(model.num_rows(), 0.0);
        return sol;
    }
    detail::SimplexCore core(model, opt);
    MilpSolution sol;
    sol.status = core.solve();
    sol.stats.lp_iterations = core.iterations();
    if (sol.status != SolveStatus::optimal) return sol;
    sol.x = core.extract_x();
    sol.duals = core.extract_duals();
    sol.objective = model.objective_value(sol.x);
    sol.best_bound = sol.objective;
    if (model.max_violation(sol.x) > 1e-6) {
        // Tableau drift: retry once with a larger budget before giving up.
        LpOptions strict = opt;
        strict.max_iterations = opt.max_iterations * 2;
        strict.feas_tol = opt.feas_tol * 0.1;
        detail::SimplexCore core2(model, strict);
        MilpSolution sol2;
        sol2.status = core2.solve();
        sol2.stats.lp_iterations = core2.iterations() + sol.stats.lp_iterations;
        if (sol2.status == SolveStatus::optimal) {
            sol2.x = core2.extract_x();
            sol2.duals = core2.extract_duals();
            sol2.objective = model.objective_value(sol2.x);
            sol2.best_bound = sol2.objective;
            if (model.max_violation(sol2.x) > 1e-6) sol2.status = SolveStatus::iteration_limit;
            return sol2;
        }
        sol.status = SolveStatus::iteration_limit;
    }
    return sol;
}

}  // namespace mgems
