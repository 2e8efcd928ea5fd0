#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mgems {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };
enum class RowSense { le, eq, ge };
enum class ObjSense { minimize, maximize };

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };
const char* to_string(SolveStatus s);

// Sparse LP/MILP in the usual row form: optimize c'x subject to per-row
// a_i'x {<=,=,>=} b_i and box bounds on x. Binaries carry implicit [0,1].
class LinearModel {
public:
    struct Variable {
        std::string name;
        double lb = 0.0, ub = kInf;
        VarKind kind = VarKind::continuous;
        double obj = 0.0;
    };
    struct Row {
        std::string name;
        std::vector<std::pair<int, double>> terms;
        RowSense sense = RowSense::le;
        double rhs = 0.0;
    };

    int add_var(const std::string& name, double lb, double ub,
                VarKind kind = VarKind::continuous, double obj = 0.0);
    int add_binary(const std::string& name, double obj = 0.0) {
        return add_var(name, 0.0, 1.0, VarKind::binary, obj);
    }
    int add_row(const std::string& name, std::vector<std::pair<int, double>> terms,
                RowSense sense, double rhs);

    void set_obj(int var, double coeff) { vars_[var].obj = coeff; }
    void add_obj(int var, double coeff) { vars_[var].obj += coeff; }
    void set_obj_sense(ObjSense s) { obj_sense_ = s; }
    ObjSense obj_sense() const { return obj_sense_; }

    void set_bounds(int var, double lb, double ub) {
        vars_[var].lb = lb;
        vars_[var].ub = ub;
    }

    int num_vars() const { return int(vars_.size()); }
    int num_rows() const { return int(rows_.size()); }
    const Variable& var(int j) const { return vars_[j]; }
    const Row& row(int i) const { return rows_[i]; }
    bool has_integers() const;

    // Structural sanity: bounds ordered, binaries boxed in [0,1], every term
    // referencing a declared variable. Returns an empty string when valid.
    std::string check() const;

    // Feasibility of a full assignment against rows and bounds.
    double max_violation(const std::vector<double>& x) const;
    double objective_value(const std::vector<double>& x) const;

    // Debug dump in the LP interchange text format.
    std::string to_lp_format() const;

private:
    std::vector<Variable> vars_;
    std::vector<Row> rows_;
    ObjSense obj_sense_ = ObjSense::maximize;
};

struct SolverStats {
    long lp_iterations = 0;
    long nodes = 0;
};

struct MilpSolution {
    SolveStatus status = SolveStatus::infeasible;
    double objective = 0.0;
    double best_bound = 0.0;
    std::vector<double> x;
    std::vector<double> duals;  // LP solves only; one per row
    SolverStats stats;
};

struct LpOptions {
    double feas_tol = 1e-7;
    long max_iterations = 200000;
};

struct MilpOptions {
    double gap = 1e-6;         // relative optimality gap
    long node_limit = 100000;  // branch-and-bound nodes
    double int_tol = 1e-6;
    LpOptions lp;
};

// Simplex over the continuous relaxation (integrality marks ignored).
MilpSolution solve_lp(const LinearModel& model, const LpOptions& opt = {});

// Deterministic branch-and-bound: most-fractional branching with lowest-index
// ties, best-bound node selection. On hitting the node limit the incumbent is
// returned with status iteration_limit.
MilpSolution solve_milp(const LinearModel& model, const MilpOptions& opt = {});

}  // namespace mgems
