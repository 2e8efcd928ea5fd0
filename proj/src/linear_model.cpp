#include "mgems/linear_model.hpp"

#include <cmath>
#include <sstream>

#include "mgems/common.hpp"

namespace mgems {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::iteration_limit: return "iteration-limit";
    }
    return "?";
}

int LinearModel::add_var(const std::string& name, double lb, double ub, VarKind kind,
                         double obj) {
    Variable v;
    v.name = name;
    v.lb = lb;
    v.ub = ub;
    v.kind = kind;
    v.obj = obj;
    vars_.push_back(std::move(v));
    return int(vars_.size()) - 1;
}

int LinearModel::add_row(const std::string& name, std::vector<std::pair<int, double>> terms,
                         RowSense sense, double rhs) {
    Row r;
    r.name = name;
    r.terms = std::move(terms);
    r.sense = sense;
    r.rhs = rhs;
    rows_.push_back(std::move(r));
    return int(rows_.size()) - 1;
}

bool LinearModel::has_integers() const {
    for (const auto& v : vars_)
        if (v.kind == VarKind::binary) return true;
    return false;
}

std::string LinearModel::check() const {
    for (size_t j = 0; j < vars_.size(); ++j) {
        const auto& v = vars_[j];
        if (v.lb > v.ub) return "variable " + v.name + " has lb > ub";
        if (v.kind == VarKind::binary &&
            (v.lb < -1e-12 || v.ub > 1.0 + 1e-12 || !std::isfinite(v.lb) || !std::isfinite(v.ub)))
            return "binary " + v.name + " not boxed in [0,1]";
    }
    for (const auto& r : rows_)
        for (const auto& [j, c] : r.terms) {
            if (j < 0 || j >= int(vars_.size()))
                return "row " + r.name + " references undeclared variable";
            if (!std::isfinite(c)) return "row " + r.name + " has non-finite coefficient";
        }
    return {};
}

double LinearModel::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (size_t j = 0; j < vars_.size(); ++j) {
        worst = std::max(worst, vars_[j].lb - x[j]);
        worst = std::max(worst, x[j] - vars_[j].ub);
    }
    for (const auto& r : rows_) {
        double lhs = 0.0;
        for (const auto& [j, c] : r.terms) lhs += c * x[j];
        switch (r.sense) {
            case RowSense::le: worst = std::max(worst, lhs - r.rhs); break;
            case RowSense::ge: worst = std::max(worst, r.rhs - lhs); break;
            case RowSense::eq: worst = std::max(worst, std::fabs(lhs - r.rhs)); break;
        }
    }
    return worst;
}

double LinearModel::objective_value(const std::vector<double>& x) const {
    double v = 0.0;
    for (size_t j = 0; j < vars_.size(); ++j) v += vars_[j].obj * x[j];
    return v;
}

namespace {
std::string lp_name(const std::string& s, char prefix, int idx) {
    if (s.empty()) return prefix + std::to_string(idx);
    std::string out = s;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) c = '_';
    return out;
}
}  // namespace

std::string LinearModel::to_lp_format() const {
    std::ostringstream os;
    os << (obj_sense_ == ObjSense::maximize ? "Maximize\n obj:" : "Minimize\n obj:");
    for (size_t j = 0; j < vars_.size(); ++j)
        if (vars_[j].obj != 0.0)
            os << (vars_[j].obj >= 0 ? " + " : " - ") << format_double(std::fabs(vars_[j].obj))
               << ' ' << lp_name(vars_[j].name, 'x', int(j));
    os << "\nSubject To\n";
    for (size_t i = 0; i < rows_.size(); ++i) {
        os << ' ' << lp_name(rows_[i].name, 'c', int(i)) << ':';
        for (const auto& [j, c] : rows_[i].terms)
            os << (c >= 0 ? " + " : " - ") << format_double(std::fabs(c)) << ' '
               << lp_name(vars_[j].name, 'x', j);
        switch (rows_[i].sense) {
            case RowSense::le: os << " <= "; break;
            case RowSense::eq: os << " = "; break;
            case RowSense::ge: os << " >= "; break;
        }
        os << format_double(rows_[i].rhs) << '\n';
    }
    os << "Bounds\n";
    for (size_t j = 0; j < vars_.size(); ++j) {
        const auto& v = vars_[j];
        if (v.lb == -kInf && v.ub == kInf)
            os << ' ' << lp_name(v.name, 'x', int(j)) << " free\n";
        else {
            os << ' ';
            if (v.lb == -kInf)
                os << "-inf";
            else
                os << format_double(v.lb);
            os << " <= " << lp_name(v.name, 'x', int(j)) << " <= ";
            if (v.ub == kInf)
                os << "+inf";
            else
                os << format_double(v.ub);
            os << '\n';
        }
    }
    bool any_bin = false;
    for (const auto& v : vars_)
        if (v.kind == VarKind::binary) any_bin = true;
    if (any_bin) {
        os << "Binary\n";
        for (size_t j = 0; j < vars_.size(); ++j)
            if (vars_[j].kind == VarKind::binary)
                os << ' ' << lp_name(vars_[j].name, 'x', int(j)) << '\n';
    }
    os << "End\n";
    return os.str();
}

}  // namespace mgems
