#include "svsc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "svsc/errors.hpp"

namespace svsc {

int ProblemIR::add_variable(const std::string& name, double lb, double ub, VarKind kind) {
    if (by_name_.count(name)) throw ConfigError("IR_DUP_VAR", "variable '" + name + "' declared twice");
    if (!(lb <= ub)) throw ConfigError("IR_BOUNDS", "variable '" + name + "': lb > ub");
    Variable v{name, lb, ub, kind};
    vars_.push_back(std::move(v));
    by_name_[name] = n_vars() - 1;
    return n_vars() - 1;
}

void ProblemIR::add_objective_term(int var, double coef) {
    if (var < 0 || var >= n_vars()) throw ConfigError("IR_REF", "objective references undeclared variable");
    objective_.push_back({var, coef});
}

int ProblemIR::add_linear(LinearConstraint c) {
    for (const auto& t : c.terms)
        if (t.var < 0 || t.var >= n_vars())
            throw ConfigError("IR_REF", "constraint '" + c.name + "' references undeclared variable");
    linear_.push_back(std::move(c));
    return static_cast<int>(linear_.size()) - 1;
}

int ProblemIR::add_quadratic(QuadConstraint c) {
    // Normalize: i <= j, duplicates merged, so the coefficient map stays an
    // explicit symmetric representation.
    std::map<std::pair<int, int>, double> acc;
    for (const auto& q : c.quad) {
        if (q.i < 0 || q.i >= n_vars() || q.j < 0 || q.j >= n_vars())
            throw ConfigError("IR_REF", "constraint '" + c.name + "' references undeclared variable");
        acc[{std::min(q.i, q.j), std::max(q.i, q.j)}] += q.coef;
    }
    c.quad.clear();
    for (const auto& [k, v] : acc)
        if (v != 0.0) c.quad.push_back({k.first, k.second, v});
    for (const auto& t : c.lin)
        if (t.var < 0 || t.var >= n_vars())
            throw ConfigError("IR_REF", "constraint '" + c.name + "' references undeclared variable");
    quadratic_.push_back(std::move(c));
    return static_cast<int>(quadratic_.size()) - 1;
}

int ProblemIR::add_nonlinear(NonlinearEq c) {
    if (!c.residual || !c.gradient)
        throw ConfigError("IR_CALLBACK", "nonlinear row '" + c.name + "' needs residual and gradient");
    nonlinear_.push_back(std::move(c));
    return static_cast<int>(nonlinear_.size()) - 1;
}

int ProblemIR::var_index(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
}

void ProblemIR::set_bounds(int var, double lb, double ub) {
    if (var < 0 || var >= n_vars()) throw ConfigError("IR_REF", "set_bounds on undeclared variable");
    if (!(lb <= ub)) throw ConfigError("IR_BOUNDS", "set_bounds: lb > ub");
    vars_[static_cast<size_t>(var)].lb = lb;
    vars_[static_cast<size_t>(var)].ub = ub;
}

bool ProblemIR::has_binaries() const {
    return std::any_of(vars_.begin(), vars_.end(),
                       [](const Variable& v) { return v.kind == VarKind::kBinary; });
}

double ProblemIR::objective_value(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (const auto& t : objective_) v += t.coef * x[t.var];
    return v;
}

void ProblemIR::validate() const {
    for (const auto& v : vars_)
        if (!(v.lb <= v.ub)) throw ConfigError("IR_BOUNDS", "variable '" + v.name + "': lb > ub");
    for (const auto& c : quadratic_)
        for (const auto& q : c.quad)
            if (q.i < 0 || q.i >= n_vars() || q.j < 0 || q.j >= n_vars())
                throw ConfigError("IR_QUAD", "quadratic term out of range in '" + c.name + "'");
}

double linear_row_value(const LinearConstraint& c, const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const auto& t : c.terms) v += t.coef * x[t.var];
    return v;
}

double quad_row_value(const QuadConstraint& c, const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const auto& q : c.quad) v += q.coef * x[q.i] * x[q.j];
    for (const auto& t : c.lin) v += t.coef * x[t.var];
    return v;
}

double feasibility_residual(const ProblemIR& p, const Eigen::VectorXd& x) {
    double r = 0.0;
    for (int i = 0; i < p.n_vars(); ++i) {
        const auto& v = p.variable(i);
        r = std::max(r, v.lb - x[i]);
        r = std::max(r, x[i] - v.ub);
    }
    auto rate = [&](double value, Sense s, double rhs) {
        if (s == Sense::kLe) return value - rhs;
        if (s == Sense::kGe) return rhs - value;
        return std::abs(value - rhs);
    };
    for (const auto& c : p.linear()) r = std::max(r, rate(linear_row_value(c, x), c.sense, c.rhs));
    for (const auto& c : p.quadratic()) r = std::max(r, rate(quad_row_value(c, x), c.sense, c.rhs));
    for (const auto& c : p.nonlinear()) r = std::max(r, std::abs(c.residual(x)));
    return std::max(r, 0.0);
}

}  // namespace svsc
