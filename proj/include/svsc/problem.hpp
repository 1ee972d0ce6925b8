#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace svsc {

enum class VarKind { kContinuous, kBinary };
enum class Sense { kLe, kEq, kGe };
enum class ObjSense { kMin, kMax };

struct Variable {
    std::string name;
    double lb = 0.0;
    double ub = 0.0;
    VarKind kind = VarKind::kContinuous;
};

struct LinTerm {
    int var = 0;
    double coef = 0.0;
};

struct LinearConstraint {
    std::string name;
    std::vector<LinTerm> terms;
    Sense sense = Sense::kLe;
    double rhs = 0.0;
};

// coef * x_i * x_j with each unordered pair stored once (i <= j after
// normalization); a diagonal term coef * x_i^2 has i == j.
struct QuadTerm {
    int i = 0, j = 0;
    double coef = 0.0;
};

struct QuadConstraint {
    std::string name;
    std::vector<QuadTerm> quad;
    std::vector<LinTerm> lin;
    Sense sense = Sense::kLe;
    double rhs = 0.0;
};

// Smooth equality residual r(x) = 0 with an analytic gradient. The Hessian
// hook accumulates w * grad^2 r(x) into H when curvature matters; leaving it
// empty degrades the Newton model but not correctness.
struct NonlinearEq {
    std::string name;
    std::function<double(const Eigen::VectorXd&)> residual;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> gradient;
    std::function<void(const Eigen::VectorXd&, double, Eigen::MatrixXd&)> hessian;
};

// Solver-agnostic problem container shared by the LP, MILP and NLP engines.
class ProblemIR {
public:
    ObjSense obj_sense = ObjSense::kMin;

    int add_variable(const std::string& name, double lb, double ub, VarKind kind = VarKind::kContinuous);
    void add_objective_term(int var, double coef);
    int add_linear(LinearConstraint c);
    int add_quadratic(QuadConstraint c);
    int add_nonlinear(NonlinearEq c);

    int n_vars() const { return static_cast<int>(vars_.size()); }
    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<LinTerm>& objective() const { return objective_; }
    const std::vector<LinearConstraint>& linear() const { return linear_; }
    const std::vector<QuadConstraint>& quadratic() const { return quadratic_; }
    const std::vector<NonlinearEq>& nonlinear() const { return nonlinear_; }

    int var_index(const std::string& name) const;  // -1 when absent
    const Variable& variable(int idx) const { return vars_.at(static_cast<size_t>(idx)); }
    void set_bounds(int var, double lb, double ub);

    // In-place access for builders that assemble a row incrementally after
    // registering it (terms may arrive in any (i, j) order).
    QuadConstraint& mutable_quadratic(int idx) { return quadratic_.at(static_cast<size_t>(idx)); }

    bool has_binaries() const;
    double objective_value(const Eigen::VectorXd& x) const;  // in the problem's own sense

    // Enforces the container invariants (indices in range, lb <= ub,
    // normalized quadratic maps). Throws ConfigError.
    void validate() const;

private:
    std::vector<Variable> vars_;
    std::map<std::string, int> by_name_;
    std::vector<LinTerm> objective_;
    std::vector<LinearConstraint> linear_;
    std::vector<QuadConstraint> quadratic_;
    std::vector<NonlinearEq> nonlinear_;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

// Duals follow the sensitivity convention: dual_i = d(optimal objective, in
// the problem's own sense) / d(rhs_i).
struct Solution {
    SolveStatus status = SolveStatus::kOptimal;
    Eigen::VectorXd x;
    double objective = 0.0;
    std::vector<double> duals_linear;
    std::vector<double> duals_quadratic;
    std::vector<double> duals_nonlinear;
    // MILP diagnostics
    double best_bound = 0.0;
    double gap = 0.0;
    long node_count = 0;
    int iterations = 0;
};

double linear_row_value(const LinearConstraint& c, const Eigen::VectorXd& x);
double quad_row_value(const QuadConstraint& c, const Eigen::VectorXd& x);

// Max violation of bounds and all constraints at x.
double feasibility_residual(const ProblemIR& p, const Eigen::VectorXd& x);

}  // namespace svsc
