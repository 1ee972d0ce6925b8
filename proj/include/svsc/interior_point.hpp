#pragma once

#include "svsc/problem.hpp"

namespace svsc {

struct IpmOptions {
    double tolerance = 1e-8;  // unscaled KKT residual at termination
    int max_iter = 200;
};

// Primal-dual interior point method for smooth problems with a linear
// objective: linear/quadratic constraints plus nonlinear equality callbacks.
// Constraint Hessians of quadratic rows are constant, so the Newton model is
// exact for the QCQP family this project builds. Returns duals under the
// d(objective)/d(rhs) convention. Iteration exhaustion comes back as status
// kIterationLimit with the best iterate; a stalled infeasible iterate throws
// SolverError("NLP_RESTORATION").
Solution solve_nlp(const ProblemIR& p, const Eigen::VectorXd& warm_start = Eigen::VectorXd(),
                   const IpmOptions& opts = IpmOptions());

}  // namespace svsc
