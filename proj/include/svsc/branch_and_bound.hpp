#pragma once

#include "svsc/problem.hpp"

namespace svsc {

struct MilpOptions {
    double gap = 1e-6;          // relative optimality gap at termination
    long node_limit = 200000;
    double int_tol = 1e-6;
};

// Best-first branch and bound with pseudo-cost branching over binary
// variables; LP relaxations via the embedded simplex. Deterministic given
// identical input. On node-limit exhaustion returns the incumbent with
// status kIterationLimit and the proven bound.
Solution solve_milp(const ProblemIR& p, const MilpOptions& opts = MilpOptions());

}  // namespace svsc
