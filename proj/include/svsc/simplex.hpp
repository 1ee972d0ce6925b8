#pragma once

#include "svsc/problem.hpp"

namespace svsc {

// Two-phase dense simplex for pure LPs. Returns duals for every linear row
// under the d(objective)/d(rhs) convention. Throws ConfigError when the
// problem has binaries, quadratics or callbacks; throws SolverError("LP_STALL")
// if anti-cycling fails to make progress.
Solution solve_lp(const ProblemIR& p);

// Same engine with binary variables relaxed to their continuous boxes; used by
// the branch-and-bound driver.
Solution solve_lp_relaxation(const ProblemIR& p);

}  // namespace svsc
