#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "svsc/grid_model.hpp"

namespace svsc {

// Exit codes: 0 success, 1 diagnostics or security violations found,
// 2 solver failure, 64 usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Largest uniform wind-forecast scaling that keeps every station at or above
// the strength threshold under a fixed commitment; machine dispatch
// rebalances proportionally between its limits. Bisection on the equivalent
// strength definition.
double max_secure_wind_scale(const StudyCase& c, int t, const std::vector<int>& commitment,
                             double scale_hi = 5.0);

// Deterministic hash of the solver options (and thresholds) for run manifests.
std::string options_hash(const StudyCase& c);

}  // namespace svsc
