#pragma once

#include <string>
#include <vector>

#include "svsc/grid_model.hpp"
#include "svsc/master.hpp"
#include "svsc/mrscr.hpp"
#include "svsc/subproblem.hpp"
#include "svsc/transient.hpp"

namespace svsc {

enum class GbdStatus { kConverged, kIterationLimit, kMasterInfeasible };

struct GbdIterationRecord {
    int iteration = 0;
    double master_objective = 0.0;
    std::vector<double> po;  // per period
    double po_sum = 0.0;
    int cut_count = 0;
    std::vector<std::vector<int>> commitment;
    double wall_seconds = 0.0;
};

// Post-convergence check through the standalone evaluators (independent of the
// optimization path): snapshots, ride-through margins and both strength
// definitions at the returned schedule and controls.
struct Reverification {
    bool ran = false;
    bool passed = false;
    double worst_ride_through_violation = 0.0;  // positive = violated, p.u.
    double worst_mrscr_shortfall = 0.0;         // positive = below threshold
};

struct GbdState {
    GbdStatus status = GbdStatus::kIterationLimit;
    std::vector<GbdIterationRecord> history;
    std::vector<BendersCut> cuts;
    Schedule schedule;
    std::vector<SubproblemResult> controls;  // one per period, final iteration
    Reverification reverification;
    std::vector<std::string> warnings;

    int iterations() const { return static_cast<int>(history.size()); }
};

// Alternating master/subproblem decomposition. Subproblem cuts come from
// local optima, so an excluded commitment may in principle have been globally
// optimal; a warning records this caveat on every run that adds cuts.
GbdState run_gbd(const StudyCase& c);

// Plain unit commitment (security rows and cuts off) for baselining.
Schedule solve_plain_uc(const StudyCase& c);

std::string gbd_history_csv(const GbdState& s);

}  // namespace svsc
