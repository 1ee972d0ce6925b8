#pragma once

#include <string>
#include <vector>

#include "svsc/grid_model.hpp"
#include "svsc/network.hpp"
#include "svsc/problem.hpp"

namespace svsc {

struct Schedule {
    int horizon = 0;
    std::vector<std::vector<int>> y;         // [t][g]
    std::vector<std::vector<double>> p_g;    // [t][g]
    std::vector<std::vector<double>> p_w;    // [t][w]
    std::vector<std::vector<double>> p_cur;  // [t][w]
    double cost_generation = 0, cost_startup = 0, cost_shutdown = 0, cost_curtail = 0;

    double total_cost() const { return cost_generation + cost_startup + cost_shutdown + cost_curtail; }
    DispatchPoint at(int t) const;
};

// One Benders cut: po + sum_i lambda_i (var_i - anchor_i) <= 0. The terms may
// span several periods (aggregate form) or one (default multi-cut form).
struct BendersCut {
    enum class VarKind { kCommit, kMachineP, kWindP };
    struct Term {
        VarKind kind = VarKind::kCommit;
        int period = 0;
        int device = 0;
        double lambda = 0.0;
        double anchor = 0.0;
    };
    int anchor_iteration = 0;
    int period = -1;  // -1 for aggregate or commitment no-good cuts
    double po = 0.0;
    std::vector<Term> terms;
    bool no_good = false;

    double eval(const Schedule& s) const;
};

struct MasterModel {
    ProblemIR problem;
    bool security_rows = false;
    int horizon = 0;
};

// Variable naming shared with extraction and tests (commitment naming lives in
// mrscr.hpp as master_var_y).
std::string master_var_pg(int t, int g);
std::string master_var_pseg(int t, int g, int m);
std::string master_var_pw(int t, int w);
std::string master_var_pcur(int t, int w);
std::string master_var_cu(int t, int g);
std::string master_var_cd(int t, int g);

// Unit-commitment MILP: piecewise generation costs, startup/shutdown epigraphs,
// min up/down windows, ramps, reserves, the per-period energy balance,
// optional relaxed grid-strength rows, and every cut supplied.
MasterModel build_master(const StudyCase& c, const std::vector<BendersCut>& cuts,
                         bool include_security_rows);

// Reads a master solution back into a Schedule; asserts the balance residual
// and reconstructs curtailment from the discretization bits when present.
Schedule extract_schedule(const MasterModel& model, const Solution& sol, const StudyCase& c);

std::string schedule_csv(const Schedule& s);

std::vector<std::pair<std::string, std::string>> master_symbols();

}  // namespace svsc
