#pragma once

#include <array>
#include <string>
#include <vector>

#include "svsc/grid_model.hpp"
#include "svsc/master.hpp"
#include "svsc/network.hpp"
#include "svsc/problem.hpp"
#include "svsc/transient.hpp"

namespace svsc {

struct SubproblemResult {
    int period = 0;
    SolveStatus status = SolveStatus::kOptimal;
    double penalty = 0.0;  // PO^t
    std::vector<double> lambda_y, lambda_pg;  // per machine
    std::vector<double> lambda_pw;            // per wind farm
    std::vector<double> q_g;                  // optimized prefault reactive dispatch
    std::vector<double> q_w;
    std::vector<double> k_p, k_q;
    std::vector<double> xi_scr;                              // per wind farm
    std::vector<std::vector<double>> xi_flt, xi_fss, xi_clr; // [fault][wf]
    ComplexVector prefault_v;
    std::vector<std::array<ComplexVector, 3>> snapshot_v;    // per fault
    // Max |V| gap between the optimizer-internal snapshot voltages and the
    // standalone snapshot solver re-run at the optimized controls.
    double snapshot_crosscheck_error = 0.0;
    int iterations = 0;
};

struct SubproblemModel {
    int period = 0;
    ProblemIR problem;
    Eigen::VectorXd warm_start;
    ComplexVector conversion_v;  // load-to-admittance conversion voltages
    std::vector<int> commitment;
    std::vector<double> anchor_y, anchor_pg, anchor_pw;
    std::vector<int> coupling_y, coupling_pg, coupling_pw;  // linear row indices
};

// Per-period reactive/control optimization under a fixed schedule: prefault
// device and network algebra, the wind-only voltage-component system with its
// second-order-cone strength bound, the three snapshot equality systems per
// anticipated fault, slack-relaxed ride-through rows, and fixing rows that
// carry the decomposition multipliers.
SubproblemModel build_subproblem(const StudyCase& c, int t, const Schedule& schedule,
                                 const PowerFlowControls* q_seed = nullptr,
                                 const WindControls* gain_seed = nullptr);

SubproblemResult solve_subproblem(const StudyCase& c, const SubproblemModel& model);

BendersCut make_benders_cut(const SubproblemResult& r, const Schedule& anchor, int iteration);

std::string subproblem_result_csv(const SubproblemResult& r);

std::vector<std::pair<std::string, std::string>> subproblem_symbols();

// Variable naming shared with tests.
std::string sub_var_y(int g);
std::string sub_var_pg(int g);
std::string sub_var_qg(int g);
std::string sub_var_pw(int w);
std::string sub_var_qw(int w);
std::string sub_var_kp(int w);
std::string sub_var_kq(int w);
std::string sub_var_vx(int moment, int fault, int bus);  // moment 0=prefault, 1..3 snapshots
std::string sub_var_vy(int moment, int fault, int bus);
std::string sub_var_xi_scr(int w);
std::string sub_var_xi(const char* kind, int fault, int w);

}  // namespace svsc
