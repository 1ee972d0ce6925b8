#pragma once

#include <map>
#include <string>
#include <vector>

#include "svsc/grid_model.hpp"
#include "svsc/network.hpp"
#include "svsc/problem.hpp"

namespace svsc {

struct MrscrEntry {
    int windfarm = 0;
    double value = 0.0;      // +inf reported via `infinite`
    double margin = 0.0;     // value - threshold
    double scc_proxy = 0.0;  // V_N^2 / |Z_ww|
    bool infinite = false;
};

struct MrscrReport {
    double threshold = 0.0;
    std::vector<MrscrEntry> per_windfarm;
    bool all_above_threshold() const;
};

// Impedance-form grid-strength ratio at each wind bus: self-term
// |V_N V_w / Z_ww| against the power-weighted coupled terms
// sum_j |Z_wj V_w / (Z_ww V_j)| P_j.
MrscrReport evaluate_mrscr_impedance(const std::map<int, ComplexVector>& z_rows, const ComplexVector& v,
                                     const std::vector<double>& wind_p, const StudyCase& c);

// Equivalent definition: solve the subtransient-augmented network with the
// wind currents as the only injections and take V_N / |V_r| per wind bus.
MrscrReport evaluate_mrscr_equivalent(const StudyCase& c, int period, const std::vector<int>& commitment,
                                      const std::vector<Complex>& wind_currents,
                                      const ComplexVector& load_voltages = ComplexVector());

// ---------------------------------------------------------------------------
// Mixed-integer linear relaxation block for the master problem.

struct NamedTerm {
    std::string var;
    double coef = 0.0;
};

struct NamedRow {
    std::string name;
    std::vector<NamedTerm> terms;
    Sense sense = Sense::kLe;
    double rhs = 0.0;
};

struct NamedVarDecl {
    std::string name;
    double lb = 0.0, ub = 0.0;
    VarKind kind = VarKind::kContinuous;
    bool external = false;  // declared elsewhere (commitment binaries)
};

// All rows tying the impedance variables to the fixed network matrix, the
// commitment switches, the curtailment bits, and the scaled strength
// inequality itself, for one period.
struct RelaxedMrscrBlock {
    int period = 0;
    std::vector<NamedVarDecl> vars;
    std::vector<NamedRow> rows;
    std::vector<std::string> mrscr_row_names;  // the per-wind-farm inequalities
};

// Shared variable naming between the block and the master builder.
std::string master_var_y(int t, int g);
std::string mrscr_var_zr(int t, int w, int k);
std::string mrscr_var_zi(int t, int w, int k);
std::string mrscr_var_zeta(int t, int w, int j);
std::string mrscr_var_vr(int t, int w, int g);
std::string mrscr_var_vi(int t, int w, int g);
std::string mrscr_var_bit(int t, int j, int n);
std::string mrscr_var_prod(int t, int w, int j, int n);

// Curtailment discretization step for wind farm j in period t.
double curtail_step(const StudyCase& c, int t, int j);

// Builds the relaxation for one period. Verifies that big_m_z bounds every
// impedance entry reachable under the all-on and all-off commitments and
// throws ConfigError("BIGM_TOO_SMALL") otherwise.
RelaxedMrscrBlock relaxed_mrscr_rows(const StudyCase& c, int t);

// Declares the block's non-external variables (skipping ones already present)
// and adds its rows to the problem.
void instantiate_block(const RelaxedMrscrBlock& block, ProblemIR& p);

std::string mrscr_report_csv(const MrscrReport& rep, int period);

}  // namespace svsc
