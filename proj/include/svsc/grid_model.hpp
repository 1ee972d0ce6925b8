#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace svsc {

using Complex = std::complex<double>;

struct Bus {
    int id = 0;
    std::string name;
    double v_nominal = 1.0;  // rated voltage, p.u.
    double v_min = 0.95;     // steady-state station limits, p.u.
    double v_max = 1.05;
    double shunt_g = 0.0;    // fixed shunt admittance, p.u.
    double shunt_b = 0.0;
};

struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;      // series resistance, p.u.
    double x = 0.0;      // series reactance, p.u. (nonzero)
    double b_half = 0.0; // half line charging, p.u.
    bool in_service = true;
};

// One piece of the convex piecewise-linear generation cost: `cap` is the
// segment width above the previous breakpoint, `slope` its marginal cost.
struct CostSegment {
    double cap = 0.0;
    double slope = 0.0;
};

struct SyncMachine {
    int bus = 0;
    double p_min = 0.0, p_max = 0.0;  // active capability, p.u.
    double q_min = 0.0, q_max = 0.0;  // reactive capability, p.u.
    double x_d_sub = 0.0;             // subtransient reactance x''_d, p.u.
    double x_d_tr = 0.0;              // transient reactance x'_d, p.u. (>= x''_d)
    double ramp_up = 0.0, ramp_down = 0.0;  // p.u. per period
    int t_on_min = 1, t_off_min = 1;        // periods
    double cost_startup = 0.0, cost_shutdown = 0.0;
    double cost_fixed = 0.0;          // fixed hourly cost when committed (cost at p_min)
    std::vector<CostSegment> cost_segments;
    bool init_on = true;
    int init_duration = 1;            // periods the initial status has already been held
    double init_p = 0.0;              // output in the period before the horizon
};

struct WindFarm {
    int bus = 0;
    double s_max = 0.0;     // apparatus MVA limit, p.u.
    double x_w = 0.0;       // collector/transformer reactance, p.u.
    double i_rated = 1.0;   // rated current I_N, p.u.
    double v_trip_low = 0.2;   // ride-through trip thresholds, p.u.
    double v_trip_high = 1.2;
    double v_ref_lvrt = 0.9;   // reactive-current reference voltage, p.u.
    double kp_min = 0.0, kp_max = 0.5;  // active-current gain box
    double kq_min = 0.0, kq_max = 3.0;  // reactive-current gain box
    std::vector<double> p_forecast;     // per-period available power, p.u.
};

struct LoadProfile {
    int bus = 0;
    std::vector<double> p;  // per-period active demand, p.u.
    std::vector<double> q;  // per-period reactive demand, p.u.
};

struct FaultScenario {
    std::string id;
    int fault_bus = 0;
    double fault_admittance = 1e4;          // shunt conductance during the fault, p.u.
    std::vector<int> post_fault_branch_outages;  // branch ids removed after clearance
};

struct SolveOptions {
    double gbd_tolerance = 1e-4;
    int gbd_max_iter = 50;
    double big_m_z = 100.0;       // Big-M bound for impedance entries in the master
    int curtail_bits = 6;         // binary discretization bit count for curtailment
    double ipm_tolerance = 1e-8;
    int ipm_max_iter = 200;
    double milp_gap = 1e-6;
    double fixed_point_tolerance = 1e-8;
    bool parallel_subproblems = false;
    double kappa_dq = 1.0;        // dq amplitude scaling in P = kappa*V*Id (1.0 in p.u.)
    // Freeze dq components (realigned to the new voltage angle) instead of the
    // network-frame phasor across instantaneous network changes.
    bool wind_freeze_dq = false;
    // Use the low trip threshold as the LVRT current reference instead of v_ref_lvrt.
    bool lvrt_use_trip_threshold = false;
    bool aggregate_cuts = false;          // one Benders cut across periods instead of per-period
    bool per_period_convergence = false;  // converge on max_t PO^t instead of sum_t PO^t
};

struct StudyCase {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<SyncMachine> machines;
    std::vector<WindFarm> windfarms;
    std::vector<LoadProfile> loads;
    std::vector<FaultScenario> faults;
    int horizon = 1;
    std::vector<double> reserve_up;    // PR_U per period, p.u.
    std::vector<double> reserve_down;  // PR_D per period, p.u.
    double mrscr_threshold = 3.0;
    double curtail_penalty = 5000.0;   // currency per p.u. curtailed
    SolveOptions options;

    int n_buses() const { return static_cast<int>(buses.size()); }
    int n_machines() const { return static_cast<int>(machines.size()); }
    int n_windfarms() const { return static_cast<int>(windfarms.size()); }
    int n_faults() const { return static_cast<int>(faults.size()); }

    double total_load_p(int period) const;
    double total_load_q(int period) const;
    const FaultScenario& fault_by_id(const std::string& id) const;
    int fault_index(const std::string& id) const;

    // LVRT current-law reference voltage for a wind farm under the case options.
    double lvrt_reference(const WindFarm& wf) const {
        return options.lvrt_use_trip_threshold ? wf.v_trip_low : wf.v_ref_lvrt;
    }
};

struct Diagnostic {
    std::string entity;
    std::string field;
    std::string rule;
};

// Case ingestion. Bus ids in the document may be any unique integers; they are
// normalized to contiguous 0-based indices (sorted by original id) on load, and
// every device reference is remapped accordingly. Unknown keys are rejected.
StudyCase load_case(const std::string& path);
StudyCase load_case_from_string(const std::string& text, const std::string& origin = "<memory>");

// Deterministic writer (sorted keys); load_case(save_case(c)) == c for any
// loaded case.
void save_case(const StudyCase& c, const std::string& path);
std::string case_to_string(const StudyCase& c);

// Pure semantic validation: empty result iff all type invariants hold and the
// in-service branch graph is connected.
std::vector<Diagnostic> validate_case(const StudyCase& c);

// Documentation metadata: model symbols owned by the domain types, mapped to
// the field that carries each one. Consumed by the symbol-table test together
// with the variable inventories of the optimization builders.
std::vector<std::pair<std::string, std::string>> grid_model_symbols();

}  // namespace svsc
