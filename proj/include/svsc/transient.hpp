#pragma once

#include <array>
#include <string>
#include <vector>

#include "svsc/grid_model.hpp"
#include "svsc/network.hpp"

namespace svsc {

// Norton equivalents frozen from the prefault operating point: machines as
// internal EMFs behind subtransient/transient reactance, wind farms as current
// phasors with their dq decomposition (d-axis on the prefault voltage).
struct NortonSources {
    int period = 0;
    ComplexVector v0;  // prefault bus voltages
    // Voltages used to convert loads to constant admittance; defaults to v0.
    // Kept separate so an optimizer-internal prefault state can be re-checked
    // against the exact network matrices it was built with.
    ComplexVector load_conversion_v;
    std::vector<int> commitment;
    std::vector<Complex> machine_e_sub, machine_e_tr;  // internal EMFs E'', E'
    std::vector<Complex> machine_i_sub, machine_i_tr;  // Norton currents E/(j x)
    std::vector<Complex> wind_i0;                      // prefault current phasors
    std::vector<double> wind_id0, wind_iq0, wind_theta0;
};

enum class Moment { kFaultOn, kFaultSteady, kFaultCleared };

struct Snapshot {
    Moment moment = Moment::kFaultOn;
    std::string scenario_id;
    int period = 0;
    ComplexVector v;
    std::vector<Complex> machine_current, wind_current;  // injected terminal currents
    std::vector<double> machine_p, machine_q, wind_p, wind_q;
    int fp_iterations = 0;  // fixed-point iterations spent (0 for pure linear solves)
};

// Per-wind-farm LVRT control parameters for one period.
struct WindControls {
    std::vector<double> k_p;
    std::vector<double> k_q;

    static WindControls midpoint(const StudyCase& c);
};

NortonSources compute_norton_sources(const StudyCase& c, int period, const PrefaultState& prefault);

// Fault-on snapshot: during-fault network with subtransient machine equivalents,
// all device currents frozen at their prefault values.
Snapshot snapshot_fault_occurrence(const StudyCase& c, int period, const std::string& scenario_id,
                                   const NortonSources& sources, const std::vector<int>& commitment,
                                   const WindControls& controls);

// Fault steady state: machines on transient equivalents; wind currents follow
// the LVRT law (damped Picard iteration with a small-Newton fallback).
Snapshot snapshot_fault_steady(const StudyCase& c, int period, const std::string& scenario_id,
                               const NortonSources& sources, const std::vector<int>& commitment,
                               const WindControls& controls);

// Fault clearance: postfault network, machine transient equivalents unchanged,
// wind currents frozen at their fault-steady values.
Snapshot snapshot_fault_clearance(const StudyCase& c, int period, const std::string& scenario_id,
                                  const NortonSources& sources, const Snapshot& steady);

// All three critical moments for one (period, scenario).
std::array<Snapshot, 3> solve_snapshots(const StudyCase& c, int period, const std::string& scenario_id,
                                        const NortonSources& sources, const std::vector<int>& commitment,
                                        const WindControls& controls);

// Closed-form voltage at the wind terminal during the fault and right after
// clearance for the single-PCC configuration: source v_g behind x_g, a double
// circuit of reactance x_l per circuit with a solid midpoint fault on one of
// them, and n_w identical wind farms behind x_w injecting reactive current
// k_q * i_n * (v_lvrt_th - V).
struct TwoBusVoltages {
    double v_flt = 0.0;
    double v_clr = 0.0;
};
TwoBusVoltages two_bus_analytic(double v_g, double x_g, double x_l, double x_w, int n_w, double k_q,
                                double i_n, double v_lvrt_th);

struct WindSecurity {
    int windfarm = 0;
    double v_flt = 0, v_fss = 0, v_clr = 0;
    double margin_flt = 0, margin_fss = 0, margin_clr = 0;  // >= 0 means secure
    bool secure = true;
};

struct SecurityReport {
    std::string scenario_id;
    int period = 0;
    std::vector<WindSecurity> per_windfarm;
    bool secure = true;
};

SecurityReport check_ride_through(const std::array<Snapshot, 3>& snaps, const StudyCase& c);

// Tabular dump of one snapshot (bus, |V|, angle, device P/Q), deterministic order.
std::string dump_snapshot(const Snapshot& s, const StudyCase& c);

}  // namespace svsc
