#pragma once

// Shared desk-scale study cases used across the test suites.

#include <string>
#include <vector>

#include "svsc/grid_model.hpp"

namespace svsc::fixtures {

inline Bus bus(int id, double v_min = 0.5, double v_max = 1.5) {
    Bus b;
    b.id = id;
    b.name = "bus" + std::to_string(id);
    b.v_min = v_min;
    b.v_max = v_max;
    return b;
}

inline Branch line(int id, int from, int to, double x, double r = 0.0) {
    Branch br;
    br.id = id;
    br.from_bus = from;
    br.to_bus = to;
    br.r = r;
    br.x = x;
    return br;
}

inline SyncMachine machine(int at, double p_min, double p_max, double x_sub, double x_tr,
                           double slope, double fixed = 0.0) {
    SyncMachine m;
    m.bus = at;
    m.p_min = p_min;
    m.p_max = p_max;
    m.q_min = -5.0;
    m.q_max = 5.0;
    m.x_d_sub = x_sub;
    m.x_d_tr = x_tr;
    m.ramp_up = m.ramp_down = p_max;
    m.cost_segments = {{p_max - p_min, slope}};
    m.cost_fixed = fixed;
    m.init_on = true;
    m.init_duration = 4;
    m.init_p = p_min;
    return m;
}

inline WindFarm windfarm(int at, double s_max, double x_w, double i_rated,
                         std::vector<double> forecast) {
    WindFarm w;
    w.bus = at;
    w.s_max = s_max;
    w.x_w = x_w;
    w.i_rated = i_rated;
    w.p_forecast = std::move(forecast);
    return w;
}

// Single-source double-circuit configuration with a solid midpoint fault:
// bus 0 source, bus 1 coupling point, bus 2 wind terminal, bus 3 the faulted
// midpoint of the second circuit.
inline StudyCase two_bus_fig3(double x_g, double x_l, double x_w, double i_n = 1.0,
                              double v_ref = 0.9) {
    StudyCase c;
    c.horizon = 1;
    c.buses = {bus(0), bus(1), bus(2), bus(3)};
    c.branches = {line(0, 0, 1, x_l), line(1, 0, 3, x_l / 2), line(2, 3, 1, x_l / 2),
                  line(3, 1, 2, x_w)};
    SyncMachine m = machine(0, 0.0, 5.0, x_g, x_g, 10.0);
    c.machines = {m};
    WindFarm w = windfarm(2, 5.0, x_w, i_n, {0.0});
    w.v_ref_lvrt = v_ref;
    c.windfarms = {w};
    FaultScenario f;
    f.id = "mid";
    f.fault_bus = 3;
    f.fault_admittance = 1e8;
    c.faults = {f};
    c.reserve_up = {0.0};
    c.reserve_down = {0.0};
    c.mrscr_threshold = 0.5;
    return c;
}

// Purely reactive prefault exchange: every prefault injection is reactive, so
// the fault-on response keeps all voltage angles at zero up to the fault
// conductance coupling.
inline StudyCase mechanism_case() {
    StudyCase c;
    c.horizon = 1;
    c.buses = {bus(0), bus(1), bus(2)};
    c.branches = {line(0, 0, 1, 0.15), line(1, 1, 2, 0.1)};
    c.machines = {machine(0, 0.0, 3.0, 0.2, 0.25, 10.0)};
    c.windfarms = {windfarm(2, 2.0, 0.1, 1.0, {0.0})};
    LoadProfile l;
    l.bus = 1;
    l.p = {0.0};
    l.q = {0.3};
    c.loads = {l};
    FaultScenario f;
    f.id = "f1";
    f.fault_bus = 1;
    f.fault_admittance = 1e6;
    c.faults = {f};
    c.reserve_up = {0.0};
    c.reserve_down = {0.0};
    c.mrscr_threshold = 0.5;
    return c;
}

// Two machines on a single line with a varying load; no wind, no faults.
inline StudyCase toy_uc(int horizon, std::vector<double> load) {
    StudyCase c;
    c.horizon = horizon;
    c.buses = {bus(0), bus(1)};
    c.branches = {line(0, 0, 1, 0.1)};
    SyncMachine g0 = machine(0, 0.2, 1.5, 0.2, 0.25, 10.0, 5.0);
    g0.cost_startup = 20.0;
    g0.cost_shutdown = 5.0;
    g0.init_on = true;
    SyncMachine g1 = machine(1, 0.1, 0.8, 0.25, 0.3, 25.0, 3.0);
    g1.cost_startup = 12.0;
    g1.cost_shutdown = 4.0;
    g1.init_on = false;
    g1.init_p = 0.0;
    c.machines = {g0, g1};
    LoadProfile l;
    l.bus = 1;
    l.p = std::move(load);
    l.q.assign(static_cast<size_t>(horizon), 0.0);
    c.loads = {l};
    c.reserve_up.assign(static_cast<size_t>(horizon), 0.0);
    c.reserve_down.assign(static_cast<size_t>(horizon), 0.0);
    c.mrscr_threshold = 1.0;
    return c;
}

// Engineered clearance-overvoltage case: a small cheap unit behind a weak
// double-circuit corridor leaves the station sag so deep that the reactive
// gain required for ride-through swells the clearance voltage far past the
// trip ceiling; an expensive unit at the coupling point resolves both sides.
// Balance allows either commitment.
inline StudyCase tov_fixture(int horizon = 2) {
    StudyCase c;
    c.horizon = horizon;
    c.buses = {bus(0, 0.94, 1.06), bus(1, 0.94, 1.06), bus(2, 0.94, 1.06), bus(3, 0.94, 1.06)};
    c.branches = {line(0, 0, 1, 0.5), line(1, 0, 3, 0.25), line(2, 3, 1, 0.25),
                  line(3, 1, 2, 0.1)};
    SyncMachine remote = machine(0, 0.3, 2.5, 0.7, 0.75, 10.0, 2.0);
    remote.cost_startup = 15.0;
    remote.q_min = -0.3;
    remote.q_max = 1.5;
    SyncMachine near = machine(1, 0.1, 1.0, 0.12, 0.15, 14.0, 0.8);
    near.cost_startup = 1.0;
    near.init_on = false;
    near.init_p = 0.0;
    near.q_min = -0.5;
    near.q_max = 1.0;
    c.machines = {remote, near};
    WindFarm w = windfarm(2, 2.0, 0.1, 1.0, std::vector<double>(static_cast<size_t>(horizon), 0.55));
    w.kp_max = 0.1;       // a weak pocket cannot carry much active current mid-fault
    w.v_trip_high = 1.10; // tight overvoltage ceiling: sag support conflicts with it
    c.windfarms = {w};
    LoadProfile l;
    l.bus = 0;
    l.p.assign(static_cast<size_t>(horizon), 1.3);
    l.q.assign(static_cast<size_t>(horizon), 0.0);
    for (int t = 1; t < horizon; ++t) l.p[static_cast<size_t>(t)] = 1.2;
    c.loads = {l};
    FaultScenario f;
    f.id = "mid";
    f.fault_bus = 3;
    f.fault_admittance = 1e4;
    c.faults = {f};
    c.reserve_up.assign(static_cast<size_t>(horizon), 0.0);
    c.reserve_down.assign(static_cast<size_t>(horizon), 0.0);
    c.mrscr_threshold = 0.5;  // keep the focus on ride-through security
    c.curtail_penalty = 400.0;
    c.options.curtail_bits = 3;
    c.options.gbd_max_iter = 15;
    return c;
}

// Five-bus meshed case with two stations; used for the relaxation containment
// sampling and cross-definition checks.
inline StudyCase five_bus(double forecast0 = 0.5, double forecast1 = 0.4) {
    StudyCase c;
    c.horizon = 1;
    c.buses = {bus(0, 0.9, 1.1), bus(1, 0.9, 1.1), bus(2, 0.9, 1.1), bus(3, 0.9, 1.1),
               bus(4, 0.9, 1.1)};
    c.branches = {line(0, 0, 2, 0.15, 0.003), line(1, 1, 2, 0.2, 0.004), line(2, 2, 3, 0.12, 0.002),
                  line(3, 2, 4, 0.18, 0.004), line(4, 3, 4, 0.25, 0.005)};
    c.machines = {machine(0, 0.1, 1.5, 0.2, 0.25, 12.0, 2.0), machine(1, 0.1, 1.2, 0.25, 0.3, 18.0, 1.0)};
    c.windfarms = {windfarm(3, 1.5, 0.08, 1.0, {forecast0}), windfarm(4, 1.2, 0.09, 1.0, {forecast1})};
    // Light conductive load: the impedance entries stay reactance-dominated,
    // which the one-norm magnitude surrogate of the relaxation relies on.
    LoadProfile l;
    l.bus = 2;
    l.p = {0.2};
    l.q = {0.05};
    c.loads = {l};
    FaultScenario f;
    f.id = "f2";
    f.fault_bus = 2;
    f.fault_admittance = 1e4;
    c.faults = {f};
    // Reserve keeps at least one synchronous unit on even when wind could
    // serve the whole load.
    c.reserve_up = {0.2};
    c.reserve_down = {0.05};
    c.mrscr_threshold = 3.0;
    c.options.curtail_bits = 3;
    return c;
}

// Desk-scale oracle-comparison case: two machines, two stations, one load.
// The fault sits on a stub behind arc resistance so the wind pocket keeps a
// synchronous anchor during the fault (a solid fault that orphans a pocket
// carrying active current has no algebraic fault-steady state).
inline StudyCase tdsim_fixture() {
    StudyCase c;
    c.horizon = 1;
    c.buses = {bus(0), bus(1), bus(2), bus(3), bus(4), bus(5), bus(6)};
    c.branches = {line(0, 0, 2, 0.12), line(1, 1, 2, 0.15), line(2, 2, 3, 0.08),
                  line(3, 3, 4, 0.06), line(4, 3, 5, 0.07), line(5, 2, 6, 0.05)};
    c.machines = {machine(0, 0.1, 2.0, 0.050, 0.052, 10.0), machine(1, 0.1, 1.5, 0.060, 0.0625, 14.0)};
    c.windfarms = {windfarm(4, 1.0, 0.06, 1.0, {0.3}), windfarm(5, 1.0, 0.07, 1.0, {0.25})};
    LoadProfile l;
    l.bus = 2;
    l.p = {0.5};
    l.q = {0.1};
    c.loads = {l};
    FaultScenario f;
    f.id = "f2";
    f.fault_bus = 6;
    f.fault_admittance = 20.0;
    c.faults = {f};
    c.reserve_up = {0.0};
    c.reserve_down = {0.0};
    c.mrscr_threshold = 0.5;
    return c;
}

}  // namespace svsc::fixtures
