#pragma once

#include <string>
#include <vector>

#include "svsc/grid_model.hpp"
#include "svsc/network.hpp"
#include "svsc/transient.hpp"

namespace svsc {

// Minimal device dynamics used by the verification simulator: machines as an
// internal EMF behind the subtransient reactance whose value relaxes toward
// the transient operating characteristic, wind turbines as a current source
// with a first-order reference lag.
struct SimDeviceParams {
    enum class MachineEmf { kConstant, kDecayToTransient };
    MachineEmf machine_emf = MachineEmf::kDecayToTransient;
    double t_d0_sub = 0.04;  // EMF relaxation time constant, s
    double t_i = 0.02;       // wind current-loop lag, s
};

struct Trajectory {
    int period = 0;
    std::string scenario_id;
    double dt = 1e-4;
    std::vector<double> time;
    std::vector<Eigen::VectorXd> v_mag;            // per sample: |V| per bus
    std::vector<std::vector<double>> machine_p, machine_q;
    std::vector<std::vector<double>> wind_p, wind_q;
    int fault_on_index = -1;     // first sample with the fault applied
    int fault_clear_index = -1;  // first sample after clearance
};

// Trapezoidal integration of the device ODEs with the algebraic network solved
// at every step (alternating solution). Passing t_fault_on >= t_end simulates
// the undisturbed system.
Trajectory simulate_fault(const StudyCase& c, int period, const DispatchPoint& dispatch,
                          const PowerFlowControls& pf_controls, const WindControls& wind_controls,
                          const std::string& scenario_id, const SimDeviceParams& params, double dt,
                          double t_fault_on, double t_fault_clear, double t_end);

struct SnapshotErrorReport {
    double err_fault_on = 0.0;
    double err_fault_steady = 0.0;
    double err_fault_cleared = 0.0;
};

// Max |V| error per critical moment between a trajectory and the snapshot
// triple, sampled at t_on + 2dt, t_clear - 2dt, t_clear + 2dt.
SnapshotErrorReport compare_with_snapshots(const Trajectory& traj, const std::array<Snapshot, 3>& snaps);

std::string trajectory_to_csv(const Trajectory& traj, const StudyCase& c);

}  // namespace svsc
