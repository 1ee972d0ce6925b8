#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>

#include <map>
#include <string>
#include <vector>

#include "svsc/grid_model.hpp"

namespace svsc {

using ComplexVector = Eigen::VectorXcd;

enum class Stage { kPrefault, kDuringFault, kPostfault };
enum class MachineModel { kNone, kSubtransient, kTransient };

// Stage- and commitment-dependent admittance: the plain network matrix plus
// load equivalent admittances (converted at the given prefault voltages) plus,
// when machine_model != kNone, the committed machines' reactance shunts
// 1/(j x_eq) on their buses. Immutable after build; the factorization is
// reusable by concurrent solves.
class NetworkMatrices {
public:
    Stage stage = Stage::kPrefault;
    std::string scenario_id;
    MachineModel machine_model = MachineModel::kNone;
    std::vector<int> commitment;

    int n() const { return static_cast<int>(y_.rows()); }
    const Eigen::MatrixXcd& complex_matrix() const { return y_; }
    Eigen::MatrixXd g_block() const { return y_.real(); }
    Eigen::MatrixXd b_block() const { return y_.imag(); }
    const Eigen::FullPivLU<Eigen::MatrixXcd>& factorization() const { return lu_; }

    void set_matrix(Eigen::MatrixXcd y);

private:
    Eigen::MatrixXcd y_;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu_;
};

// Assembles the stage network. `load_voltages` supplies the prefault voltage
// magnitudes used to convert loads to constant admittance (empty = flat 1.0).
// Throws NumericsError if the assembled matrix is singular.
NetworkMatrices build_admittance(const StudyCase& c, int period, Stage stage,
                                 const std::string& scenario_id, MachineModel machine_model,
                                 const std::vector<int>& commitment,
                                 const ComplexVector& load_voltages = ComplexVector());

// Solves (G + jB) V = I against the stored factorization with one step of
// iterative refinement.
ComplexVector solve_linear_network(const NetworkMatrices& net, const ComplexVector& injections);

// Rows of Z = Y^-1 for the requested buses (Y symmetric, so a row solve is a
// column solve). Throws NumericsError("NET_ZERO_STRENGTH") on singular Y.
std::map<int, ComplexVector> impedance_rows(const NetworkMatrices& net, const std::vector<int>& rows);

// Deterministic coordinate-format dump (i, j, G_ij, B_ij) of the nonzeros.
std::string dump_matrix_coordinates(const NetworkMatrices& net);

// ---------------------------------------------------------------------------
// Steady-state power flow (constant-power loads).

struct DeviceSetpoint {
    enum class Mode { kFixedQ, kFixedV };
    Mode mode = Mode::kFixedV;
    double value = 1.0;  // Q in p.u. or |V| target depending on mode
};

struct PowerFlowControls {
    int slack_machine = 0;
    std::vector<DeviceSetpoint> machine;  // one per machine
    std::vector<double> windfarm_q;       // one per wind farm

    static PowerFlowControls defaults(const StudyCase& c);
};

// One period of a schedule, as the power flow and transient solvers need it.
struct DispatchPoint {
    std::vector<int> y;       // per-machine commitment
    std::vector<double> p_g;  // per-machine active dispatch
    std::vector<double> p_w;  // per-wind-farm active dispatch
};

struct PrefaultState {
    int period = 0;
    ComplexVector v;
    std::vector<int> commitment;
    std::vector<Complex> machine_current;  // injected terminal currents
    std::vector<Complex> wind_current;
    std::vector<double> machine_p, machine_q;
    std::vector<double> wind_p, wind_q;
    int iterations = 0;
};

// Newton-Raphson power flow. The slack machine absorbs the active-power
// mismatch; machines hold either a voltage target or a reactive setpoint.
// Throws NumericsError on divergence or on final voltages outside [0.5, 1.5].
PrefaultState solve_power_flow(const StudyCase& c, int period, const DispatchPoint& dispatch,
                               const PowerFlowControls& controls);

}  // namespace svsc
