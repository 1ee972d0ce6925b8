#include "svsc/tdsim.hpp"

#include <cmath>
#include <sstream>

#include "svsc/errors.hpp"

namespace svsc {

namespace {
constexpr Complex kJ{0.0, 1.0};
}

Trajectory simulate_fault(const StudyCase& c, int period, const DispatchPoint& dispatch,
                          const PowerFlowControls& pf_controls, const WindControls& wind_controls,
                          const std::string& scenario_id, const SimDeviceParams& params, double dt,
                          double t_fault_on, double t_fault_clear, double t_end) {
    if (dt <= 0 || dt > std::min(params.t_d0_sub, params.t_i) / 10.0)
        throw ConfigError("SIM_STEP", "dt must be positive and at most min(time constant)/10");
    if (params.t_d0_sub <= 0 || params.t_i <= 0)
        throw ConfigError("SIM_PARAMS", "device time constants must be positive");

    const PrefaultState pre = solve_power_flow(c, period, dispatch, pf_controls);
    const NortonSources ns = compute_norton_sources(c, period, pre);

    const bool faulted = t_fault_on < t_end;
    NetworkMatrices net_pre = build_admittance(c, period, Stage::kPrefault, scenario_id,
                                               MachineModel::kSubtransient, dispatch.y, pre.v);
    NetworkMatrices net_flt, net_post;
    if (faulted) {
        net_flt = build_admittance(c, period, Stage::kDuringFault, scenario_id,
                                   MachineModel::kSubtransient, dispatch.y, pre.v);
        net_post = build_admittance(c, period, Stage::kPostfault, scenario_id,
                                    MachineModel::kSubtransient, dispatch.y, pre.v);
    }

    const int n = c.n_buses();
    const int ng = c.n_machines();
    const int nw = c.n_windfarms();
    const double kappa = c.options.kappa_dq;

    // Machine EMF target: the value whose response through x''_d equals the
    // transient characteristic E' behind x'_d at the same terminal voltage.
    // At the prefault operating point the target equals E''_0, so the
    // undisturbed system is a true equilibrium.
    auto emf_target = [&](size_t g, Complex v) -> Complex {
        const auto& m = c.machines[g];
        if (params.machine_emf == SimDeviceParams::MachineEmf::kConstant) return ns.machine_e_sub[g];
        return v + (m.x_d_sub / m.x_d_tr) * (ns.machine_e_tr[g] - v);
    };

    auto wind_ref = [&](size_t w, Complex vw) -> Complex {
        const auto& wf = c.windfarms[w];
        const double u = std::abs(vw);
        if (u >= c.lvrt_reference(wf)) return ns.wind_i0[w];
        const Complex dir = u > 1e-12 ? vw / u : std::polar(1.0, ns.wind_theta0[w]);
        const double id = wind_controls.k_p[w] * ns.wind_id0[w];
        const double iq = wind_controls.k_q[w] * wf.i_rated * (c.lvrt_reference(wf) - u);
        return kappa * Complex(id, -iq) * dir;
    };

    std::vector<Complex> emf(static_cast<size_t>(ng)), iw(static_cast<size_t>(nw));
    for (int g = 0; g < ng; ++g)
        emf[static_cast<size_t>(g)] = dispatch.y[static_cast<size_t>(g)] ? ns.machine_e_sub[static_cast<size_t>(g)]
                                                                         : Complex(0, 0);
    for (int w = 0; w < nw; ++w) iw[static_cast<size_t>(w)] = ns.wind_i0[static_cast<size_t>(w)];

    auto network_at = [&](double t) -> const NetworkMatrices& {
        if (!faulted || t < t_fault_on) return net_pre;
        if (t < t_fault_clear) return net_flt;
        return net_post;
    };

    auto solve_v = [&](const NetworkMatrices& net, const std::vector<Complex>& e,
                       const std::vector<Complex>& i) {
        ComplexVector inj = ComplexVector::Zero(n);
        for (int g = 0; g < ng; ++g) {
            if (!dispatch.y[static_cast<size_t>(g)]) continue;
            inj[c.machines[static_cast<size_t>(g)].bus] +=
                e[static_cast<size_t>(g)] / (kJ * c.machines[static_cast<size_t>(g)].x_d_sub);
        }
        for (int w = 0; w < nw; ++w) inj[c.windfarms[static_cast<size_t>(w)].bus] += i[static_cast<size_t>(w)];
        return solve_linear_network(net, inj);
    };

    Trajectory traj;
    traj.period = period;
    traj.scenario_id = faulted ? scenario_id : std::string();
    traj.dt = dt;

    const int steps = static_cast<int>(std::llround(t_end / dt));
    const int on_idx = faulted ? static_cast<int>(std::llround(t_fault_on / dt)) : -1;
    const int clr_idx = faulted ? static_cast<int>(std::llround(t_fault_clear / dt)) : -1;

    ComplexVector v = pre.v;

    auto record = [&](double t, const ComplexVector& vv, const std::vector<Complex>& e,
                      const std::vector<Complex>& i) {
        traj.time.push_back(t);
        Eigen::VectorXd mag(n);
        for (int b = 0; b < n; ++b) mag[b] = std::abs(vv[b]);
        traj.v_mag.push_back(mag);
        std::vector<double> mp(static_cast<size_t>(ng)), mq(static_cast<size_t>(ng));
        for (int g = 0; g < ng; ++g) {
            Complex it(0, 0);
            if (dispatch.y[static_cast<size_t>(g)]) {
                const auto& m = c.machines[static_cast<size_t>(g)];
                it = (e[static_cast<size_t>(g)] - vv[m.bus]) / (kJ * m.x_d_sub);
            }
            const Complex s = vv[c.machines[static_cast<size_t>(g)].bus] * std::conj(it);
            mp[static_cast<size_t>(g)] = s.real();
            mq[static_cast<size_t>(g)] = s.imag();
        }
        traj.machine_p.push_back(std::move(mp));
        traj.machine_q.push_back(std::move(mq));
        std::vector<double> wp(static_cast<size_t>(nw)), wq(static_cast<size_t>(nw));
        for (int w = 0; w < nw; ++w) {
            const Complex s = vv[c.windfarms[static_cast<size_t>(w)].bus] * std::conj(i[static_cast<size_t>(w)]);
            wp[static_cast<size_t>(w)] = s.real();
            wq[static_cast<size_t>(w)] = s.imag();
        }
        traj.wind_p.push_back(std::move(wp));
        traj.wind_q.push_back(std::move(wq));
    };

    record(0.0, v, emf, iw);

    const double a = dt / (2.0 * params.t_d0_sub);
    const double b = dt / (2.0 * params.t_i);

    for (int k = 1; k <= steps; ++k) {
        const double t_next = k * dt;
        const NetworkMatrices& net = network_at(t_next);
        if (faulted && k == on_idx && traj.fault_on_index < 0) traj.fault_on_index = k;
        if (faulted && k == clr_idx && traj.fault_clear_index < 0) traj.fault_clear_index = k;

        // Trapezoidal step with sub-iteration on the algebraic voltages.
        std::vector<Complex> e_next = emf, i_next = iw;
        ComplexVector v_next = v;
        double dv = 1e30;
        for (int sub = 0; sub < 50 && dv > 1e-12; ++sub) {
            for (int g = 0; g < ng; ++g) {
                if (!dispatch.y[static_cast<size_t>(g)]) continue;
                const int bus = c.machines[static_cast<size_t>(g)].bus;
                const Complex rhs = emf[static_cast<size_t>(g)] * (1.0 - a) +
                                    a * (emf_target(static_cast<size_t>(g), v[bus]) +
                                         emf_target(static_cast<size_t>(g), v_next[bus]));
                e_next[static_cast<size_t>(g)] = rhs / (1.0 + a);
            }
            for (int w = 0; w < nw; ++w) {
                const int bus = c.windfarms[static_cast<size_t>(w)].bus;
                const Complex rhs = iw[static_cast<size_t>(w)] * (1.0 - b) +
                                    b * (wind_ref(static_cast<size_t>(w), v[bus]) +
                                         wind_ref(static_cast<size_t>(w), v_next[bus]));
                i_next[static_cast<size_t>(w)] = rhs / (1.0 + b);
            }
            ComplexVector v_new = solve_v(net, e_next, i_next);
            dv = (v_new - v_next).lpNorm<Eigen::Infinity>();
            v_next = v_new;
            if (!v_next.allFinite())
                throw NumericsError("SIM_DIVERGED",
                                    "algebraic solve diverged at t=" + std::to_string(t_next));
        }
        if (dv > 1e-10)
            throw NumericsError("SIM_DIVERGED", "algebraic sub-iteration stalled at t=" +
                                                    std::to_string(t_next));
        emf = e_next;
        iw = i_next;
        v = v_next;
        record(t_next, v, emf, iw);
    }
    return traj;
}

SnapshotErrorReport compare_with_snapshots(const Trajectory& traj, const std::array<Snapshot, 3>& snaps) {
    if (traj.fault_on_index < 0 || traj.fault_clear_index < 0)
        throw ConfigError("TRAJ_MISMATCH", "trajectory has no fault events to compare against");
    for (const auto& s : snaps)
        if (s.period != traj.period || s.scenario_id != traj.scenario_id)
            throw ConfigError("TRAJ_MISMATCH", "trajectory and snapshots have different provenance");

    auto err_at = [&](int idx, const Snapshot& snap) {
        if (idx < 0 || idx >= static_cast<int>(traj.v_mag.size()))
            throw ConfigError("TRAJ_MISMATCH", "comparison sample outside the simulated horizon");
        double e = 0.0;
        const Eigen::VectorXd& mag = traj.v_mag[static_cast<size_t>(idx)];
        for (int i = 0; i < mag.size(); ++i) e = std::max(e, std::abs(mag[i] - std::abs(snap.v[i])));
        return e;
    };

    SnapshotErrorReport rep;
    rep.err_fault_on = err_at(traj.fault_on_index + 2, snaps[0]);
    rep.err_fault_steady = err_at(traj.fault_clear_index - 2, snaps[1]);
    rep.err_fault_cleared = err_at(traj.fault_clear_index + 2, snaps[2]);
    return rep;
}

std::string trajectory_to_csv(const Trajectory& traj, const StudyCase& c) {
    std::ostringstream os;
    os.precision(10);
    os << "time";
    for (int b = 0; b < c.n_buses(); ++b) os << ",v" << b;
    for (int g = 0; g < c.n_machines(); ++g) os << ",pg" << g << ",qg" << g;
    for (int w = 0; w < c.n_windfarms(); ++w) os << ",pw" << w << ",qw" << w;
    os << "\n";
    for (size_t k = 0; k < traj.time.size(); ++k) {
        os << traj.time[k];
        for (int b = 0; b < c.n_buses(); ++b) os << "," << traj.v_mag[k][b];
        for (int g = 0; g < c.n_machines(); ++g)
            os << "," << traj.machine_p[k][static_cast<size_t>(g)] << ","
               << traj.machine_q[k][static_cast<size_t>(g)];
        for (int w = 0; w < c.n_windfarms(); ++w)
            os << "," << traj.wind_p[k][static_cast<size_t>(w)] << ","
               << traj.wind_q[k][static_cast<size_t>(w)];
        os << "\n";
    }
    return os.str();
}

}  // namespace svsc
