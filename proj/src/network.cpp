#include "svsc/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "svsc/errors.hpp"

namespace svsc {

namespace {
constexpr Complex kJ{0.0, 1.0};
}

void NetworkMatrices::set_matrix(Eigen::MatrixXcd y) {
    y_ = std::move(y);
    lu_.compute(y_);
}

NetworkMatrices build_admittance(const StudyCase& c, int period, Stage stage,
                                 const std::string& scenario_id, MachineModel machine_model,
                                 const std::vector<int>& commitment, const ComplexVector& load_voltages) {
    const int n = c.n_buses();
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);

    const FaultScenario* fault = nullptr;
    if (stage != Stage::kPrefault) fault = &c.fault_by_id(scenario_id);

    std::set<int> outages;
    if (stage == Stage::kPostfault)
        outages.insert(fault->post_fault_branch_outages.begin(), fault->post_fault_branch_outages.end());

    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        if (stage == Stage::kPostfault && outages.count(br.id)) continue;
        const Complex ys = 1.0 / Complex(br.r, br.x);
        const Complex ysh(0.0, br.b_half);
        y(br.from_bus, br.from_bus) += ys + ysh;
        y(br.to_bus, br.to_bus) += ys + ysh;
        y(br.from_bus, br.to_bus) -= ys;
        y(br.to_bus, br.from_bus) -= ys;
    }

    for (const auto& b : c.buses) y(b.id, b.id) += Complex(b.shunt_g, b.shunt_b);

    // Loads as constant admittance converted at the prefault voltage:
    // y_l = (P - jQ) / |V|^2.
    for (const auto& l : c.loads) {
        double vm = 1.0;
        if (load_voltages.size() == n) vm = std::abs(load_voltages[l.bus]);
        if (vm < 1e-6)
            throw NumericsError("NET_LOAD_VOLTAGE", "load conversion voltage vanishes at bus " +
                                                        std::to_string(l.bus));
        const double p = l.p[static_cast<size_t>(period)];
        const double q = l.q[static_cast<size_t>(period)];
        y(l.bus, l.bus) += Complex(p, -q) / (vm * vm);
    }

    if (machine_model != MachineModel::kNone) {
        for (size_t g = 0; g < c.machines.size(); ++g) {
            if (g < commitment.size() && commitment[g] == 0) continue;
            const auto& m = c.machines[g];
            const double x_eq = machine_model == MachineModel::kSubtransient ? m.x_d_sub : m.x_d_tr;
            y(m.bus, m.bus) += 1.0 / (kJ * x_eq);
        }
    }

    if (stage == Stage::kDuringFault) y(fault->fault_bus, fault->fault_bus) += fault->fault_admittance;

    NetworkMatrices net;
    net.stage = stage;
    net.scenario_id = scenario_id;
    net.machine_model = machine_model;
    net.commitment = commitment;
    net.set_matrix(std::move(y));
    return net;
}

ComplexVector solve_linear_network(const NetworkMatrices& net, const ComplexVector& injections) {
    if (injections.size() != net.n())
        throw NumericsError("NET_DIM", "injection vector length does not match bus count");
    if (!net.factorization().isInvertible())
        throw NumericsError("NET_SINGULAR",
                            "network matrix is singular (isolated bus with no shunt path?)");
    ComplexVector v = net.factorization().solve(injections);
    // One refinement step keeps residuals near machine precision even for
    // stiff fault shunts.
    ComplexVector r = injections - net.complex_matrix() * v;
    v += net.factorization().solve(r);
    r = injections - net.complex_matrix() * v;
    const double res = r.lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, injections.lpNorm<Eigen::Infinity>());
    const double ynorm = net.complex_matrix().cwiseAbs().rowwise().sum().maxCoeff();
    const double vnorm = std::max(1.0, v.lpNorm<Eigen::Infinity>());
    if (res > 1e-10 * scale && res > 1e-13 * ynorm * vnorm)
        throw NumericsError("NET_RESIDUAL", "network solve residual " + std::to_string(res) +
                                                " exceeds tolerance");
    return v;
}

std::map<int, ComplexVector> impedance_rows(const NetworkMatrices& net, const std::vector<int>& rows) {
    if (!net.factorization().isInvertible())
        throw NumericsError("NET_ZERO_STRENGTH",
                            "admittance matrix singular: no committed machine or shunt path");
    std::map<int, ComplexVector> out;
    for (int w : rows) {
        if (w < 0 || w >= net.n()) throw NumericsError("NET_DIM", "impedance row out of range");
        ComplexVector e = ComplexVector::Zero(net.n());
        e[w] = 1.0;
        ComplexVector z = net.factorization().solve(e);
        ComplexVector r = e - net.complex_matrix() * z;
        z += net.factorization().solve(r);
        out[w] = z;
    }
    return out;
}

std::string dump_matrix_coordinates(const NetworkMatrices& net) {
    std::ostringstream os;
    os.precision(12);
    os << "# i j G B\n";
    for (int i = 0; i < net.n(); ++i)
        for (int j = 0; j < net.n(); ++j) {
            const Complex v = net.complex_matrix()(i, j);
            if (v != Complex(0.0, 0.0)) os << i << " " << j << " " << v.real() << " " << v.imag() << "\n";
        }
    return os.str();
}

// ---------------------------------------------------------------------------

PowerFlowControls PowerFlowControls::defaults(const StudyCase& c) {
    PowerFlowControls pc;
    pc.machine.assign(c.machines.size(), DeviceSetpoint{DeviceSetpoint::Mode::kFixedV, 1.0});
    pc.windfarm_q.assign(c.windfarms.size(), 0.0);
    // Slack: the largest committed-capable unit wins by default.
    int best = 0;
    for (size_t g = 1; g < c.machines.size(); ++g)
        if (c.machines[g].p_max > c.machines[best].p_max) best = static_cast<int>(g);
    pc.slack_machine = best;
    return pc;
}

namespace {

enum class BusKind { kSlack, kPV, kPQ };

}  // namespace

PrefaultState solve_power_flow(const StudyCase& c, int period, const DispatchPoint& dispatch,
                               const PowerFlowControls& controls) {
    const int n = c.n_buses();
    const int ng = c.n_machines();
    const int nw = c.n_windfarms();
    if (static_cast<int>(dispatch.y.size()) != ng || static_cast<int>(dispatch.p_g.size()) != ng ||
        static_cast<int>(dispatch.p_w.size()) != nw)
        throw ConfigError("PF_DISPATCH", "dispatch vectors do not match device counts");
    if (controls.slack_machine < 0 || controls.slack_machine >= ng)
        throw ConfigError("PF_SLACK", "slack machine index out of range");
    if (dispatch.y[static_cast<size_t>(controls.slack_machine)] == 0)
        throw SolverError("PF_SLACK_OFF", "designated slack machine is not committed");

    // Bare network: branches and bus shunts only; loads stay constant-power.
    Eigen::MatrixXcd ybus = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        const Complex ys = 1.0 / Complex(br.r, br.x);
        const Complex ysh(0.0, br.b_half);
        ybus(br.from_bus, br.from_bus) += ys + ysh;
        ybus(br.to_bus, br.to_bus) += ys + ysh;
        ybus(br.from_bus, br.to_bus) -= ys;
        ybus(br.to_bus, br.from_bus) -= ys;
    }
    for (const auto& b : c.buses) ybus(b.id, b.id) += Complex(b.shunt_g, b.shunt_b);
    const Eigen::MatrixXd G = ybus.real(), B = ybus.imag();

    const int slack_bus = c.machines[static_cast<size_t>(controls.slack_machine)].bus;

    std::vector<BusKind> kind(static_cast<size_t>(n), BusKind::kPQ);
    std::vector<double> v_target(static_cast<size_t>(n), 1.0);
    for (int g = 0; g < ng; ++g) {
        if (!dispatch.y[static_cast<size_t>(g)]) continue;
        const auto& sp = controls.machine[static_cast<size_t>(g)];
        if (sp.mode == DeviceSetpoint::Mode::kFixedV) {
            const int b = c.machines[static_cast<size_t>(g)].bus;
            if (kind[static_cast<size_t>(b)] == BusKind::kPV &&
                std::abs(v_target[static_cast<size_t>(b)] - sp.value) > 1e-12)
                throw ConfigError("PF_V_CONFLICT",
                                  "conflicting voltage targets at bus " + std::to_string(b));
            kind[static_cast<size_t>(b)] = BusKind::kPV;
            v_target[static_cast<size_t>(b)] = sp.value;
        }
    }
    kind[static_cast<size_t>(slack_bus)] = BusKind::kSlack;
    {
        const auto& sp = controls.machine[static_cast<size_t>(controls.slack_machine)];
        if (sp.mode == DeviceSetpoint::Mode::kFixedV) v_target[static_cast<size_t>(slack_bus)] = sp.value;
    }

    std::vector<double> p_spec(static_cast<size_t>(n), 0.0), q_spec(static_cast<size_t>(n), 0.0);
    for (int g = 0; g < ng; ++g) {
        if (!dispatch.y[static_cast<size_t>(g)] || g == controls.slack_machine) continue;
        const auto& m = c.machines[static_cast<size_t>(g)];
        p_spec[static_cast<size_t>(m.bus)] += dispatch.p_g[static_cast<size_t>(g)];
        if (controls.machine[static_cast<size_t>(g)].mode == DeviceSetpoint::Mode::kFixedQ)
            q_spec[static_cast<size_t>(m.bus)] += controls.machine[static_cast<size_t>(g)].value;
    }
    for (int w = 0; w < nw; ++w) {
        const auto& wf = c.windfarms[static_cast<size_t>(w)];
        p_spec[static_cast<size_t>(wf.bus)] += dispatch.p_w[static_cast<size_t>(w)];
        q_spec[static_cast<size_t>(wf.bus)] += controls.windfarm_q[static_cast<size_t>(w)];
    }
    for (const auto& l : c.loads) {
        p_spec[static_cast<size_t>(l.bus)] -= l.p[static_cast<size_t>(period)];
        q_spec[static_cast<size_t>(l.bus)] -= l.q[static_cast<size_t>(period)];
    }

    std::vector<double> th(static_cast<size_t>(n), 0.0), vm(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i)
        if (kind[static_cast<size_t>(i)] != BusKind::kPQ) vm[static_cast<size_t>(i)] = v_target[static_cast<size_t>(i)];

    // Unknown ordering: theta for non-slack buses, then |V| for PQ buses.
    std::vector<int> th_idx, vm_idx;
    for (int i = 0; i < n; ++i) {
        if (kind[static_cast<size_t>(i)] != BusKind::kSlack) th_idx.push_back(i);
        if (kind[static_cast<size_t>(i)] == BusKind::kPQ) vm_idx.push_back(i);
    }
    const int nth = static_cast<int>(th_idx.size());
    const int nvm = static_cast<int>(vm_idx.size());
    const int dim = nth + nvm;

    auto calc_pq = [&](std::vector<double>& p, std::vector<double>& q) {
        for (int i = 0; i < n; ++i) {
            double pi = 0.0, qi = 0.0;
            for (int k = 0; k < n; ++k) {
                const double gik = G(i, k), bik = B(i, k);
                if (gik == 0.0 && bik == 0.0) continue;
                const double dth = th[static_cast<size_t>(i)] - th[static_cast<size_t>(k)];
                const double ct = std::cos(dth), st = std::sin(dth);
                pi += vm[static_cast<size_t>(k)] * (gik * ct + bik * st);
                qi += vm[static_cast<size_t>(k)] * (gik * st - bik * ct);
            }
            p[static_cast<size_t>(i)] = vm[static_cast<size_t>(i)] * pi;
            q[static_cast<size_t>(i)] = vm[static_cast<size_t>(i)] * qi;
        }
    };

    std::vector<double> p_calc(static_cast<size_t>(n)), q_calc(static_cast<size_t>(n));
    int iter = 0;
    double max_mis = 0.0;
    for (; iter < 50; ++iter) {
        calc_pq(p_calc, q_calc);
        Eigen::VectorXd mis(dim);
        for (int a = 0; a < nth; ++a)
            mis[a] = p_spec[static_cast<size_t>(th_idx[static_cast<size_t>(a)])] -
                     p_calc[static_cast<size_t>(th_idx[static_cast<size_t>(a)])];
        for (int a = 0; a < nvm; ++a)
            mis[nth + a] = q_spec[static_cast<size_t>(vm_idx[static_cast<size_t>(a)])] -
                           q_calc[static_cast<size_t>(vm_idx[static_cast<size_t>(a)])];
        max_mis = mis.size() ? mis.lpNorm<Eigen::Infinity>() : 0.0;
        if (max_mis <= 1e-8) break;

        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
        auto dP_dth = [&](int i, int k) {
            if (i == k) return -q_calc[static_cast<size_t>(i)] - B(i, i) * vm[static_cast<size_t>(i)] * vm[static_cast<size_t>(i)];
            const double dth = th[static_cast<size_t>(i)] - th[static_cast<size_t>(k)];
            return vm[static_cast<size_t>(i)] * vm[static_cast<size_t>(k)] *
                   (G(i, k) * std::sin(dth) - B(i, k) * std::cos(dth));
        };
        auto dP_dv = [&](int i, int k) {
            if (i == k) return p_calc[static_cast<size_t>(i)] / vm[static_cast<size_t>(i)] + G(i, i) * vm[static_cast<size_t>(i)];
            const double dth = th[static_cast<size_t>(i)] - th[static_cast<size_t>(k)];
            return vm[static_cast<size_t>(i)] * (G(i, k) * std::cos(dth) + B(i, k) * std::sin(dth));
        };
        auto dQ_dth = [&](int i, int k) {
            if (i == k) return p_calc[static_cast<size_t>(i)] - G(i, i) * vm[static_cast<size_t>(i)] * vm[static_cast<size_t>(i)];
            const double dth = th[static_cast<size_t>(i)] - th[static_cast<size_t>(k)];
            return -vm[static_cast<size_t>(i)] * vm[static_cast<size_t>(k)] *
                   (G(i, k) * std::cos(dth) + B(i, k) * std::sin(dth));
        };
        auto dQ_dv = [&](int i, int k) {
            if (i == k) return q_calc[static_cast<size_t>(i)] / vm[static_cast<size_t>(i)] - B(i, i) * vm[static_cast<size_t>(i)];
            const double dth = th[static_cast<size_t>(i)] - th[static_cast<size_t>(k)];
            return vm[static_cast<size_t>(i)] * (G(i, k) * std::sin(dth) - B(i, k) * std::cos(dth));
        };
        for (int a = 0; a < nth; ++a) {
            for (int b = 0; b < nth; ++b)
                jac(a, b) = dP_dth(th_idx[static_cast<size_t>(a)], th_idx[static_cast<size_t>(b)]);
            for (int b = 0; b < nvm; ++b)
                jac(a, nth + b) = dP_dv(th_idx[static_cast<size_t>(a)], vm_idx[static_cast<size_t>(b)]);
        }
        for (int a = 0; a < nvm; ++a) {
            for (int b = 0; b < nth; ++b)
                jac(nth + a, b) = dQ_dth(vm_idx[static_cast<size_t>(a)], th_idx[static_cast<size_t>(b)]);
            for (int b = 0; b < nvm; ++b)
                jac(nth + a, nth + b) = dQ_dv(vm_idx[static_cast<size_t>(a)], vm_idx[static_cast<size_t>(b)]);
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        Eigen::VectorXd dx = lu.solve(mis);
        if (!dx.allFinite()) throw NumericsError("PF_DIVERGED", "power flow Jacobian solve failed");
        double step = 1.0;
        const double mx = dx.size() ? dx.lpNorm<Eigen::Infinity>() : 0.0;
        if (mx > 0.5) step = 0.5 / mx;  // crude damping far from the solution
        for (int a = 0; a < nth; ++a) th[static_cast<size_t>(th_idx[static_cast<size_t>(a)])] += step * dx[a];
        for (int a = 0; a < nvm; ++a) vm[static_cast<size_t>(vm_idx[static_cast<size_t>(a)])] += step * dx[nth + a];
    }
    if (max_mis > 1e-8)
        throw NumericsError("PF_DIVERGED", "power flow did not converge in 50 iterations (mismatch " +
                                               std::to_string(max_mis) + ")");
    for (int i = 0; i < n; ++i)
        if (vm[static_cast<size_t>(i)] < 0.5 || vm[static_cast<size_t>(i)] > 1.5)
            throw NumericsError("PF_VOLTAGE_RANGE", "solved voltage " + std::to_string(vm[static_cast<size_t>(i)]) +
                                                        " at bus " + std::to_string(i) +
                                                        " outside [0.5, 1.5]");

    PrefaultState st;
    st.period = period;
    st.commitment = dispatch.y;
    st.iterations = iter;
    st.v.resize(n);
    for (int i = 0; i < n; ++i)
        st.v[i] = std::polar(vm[static_cast<size_t>(i)], th[static_cast<size_t>(i)]);

    calc_pq(p_calc, q_calc);

    // Split bus injections back onto devices.
    st.machine_p.assign(static_cast<size_t>(ng), 0.0);
    st.machine_q.assign(static_cast<size_t>(ng), 0.0);
    st.machine_current.assign(static_cast<size_t>(ng), Complex(0, 0));
    st.wind_p.assign(static_cast<size_t>(nw), 0.0);
    st.wind_q.assign(static_cast<size_t>(nw), 0.0);
    st.wind_current.assign(static_cast<size_t>(nw), Complex(0, 0));

    for (int w = 0; w < nw; ++w) {
        st.wind_p[static_cast<size_t>(w)] = dispatch.p_w[static_cast<size_t>(w)];
        st.wind_q[static_cast<size_t>(w)] = controls.windfarm_q[static_cast<size_t>(w)];
    }
    // Per-bus generation totals the devices must account for.
    std::vector<double> p_gen(static_cast<size_t>(n)), q_gen(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        p_gen[static_cast<size_t>(i)] = p_calc[static_cast<size_t>(i)];
        q_gen[static_cast<size_t>(i)] = q_calc[static_cast<size_t>(i)];
    }
    for (const auto& l : c.loads) {
        p_gen[static_cast<size_t>(l.bus)] += l.p[static_cast<size_t>(period)];
        q_gen[static_cast<size_t>(l.bus)] += l.q[static_cast<size_t>(period)];
    }
    for (int w = 0; w < nw; ++w) {
        const auto& wf = c.windfarms[static_cast<size_t>(w)];
        p_gen[static_cast<size_t>(wf.bus)] -= st.wind_p[static_cast<size_t>(w)];
        q_gen[static_cast<size_t>(wf.bus)] -= st.wind_q[static_cast<size_t>(w)];
    }
    // Fixed-Q machines take their setpoints; V-holding machines share the rest.
    std::vector<int> v_holders_at(static_cast<size_t>(n), 0);
    for (int g = 0; g < ng; ++g) {
        if (!dispatch.y[static_cast<size_t>(g)]) continue;
        const auto& m = c.machines[static_cast<size_t>(g)];
        const auto& sp = controls.machine[static_cast<size_t>(g)];
        if (sp.mode == DeviceSetpoint::Mode::kFixedQ) {
            st.machine_q[static_cast<size_t>(g)] = sp.value;
            q_gen[static_cast<size_t>(m.bus)] -= sp.value;
        } else {
            ++v_holders_at[static_cast<size_t>(m.bus)];
        }
        if (g != controls.slack_machine) {
            st.machine_p[static_cast<size_t>(g)] = dispatch.p_g[static_cast<size_t>(g)];
            p_gen[static_cast<size_t>(m.bus)] -= dispatch.p_g[static_cast<size_t>(g)];
        }
    }
    for (int g = 0; g < ng; ++g) {
        if (!dispatch.y[static_cast<size_t>(g)]) continue;
        const auto& m = c.machines[static_cast<size_t>(g)];
        const auto& sp = controls.machine[static_cast<size_t>(g)];
        if (sp.mode == DeviceSetpoint::Mode::kFixedV)
            st.machine_q[static_cast<size_t>(g)] =
                q_gen[static_cast<size_t>(m.bus)] / v_holders_at[static_cast<size_t>(m.bus)];
        if (g == controls.slack_machine) st.machine_p[static_cast<size_t>(g)] = p_gen[static_cast<size_t>(m.bus)];
    }
    for (int g = 0; g < ng; ++g) {
        if (!dispatch.y[static_cast<size_t>(g)]) continue;
        const auto& m = c.machines[static_cast<size_t>(g)];
        const Complex s(st.machine_p[static_cast<size_t>(g)], st.machine_q[static_cast<size_t>(g)]);
        st.machine_current[static_cast<size_t>(g)] = std::conj(s / st.v[m.bus]);
    }
    for (int w = 0; w < nw; ++w) {
        const auto& wf = c.windfarms[static_cast<size_t>(w)];
        const Complex s(st.wind_p[static_cast<size_t>(w)], st.wind_q[static_cast<size_t>(w)]);
        st.wind_current[static_cast<size_t>(w)] = std::conj(s / st.v[wf.bus]);
    }
    return st;
}

}  // namespace svsc
