#include "svsc/subproblem.hpp"

#include <cmath>
#include <sstream>

#include "svsc/errors.hpp"
#include "svsc/interior_point.hpp"

namespace svsc {

namespace {

std::string nm(const char* base, int a) {
    std::ostringstream os;
    os << base << "[" << a << "]";
    return os.str();
}
std::string nm2(const char* base, int a, int b) {
    std::ostringstream os;
    os << base << "[" << a << "][" << b << "]";
    return os.str();
}

}  // namespace

std::string sub_var_y(int g) { return nm("y", g); }
std::string sub_var_pg(int g) { return nm("P_g", g); }
std::string sub_var_qg(int g) { return nm("Q_g", g); }
std::string sub_var_pw(int w) { return nm("P_w", w); }
std::string sub_var_qw(int w) { return nm("Q_w", w); }
std::string sub_var_kp(int w) { return nm("k_p", w); }
std::string sub_var_kq(int w) { return nm("k_q", w); }
std::string sub_var_xi_scr(int w) { return nm("xi_scr", w); }
std::string sub_var_xi(const char* kind, int fault, int w) {
    std::ostringstream os;
    os << "xi_" << kind << "[" << fault << "][" << w << "]";
    return os.str();
}
std::string sub_var_vx(int moment, int fault, int bus) {
    std::ostringstream os;
    if (moment == 0) os << "Vx0[" << bus << "]";
    else os << "Vx" << moment << "[" << fault << "][" << bus << "]";
    return os.str();
}
std::string sub_var_vy(int moment, int fault, int bus) {
    std::ostringstream os;
    if (moment == 0) os << "Vy0[" << bus << "]";
    else os << "Vy" << moment << "[" << fault << "][" << bus << "]";
    return os.str();
}

namespace {

std::string ig_x(int moment, int fault, int g) {
    std::ostringstream os;
    if (moment == 0) os << "Igx0[" << g << "]";
    else os << "Igx" << moment << "[" << fault << "][" << g << "]";
    return os.str();
}
std::string ig_y(int moment, int fault, int g) {
    std::ostringstream os;
    if (moment == 0) os << "Igy0[" << g << "]";
    else os << "Igy" << moment << "[" << fault << "][" << g << "]";
    return os.str();
}
std::string u_mag(int moment, int fault, int w) {
    std::ostringstream os;
    if (moment == 0) os << "U0[" << w << "]";
    else os << "U" << moment << "[" << fault << "][" << w << "]";
    return os.str();
}

struct Builder {
    const StudyCase& c;
    ProblemIR& p;
    std::vector<double>& warm;

    int var(const std::string& name, double lb, double ub, double w0) {
        const int idx = p.add_variable(name, lb, ub, VarKind::kContinuous);
        warm.push_back(w0);
        return idx;
    }

    int qrow(const std::string& name, Sense s, double rhs) {
        QuadConstraint qc;
        qc.name = name;
        qc.sense = s;
        qc.rhs = rhs;
        return p.add_quadratic(std::move(qc));
    }
};

}  // namespace

SubproblemModel build_subproblem(const StudyCase& c, int t, const Schedule& schedule,
                                 const PowerFlowControls* q_seed, const WindControls* gain_seed) {
    if (t < 0 || t >= c.horizon)
        throw ConfigError("SUB_PERIOD", "schedule period " + std::to_string(t) + " out of range");

    const int nb = c.n_buses();
    const int ng = c.n_machines();
    const int nw = c.n_windfarms();
    const int nf = c.n_faults();
    const double kappa = c.options.kappa_dq;
    const bool dq_freeze = c.options.wind_freeze_dq;

    const DispatchPoint dispatch = schedule.at(t);
    PowerFlowControls controls = q_seed ? *q_seed : PowerFlowControls::defaults(c);
    // The slack must sit on a committed unit regardless of where the seed
    // came from; commitments move between decomposition iterations.
    if (!dispatch.y[static_cast<size_t>(controls.slack_machine)]) {
        int best = -1;
        for (int g = 0; g < ng; ++g)
            if (dispatch.y[static_cast<size_t>(g)] &&
                (best < 0 || c.machines[static_cast<size_t>(g)].p_max > c.machines[static_cast<size_t>(best)].p_max))
                best = g;
        if (best < 0)
            throw SolverError("PF_SLACK_OFF", "period " + std::to_string(t) + ": no committed machine");
        controls.slack_machine = best;
        controls.machine[static_cast<size_t>(best)] = {DeviceSetpoint::Mode::kFixedV, 1.0};
    }
    const WindControls gains = gain_seed ? *gain_seed : WindControls::midpoint(c);

    PrefaultState pre;
    NortonSources ns;
    std::vector<std::array<Snapshot, 3>> snaps;
    try {
        pre = solve_power_flow(c, t, dispatch, controls);
        ns = compute_norton_sources(c, t, pre);
        for (int f = 0; f < nf; ++f)
            snaps.push_back(solve_snapshots(c, t, c.faults[static_cast<size_t>(f)].id, ns, dispatch.y, gains));
    } catch (const Error& e) {
        throw SolverError(e.code(), "period " + std::to_string(t) + ": " + std::string(e.what()));
    }

    SubproblemModel model;
    model.period = t;
    model.conversion_v = pre.v;
    model.commitment = dispatch.y;

    ProblemIR& p = model.problem;
    p.obj_sense = ObjSense::kMin;
    std::vector<double> warm;
    Builder b{c, p, warm};

    // Stage networks with the machine response kept out of the matrices; the
    // committed machines enter through bilinear current definitions so the
    // commitment variable carries a meaningful multiplier.
    const NetworkMatrices net_pre =
        build_admittance(c, t, Stage::kPrefault, "", MachineModel::kNone, {}, pre.v);
    std::vector<NetworkMatrices> net_flt, net_post;
    for (int f = 0; f < nf; ++f) {
        const std::string& sid = c.faults[static_cast<size_t>(f)].id;
        net_flt.push_back(build_admittance(c, t, Stage::kDuringFault, sid, MachineModel::kNone, {}, pre.v));
        net_post.push_back(build_admittance(c, t, Stage::kPostfault, sid, MachineModel::kNone, {}, pre.v));
    }

    // --- variables ---
    for (int i = 0; i < nb; ++i) {
        b.var(sub_var_vx(0, 0, i), -3, 3, pre.v[i].real());
        b.var(sub_var_vy(0, 0, i), -3, 3, pre.v[i].imag());
    }
    for (int g = 0; g < ng; ++g) {
        b.var(ig_x(0, 0, g), -20, 20, pre.machine_current[static_cast<size_t>(g)].real());
        b.var(ig_y(0, 0, g), -20, 20, pre.machine_current[static_cast<size_t>(g)].imag());
        b.var(sub_var_qg(g), -20, 20, pre.machine_q[static_cast<size_t>(g)]);
        b.var(sub_var_y(g), -0.5, 1.5, dispatch.y[static_cast<size_t>(g)]);
        b.var(sub_var_pg(g), -c.machines[static_cast<size_t>(g)].p_max - 1.0,
              c.machines[static_cast<size_t>(g)].p_max + 1.0, dispatch.p_g[static_cast<size_t>(g)]);
    }
    for (int w = 0; w < nw; ++w) {
        const auto& wf = c.windfarms[static_cast<size_t>(w)];
        b.var(nm("Iwx0", w), -20, 20, pre.wind_current[static_cast<size_t>(w)].real());
        b.var(nm("Iwy0", w), -20, 20, pre.wind_current[static_cast<size_t>(w)].imag());
        b.var(sub_var_qw(w), -2 * wf.s_max - 1, 2 * wf.s_max + 1, pre.wind_q[static_cast<size_t>(w)]);
        b.var(sub_var_pw(w), -1.0, wf.s_max + 1.0, dispatch.p_w[static_cast<size_t>(w)]);
        b.var(u_mag(0, 0, w), 0, 3, std::abs(pre.v[wf.bus]));
        b.var(nm("Id0", w), -20, 20, ns.wind_id0[static_cast<size_t>(w)]);
        b.var(nm("Iq0", w), -20, 20, ns.wind_iq0[static_cast<size_t>(w)]);
        b.var(sub_var_kp(w), wf.kp_min, wf.kp_max, gains.k_p[static_cast<size_t>(w)]);
        b.var(sub_var_kq(w), wf.kq_min, wf.kq_max, gains.k_q[static_cast<size_t>(w)]);
    }

    // Wind-only voltage components for the strength bound.
    ComplexVector vr_warm = ComplexVector::Zero(nb);
    {
        NetworkMatrices net_scc =
            build_admittance(c, t, Stage::kPrefault, "", MachineModel::kSubtransient, dispatch.y, pre.v);
        ComplexVector inj = ComplexVector::Zero(nb);
        for (int w = 0; w < nw; ++w)
            inj[c.windfarms[static_cast<size_t>(w)].bus] += pre.wind_current[static_cast<size_t>(w)];
        vr_warm = solve_linear_network(net_scc, inj);
    }
    for (int i = 0; i < nb; ++i) {
        b.var(nm("Vrx", i), -10, 10, vr_warm[i].real());
        b.var(nm("Vry", i), -10, 10, vr_warm[i].imag());
    }
    for (int w = 0; w < nw; ++w) {
        const int bw = c.windfarms[static_cast<size_t>(w)].bus;
        const double vn = c.buses[static_cast<size_t>(bw)].v_nominal;
        const double cap = vn / c.mrscr_threshold;
        const double viol = std::max(0.0, std::norm(vr_warm[bw]) - cap * cap);
        b.var(sub_var_xi_scr(w), 0, 100, viol + 0.05);
    }

    for (int f = 0; f < nf; ++f) {
        const auto& sn = snaps[static_cast<size_t>(f)];
        for (int m = 1; m <= 3; ++m) {
            const ComplexVector& v = sn[static_cast<size_t>(m - 1)].v;
            for (int i = 0; i < nb; ++i) {
                b.var(sub_var_vx(m, f, i), -3, 3, v[i].real());
                b.var(sub_var_vy(m, f, i), -3, 3, v[i].imag());
            }
            for (int g = 0; g < ng; ++g) {
                b.var(ig_x(m, f, g), -40, 40, sn[static_cast<size_t>(m - 1)].machine_current[static_cast<size_t>(g)].real());
                b.var(ig_y(m, f, g), -40, 40, sn[static_cast<size_t>(m - 1)].machine_current[static_cast<size_t>(g)].imag());
            }
            for (int w = 0; w < nw; ++w)
                b.var(u_mag(m, f, w), 0, 3,
                      std::abs(v[c.windfarms[static_cast<size_t>(w)].bus]));
        }
        for (int w = 0; w < nw; ++w) {
            const auto& wf = c.windfarms[static_cast<size_t>(w)];
            const Complex i2 = sn[1].wind_current[static_cast<size_t>(w)];
            b.var(nm2("Iwx2", f, w), -40, 40, i2.real());
            b.var(nm2("Iwy2", f, w), -40, 40, i2.imag());
            const double u2 = std::abs(sn[1].v[wf.bus]);
            b.var(nm2("Id2", f, w), -40, 40,
                  gains.k_p[static_cast<size_t>(w)] * ns.wind_id0[static_cast<size_t>(w)]);
            b.var(nm2("Iq2", f, w), -40, 40,
                  gains.k_q[static_cast<size_t>(w)] * wf.i_rated * (c.lvrt_reference(wf) - u2));
            b.var(nm2("Pw2", f, w), -10, 10, sn[1].wind_p[static_cast<size_t>(w)]);
            b.var(nm2("Qw2", f, w), -10, 10, sn[1].wind_q[static_cast<size_t>(w)]);
            if (dq_freeze) {
                b.var(nm2("Iwx1", f, w), -40, 40, sn[0].wind_current[static_cast<size_t>(w)].real());
                b.var(nm2("Iwy1", f, w), -40, 40, sn[0].wind_current[static_cast<size_t>(w)].imag());
                b.var(nm2("Iwx3", f, w), -40, 40, sn[2].wind_current[static_cast<size_t>(w)].real());
                b.var(nm2("Iwy3", f, w), -40, 40, sn[2].wind_current[static_cast<size_t>(w)].imag());
            }
            const double u1 = std::abs(sn[0].v[wf.bus]);
            const double u3 = std::abs(sn[2].v[wf.bus]);
            b.var(sub_var_xi("flt", f, w), 0, 10, std::max(0.0, wf.v_trip_low - u1) + 0.05);
            b.var(sub_var_xi("fss", f, w), 0, 10, std::max(0.0, wf.v_trip_low - u2) + 0.05);
            b.var(sub_var_xi("clr", f, w), 0, 10, std::max(0.0, u3 - wf.v_trip_high) + 0.05);
        }
    }

    // --- objective: total security slack ---
    for (int w = 0; w < nw; ++w) p.add_objective_term(p.var_index(sub_var_xi_scr(w)), 1.0);
    for (int f = 0; f < nf; ++f)
        for (int w = 0; w < nw; ++w) {
            p.add_objective_term(p.var_index(sub_var_xi("flt", f, w)), 1.0);
            p.add_objective_term(p.var_index(sub_var_xi("fss", f, w)), 1.0);
            p.add_objective_term(p.var_index(sub_var_xi("clr", f, w)), 1.0);
        }

    auto vidx = [&](const std::string& name) {
        const int i = p.var_index(name);
        if (i < 0) throw ConfigError("SUB_VAR", "internal: missing variable " + name);
        return i;
    };

    // Network balance rows for one stage. Moment 0 uses prefault currents;
    // fault moments reference the per-moment machine currents and the stage's
    // wind current variables (resolved by `wind_x`/`wind_y`).
    auto network_rows = [&](const NetworkMatrices& net, int moment, int f,
                            const std::function<std::string(int)>& wind_x,
                            const std::function<std::string(int)>& wind_y) {
        const Eigen::MatrixXd g0 = net.g_block();
        const Eigen::MatrixXd b0 = net.b_block();
        for (int i = 0; i < nb; ++i) {
            LinearConstraint re, im;
            re.name = "net_re[" + std::to_string(moment) + "][" + std::to_string(f) + "][" +
                      std::to_string(i) + "]";
            im.name = "net_im[" + std::to_string(moment) + "][" + std::to_string(f) + "][" +
                      std::to_string(i) + "]";
            re.sense = im.sense = Sense::kEq;
            re.rhs = im.rhs = 0.0;
            for (int j = 0; j < nb; ++j) {
                if (g0(i, j) != 0.0) {
                    re.terms.push_back({vidx(sub_var_vx(moment, f, j)), g0(i, j)});
                    im.terms.push_back({vidx(sub_var_vy(moment, f, j)), g0(i, j)});
                }
                if (b0(i, j) != 0.0) {
                    re.terms.push_back({vidx(sub_var_vy(moment, f, j)), -b0(i, j)});
                    im.terms.push_back({vidx(sub_var_vx(moment, f, j)), b0(i, j)});
                }
            }
            for (int g = 0; g < ng; ++g)
                if (c.machines[static_cast<size_t>(g)].bus == i) {
                    re.terms.push_back({vidx(ig_x(moment, f, g)), -1.0});
                    im.terms.push_back({vidx(ig_y(moment, f, g)), -1.0});
                }
            for (int w = 0; w < nw; ++w)
                if (c.windfarms[static_cast<size_t>(w)].bus == i) {
                    re.terms.push_back({vidx(wind_x(w)), -1.0});
                    im.terms.push_back({vidx(wind_y(w)), -1.0});
                }
            p.add_linear(std::move(re));
            p.add_linear(std::move(im));
        }
    };

    // --- prefault block ---
    network_rows(net_pre, 0, 0, [&](int w) { return nm("Iwx0", w); },
                 [&](int w) { return nm("Iwy0", w); });

    for (int g = 0; g < ng; ++g) {
        const int bg = c.machines[static_cast<size_t>(g)].bus;
        const auto& m = c.machines[static_cast<size_t>(g)];
        {
            // P_g = Vx*Ix + Vy*Iy
            int r = b.qrow(nm("pg_tie", g), Sense::kEq, 0.0);
            auto& qc = p.mutable_quadratic(r);
            qc.quad.push_back({vidx(sub_var_vx(0, 0, bg)), vidx(ig_x(0, 0, g)), 1.0});
            qc.quad.push_back({vidx(sub_var_vy(0, 0, bg)), vidx(ig_y(0, 0, g)), 1.0});
            qc.lin.push_back({vidx(sub_var_pg(g)), -1.0});
        }
        {
            // Q_g = Vy*Ix - Vx*Iy
            int r = b.qrow(nm("qg_tie", g), Sense::kEq, 0.0);
            auto& qc = p.mutable_quadratic(r);
            qc.quad.push_back({vidx(sub_var_vy(0, 0, bg)), vidx(ig_x(0, 0, g)), 1.0});
            qc.quad.push_back({vidx(sub_var_vx(0, 0, bg)), vidx(ig_y(0, 0, g)), -1.0});
            qc.lin.push_back({vidx(sub_var_qg(g)), -1.0});
        }
        // Reactive capability against the commitment. An off unit gets a
        // single fixing equality instead: the inequality pair would pinch its
        // output from both sides and leave the multipliers on a degenerate ray.
        if (dispatch.y[static_cast<size_t>(g)]) {
            LinearConstraint hi, lo;
            hi.name = nm("qg_hi", g);
            hi.sense = Sense::kLe;
            hi.rhs = 0.0;
            hi.terms = {{vidx(sub_var_qg(g)), 1.0}, {vidx(sub_var_y(g)), -m.q_max}};
            lo.name = nm("qg_lo", g);
            lo.sense = Sense::kGe;
            lo.rhs = 0.0;
            lo.terms = {{vidx(sub_var_qg(g)), 1.0}, {vidx(sub_var_y(g)), -m.q_min}};
            p.add_linear(std::move(hi));
            p.add_linear(std::move(lo));
        } else {
            LinearConstraint off;
            off.name = nm("qg_off", g);
            off.sense = Sense::kEq;
            off.rhs = 0.0;
            off.terms = {{vidx(sub_var_qg(g)), 1.0}};
            p.add_linear(std::move(off));
        }
    }

    for (int w = 0; w < nw; ++w) {
        const auto& wf = c.windfarms[static_cast<size_t>(w)];
        const int bw = wf.bus;
        {
            int r = b.qrow(nm("pw_tie", w), Sense::kEq, 0.0);
            auto& qc = p.mutable_quadratic(r);
            qc.quad.push_back({vidx(sub_var_vx(0, 0, bw)), vidx(nm("Iwx0", w)), 1.0});
            qc.quad.push_back({vidx(sub_var_vy(0, 0, bw)), vidx(nm("Iwy0", w)), 1.0});
            qc.lin.push_back({vidx(sub_var_pw(w)), -1.0});
        }
        {
            int r = b.qrow(nm("qw_tie", w), Sense::kEq, 0.0);
            auto& qc = p.mutable_quadratic(r);
            qc.quad.push_back({vidx(sub_var_vy(0, 0, bw)), vidx(nm("Iwx0", w)), 1.0});
            qc.quad.push_back({vidx(sub_var_vx(0, 0, bw)), vidx(nm("Iwy0", w)), -1.0});
            qc.lin.push_back({vidx(sub_var_qw(w)), -1.0});
        }
        {
            // U0^2 = Vx^2 + Vy^2
            int r = b.qrow(nm("u0_tie", w), Sense::kEq, 0.0);
            auto& qc = p.mutable_quadratic(r);
            qc.quad.push_back({vidx(u_mag(0, 0, w)), vidx(u_mag(0, 0, w)), 1.0});
            qc.quad.push_back({vidx(sub_var_vx(0, 0, bw)), vidx(sub_var_vx(0, 0, bw)), -1.0});
            qc.quad.push_back({vidx(sub_var_vy(0, 0, bw)), vidx(sub_var_vy(0, 0, bw)), -1.0});
        }
        {
            // kappa * Id0 * U0 = P_w ; kappa * Iq0 * U0 = Q_w
            int r = b.qrow(nm("id0_tie", w), Sense::kEq, 0.0);
            auto& qc = p.mutable_quadratic(r);
            qc.quad.push_back({vidx(nm("Id0", w)), vidx(u_mag(0, 0, w)), kappa});
            qc.lin.push_back({vidx(sub_var_pw(w)), -1.0});
            int r2 = b.qrow(nm("iq0_tie", w), Sense::kEq, 0.0);
            auto& qc2 = p.mutable_quadratic(r2);
            qc2.quad.push_back({vidx(nm("Iq0", w)), vidx(u_mag(0, 0, w)), kappa});
            qc2.lin.push_back({vidx(sub_var_qw(w)), -1.0});
        }
        // Station voltage window.
        {
            LinearConstraint hi, lo;
            hi.name = nm("u0_hi", w);
            hi.sense = Sense::kLe;
            hi.rhs = c.buses[static_cast<size_t>(bw)].v_max;
            hi.terms = {{vidx(u_mag(0, 0, w)), 1.0}};
            lo.name = nm("u0_lo", w);
            lo.sense = Sense::kGe;
            lo.rhs = c.buses[static_cast<size_t>(bw)].v_min;
            lo.terms = {{vidx(u_mag(0, 0, w)), 1.0}};
            p.add_linear(std::move(hi));
            p.add_linear(std::move(lo));
        }
        {
            // Apparatus limit prefault.
            int r = b.qrow(nm("mva0", w), Sense::kLe, wf.s_max * wf.s_max);
            auto& qc = p.mutable_quadratic(r);
            qc.quad.push_back({vidx(sub_var_pw(w)), vidx(sub_var_pw(w)), 1.0});
            qc.quad.push_back({vidx(sub_var_qw(w)), vidx(sub_var_qw(w)), 1.0});
        }
    }

    // --- wind-only voltage components and the strength cone ---
    {
        const Eigen::MatrixXd g0 = net_pre.g_block();
        const Eigen::MatrixXd b0 = net_pre.b_block();
        for (int i = 0; i < nb; ++i) {
            QuadConstraint re, im;
            re.name = "vr_re[" + std::to_string(i) + "]";
            im.name = "vr_im[" + std::to_string(i) + "]";
            re.sense = im.sense = Sense::kEq;
            re.rhs = im.rhs = 0.0;
            for (int j = 0; j < nb; ++j) {
                if (g0(i, j) != 0.0) {
                    re.lin.push_back({vidx(nm("Vrx", j)), g0(i, j)});
                    im.lin.push_back({vidx(nm("Vry", j)), g0(i, j)});
                }
                if (b0(i, j) != 0.0) {
                    re.lin.push_back({vidx(nm("Vry", j)), -b0(i, j)});
                    im.lin.push_back({vidx(nm("Vrx", j)), b0(i, j)});
                }
            }
            for (int g = 0; g < ng; ++g)
                if (c.machines[static_cast<size_t>(g)].bus == i) {
                    const double inv_x = 1.0 / c.machines[static_cast<size_t>(g)].x_d_sub;
                    re.quad.push_back({vidx(sub_var_y(g)), vidx(nm("Vry", i)), inv_x});
                    im.quad.push_back({vidx(sub_var_y(g)), vidx(nm("Vrx", i)), -inv_x});
                }
            for (int w = 0; w < nw; ++w)
                if (c.windfarms[static_cast<size_t>(w)].bus == i) {
                    re.lin.push_back({vidx(nm("Iwx0", w)), -1.0});
                    im.lin.push_back({vidx(nm("Iwy0", w)), -1.0});
                }
            p.add_quadratic(std::move(re));
            p.add_quadratic(std::move(im));
        }
        for (int w = 0; w < nw; ++w) {
            const int bw = c.windfarms[static_cast<size_t>(w)].bus;
            const double vn = c.buses[static_cast<size_t>(bw)].v_nominal;
            const double cap = vn / c.mrscr_threshold;
            QuadConstraint soc;
            soc.name = nm("scr_soc", w);
            soc.sense = Sense::kLe;
            soc.rhs = cap * cap;
            soc.quad.push_back({vidx(nm("Vrx", bw)), vidx(nm("Vrx", bw)), 1.0});
            soc.quad.push_back({vidx(nm("Vry", bw)), vidx(nm("Vry", bw)), 1.0});
            soc.lin.push_back({vidx(sub_var_xi_scr(w)), -1.0});
            p.add_quadratic(std::move(soc));
        }
    }

    // --- snapshot systems per fault ---
    for (int f = 0; f < nf; ++f) {
        // Machine current definitions: x_eq*I = y*(E - V(tau)) rotated by -j,
        // with E frozen from the prefault point at the stage reactance.
        for (int m = 1; m <= 3; ++m) {
            for (int g = 0; g < ng; ++g) {
                const auto& mach = c.machines[static_cast<size_t>(g)];
                const int bg = mach.bus;
                const double x_eq = m == 1 ? mach.x_d_sub : mach.x_d_tr;
                // x_eq*Igx(m) - y*Vy0 - x_eq*y*Igx0 + y*Vy(m) = 0
                {
                    int r = b.qrow("igx_def[" + std::to_string(m) + "][" + std::to_string(f) + "][" +
                                       std::to_string(g) + "]",
                                   Sense::kEq, 0.0);
                    auto& qc = p.mutable_quadratic(r);
                    qc.lin.push_back({vidx(ig_x(m, f, g)), x_eq});
                    qc.quad.push_back({vidx(sub_var_y(g)), vidx(sub_var_vy(0, 0, bg)), -1.0});
                    qc.quad.push_back({vidx(sub_var_y(g)), vidx(ig_x(0, 0, g)), -x_eq});
                    qc.quad.push_back({vidx(sub_var_y(g)), vidx(sub_var_vy(m, f, bg)), 1.0});
                }
                // x_eq*Igy(m) + y*Vx0 - x_eq*y*Igy0 - y*Vx(m) = 0
                {
                    int r = b.qrow("igy_def[" + std::to_string(m) + "][" + std::to_string(f) + "][" +
                                       std::to_string(g) + "]",
                                   Sense::kEq, 0.0);
                    auto& qc = p.mutable_quadratic(r);
                    qc.lin.push_back({vidx(ig_y(m, f, g)), x_eq});
                    qc.quad.push_back({vidx(sub_var_y(g)), vidx(sub_var_vx(0, 0, bg)), 1.0});
                    qc.quad.push_back({vidx(sub_var_y(g)), vidx(ig_y(0, 0, g)), -x_eq});
                    qc.quad.push_back({vidx(sub_var_y(g)), vidx(sub_var_vx(m, f, bg)), -1.0});
                }
            }
            // Voltage magnitudes at wind buses.
            for (int w = 0; w < nw; ++w) {
                const int bw = c.windfarms[static_cast<size_t>(w)].bus;
                int r = b.qrow("umag[" + std::to_string(m) + "][" + std::to_string(f) + "][" +
                                   std::to_string(w) + "]",
                               Sense::kEq, 0.0);
                auto& qc = p.mutable_quadratic(r);
                qc.quad.push_back({vidx(u_mag(m, f, w)), vidx(u_mag(m, f, w)), 1.0});
                qc.quad.push_back({vidx(sub_var_vx(m, f, bw)), vidx(sub_var_vx(m, f, bw)), -1.0});
                qc.quad.push_back({vidx(sub_var_vy(m, f, bw)), vidx(sub_var_vy(m, f, bw)), -1.0});
            }
        }

        // Fault-on: frozen wind currents (phasor or realigned dq).
        if (!dq_freeze) {
            network_rows(net_flt[static_cast<size_t>(f)], 1, f,
                         [&](int w) { return nm("Iwx0", w); }, [&](int w) { return nm("Iwy0", w); });
        } else {
            network_rows(net_flt[static_cast<size_t>(f)], 1, f,
                         [&](int w) { return nm2("Iwx1", f, w); },
                         [&](int w) { return nm2("Iwy1", f, w); });
            for (int w = 0; w < nw; ++w) {
                const int bw = c.windfarms[static_cast<size_t>(w)].bus;
                int r = b.qrow(nm2("iwx1_tie", f, w), Sense::kEq, 0.0);
                auto& qc = p.mutable_quadratic(r);
                qc.quad.push_back({vidx(nm2("Iwx1", f, w)), vidx(u_mag(1, f, w)), 1.0});
                qc.quad.push_back({vidx(nm("Id0", w)), vidx(sub_var_vx(1, f, bw)), -kappa});
                qc.quad.push_back({vidx(nm("Iq0", w)), vidx(sub_var_vy(1, f, bw)), -kappa});
                int r2 = b.qrow(nm2("iwy1_tie", f, w), Sense::kEq, 0.0);
                auto& qc2 = p.mutable_quadratic(r2);
                qc2.quad.push_back({vidx(nm2("Iwy1", f, w)), vidx(u_mag(1, f, w)), 1.0});
                qc2.quad.push_back({vidx(nm("Id0", w)), vidx(sub_var_vy(1, f, bw)), -kappa});
                qc2.quad.push_back({vidx(nm("Iq0", w)), vidx(sub_var_vx(1, f, bw)), kappa});
            }
        }

        // Fault steady state: LVRT current law.
        network_rows(net_flt[static_cast<size_t>(f)], 2, f,
                     [&](int w) { return nm2("Iwx2", f, w); }, [&](int w) { return nm2("Iwy2", f, w); });
        for (int w = 0; w < nw; ++w) {
            const auto& wf = c.windfarms[static_cast<size_t>(w)];
            const int bw = wf.bus;
            {
                // Id2 = k_p * Id0
                int r = b.qrow(nm2("id2_tie", f, w), Sense::kEq, 0.0);
                auto& qc = p.mutable_quadratic(r);
                qc.lin.push_back({vidx(nm2("Id2", f, w)), 1.0});
                qc.quad.push_back({vidx(sub_var_kp(w)), vidx(nm("Id0", w)), -1.0});
            }
            {
                // Iq2 = k_q * I_N * (v_ref - U2)
                int r = b.qrow(nm2("iq2_tie", f, w), Sense::kEq, 0.0);
                auto& qc = p.mutable_quadratic(r);
                qc.lin.push_back({vidx(nm2("Iq2", f, w)), 1.0});
                qc.lin.push_back({vidx(sub_var_kq(w)), -wf.i_rated * c.lvrt_reference(wf)});
                qc.quad.push_back({vidx(sub_var_kq(w)), vidx(u_mag(2, f, w)), wf.i_rated});
            }
            {
                // Iwx2*U2 = kappa*(Id2*Vx2 + Iq2*Vy2)
                int r = b.qrow(nm2("iwx2_tie", f, w), Sense::kEq, 0.0);
                auto& qc = p.mutable_quadratic(r);
                qc.quad.push_back({vidx(nm2("Iwx2", f, w)), vidx(u_mag(2, f, w)), 1.0});
                qc.quad.push_back({vidx(nm2("Id2", f, w)), vidx(sub_var_vx(2, f, bw)), -kappa});
                qc.quad.push_back({vidx(nm2("Iq2", f, w)), vidx(sub_var_vy(2, f, bw)), -kappa});
                // Iwy2*U2 = kappa*(Id2*Vy2 - Iq2*Vx2)
                int r2 = b.qrow(nm2("iwy2_tie", f, w), Sense::kEq, 0.0);
                auto& qc2 = p.mutable_quadratic(r2);
                qc2.quad.push_back({vidx(nm2("Iwy2", f, w)), vidx(u_mag(2, f, w)), 1.0});
                qc2.quad.push_back({vidx(nm2("Id2", f, w)), vidx(sub_var_vy(2, f, bw)), -kappa});
                qc2.quad.push_back({vidx(nm2("Iq2", f, w)), vidx(sub_var_vx(2, f, bw)), kappa});
            }
            {
                // Apparatus limit at the sustained stage.
                int r = b.qrow(nm2("pw2_tie", f, w), Sense::kEq, 0.0);
                auto& qc = p.mutable_quadratic(r);
                qc.lin.push_back({vidx(nm2("Pw2", f, w)), -1.0});
                qc.quad.push_back({vidx(sub_var_vx(2, f, bw)), vidx(nm2("Iwx2", f, w)), 1.0});
                qc.quad.push_back({vidx(sub_var_vy(2, f, bw)), vidx(nm2("Iwy2", f, w)), 1.0});
                int r2 = b.qrow(nm2("qw2_tie", f, w), Sense::kEq, 0.0);
                auto& qc2 = p.mutable_quadratic(r2);
                qc2.lin.push_back({vidx(nm2("Qw2", f, w)), -1.0});
                qc2.quad.push_back({vidx(sub_var_vy(2, f, bw)), vidx(nm2("Iwx2", f, w)), 1.0});
                qc2.quad.push_back({vidx(sub_var_vx(2, f, bw)), vidx(nm2("Iwy2", f, w)), -1.0});
                int r3 = b.qrow(nm2("mva2", f, w), Sense::kLe, wf.s_max * wf.s_max);
                auto& qc3 = p.mutable_quadratic(r3);
                qc3.quad.push_back({vidx(nm2("Pw2", f, w)), vidx(nm2("Pw2", f, w)), 1.0});
                qc3.quad.push_back({vidx(nm2("Qw2", f, w)), vidx(nm2("Qw2", f, w)), 1.0});
            }
        }

        // Clearance: wind currents frozen at their fault-steady values.
        if (!dq_freeze) {
            network_rows(net_post[static_cast<size_t>(f)], 3, f,
                         [&](int w) { return nm2("Iwx2", f, w); },
                         [&](int w) { return nm2("Iwy2", f, w); });
        } else {
            network_rows(net_post[static_cast<size_t>(f)], 3, f,
                         [&](int w) { return nm2("Iwx3", f, w); },
                         [&](int w) { return nm2("Iwy3", f, w); });
            for (int w = 0; w < nw; ++w) {
                const int bw = c.windfarms[static_cast<size_t>(w)].bus;
                int r = b.qrow(nm2("iwx3_tie", f, w), Sense::kEq, 0.0);
                auto& qc = p.mutable_quadratic(r);
                qc.quad.push_back({vidx(nm2("Iwx3", f, w)), vidx(u_mag(3, f, w)), 1.0});
                qc.quad.push_back({vidx(nm2("Id2", f, w)), vidx(sub_var_vx(3, f, bw)), -kappa});
                qc.quad.push_back({vidx(nm2("Iq2", f, w)), vidx(sub_var_vy(3, f, bw)), -kappa});
                int r2 = b.qrow(nm2("iwy3_tie", f, w), Sense::kEq, 0.0);
                auto& qc2 = p.mutable_quadratic(r2);
                qc2.quad.push_back({vidx(nm2("Iwy3", f, w)), vidx(u_mag(3, f, w)), 1.0});
                qc2.quad.push_back({vidx(nm2("Id2", f, w)), vidx(sub_var_vy(3, f, bw)), -kappa});
                qc2.quad.push_back({vidx(nm2("Iq2", f, w)), vidx(sub_var_vx(3, f, bw)), kappa});
            }
        }

        // Slack-relaxed ride-through rows.
        for (int w = 0; w < nw; ++w) {
            const auto& wf = c.windfarms[static_cast<size_t>(w)];
            LinearConstraint flt, fss, clr;
            flt.name = nm2("sec_flt", f, w);
            flt.sense = Sense::kGe;
            flt.rhs = wf.v_trip_low;
            flt.terms = {{vidx(u_mag(1, f, w)), 1.0}, {vidx(sub_var_xi("flt", f, w)), 1.0}};
            fss.name = nm2("sec_fss", f, w);
            fss.sense = Sense::kGe;
            fss.rhs = wf.v_trip_low;
            fss.terms = {{vidx(u_mag(2, f, w)), 1.0}, {vidx(sub_var_xi("fss", f, w)), 1.0}};
            clr.name = nm2("sec_clr", f, w);
            clr.sense = Sense::kLe;
            clr.rhs = wf.v_trip_high;
            clr.terms = {{vidx(u_mag(3, f, w)), 1.0}, {vidx(sub_var_xi("clr", f, w)), -1.0}};
            p.add_linear(std::move(flt));
            p.add_linear(std::move(fss));
            p.add_linear(std::move(clr));
        }
    }

    // --- coupling rows (fixings carrying the decomposition multipliers) ---
    for (int g = 0; g < ng; ++g) {
        LinearConstraint lc;
        lc.name = nm("fix_y", g);
        lc.sense = Sense::kEq;
        lc.rhs = dispatch.y[static_cast<size_t>(g)];
        lc.terms = {{vidx(sub_var_y(g)), 1.0}};
        model.coupling_y.push_back(p.add_linear(std::move(lc)));
        model.anchor_y.push_back(dispatch.y[static_cast<size_t>(g)]);

        LinearConstraint lp;
        lp.name = nm("fix_pg", g);
        lp.sense = Sense::kEq;
        lp.rhs = dispatch.p_g[static_cast<size_t>(g)];
        lp.terms = {{vidx(sub_var_pg(g)), 1.0}};
        model.coupling_pg.push_back(p.add_linear(std::move(lp)));
        model.anchor_pg.push_back(dispatch.p_g[static_cast<size_t>(g)]);
    }
    for (int w = 0; w < nw; ++w) {
        LinearConstraint lw;
        lw.name = nm("fix_pw", w);
        lw.sense = Sense::kEq;
        lw.rhs = dispatch.p_w[static_cast<size_t>(w)];
        lw.terms = {{vidx(sub_var_pw(w)), 1.0}};
        model.coupling_pw.push_back(p.add_linear(std::move(lw)));
        model.anchor_pw.push_back(dispatch.p_w[static_cast<size_t>(w)]);
    }

    p.validate();
    model.warm_start = Eigen::Map<Eigen::VectorXd>(warm.data(), static_cast<long>(warm.size()));
    return model;
}

SubproblemResult solve_subproblem(const StudyCase& c, const SubproblemModel& model) {
    IpmOptions opts;
    opts.tolerance = c.options.ipm_tolerance;
    opts.max_iter = c.options.ipm_max_iter;

    Solution sol;
    try {
        sol = solve_nlp(model.problem, model.warm_start, opts);
    } catch (const Error& e) {
        throw SolverError(e.code(), "period " + std::to_string(model.period) + ": " + e.what());
    }

    const int nb = c.n_buses();
    const int ng = c.n_machines();
    const int nw = c.n_windfarms();
    const int nf = c.n_faults();
    const ProblemIR& p = model.problem;
    auto val = [&](const std::string& name) { return sol.x[p.var_index(name)]; };

    SubproblemResult r;
    r.period = model.period;
    r.status = sol.status;
    r.penalty = sol.objective;
    r.iterations = sol.iterations;

    for (int g = 0; g < ng; ++g) {
        r.lambda_y.push_back(sol.duals_linear[static_cast<size_t>(model.coupling_y[static_cast<size_t>(g)])]);
        r.lambda_pg.push_back(sol.duals_linear[static_cast<size_t>(model.coupling_pg[static_cast<size_t>(g)])]);
        r.q_g.push_back(val(sub_var_qg(g)));
    }
    for (int w = 0; w < nw; ++w) {
        r.lambda_pw.push_back(sol.duals_linear[static_cast<size_t>(model.coupling_pw[static_cast<size_t>(w)])]);
        r.q_w.push_back(val(sub_var_qw(w)));
        r.k_p.push_back(val(sub_var_kp(w)));
        r.k_q.push_back(val(sub_var_kq(w)));
        r.xi_scr.push_back(val(sub_var_xi_scr(w)));
    }
    r.prefault_v.resize(nb);
    for (int i = 0; i < nb; ++i)
        r.prefault_v[i] = Complex(val(sub_var_vx(0, 0, i)), val(sub_var_vy(0, 0, i)));

    r.xi_flt.assign(static_cast<size_t>(nf), {});
    r.xi_fss.assign(static_cast<size_t>(nf), {});
    r.xi_clr.assign(static_cast<size_t>(nf), {});
    for (int f = 0; f < nf; ++f) {
        std::array<ComplexVector, 3> sv;
        for (int m = 1; m <= 3; ++m) {
            sv[static_cast<size_t>(m - 1)].resize(nb);
            for (int i = 0; i < nb; ++i)
                sv[static_cast<size_t>(m - 1)][i] =
                    Complex(val(sub_var_vx(m, f, i)), val(sub_var_vy(m, f, i)));
        }
        r.snapshot_v.push_back(std::move(sv));
        for (int w = 0; w < nw; ++w) {
            r.xi_flt[static_cast<size_t>(f)].push_back(val(sub_var_xi("flt", f, w)));
            r.xi_fss[static_cast<size_t>(f)].push_back(val(sub_var_xi("fss", f, w)));
            r.xi_clr[static_cast<size_t>(f)].push_back(val(sub_var_xi("clr", f, w)));
        }
    }

    // Cross-validation: rebuild the frozen sources from the optimizer's own
    // prefault state and re-solve the snapshots with the standalone solver at
    // the optimized controls.
    if (nf > 0) {
        NortonSources ns;
        ns.period = model.period;
        ns.v0 = r.prefault_v;
        ns.load_conversion_v = model.conversion_v;
        ns.commitment = model.commitment;
        constexpr Complex kJ{0.0, 1.0};
        for (int g = 0; g < ng; ++g) {
            const auto& mach = c.machines[static_cast<size_t>(g)];
            Complex e_sub(0, 0), e_tr(0, 0), i_sub(0, 0), i_tr(0, 0);
            if (model.commitment[static_cast<size_t>(g)]) {
                const Complex v = r.prefault_v[mach.bus];
                const Complex cur(val(nm("Igx0", g)), val(nm("Igy0", g)));
                e_sub = v + kJ * mach.x_d_sub * cur;
                e_tr = v + kJ * mach.x_d_tr * cur;
                i_sub = e_sub / (kJ * mach.x_d_sub);
                i_tr = e_tr / (kJ * mach.x_d_tr);
            }
            ns.machine_e_sub.push_back(e_sub);
            ns.machine_e_tr.push_back(e_tr);
            ns.machine_i_sub.push_back(i_sub);
            ns.machine_i_tr.push_back(i_tr);
        }
        for (int w = 0; w < nw; ++w) {
            const int bw = c.windfarms[static_cast<size_t>(w)].bus;
            ns.wind_i0.push_back(Complex(val(nm("Iwx0", w)), val(nm("Iwy0", w))));
            ns.wind_id0.push_back(val(nm("Id0", w)));
            ns.wind_iq0.push_back(val(nm("Iq0", w)));
            ns.wind_theta0.push_back(std::arg(r.prefault_v[bw]));
        }
        WindControls wc;
        wc.k_p = r.k_p;
        wc.k_q = r.k_q;
        double worst = 0.0;
        for (int f = 0; f < nf; ++f) {
            const auto check = solve_snapshots(c, model.period, c.faults[static_cast<size_t>(f)].id, ns,
                                               model.commitment, wc);
            for (int m = 0; m < 3; ++m)
                for (int i = 0; i < nb; ++i)
                    worst = std::max(worst, std::abs(std::abs(check[static_cast<size_t>(m)].v[i]) -
                                                     std::abs(r.snapshot_v[static_cast<size_t>(f)]
                                                                          [static_cast<size_t>(m)][i])));
        }
        r.snapshot_crosscheck_error = worst;
    }
    return r;
}

BendersCut make_benders_cut(const SubproblemResult& r, const Schedule& anchor, int iteration) {
    BendersCut cut;
    cut.anchor_iteration = iteration;
    cut.period = r.period;
    cut.po = r.penalty;
    const size_t t = static_cast<size_t>(r.period);
    for (size_t g = 0; g < r.lambda_y.size(); ++g) {
        cut.terms.push_back({BendersCut::VarKind::kCommit, r.period, static_cast<int>(g),
                             r.lambda_y[g], static_cast<double>(anchor.y[t][g])});
        cut.terms.push_back({BendersCut::VarKind::kMachineP, r.period, static_cast<int>(g),
                             r.lambda_pg[g], anchor.p_g[t][g]});
    }
    for (size_t w = 0; w < r.lambda_pw.size(); ++w)
        cut.terms.push_back({BendersCut::VarKind::kWindP, r.period, static_cast<int>(w),
                             r.lambda_pw[w], anchor.p_w[t][w]});
    return cut;
}

std::string subproblem_result_csv(const SubproblemResult& r) {
    std::ostringstream os;
    os.precision(10);
    os << "period,po,wf,k_p,k_q,q_w,xi_scr\n";
    for (size_t w = 0; w < r.k_p.size(); ++w)
        os << r.period << "," << r.penalty << "," << w << "," << r.k_p[w] << "," << r.k_q[w] << ","
           << r.q_w[w] << "," << r.xi_scr[w] << "\n";
    return os.str();
}

std::vector<std::pair<std::string, std::string>> subproblem_symbols() {
    return {
        {"y_g", "y[g] (fixed by fix_y)"},
        {"P_g", "P_g[g] (fixed by fix_pg)"},
        {"Q_g", "Q_g[g]"},
        {"P_w", "P_w[w] (fixed by fix_pw)"},
        {"Q_w", "Q_w[w]"},
        {"k_p", "k_p[w]"},
        {"k_q", "k_q[w]"},
        {"V", "Vx0/Vy0, Vx1..Vx3"},
        {"I", "Igx*/Igy*, Iwx*/Iwy*"},
        {"xi", "xi_scr, xi_flt, xi_fss, xi_clr"},
        {"lambda", "duals of fix_y/fix_pg/fix_pw"},
    };
}

}  // namespace svsc
