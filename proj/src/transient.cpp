#include "svsc/transient.hpp"

#include <cmath>
#include <sstream>

#include "svsc/errors.hpp"

namespace svsc {

namespace {

constexpr Complex kJ{0.0, 1.0};

bool committed(const std::vector<int>& y, size_t g) { return g >= y.size() || y[g] != 0; }

// Direction of a voltage phasor; falls back to the given angle when the
// magnitude vanishes (bolted fault at the terminal).
Complex direction(Complex v, double fallback_angle) {
    const double m = std::abs(v);
    if (m < 1e-12) return std::polar(1.0, fallback_angle);
    return v / m;
}

}  // namespace

WindControls WindControls::midpoint(const StudyCase& c) {
    WindControls wc;
    for (const auto& wf : c.windfarms) {
        wc.k_p.push_back(0.5 * (wf.kp_min + wf.kp_max));
        wc.k_q.push_back(0.5 * (wf.kq_min + wf.kq_max));
    }
    return wc;
}

NortonSources compute_norton_sources(const StudyCase& c, int period, const PrefaultState& prefault) {
    NortonSources ns;
    ns.period = period;
    ns.v0 = prefault.v;
    ns.load_conversion_v = prefault.v;
    ns.commitment = prefault.commitment;
    const double kappa = c.options.kappa_dq;

    for (size_t g = 0; g < c.machines.size(); ++g) {
        const auto& m = c.machines[g];
        Complex e_sub(0, 0), e_tr(0, 0), i_sub(0, 0), i_tr(0, 0);
        if (committed(prefault.commitment, g)) {
            const Complex v = prefault.v[m.bus];
            if (std::abs(v) < 1e-9)
                throw NumericsError("DEGENERATE_PREFAULT", "machine " + std::to_string(g) +
                                                               " has zero terminal voltage prefault");
            const Complex i = prefault.machine_current[g];
            e_sub = v + kJ * m.x_d_sub * i;
            e_tr = v + kJ * m.x_d_tr * i;
            i_sub = e_sub / (kJ * m.x_d_sub);
            i_tr = e_tr / (kJ * m.x_d_tr);
        }
        ns.machine_e_sub.push_back(e_sub);
        ns.machine_e_tr.push_back(e_tr);
        ns.machine_i_sub.push_back(i_sub);
        ns.machine_i_tr.push_back(i_tr);
    }

    for (size_t w = 0; w < c.windfarms.size(); ++w) {
        const auto& wf = c.windfarms[w];
        const Complex v = prefault.v[wf.bus];
        if (std::abs(v) < 1e-9)
            throw NumericsError("DEGENERATE_PREFAULT",
                                "wind farm " + std::to_string(w) + " has zero terminal voltage prefault");
        const double theta = std::arg(v);
        const Complex i = prefault.wind_current[w];
        const Complex i_dq = i * std::polar(1.0, -theta);  // kappa*(Id - j Iq)
        ns.wind_i0.push_back(i);
        ns.wind_id0.push_back(i_dq.real() / kappa);
        ns.wind_iq0.push_back(-i_dq.imag() / kappa);
        ns.wind_theta0.push_back(theta);
    }
    return ns;
}

namespace {

struct StageContext {
    const StudyCase& c;
    const NortonSources& ns;
    const std::vector<int>& y;
    NetworkMatrices net;
    MachineModel model;
};

// Finishes a snapshot: machine terminal currents from their Norton equivalents
// at the solved voltages, device powers from S = V * conj(I).
Snapshot finalize(const StageContext& ctx, Moment moment, const std::string& sid, int period,
                  const ComplexVector& v, const std::vector<Complex>& wind_currents, int fp_iters) {
    Snapshot s;
    s.moment = moment;
    s.scenario_id = sid;
    s.period = period;
    s.v = v;
    s.fp_iterations = fp_iters;
    const auto& c = ctx.c;
    for (size_t g = 0; g < c.machines.size(); ++g) {
        Complex i(0, 0);
        if (committed(ctx.y, g)) {
            const auto& m = c.machines[g];
            const double x_eq = ctx.model == MachineModel::kSubtransient ? m.x_d_sub : m.x_d_tr;
            const Complex i_eq = ctx.model == MachineModel::kSubtransient ? ctx.ns.machine_i_sub[g]
                                                                          : ctx.ns.machine_i_tr[g];
            i = i_eq - v[m.bus] / (kJ * x_eq);
        }
        s.machine_current.push_back(i);
        const Complex sp = v[c.machines[g].bus] * std::conj(i);
        s.machine_p.push_back(sp.real());
        s.machine_q.push_back(sp.imag());
    }
    for (size_t w = 0; w < c.windfarms.size(); ++w) {
        const Complex i = wind_currents[w];
        s.wind_current.push_back(i);
        const Complex sp = v[c.windfarms[w].bus] * std::conj(i);
        s.wind_p.push_back(sp.real());
        s.wind_q.push_back(sp.imag());
    }
    return s;
}

ComplexVector machine_injections(const StageContext& ctx) {
    ComplexVector inj = ComplexVector::Zero(ctx.c.n_buses());
    for (size_t g = 0; g < ctx.c.machines.size(); ++g) {
        if (!committed(ctx.y, g)) continue;
        inj[ctx.c.machines[g].bus] += ctx.model == MachineModel::kSubtransient ? ctx.ns.machine_i_sub[g]
                                                                               : ctx.ns.machine_i_tr[g];
    }
    return inj;
}

// Solves the stage network for wind currents that depend on the solved
// voltages. `law` maps bus voltages to per-wind-farm current phasors. Damped
// Picard first, then a small Newton on the wind currents.
template <typename Law>
ComplexVector solve_wind_fixed_point(const StageContext& ctx, const ComplexVector& v_init, Law law,
                                     std::vector<Complex>& wind_out, int& iters_out) {
    const auto& c = ctx.c;
    const int nw = c.n_windfarms();
    const double tol = c.options.fixed_point_tolerance;
    const ComplexVector base = machine_injections(ctx);

    auto network_solve = [&](const std::vector<Complex>& iw) {
        ComplexVector inj = base;
        for (int w = 0; w < nw; ++w) inj[c.windfarms[static_cast<size_t>(w)].bus] += iw[static_cast<size_t>(w)];
        return solve_linear_network(ctx.net, inj);
    };

    ComplexVector v = v_init;
    std::vector<Complex> iw(static_cast<size_t>(nw), Complex(0, 0));
    int iter = 0;
    for (; iter < 20; ++iter) {
        iw = law(v);
        ComplexVector v_next = network_solve(iw);
        const double dv = (v_next - v).lpNorm<Eigen::Infinity>();
        v = v + 0.5 * (v_next - v);
        if (dv <= tol) {
            iw = law(v);
            v = network_solve(iw);
            wind_out = iw;
            iters_out = iter + 1;
            return v;
        }
    }

    // Damped Newton on the wind current components with a finite-difference
    // Jacobian. Behind a near-bolted fault the problem carries an almost
    // neutral rotation mode (the wind pocket loses its phase anchor), so the
    // Jacobian can be close to singular: a Levenberg shift plus backtracking
    // keeps the iteration contained.
    Eigen::VectorXd u(2 * nw);
    for (int w = 0; w < nw; ++w) {
        u[2 * w] = iw[static_cast<size_t>(w)].real();
        u[2 * w + 1] = iw[static_cast<size_t>(w)].imag();
    }
    auto residual = [&](const Eigen::VectorXd& x) {
        std::vector<Complex> cur(static_cast<size_t>(nw));
        for (int w = 0; w < nw; ++w) cur[static_cast<size_t>(w)] = Complex(x[2 * w], x[2 * w + 1]);
        ComplexVector vv = network_solve(cur);
        std::vector<Complex> want = law(vv);
        Eigen::VectorXd r(2 * nw);
        for (int w = 0; w < nw; ++w) {
            const Complex d = cur[static_cast<size_t>(w)] - want[static_cast<size_t>(w)];
            r[2 * w] = d.real();
            r[2 * w + 1] = d.imag();
        }
        return r;
    };

    double lev = 1e-10;
    Eigen::VectorXd r = residual(u);
    double rn = r.norm();
    for (; iter < 100; ++iter) {
        if (r.lpNorm<Eigen::Infinity>() <= tol) {
            for (int w = 0; w < nw; ++w) iw[static_cast<size_t>(w)] = Complex(u[2 * w], u[2 * w + 1]);
            wind_out = iw;
            iters_out = iter + 1;
            return network_solve(iw);
        }
        Eigen::MatrixXd jac(2 * nw, 2 * nw);
        const double h = 1e-7;
        for (int k = 0; k < 2 * nw; ++k) {
            Eigen::VectorXd up = u;
            up[k] += h;
            jac.col(k) = (residual(up) - r) / h;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        bool improved = false;
        for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
            Eigen::MatrixXd m = jtj + lev * Eigen::MatrixXd::Identity(2 * nw, 2 * nw);
            Eigen::VectorXd du = m.ldlt().solve(-jtr);
            if (du.allFinite()) {
                double alpha = 1.0;
                for (int ls = 0; ls < 6 && !improved; ++ls) {
                    Eigen::VectorXd u_try = u + alpha * du;
                    Eigen::VectorXd r_try = residual(u_try);
                    if (r_try.norm() < rn * (1.0 - 1e-4 * alpha)) {
                        u = u_try;
                        r = r_try;
                        rn = r.norm();
                        improved = true;
                        lev = std::max(1e-12, lev / 3.0);
                    }
                    alpha *= 0.5;
                }
            }
            if (!improved) lev = std::min(1e6, std::max(1e-8, lev * 10.0));
        }
        if (!improved) break;
    }
    throw NumericsError("FP_DIVERGED", "fault-steady fixed point did not converge in 100 iterations "
                                       "(last residual " +
                                           std::to_string(rn) + ")");
}

}  // namespace

Snapshot snapshot_fault_occurrence(const StudyCase& c, int period, const std::string& scenario_id,
                                   const NortonSources& sources, const std::vector<int>& commitment,
                                   const WindControls& controls) {
    (void)controls;
    StageContext ctx{c, sources, commitment,
                     build_admittance(c, period, Stage::kDuringFault, scenario_id,
                                      MachineModel::kSubtransient, commitment,
                                      sources.load_conversion_v.size() ? sources.load_conversion_v
                                                                       : sources.v0),
                     MachineModel::kSubtransient};

    const int nw = c.n_windfarms();
    const double kappa = c.options.kappa_dq;
    std::vector<Complex> wind(static_cast<size_t>(nw));
    int iters = 0;
    ComplexVector v;
    if (!c.options.wind_freeze_dq) {
        // Frozen phasor: one linear solve.
        ComplexVector inj = machine_injections(ctx);
        for (int w = 0; w < nw; ++w) {
            wind[static_cast<size_t>(w)] = sources.wind_i0[static_cast<size_t>(w)];
            inj[c.windfarms[static_cast<size_t>(w)].bus] += wind[static_cast<size_t>(w)];
        }
        v = solve_linear_network(ctx.net, inj);
    } else {
        // Frozen dq components re-aligned to the instantaneous voltage angle.
        auto law = [&](const ComplexVector& vv) {
            std::vector<Complex> out(static_cast<size_t>(nw));
            for (int w = 0; w < nw; ++w) {
                const auto& wf = c.windfarms[static_cast<size_t>(w)];
                const Complex dir = direction(vv[wf.bus], sources.wind_theta0[static_cast<size_t>(w)]);
                out[static_cast<size_t>(w)] =
                    kappa *
                    Complex(sources.wind_id0[static_cast<size_t>(w)], -sources.wind_iq0[static_cast<size_t>(w)]) *
                    dir;
            }
            return out;
        };
        v = solve_wind_fixed_point(ctx, sources.v0, law, wind, iters);
    }
    return finalize(ctx, Moment::kFaultOn, scenario_id, period, v, wind, iters);
}

Snapshot snapshot_fault_steady(const StudyCase& c, int period, const std::string& scenario_id,
                               const NortonSources& sources, const std::vector<int>& commitment,
                               const WindControls& controls) {
    StageContext ctx{c, sources, commitment,
                     build_admittance(c, period, Stage::kDuringFault, scenario_id, MachineModel::kTransient,
                                      commitment,
                                      sources.load_conversion_v.size() ? sources.load_conversion_v
                                                                       : sources.v0),
                     MachineModel::kTransient};

    const int nw = c.n_windfarms();
    const double kappa = c.options.kappa_dq;
    auto law = [&](const ComplexVector& vv) {
        std::vector<Complex> out(static_cast<size_t>(nw));
        for (int w = 0; w < nw; ++w) {
            const auto& wf = c.windfarms[static_cast<size_t>(w)];
            const Complex vw = vv[wf.bus];
            const double u = std::abs(vw);
            const Complex dir = direction(vw, sources.wind_theta0[static_cast<size_t>(w)]);
            const double id = controls.k_p[static_cast<size_t>(w)] * sources.wind_id0[static_cast<size_t>(w)];
            const double iq =
                controls.k_q[static_cast<size_t>(w)] * wf.i_rated * (c.lvrt_reference(wf) - u);
            out[static_cast<size_t>(w)] = kappa * Complex(id, -iq) * dir;
        }
        return out;
    };

    std::vector<Complex> wind;
    int iters = 0;
    ComplexVector v = solve_wind_fixed_point(ctx, sources.v0, law, wind, iters);
    return finalize(ctx, Moment::kFaultSteady, scenario_id, period, v, wind, iters);
}

Snapshot snapshot_fault_clearance(const StudyCase& c, int period, const std::string& scenario_id,
                                  const NortonSources& sources, const Snapshot& steady) {
    if (steady.moment != Moment::kFaultSteady || steady.scenario_id != scenario_id ||
        steady.period != period)
        throw ConfigError("SNAP_PROVENANCE",
                          "clearance snapshot requires the fault-steady snapshot of the same (period, fault)");

    StageContext ctx{c, sources, sources.commitment,
                     build_admittance(c, period, Stage::kPostfault, scenario_id, MachineModel::kTransient,
                                      sources.commitment,
                                      sources.load_conversion_v.size() ? sources.load_conversion_v
                                                                       : sources.v0),
                     MachineModel::kTransient};

    const int nw = c.n_windfarms();
    const double kappa = c.options.kappa_dq;
    std::vector<Complex> wind(static_cast<size_t>(nw));
    int iters = 0;
    ComplexVector v;
    if (!c.options.wind_freeze_dq) {
        ComplexVector inj = machine_injections(ctx);
        for (int w = 0; w < nw; ++w) {
            wind[static_cast<size_t>(w)] = steady.wind_current[static_cast<size_t>(w)];
            inj[c.windfarms[static_cast<size_t>(w)].bus] += wind[static_cast<size_t>(w)];
        }
        v = solve_linear_network(ctx.net, inj);
    } else {
        // Carry the fault-steady dq components into the new voltage frame.
        std::vector<double> id2(static_cast<size_t>(nw)), iq2(static_cast<size_t>(nw)), th2(static_cast<size_t>(nw));
        for (int w = 0; w < nw; ++w) {
            const auto& wf = c.windfarms[static_cast<size_t>(w)];
            const Complex v2 = steady.v[wf.bus];
            th2[static_cast<size_t>(w)] = std::abs(v2) > 1e-12 ? std::arg(v2)
                                                               : sources.wind_theta0[static_cast<size_t>(w)];
            const Complex dq = steady.wind_current[static_cast<size_t>(w)] *
                               std::polar(1.0, -th2[static_cast<size_t>(w)]);
            id2[static_cast<size_t>(w)] = dq.real() / kappa;
            iq2[static_cast<size_t>(w)] = -dq.imag() / kappa;
        }
        auto law = [&](const ComplexVector& vv) {
            std::vector<Complex> out(static_cast<size_t>(nw));
            for (int w = 0; w < nw; ++w) {
                const auto& wf = c.windfarms[static_cast<size_t>(w)];
                const Complex dir = direction(vv[wf.bus], th2[static_cast<size_t>(w)]);
                out[static_cast<size_t>(w)] =
                    kappa * Complex(id2[static_cast<size_t>(w)], -iq2[static_cast<size_t>(w)]) * dir;
            }
            return out;
        };
        v = solve_wind_fixed_point(ctx, steady.v, law, wind, iters);
    }
    return finalize(ctx, Moment::kFaultCleared, scenario_id, period, v, wind, iters);
}

std::array<Snapshot, 3> solve_snapshots(const StudyCase& c, int period, const std::string& scenario_id,
                                        const NortonSources& sources, const std::vector<int>& commitment,
                                        const WindControls& controls) {
    Snapshot s1 = snapshot_fault_occurrence(c, period, scenario_id, sources, commitment, controls);
    Snapshot s2 = snapshot_fault_steady(c, period, scenario_id, sources, commitment, controls);
    Snapshot s3 = snapshot_fault_clearance(c, period, scenario_id, sources, s2);
    return {std::move(s1), std::move(s2), std::move(s3)};
}

TwoBusVoltages two_bus_analytic(double v_g, double x_g, double x_l, double x_w, int n_w, double k_q,
                                double i_n, double v_lvrt_th) {
    // Thevenin seen from the wind terminal during a solid midpoint fault on one
    // circuit of the double line.
    const double v_th = v_g * x_l / (8.0 * x_g + 3.0 * x_l);
    const double x_th = x_l * (3.0 * x_g + x_l) / (8.0 * x_g + 3.0 * x_l);
    const double denom = 1.0 + i_n * k_q * (n_w * x_th + x_w);

    TwoBusVoltages out;
    out.v_flt = v_lvrt_th - (v_lvrt_th - v_th) / denom;
    // Sustained reactive current per wind farm at the fault steady state.
    const double i_w = i_n * k_q * (v_lvrt_th - v_th) / denom;
    out.v_clr = v_g + i_w * (n_w * (x_g + 0.5 * x_l) + x_w);
    return out;
}

SecurityReport check_ride_through(const std::array<Snapshot, 3>& snaps, const StudyCase& c) {
    const Snapshot& s1 = snaps[0];
    const Snapshot& s2 = snaps[1];
    const Snapshot& s3 = snaps[2];
    if (s1.scenario_id != s2.scenario_id || s2.scenario_id != s3.scenario_id ||
        s1.period != s2.period || s2.period != s3.period)
        throw ConfigError("SNAP_PROVENANCE", "snapshots belong to different (period, fault) pairs");

    SecurityReport rep;
    rep.scenario_id = s1.scenario_id;
    rep.period = s1.period;
    rep.secure = true;
    for (size_t w = 0; w < c.windfarms.size(); ++w) {
        const auto& wf = c.windfarms[w];
        WindSecurity ws;
        ws.windfarm = static_cast<int>(w);
        ws.v_flt = std::abs(s1.v[wf.bus]);
        ws.v_fss = std::abs(s2.v[wf.bus]);
        ws.v_clr = std::abs(s3.v[wf.bus]);
        ws.margin_flt = ws.v_flt - wf.v_trip_low;
        ws.margin_fss = ws.v_fss - wf.v_trip_low;
        ws.margin_clr = wf.v_trip_high - ws.v_clr;
        ws.secure = ws.margin_flt >= 0 && ws.margin_fss >= 0 && ws.margin_clr >= 0;
        rep.secure = rep.secure && ws.secure;
        rep.per_windfarm.push_back(ws);
    }
    return rep;
}

std::string dump_snapshot(const Snapshot& s, const StudyCase& c) {
    std::ostringstream os;
    os.precision(10);
    const char* name = s.moment == Moment::kFaultOn        ? "fault_on"
                       : s.moment == Moment::kFaultSteady ? "fault_steady"
                                                          : "fault_cleared";
    os << "# moment=" << name << " fault=" << s.scenario_id << " period=" << s.period << "\n";
    os << "# bus |V| angle_rad\n";
    for (int i = 0; i < s.v.size(); ++i)
        os << i << " " << std::abs(s.v[i]) << " " << std::arg(s.v[i]) << "\n";
    os << "# machine P Q\n";
    for (size_t g = 0; g < c.machines.size(); ++g)
        os << g << " " << s.machine_p[g] << " " << s.machine_q[g] << "\n";
    os << "# windfarm P Q\n";
    for (size_t w = 0; w < c.windfarms.size(); ++w)
        os << w << " " << s.wind_p[w] << " " << s.wind_q[w] << "\n";
    return os.str();
}

}  // namespace svsc
