#include "svsc/mrscr.hpp"

#include <cmath>
#include <sstream>

#include "svsc/errors.hpp"

namespace svsc {

bool MrscrReport::all_above_threshold() const {
    for (const auto& e : per_windfarm)
        if (!e.infinite && e.value < threshold) return false;
    return true;
}

MrscrReport evaluate_mrscr_impedance(const std::map<int, ComplexVector>& z_rows, const ComplexVector& v,
                                     const std::vector<double>& wind_p, const StudyCase& c) {
    if (wind_p.size() != c.windfarms.size())
        throw ConfigError("MRSCR_DIM", "wind power vector does not match wind farm count");
    MrscrReport rep;
    rep.threshold = c.mrscr_threshold;
    for (size_t w = 0; w < c.windfarms.size(); ++w) {
        const int bw = c.windfarms[w].bus;
        const auto it = z_rows.find(bw);
        if (it == z_rows.end())
            throw ConfigError("MRSCR_DIM", "impedance rows missing wind bus " + std::to_string(bw));
        const ComplexVector& zrow = it->second;
        const Complex zww = zrow[bw];
        if (std::abs(zww) < 1e-12)
            throw NumericsError("MRSCR_DEGENERATE", "zero self-impedance at bus " + std::to_string(bw));
        const double vn = c.buses[static_cast<size_t>(bw)].v_nominal;
        const Complex vw = v[bw];
        if (std::abs(vw) < 1e-9)
            throw NumericsError("MRSCR_DEGENERATE", "zero voltage at wind bus " + std::to_string(bw));

        double denom = 0.0;
        for (size_t j = 0; j < c.windfarms.size(); ++j) {
            const int bj = c.windfarms[j].bus;
            const Complex vj = v[bj];
            if (std::abs(vj) < 1e-9)
                throw NumericsError("MRSCR_DEGENERATE", "zero voltage at wind bus " + std::to_string(bj));
            denom += std::abs(zrow[bj] * vw / (zww * vj)) * wind_p[j];
        }
        MrscrEntry e;
        e.windfarm = static_cast<int>(w);
        e.scc_proxy = vn * vn / std::abs(zww);
        const double numer = std::abs(vn * vw / zww);
        if (denom <= 1e-12) {
            e.infinite = true;
            e.value = std::numeric_limits<double>::infinity();
            e.margin = e.value;
        } else {
            e.value = numer / denom;
            e.margin = e.value - rep.threshold;
        }
        rep.per_windfarm.push_back(e);
    }
    return rep;
}

MrscrReport evaluate_mrscr_equivalent(const StudyCase& c, int period, const std::vector<int>& commitment,
                                      const std::vector<Complex>& wind_currents,
                                      const ComplexVector& load_voltages) {
    if (wind_currents.size() != c.windfarms.size())
        throw ConfigError("MRSCR_DIM", "wind current vector does not match wind farm count");
    NetworkMatrices net;
    try {
        net = build_admittance(c, period, Stage::kPrefault, "", MachineModel::kSubtransient, commitment,
                               load_voltages);
    } catch (const NumericsError&) {
        throw NumericsError("NET_ZERO_STRENGTH",
                            "network has no strength source under this commitment");
    }

    ComplexVector inj = ComplexVector::Zero(c.n_buses());
    for (size_t w = 0; w < c.windfarms.size(); ++w) inj[c.windfarms[w].bus] += wind_currents[w];
    const ComplexVector v_r = solve_linear_network(net, inj);

    std::vector<int> wind_buses;
    for (const auto& wf : c.windfarms) wind_buses.push_back(wf.bus);
    const auto zr = impedance_rows(net, wind_buses);

    MrscrReport rep;
    rep.threshold = c.mrscr_threshold;
    for (size_t w = 0; w < c.windfarms.size(); ++w) {
        const int bw = c.windfarms[w].bus;
        const double vn = c.buses[static_cast<size_t>(bw)].v_nominal;
        MrscrEntry e;
        e.windfarm = static_cast<int>(w);
        e.scc_proxy = vn * vn / std::abs(zr.at(bw)[bw]);
        const double vr = std::abs(v_r[bw]);
        if (vr <= 1e-12) {
            e.infinite = true;
            e.value = std::numeric_limits<double>::infinity();
            e.margin = e.value;
        } else {
            e.value = vn / vr;
            e.margin = e.value - rep.threshold;
        }
        rep.per_windfarm.push_back(e);
    }
    return rep;
}

// ---------------------------------------------------------------------------

namespace {
std::string idx3(const char* base, int a, int b, int k) {
    std::ostringstream os;
    os << base << "[" << a << "][" << b << "][" << k << "]";
    return os.str();
}
std::string idx2(const char* base, int a, int b) {
    std::ostringstream os;
    os << base << "[" << a << "][" << b << "]";
    return os.str();
}
}  // namespace

std::string master_var_y(int t, int g) { return idx2("y", t, g); }
std::string mrscr_var_zr(int t, int w, int k) { return idx3("Zr", t, w, k); }
std::string mrscr_var_zi(int t, int w, int k) { return idx3("Zi", t, w, k); }
std::string mrscr_var_zeta(int t, int w, int j) { return idx3("zeta", t, w, j); }
std::string mrscr_var_vr(int t, int w, int g) { return idx3("vzr", t, w, g); }
std::string mrscr_var_vi(int t, int w, int g) { return idx3("vzi", t, w, g); }
std::string mrscr_var_bit(int t, int j, int n) { return idx3("cbit", t, j, n); }
std::string mrscr_var_prod(int t, int w, int j, int n) {
    std::ostringstream os;
    os << "zprod[" << t << "][" << w << "][" << j << "][" << n << "]";
    return os.str();
}

double curtail_step(const StudyCase& c, int t, int j) {
    const int n = c.options.curtail_bits;
    const double pre = c.windfarms[static_cast<size_t>(j)].p_forecast[static_cast<size_t>(t)];
    return pre / (std::pow(2.0, n) - 1.0);
}

RelaxedMrscrBlock relaxed_mrscr_rows(const StudyCase& c, int t) {
    const int nb = c.n_buses();
    const int ng = c.n_machines();
    const int nw = c.n_windfarms();
    const int nbits = c.options.curtail_bits;
    if (nbits < 1) throw ConfigError("MRSCR_BITS", "curtail_bits must be >= 1");
    const double big_m = c.options.big_m_z;

    // The fixed network part: branches, bus shunts and flat-voltage load
    // admittances. Machine shunts enter through the switched rows below.
    NetworkMatrices base = build_admittance(c, t, Stage::kPrefault, "", MachineModel::kNone, {});
    const Eigen::MatrixXd g0 = base.g_block();
    const Eigen::MatrixXd b0 = base.b_block();

    // Big-M sanity: the impedance magnitudes reachable at the commitment
    // extremes must fit under the configured bound.
    std::vector<int> wind_buses;
    for (const auto& wf : c.windfarms) wind_buses.push_back(wf.bus);
    for (int all_on = 0; all_on <= 1; ++all_on) {
        std::vector<int> y(static_cast<size_t>(ng), all_on);
        try {
            NetworkMatrices net = build_admittance(c, t, Stage::kPrefault, "",
                                                   MachineModel::kSubtransient, y);
            const auto rows = impedance_rows(net, wind_buses);
            for (const auto& [bus, row] : rows) {
                const double worst =
                    std::max(row.real().cwiseAbs().maxCoeff(), row.imag().cwiseAbs().maxCoeff());
                if (worst > big_m)
                    throw ConfigError("BIGM_TOO_SMALL",
                                      "big_m_z=" + std::to_string(big_m) +
                                          " does not bound sampled |Z| entry " + std::to_string(worst));
            }
        } catch (const NumericsError&) {
            // All-off network may legitimately be singular; the switched rows
            // then never activate that commitment anyway.
        }
    }

    RelaxedMrscrBlock blk;
    blk.period = t;

    auto decl = [&](const std::string& name, double lb, double ub, VarKind kind, bool ext = false) {
        blk.vars.push_back({name, lb, ub, kind, ext});
    };

    for (int g = 0; g < ng; ++g) decl(master_var_y(t, g), 0, 1, VarKind::kBinary, true);
    for (int w = 0; w < nw; ++w) {
        for (int k = 0; k < nb; ++k) {
            decl(mrscr_var_zr(t, w, k), -big_m, big_m, VarKind::kContinuous);
            decl(mrscr_var_zi(t, w, k), -big_m, big_m, VarKind::kContinuous);
        }
        for (int j = 0; j < nw; ++j) decl(mrscr_var_zeta(t, w, j), 0, 2 * big_m, VarKind::kContinuous);
        for (int g = 0; g < ng; ++g) {
            decl(mrscr_var_vr(t, w, g), -big_m, big_m, VarKind::kContinuous);
            decl(mrscr_var_vi(t, w, g), -big_m, big_m, VarKind::kContinuous);
        }
    }
    for (int j = 0; j < nw; ++j)
        for (int n = 0; n < nbits; ++n) decl(mrscr_var_bit(t, j, n), 0, 1, VarKind::kBinary);
    for (int w = 0; w < nw; ++w)
        for (int j = 0; j < nw; ++j)
            for (int n = 0; n < nbits; ++n)
                decl(mrscr_var_prod(t, w, j, n), -2 * big_m, 2 * big_m, VarKind::kContinuous);

    auto row = [&](std::string name, Sense s, double rhs) {
        NamedRow r;
        r.name = std::move(name);
        r.sense = s;
        r.rhs = rhs;
        blk.rows.push_back(std::move(r));
        return &blk.rows.back();
    };

    // Impedance-definition rows: (Zr + j Zi) (Y0 + j diag(y/x'')) = I on the
    // wind rows, split into real and imaginary parts, with the commitment
    // switch on the machine-shunt entries replaced by Big-M activations.
    for (int w = 0; w < nw; ++w) {
        const int bw = c.windfarms[static_cast<size_t>(w)].bus;
        for (int col = 0; col < nb; ++col) {
            NamedRow* re = row("zdef_re[" + std::to_string(t) + "][" + std::to_string(w) + "][" +
                                   std::to_string(col) + "]",
                               Sense::kEq, col == bw ? 1.0 : 0.0);
            for (int k = 0; k < nb; ++k) {
                if (g0(k, col) != 0.0) re->terms.push_back({mrscr_var_zr(t, w, k), g0(k, col)});
                if (b0(k, col) != 0.0) re->terms.push_back({mrscr_var_zi(t, w, k), -b0(k, col)});
            }
            for (int g = 0; g < ng; ++g)
                if (c.machines[static_cast<size_t>(g)].bus == col)
                    re->terms.push_back(
                        {mrscr_var_vi(t, w, g), 1.0 / c.machines[static_cast<size_t>(g)].x_d_sub});

            NamedRow* im = row("zdef_im[" + std::to_string(t) + "][" + std::to_string(w) + "][" +
                                   std::to_string(col) + "]",
                               Sense::kEq, 0.0);
            for (int k = 0; k < nb; ++k) {
                if (b0(k, col) != 0.0) im->terms.push_back({mrscr_var_zr(t, w, k), b0(k, col)});
                if (g0(k, col) != 0.0) im->terms.push_back({mrscr_var_zi(t, w, k), g0(k, col)});
            }
            for (int g = 0; g < ng; ++g)
                if (c.machines[static_cast<size_t>(g)].bus == col)
                    im->terms.push_back(
                        {mrscr_var_vr(t, w, g), -1.0 / c.machines[static_cast<size_t>(g)].x_d_sub});
        }

        // Commitment switch: v = y * Z_wg componentwise.
        for (int g = 0; g < ng; ++g) {
            const int bg = c.machines[static_cast<size_t>(g)].bus;
            const std::string yname = master_var_y(t, g);
            auto switch_rows = [&](const std::string& vname, const std::string& zname, const char* tag) {
                const std::string base_name = std::string(tag) + "[" + std::to_string(t) + "][" +
                                              std::to_string(w) + "][" + std::to_string(g) + "]";
                NamedRow* r1 = row(base_name + "_a", Sense::kLe, big_m);
                r1->terms = {{vname, 1.0}, {zname, -1.0}, {yname, big_m}};
                NamedRow* r2 = row(base_name + "_b", Sense::kLe, big_m);
                r2->terms = {{vname, -1.0}, {zname, 1.0}, {yname, big_m}};
                NamedRow* r3 = row(base_name + "_c", Sense::kLe, 0.0);
                r3->terms = {{vname, 1.0}, {yname, -big_m}};
                NamedRow* r4 = row(base_name + "_d", Sense::kLe, 0.0);
                r4->terms = {{vname, -1.0}, {yname, -big_m}};
            };
            switch_rows(mrscr_var_vr(t, w, g), mrscr_var_zr(t, w, bg), "zswr");
            switch_rows(mrscr_var_vi(t, w, g), mrscr_var_zi(t, w, bg), "zswi");
        }

        // One-norm magnitude surrogate for the coupled entries.
        for (int j = 0; j < nw; ++j) {
            const int bj = c.windfarms[static_cast<size_t>(j)].bus;
            for (int sr = 0; sr < 2; ++sr)
                for (int si = 0; si < 2; ++si) {
                    NamedRow* r = row("zabs[" + std::to_string(t) + "][" + std::to_string(w) + "][" +
                                          std::to_string(j) + "]_" + std::to_string(sr) +
                                          std::to_string(si),
                                      Sense::kGe, 0.0);
                    r->terms = {{mrscr_var_zeta(t, w, j), 1.0},
                                {mrscr_var_zr(t, w, bj), sr ? 1.0 : -1.0},
                                {mrscr_var_zi(t, w, bj), si ? 1.0 : -1.0}};
                }
        }

        // Bit products prod = zeta * bit via Big-M.
        for (int j = 0; j < nw; ++j)
            for (int n = 0; n < nbits; ++n) {
                const double mp = 2 * big_m;
                const std::string pn = mrscr_var_prod(t, w, j, n);
                const std::string bn = mrscr_var_bit(t, j, n);
                const std::string zn = mrscr_var_zeta(t, w, j);
                const std::string base_name = "zpr[" + std::to_string(t) + "][" + std::to_string(w) +
                                              "][" + std::to_string(j) + "][" + std::to_string(n) + "]";
                NamedRow* r1 = row(base_name + "_a", Sense::kLe, mp);
                r1->terms = {{pn, 1.0}, {zn, -1.0}, {bn, mp}};
                NamedRow* r2 = row(base_name + "_b", Sense::kLe, mp);
                r2->terms = {{pn, -1.0}, {zn, 1.0}, {bn, mp}};
                NamedRow* r3 = row(base_name + "_c", Sense::kLe, 0.0);
                r3->terms = {{pn, 1.0}, {bn, -mp}};
                NamedRow* r4 = row(base_name + "_d", Sense::kLe, 0.0);
                r4->terms = {{pn, -1.0}, {bn, -mp}};
            }

        // The scaled strength inequality itself. The delivered wind power is
        // the forecast minus the bit-expanded curtailment, so each zeta*P term
        // expands into a forecast part and the discretized products.
        const double v_min = c.buses[static_cast<size_t>(bw)].v_min;
        const double v_max = c.buses[static_cast<size_t>(bw)].v_max;
        const double vn = c.buses[static_cast<size_t>(bw)].v_nominal;
        NamedRow* mr = row("mrscr[" + std::to_string(t) + "][" + std::to_string(w) + "]", Sense::kLe,
                           vn / c.mrscr_threshold);
        for (int j = 0; j < nw; ++j) {
            const double coef = j == w ? 1.0 / v_max : v_min / (v_max * v_max);
            const double pre = c.windfarms[static_cast<size_t>(j)].p_forecast[static_cast<size_t>(t)];
            const double dp = curtail_step(c, t, j);
            mr->terms.push_back({mrscr_var_zeta(t, w, j), coef * pre});
            for (int n = 0; n < nbits; ++n)
                mr->terms.push_back({mrscr_var_prod(t, w, j, n), -coef * std::pow(2.0, n) * dp});
        }
        blk.mrscr_row_names.push_back(mr->name);
    }

    return blk;
}

void instantiate_block(const RelaxedMrscrBlock& block, ProblemIR& p) {
    for (const auto& v : block.vars) {
        if (p.var_index(v.name) >= 0) continue;
        if (v.external)
            throw ConfigError("MRSCR_EXTERNAL",
                              "block references undeclared master variable '" + v.name + "'");
        p.add_variable(v.name, v.lb, v.ub, v.kind);
    }
    for (const auto& r : block.rows) {
        LinearConstraint c;
        c.name = r.name;
        c.sense = r.sense;
        c.rhs = r.rhs;
        for (const auto& term : r.terms) {
            const int idx = p.var_index(term.var);
            if (idx < 0)
                throw ConfigError("MRSCR_EXTERNAL", "row '" + r.name + "' references unknown '" +
                                                        term.var + "'");
            c.terms.push_back({idx, term.coef});
        }
        p.add_linear(std::move(c));
    }
}

std::string mrscr_report_csv(const MrscrReport& rep, int period) {
    std::ostringstream os;
    os.precision(10);
    os << "wf,period,value,margin,scc_proxy\n";
    for (const auto& e : rep.per_windfarm) {
        os << e.windfarm << "," << period << ",";
        if (e.infinite)
            os << "inf,inf," << e.scc_proxy << "\n";
        else
            os << e.value << "," << e.margin << "," << e.scc_proxy << "\n";
    }
    return os.str();
}

}  // namespace svsc
