#include "svsc/master.hpp"

#include <cmath>
#include <sstream>

#include "svsc/errors.hpp"
#include "svsc/mrscr.hpp"

namespace svsc {

DispatchPoint Schedule::at(int t) const {
    DispatchPoint d;
    d.y = y.at(static_cast<size_t>(t));
    d.p_g = p_g.at(static_cast<size_t>(t));
    d.p_w = p_w.at(static_cast<size_t>(t));
    return d;
}

double BendersCut::eval(const Schedule& s) const {
    double v = po;
    for (const auto& term : terms) {
        double x = 0.0;
        switch (term.kind) {
            case VarKind::kCommit: x = s.y[static_cast<size_t>(term.period)][static_cast<size_t>(term.device)]; break;
            case VarKind::kMachineP: x = s.p_g[static_cast<size_t>(term.period)][static_cast<size_t>(term.device)]; break;
            case VarKind::kWindP: x = s.p_w[static_cast<size_t>(term.period)][static_cast<size_t>(term.device)]; break;
        }
        v += term.lambda * (x - term.anchor);
    }
    return v;
}

namespace {
std::string i2(const char* b, int t, int g) {
    std::ostringstream os;
    os << b << "[" << t << "][" << g << "]";
    return os.str();
}
}  // namespace

std::string master_var_pg(int t, int g) { return i2("P_g", t, g); }
std::string master_var_pseg(int t, int g, int m) {
    std::ostringstream os;
    os << "P_seg[" << t << "][" << g << "][" << m << "]";
    return os.str();
}
std::string master_var_pw(int t, int w) { return i2("P_w", t, w); }
std::string master_var_pcur(int t, int w) { return i2("P_cur", t, w); }
std::string master_var_cu(int t, int g) { return i2("C_U", t, g); }
std::string master_var_cd(int t, int g) { return i2("C_D", t, g); }

MasterModel build_master(const StudyCase& c, const std::vector<BendersCut>& cuts,
                         bool include_security_rows) {
    {
        const auto diags = validate_case(c);
        if (!diags.empty())
            throw SchemaError("CASE_INVALID", "case validation failed: " + diags.front().entity + "." +
                                                  diags.front().field + ": " + diags.front().rule);
    }

    MasterModel model;
    model.security_rows = include_security_rows;
    model.horizon = c.horizon;
    ProblemIR& p = model.problem;
    p.obj_sense = ObjSense::kMin;

    const int T = c.horizon;
    const int ng = c.n_machines();
    const int nw = c.n_windfarms();

    for (int t = 0; t < T; ++t) {
        for (int g = 0; g < ng; ++g) {
            const auto& m = c.machines[static_cast<size_t>(g)];
            p.add_variable(master_var_y(t, g), 0, 1, VarKind::kBinary);
            p.add_variable(master_var_pg(t, g), 0, m.p_max, VarKind::kContinuous);
            for (size_t seg = 0; seg < m.cost_segments.size(); ++seg)
                p.add_variable(master_var_pseg(t, g, static_cast<int>(seg)), 0,
                               m.cost_segments[seg].cap, VarKind::kContinuous);
            p.add_variable(master_var_cu(t, g), 0, std::max(0.0, m.cost_startup), VarKind::kContinuous);
            p.add_variable(master_var_cd(t, g), 0, std::max(0.0, m.cost_shutdown), VarKind::kContinuous);
        }
        for (int w = 0; w < nw; ++w) {
            const auto& wf = c.windfarms[static_cast<size_t>(w)];
            const double pre = wf.p_forecast[static_cast<size_t>(t)];
            p.add_variable(master_var_pw(t, w), 0, pre, VarKind::kContinuous);
            p.add_variable(master_var_pcur(t, w), 0, pre, VarKind::kContinuous);
        }
    }

    // Objective: fixed and marginal generation cost, startup/shutdown
    // epigraphs, curtailment penalty.
    for (int t = 0; t < T; ++t) {
        for (int g = 0; g < ng; ++g) {
            const auto& m = c.machines[static_cast<size_t>(g)];
            p.add_objective_term(p.var_index(master_var_y(t, g)), m.cost_fixed);
            for (size_t seg = 0; seg < m.cost_segments.size(); ++seg)
                p.add_objective_term(p.var_index(master_var_pseg(t, g, static_cast<int>(seg))),
                                     m.cost_segments[seg].slope);
            p.add_objective_term(p.var_index(master_var_cu(t, g)), 1.0);
            p.add_objective_term(p.var_index(master_var_cd(t, g)), 1.0);
        }
        for (int w = 0; w < nw; ++w)
            p.add_objective_term(p.var_index(master_var_pcur(t, w)), c.curtail_penalty);
    }

    auto add_row = [&](const std::string& name, Sense s, double rhs,
                       std::initializer_list<std::pair<std::string, double>> terms) {
        LinearConstraint lc;
        lc.name = name;
        lc.sense = s;
        lc.rhs = rhs;
        for (const auto& [n, coefficient] : terms) lc.terms.push_back({p.var_index(n), coefficient});
        p.add_linear(std::move(lc));
    };

    for (int t = 0; t < T; ++t) {
        for (int g = 0; g < ng; ++g) {
            const auto& m = c.machines[static_cast<size_t>(g)];

            // Dispatch decomposition and capacity window.
            {
                LinearConstraint lc;
                lc.name = i2("pg_def", t, g);
                lc.sense = Sense::kEq;
                lc.rhs = 0.0;
                lc.terms.push_back({p.var_index(master_var_pg(t, g)), 1.0});
                lc.terms.push_back({p.var_index(master_var_y(t, g)), -m.p_min});
                for (size_t seg = 0; seg < m.cost_segments.size(); ++seg)
                    lc.terms.push_back({p.var_index(master_var_pseg(t, g, static_cast<int>(seg))), -1.0});
                p.add_linear(std::move(lc));
            }
            add_row(i2("pg_max", t, g), Sense::kLe, 0.0,
                    {{master_var_pg(t, g), 1.0}, {master_var_y(t, g), -m.p_max}});
            add_row(i2("pg_min", t, g), Sense::kGe, 0.0,
                    {{master_var_pg(t, g), 1.0}, {master_var_y(t, g), -m.p_min}});

            // Startup/shutdown epigraphs against the previous period (the
            // initial status enters the right-hand side at t = 0).
            if (t == 0) {
                const double init = m.init_on ? 1.0 : 0.0;
                add_row(i2("cu", t, g), Sense::kGe, -m.cost_startup * init,
                        {{master_var_cu(t, g), 1.0}, {master_var_y(t, g), -m.cost_startup}});
                add_row(i2("cd", t, g), Sense::kGe, m.cost_shutdown * init,
                        {{master_var_cd(t, g), 1.0}, {master_var_y(t, g), m.cost_shutdown}});
            } else {
                add_row(i2("cu", t, g), Sense::kGe, 0.0,
                        {{master_var_cu(t, g), 1.0},
                         {master_var_y(t, g), -m.cost_startup},
                         {master_var_y(t - 1, g), m.cost_startup}});
                add_row(i2("cd", t, g), Sense::kGe, 0.0,
                        {{master_var_cd(t, g), 1.0},
                         {master_var_y(t, g), m.cost_shutdown},
                         {master_var_y(t - 1, g), -m.cost_shutdown}});
            }
        }

        // Energy balance.
        {
            LinearConstraint lc;
            lc.name = "balance[" + std::to_string(t) + "]";
            lc.sense = Sense::kEq;
            lc.rhs = c.total_load_p(t);
            for (int g = 0; g < ng; ++g) lc.terms.push_back({p.var_index(master_var_pg(t, g)), 1.0});
            for (int w = 0; w < nw; ++w) lc.terms.push_back({p.var_index(master_var_pw(t, w)), 1.0});
            p.add_linear(std::move(lc));
        }

        // Reserves.
        {
            LinearConstraint up;
            up.name = "res_up[" + std::to_string(t) + "]";
            up.sense = Sense::kGe;
            up.rhs = c.reserve_up[static_cast<size_t>(t)];
            LinearConstraint dn;
            dn.name = "res_dn[" + std::to_string(t) + "]";
            dn.sense = Sense::kGe;
            dn.rhs = c.reserve_down[static_cast<size_t>(t)];
            for (int g = 0; g < ng; ++g) {
                const auto& m = c.machines[static_cast<size_t>(g)];
                up.terms.push_back({p.var_index(master_var_y(t, g)), m.p_max});
                up.terms.push_back({p.var_index(master_var_pg(t, g)), -1.0});
                dn.terms.push_back({p.var_index(master_var_pg(t, g)), 1.0});
                dn.terms.push_back({p.var_index(master_var_y(t, g)), -m.p_min});
            }
            p.add_linear(std::move(up));
            p.add_linear(std::move(dn));
        }

        // Wind availability.
        for (int w = 0; w < nw; ++w)
            add_row("avail[" + std::to_string(t) + "][" + std::to_string(w) + "]", Sense::kLe,
                    c.windfarms[static_cast<size_t>(w)].p_forecast[static_cast<size_t>(t)],
                    {{master_var_pw(t, w), 1.0}, {master_var_pcur(t, w), 1.0}});
    }

    // Min up/down windows, with the initial status extending across t = 0.
    for (int g = 0; g < ng; ++g) {
        const auto& m = c.machines[static_cast<size_t>(g)];
        for (int t = 0; t < T; ++t) {
            const bool has_prev = t > 0;
            for (int h = t; h < std::min(T, t + m.t_on_min); ++h) {
                if (h == t) continue;
                LinearConstraint lc;
                lc.name = "minup[" + std::to_string(g) + "][" + std::to_string(t) + "][" +
                          std::to_string(h) + "]";
                lc.sense = Sense::kGe;
                lc.rhs = has_prev ? 0.0 : (m.init_on ? -1.0 : 0.0);
                lc.terms.push_back({p.var_index(master_var_y(h, g)), 1.0});
                lc.terms.push_back({p.var_index(master_var_y(t, g)), -1.0});
                if (has_prev) lc.terms.push_back({p.var_index(master_var_y(t - 1, g)), 1.0});
                p.add_linear(std::move(lc));
            }
            for (int h = t; h < std::min(T, t + m.t_off_min); ++h) {
                if (h == t) continue;
                LinearConstraint lc;
                lc.name = "mindn[" + std::to_string(g) + "][" + std::to_string(t) + "][" +
                          std::to_string(h) + "]";
                lc.sense = Sense::kGe;
                // 1 - y_h >= y_{t-1} - y_t, with y_{-1} fixed to the init status.
                lc.rhs = has_prev ? -1.0 : (m.init_on ? 1.0 : 0.0) - 1.0;
                lc.terms.push_back({p.var_index(master_var_y(h, g)), -1.0});
                lc.terms.push_back({p.var_index(master_var_y(t, g)), 1.0});
                if (has_prev) lc.terms.push_back({p.var_index(master_var_y(t - 1, g)), -1.0});
                p.add_linear(std::move(lc));
            }
        }
        // Carry-over of an unmet initial minimum window.
        if (m.init_on && m.init_duration < m.t_on_min) {
            for (int h = 0; h < std::min(T, m.t_on_min - m.init_duration); ++h)
                add_row("init_on[" + std::to_string(g) + "][" + std::to_string(h) + "]", Sense::kEq, 1.0,
                        {{master_var_y(h, g), 1.0}});
        }
        if (!m.init_on && m.init_duration < m.t_off_min) {
            for (int h = 0; h < std::min(T, m.t_off_min - m.init_duration); ++h)
                add_row("init_off[" + std::to_string(g) + "][" + std::to_string(h) + "]", Sense::kEq, 0.0,
                        {{master_var_y(h, g), 1.0}});
        }

        // Ramps.
        for (int t = 0; t < T; ++t) {
            if (t == 0) {
                add_row(i2("ramp_up", t, g), Sense::kLe, m.ramp_up + m.init_p,
                        {{master_var_pg(t, g), 1.0}});
                add_row(i2("ramp_dn", t, g), Sense::kGe, m.init_p - m.ramp_down,
                        {{master_var_pg(t, g), 1.0}});
            } else {
                add_row(i2("ramp_up", t, g), Sense::kLe, m.ramp_up,
                        {{master_var_pg(t, g), 1.0}, {master_var_pg(t - 1, g), -1.0}});
                add_row(i2("ramp_dn", t, g), Sense::kLe, m.ramp_down,
                        {{master_var_pg(t - 1, g), 1.0}, {master_var_pg(t, g), -1.0}});
            }
        }
    }

    // Relaxed grid-strength rows plus the curtailment discretization link.
    if (include_security_rows && nw > 0) {
        for (int t = 0; t < T; ++t) {
            const RelaxedMrscrBlock blk = relaxed_mrscr_rows(c, t);
            instantiate_block(blk, p);
            for (int w = 0; w < nw; ++w) {
                LinearConstraint lc;
                lc.name = "cur_link[" + std::to_string(t) + "][" + std::to_string(w) + "]";
                lc.sense = Sense::kEq;
                lc.rhs = 0.0;
                lc.terms.push_back({p.var_index(master_var_pcur(t, w)), 1.0});
                const double dp = curtail_step(c, t, w);
                for (int n = 0; n < c.options.curtail_bits; ++n)
                    lc.terms.push_back({p.var_index(mrscr_var_bit(t, w, n)), -std::pow(2.0, n) * dp});
                p.add_linear(std::move(lc));
            }
        }
    }

    // Benders cuts.
    for (size_t k = 0; k < cuts.size(); ++k) {
        const auto& cut = cuts[k];
        LinearConstraint lc;
        lc.name = "cut[" + std::to_string(k) + "]";
        lc.sense = Sense::kLe;
        double rhs = -cut.po;
        for (const auto& term : cut.terms) {
            std::string vn;
            switch (term.kind) {
                case BendersCut::VarKind::kCommit: vn = master_var_y(term.period, term.device); break;
                case BendersCut::VarKind::kMachineP: vn = master_var_pg(term.period, term.device); break;
                case BendersCut::VarKind::kWindP: vn = master_var_pw(term.period, term.device); break;
            }
            lc.terms.push_back({p.var_index(vn), term.lambda});
            rhs += term.lambda * term.anchor;
        }
        lc.rhs = rhs;
        p.add_linear(std::move(lc));
    }

    p.validate();
    return model;
}

Schedule extract_schedule(const MasterModel& model, const Solution& sol, const StudyCase& c) {
    if (sol.status != SolveStatus::kOptimal && sol.status != SolveStatus::kIterationLimit)
        throw SolverError("MASTER_NO_SOLUTION", "cannot extract a schedule from a failed solve");

    const ProblemIR& p = model.problem;
    Schedule s;
    s.horizon = c.horizon;
    const int T = c.horizon;
    const int ng = c.n_machines();
    const int nw = c.n_windfarms();
    s.y.assign(static_cast<size_t>(T), std::vector<int>(static_cast<size_t>(ng), 0));
    s.p_g.assign(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(ng), 0.0));
    s.p_w.assign(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(nw), 0.0));
    s.p_cur.assign(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(nw), 0.0));

    auto val = [&](const std::string& name) {
        const int idx = p.var_index(name);
        if (idx < 0) throw ConfigError("MASTER_VAR", "missing variable '" + name + "'");
        return sol.x[idx];
    };

    for (int t = 0; t < T; ++t) {
        for (int g = 0; g < ng; ++g) {
            s.y[static_cast<size_t>(t)][static_cast<size_t>(g)] =
                val(master_var_y(t, g)) > 0.5 ? 1 : 0;
            s.p_g[static_cast<size_t>(t)][static_cast<size_t>(g)] = val(master_var_pg(t, g));
            const auto& m = c.machines[static_cast<size_t>(g)];
            s.cost_startup += val(master_var_cu(t, g));
            s.cost_shutdown += val(master_var_cd(t, g));
            s.cost_generation +=
                m.cost_fixed * s.y[static_cast<size_t>(t)][static_cast<size_t>(g)];
            for (size_t seg = 0; seg < m.cost_segments.size(); ++seg)
                s.cost_generation += m.cost_segments[seg].slope *
                                     val(master_var_pseg(t, g, static_cast<int>(seg)));
        }
        for (int w = 0; w < nw; ++w) {
            s.p_w[static_cast<size_t>(t)][static_cast<size_t>(w)] = val(master_var_pw(t, w));
            double cur = val(master_var_pcur(t, w));
            if (model.security_rows) {
                // Reconstruct from the bits; the link row keeps them equal.
                double from_bits = 0.0;
                const double dp = curtail_step(c, t, w);
                for (int n = 0; n < c.options.curtail_bits; ++n)
                    from_bits += std::pow(2.0, n) * dp * std::round(val(mrscr_var_bit(t, w, n)));
                cur = from_bits;
            }
            s.p_cur[static_cast<size_t>(t)][static_cast<size_t>(w)] = cur;
            s.cost_curtail += c.curtail_penalty * cur;
        }

        double balance = -c.total_load_p(t);
        for (int g = 0; g < ng; ++g) balance += s.p_g[static_cast<size_t>(t)][static_cast<size_t>(g)];
        for (int w = 0; w < nw; ++w) balance += s.p_w[static_cast<size_t>(t)][static_cast<size_t>(w)];
        if (std::abs(balance) > 1e-6)
            throw SolverError("MASTER_BALANCE", "extracted schedule violates the energy balance by " +
                                                    std::to_string(balance));
    }
    return s;
}

std::string schedule_csv(const Schedule& s) {
    std::ostringstream os;
    os.precision(10);
    os << "period,device,kind,committed,p,p_curtailed\n";
    for (int t = 0; t < s.horizon; ++t) {
        for (size_t g = 0; g < s.y[static_cast<size_t>(t)].size(); ++g)
            os << t << "," << g << ",machine," << s.y[static_cast<size_t>(t)][g] << ","
               << s.p_g[static_cast<size_t>(t)][g] << ",0\n";
        for (size_t w = 0; w < s.p_w[static_cast<size_t>(t)].size(); ++w)
            os << t << "," << w << ",windfarm,1," << s.p_w[static_cast<size_t>(t)][w] << ","
               << s.p_cur[static_cast<size_t>(t)][w] << "\n";
    }
    return os.str();
}

std::vector<std::pair<std::string, std::string>> master_symbols() {
    return {
        {"y_g", "y[t][g]"},       {"P_g", "P_g[t][g]"},   {"P_w", "P_w[t][w]"},
        {"P_cur", "P_cur[t][w]"}, {"Z", "Zr/Zi[t][w][k]"}, {"C_U", "C_U[t][g]"},
        {"C_D", "C_D[t][g]"},
    };
}

}  // namespace svsc
