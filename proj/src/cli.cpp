#include "svsc/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "svsc/errors.hpp"
#include "svsc/gbd.hpp"
#include "svsc/mrscr.hpp"
#include "svsc/network.hpp"
#include "svsc/tdsim.hpp"
#include "svsc/transient.hpp"

namespace svsc {

namespace {

namespace fs = std::filesystem;

struct RunManifest {
    std::string command;
    std::string case_path;
    std::string options_hash;
    std::vector<std::string> outputs;
    int exit_status = 0;
    double seconds = 0.0;
};

void write_manifest(const RunManifest& m, const std::string& out_dir) {
    nlohmann::json j;
    j["command"] = m.command;
    j["case"] = m.case_path;
    j["options_hash"] = m.options_hash;
    j["outputs"] = m.outputs;
    j["exit_status"] = m.exit_status;
    j["seconds"] = m.seconds;
    std::ofstream f(fs::path(out_dir) / "manifest.json");
    f << j.dump(2) << "\n";
}

void write_file(const std::string& out_dir, const std::string& name, const std::string& content,
                RunManifest& manifest) {
    const fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p);
    if (!f) throw UsageError("CLI_OUT", "cannot write " + p.string());
    f << content;
    manifest.outputs.push_back(name);
}

// A neutral dispatch for inspection commands that run without a solved
// schedule: every unit committed, wind at forecast, machines sharing the
// remaining load in proportion to capacity.
DispatchPoint default_dispatch(const StudyCase& c, int t) {
    DispatchPoint d;
    d.y.assign(c.machines.size(), 1);
    d.p_w.resize(c.windfarms.size());
    for (size_t w = 0; w < c.windfarms.size(); ++w)
        d.p_w[w] = c.windfarms[w].p_forecast[static_cast<size_t>(t)];
    double need = c.total_load_p(t);
    for (double pw : d.p_w) need -= pw;
    double pmin_sum = 0, pmax_sum = 0;
    for (const auto& m : c.machines) {
        pmin_sum += m.p_min;
        pmax_sum += m.p_max;
    }
    double frac = 0.0;
    if (pmax_sum > pmin_sum) frac = (need - pmin_sum) / (pmax_sum - pmin_sum);
    frac = std::min(1.0, std::max(0.0, frac));
    d.p_g.resize(c.machines.size());
    for (size_t g = 0; g < c.machines.size(); ++g)
        d.p_g[g] = c.machines[g].p_min + frac * (c.machines[g].p_max - c.machines[g].p_min);
    return d;
}

std::string cost_breakdown_csv(const std::string& model, const Schedule& s) {
    std::ostringstream os;
    os.precision(10);
    os << model << "," << s.cost_generation << "," << s.cost_startup << "," << s.cost_shutdown << ","
       << s.cost_curtail << "," << s.total_cost() << "\n";
    return os.str();
}

}  // namespace

std::string options_hash(const StudyCase& c) {
    // FNV-1a over the serialized options block.
    nlohmann::json j;
    const SolveOptions& o = c.options;
    j["gbd_tolerance"] = o.gbd_tolerance;
    j["gbd_max_iter"] = o.gbd_max_iter;
    j["big_m_z"] = o.big_m_z;
    j["curtail_bits"] = o.curtail_bits;
    j["ipm_tolerance"] = o.ipm_tolerance;
    j["ipm_max_iter"] = o.ipm_max_iter;
    j["milp_gap"] = o.milp_gap;
    j["fixed_point_tolerance"] = o.fixed_point_tolerance;
    j["parallel_subproblems"] = o.parallel_subproblems;
    j["kappa_dq"] = o.kappa_dq;
    j["wind_freeze_dq"] = o.wind_freeze_dq;
    j["lvrt_use_trip_threshold"] = o.lvrt_use_trip_threshold;
    j["aggregate_cuts"] = o.aggregate_cuts;
    j["per_period_convergence"] = o.per_period_convergence;
    j["mrscr_threshold"] = c.mrscr_threshold;
    j["curtail_penalty"] = c.curtail_penalty;
    const std::string s = j.dump();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

double max_secure_wind_scale(const StudyCase& c, int t, const std::vector<int>& commitment,
                             double scale_hi) {
    auto secure_at = [&](double scale) {
        DispatchPoint d;
        d.y = commitment;
        d.p_w.resize(c.windfarms.size());
        for (size_t w = 0; w < c.windfarms.size(); ++w)
            d.p_w[w] = std::min(scale * c.windfarms[w].p_forecast[static_cast<size_t>(t)],
                                0.999 * c.windfarms[w].s_max);
        double need = c.total_load_p(t);
        for (double pw : d.p_w) need -= pw;
        double pmin_sum = 0, pmax_sum = 0;
        for (size_t g = 0; g < c.machines.size(); ++g)
            if (commitment[g]) {
                pmin_sum += c.machines[g].p_min;
                pmax_sum += c.machines[g].p_max;
            }
        if (need < pmin_sum - 1e-9 || need > pmax_sum + 1e-9) return false;
        const double frac = pmax_sum > pmin_sum
                                ? std::min(1.0, std::max(0.0, (need - pmin_sum) / (pmax_sum - pmin_sum)))
                                : 0.0;
        d.p_g.resize(c.machines.size());
        for (size_t g = 0; g < c.machines.size(); ++g)
            d.p_g[g] = commitment[g] ? c.machines[g].p_min + frac * (c.machines[g].p_max - c.machines[g].p_min)
                                     : 0.0;
        try {
            PowerFlowControls pc = PowerFlowControls::defaults(c);
            if (!commitment[static_cast<size_t>(pc.slack_machine)]) {
                for (size_t g = 0; g < c.machines.size(); ++g)
                    if (commitment[g]) {
                        pc.slack_machine = static_cast<int>(g);
                        break;
                    }
            }
            const PrefaultState pre = solve_power_flow(c, t, d, pc);
            const MrscrReport rep = evaluate_mrscr_equivalent(c, t, commitment, pre.wind_current, pre.v);
            return rep.all_above_threshold();
        } catch (const Error&) {
            return false;
        }
    };

    if (!secure_at(0.0)) return 0.0;
    double lo = 0.0, hi = scale_hi;
    if (secure_at(hi)) return hi;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (secure_at(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

namespace {

int dispatch_command(const std::string& cmd, const StudyCase& c, const std::string& case_path,
                     int period, const std::string& fault, const std::string& definition,
                     const std::string& out_dir, RunManifest& manifest, std::ostream& out) {
    if (cmd == "validate") {
        const auto diags = validate_case(c);
        std::ostringstream os;
        os << "entity,field,rule\n";
        for (const auto& d : diags) os << d.entity << "," << d.field << "," << d.rule << "\n";
        write_file(out_dir, "diagnostics.csv", os.str(), manifest);
        out << diags.size() << " diagnostic(s)\n";
        return diags.empty() ? 0 : 1;
    }

    if (cmd == "powerflow") {
        const DispatchPoint d = default_dispatch(c, period);
        const PrefaultState pre = solve_power_flow(c, period, d, PowerFlowControls::defaults(c));
        std::ostringstream os;
        os.precision(10);
        os << "bus,vm,va_rad\n";
        for (int i = 0; i < c.n_buses(); ++i)
            os << i << "," << std::abs(pre.v[i]) << "," << std::arg(pre.v[i]) << "\n";
        write_file(out_dir, "powerflow_bus.csv", os.str(), manifest);
        std::ostringstream od;
        od.precision(10);
        od << "kind,id,p,q\n";
        for (int g = 0; g < c.n_machines(); ++g)
            od << "machine," << g << "," << pre.machine_p[static_cast<size_t>(g)] << ","
               << pre.machine_q[static_cast<size_t>(g)] << "\n";
        for (int w = 0; w < c.n_windfarms(); ++w)
            od << "windfarm," << w << "," << pre.wind_p[static_cast<size_t>(w)] << ","
               << pre.wind_q[static_cast<size_t>(w)] << "\n";
        write_file(out_dir, "powerflow_device.csv", od.str(), manifest);
        out << "converged in " << pre.iterations << " iterations\n";
        return 0;
    }

    if (cmd == "snapshot") {
        const DispatchPoint d = default_dispatch(c, period);
        const PrefaultState pre = solve_power_flow(c, period, d, PowerFlowControls::defaults(c));
        const NortonSources ns = compute_norton_sources(c, period, pre);
        const WindControls wc = WindControls::midpoint(c);
        const auto snaps = solve_snapshots(c, period, fault, ns, d.y, wc);
        std::ostringstream os;
        for (const auto& s : snaps) os << dump_snapshot(s, c);
        write_file(out_dir, "snapshot_" + fault + "_t" + std::to_string(period) + ".txt", os.str(),
                   manifest);
        const SecurityReport rep = check_ride_through(snaps, c);
        std::ostringstream sc;
        sc.precision(10);
        sc << "wf,v_flt,v_fss,v_clr,margin_flt,margin_fss,margin_clr,secure\n";
        for (const auto& w : rep.per_windfarm)
            sc << w.windfarm << "," << w.v_flt << "," << w.v_fss << "," << w.v_clr << ","
               << w.margin_flt << "," << w.margin_fss << "," << w.margin_clr << "," << w.secure
               << "\n";
        write_file(out_dir, "security.csv", sc.str(), manifest);
        out << (rep.secure ? "secure" : "violations found") << "\n";
        return rep.secure ? 0 : 1;
    }

    if (cmd == "mrscr") {
        const DispatchPoint d = default_dispatch(c, period);
        const PrefaultState pre = solve_power_flow(c, period, d, PowerFlowControls::defaults(c));
        MrscrReport rep;
        if (definition == "impedance") {
            NetworkMatrices net = build_admittance(c, period, Stage::kPrefault, "",
                                                   MachineModel::kSubtransient, d.y, pre.v);
            std::vector<int> wb;
            for (const auto& wf : c.windfarms) wb.push_back(wf.bus);
            rep = evaluate_mrscr_impedance(impedance_rows(net, wb), pre.v, pre.wind_p, c);
        } else {
            rep = evaluate_mrscr_equivalent(c, period, d.y, pre.wind_current, pre.v);
        }
        write_file(out_dir, "mrscr.csv", mrscr_report_csv(rep, period), manifest);
        out << (rep.all_above_threshold() ? "all stations above threshold" : "threshold violations")
            << "\n";
        return rep.all_above_threshold() ? 0 : 1;
    }

    if (cmd == "uc") {
        const Schedule s = solve_plain_uc(c);
        write_file(out_dir, "schedule.csv", schedule_csv(s), manifest);
        write_file(out_dir, "cost_breakdown.csv",
                   "model,generation,startup,shutdown,curtailment,total\n" + cost_breakdown_csv("uc", s),
                   manifest);
        out << "total cost " << s.total_cost() << "\n";
        return 0;
    }

    if (cmd == "svsc-uc") {
        const GbdState st = run_gbd(c);
        if (st.status == GbdStatus::kMasterInfeasible) {
            out << "master infeasible\n";
            return 2;
        }
        write_file(out_dir, "schedule.csv", schedule_csv(st.schedule), manifest);
        write_file(out_dir, "gbd_history.csv", gbd_history_csv(st), manifest);
        std::ostringstream ctl;
        ctl.precision(10);
        ctl << "period,kind,id,value\n";
        for (int t = 0; t < c.horizon; ++t) {
            const auto& r = st.controls[static_cast<size_t>(t)];
            for (size_t g = 0; g < r.q_g.size(); ++g)
                ctl << t << ",q_g," << g << "," << r.q_g[g] << "\n";
            for (size_t w = 0; w < r.q_w.size(); ++w) {
                ctl << t << ",q_w," << w << "," << r.q_w[w] << "\n";
                ctl << t << ",k_p," << w << "," << r.k_p[w] << "\n";
                ctl << t << ",k_q," << w << "," << r.k_q[w] << "\n";
            }
        }
        write_file(out_dir, "controls.csv", ctl.str(), manifest);
        std::ostringstream log;
        log << "status "
            << (st.status == GbdStatus::kConverged ? "converged" : "iteration_limit") << "\n";
        log << "iterations " << st.iterations() << "\n";
        log << "reverification " << (st.reverification.passed ? "passed" : "failed") << "\n";
        for (const auto& w : st.warnings) log << "warning " << w << "\n";
        write_file(out_dir, "run_log.txt", log.str(), manifest);
        out << "iterations " << st.iterations() << " cost " << st.schedule.total_cost() << "\n";
        if (st.status != GbdStatus::kConverged) return 2;
        return st.reverification.passed ? 0 : 1;
    }

    if (cmd == "simulate") {
        const DispatchPoint d = default_dispatch(c, period);
        const PowerFlowControls pc = PowerFlowControls::defaults(c);
        const WindControls wc = WindControls::midpoint(c);
        const SimDeviceParams params;
        const double dt = 1e-4, t_on = 0.1, t_clear = 0.35, t_end = 0.6;
        const Trajectory traj =
            simulate_fault(c, period, d, pc, wc, fault, params, dt, t_on, t_clear, t_end);
        write_file(out_dir, "trajectory.csv", trajectory_to_csv(traj, c), manifest);
        const PrefaultState pre = solve_power_flow(c, period, d, pc);
        const NortonSources ns = compute_norton_sources(c, period, pre);
        const auto snaps = solve_snapshots(c, period, fault, ns, d.y, wc);
        const SnapshotErrorReport rep = compare_with_snapshots(traj, snaps);
        std::ostringstream os;
        os.precision(10);
        os << "moment,max_error\n";
        os << "fault_on," << rep.err_fault_on << "\n";
        os << "fault_steady," << rep.err_fault_steady << "\n";
        os << "fault_cleared," << rep.err_fault_cleared << "\n";
        write_file(out_dir, "sim_errors.csv", os.str(), manifest);
        out << "max errors " << rep.err_fault_on << " " << rep.err_fault_steady << " "
            << rep.err_fault_cleared << "\n";
        return 0;
    }

    if (cmd == "report") {
        const Schedule uc = solve_plain_uc(c);
        const GbdState st = run_gbd(c);
        if (st.status == GbdStatus::kMasterInfeasible) {
            out << "master infeasible\n";
            return 2;
        }
        std::ostringstream cb;
        cb << "model,generation,startup,shutdown,curtailment,total\n";
        cb << cost_breakdown_csv("uc", uc);
        cb << cost_breakdown_csv("svsc-uc", st.schedule);
        write_file(out_dir, "cost_breakdown.csv", cb.str(), manifest);

        std::ostringstream ms;
        ms << "wf,period,value,margin,scc_proxy\n";
        std::ostringstream vm;
        vm.precision(10);
        vm << "wf,period,fault,margin_flt,margin_fss,margin_clr\n";
        for (int t = 0; t < c.horizon; ++t) {
            const DispatchPoint dp = st.schedule.at(t);
            PowerFlowControls pc = PowerFlowControls::defaults(c);
            if (!dp.y[static_cast<size_t>(pc.slack_machine)]) {
                for (int g = 0; g < c.n_machines(); ++g)
                    if (dp.y[static_cast<size_t>(g)]) {
                        pc.slack_machine = g;
                        break;
                    }
            }
            const PrefaultState pre = solve_power_flow(c, t, dp, pc);
            const MrscrReport rep = evaluate_mrscr_equivalent(c, t, dp.y, pre.wind_current, pre.v);
            const std::string csv = mrscr_report_csv(rep, t);
            ms << csv.substr(csv.find('\n') + 1);
            const NortonSources ns = compute_norton_sources(c, t, pre);
            WindControls wc;
            wc.k_p = st.controls[static_cast<size_t>(t)].k_p;
            wc.k_q = st.controls[static_cast<size_t>(t)].k_q;
            for (int f = 0; f < c.n_faults(); ++f) {
                const auto snaps = solve_snapshots(c, t, c.faults[static_cast<size_t>(f)].id, ns, dp.y, wc);
                const SecurityReport sec = check_ride_through(snaps, c);
                for (const auto& w : sec.per_windfarm)
                    vm << w.windfarm << "," << t << "," << c.faults[static_cast<size_t>(f)].id << ","
                       << w.margin_flt << "," << w.margin_fss << "," << w.margin_clr << "\n";
            }
        }
        write_file(out_dir, "mrscr_series.csv", ms.str(), manifest);
        write_file(out_dir, "voltage_margins.csv", vm.str(), manifest);

        std::ostringstream mw;
        mw.precision(10);
        mw << "model,period,max_scale,max_total_p\n";
        for (int t = 0; t < c.horizon; ++t) {
            for (int which = 0; which < 2; ++which) {
                const Schedule& s = which == 0 ? uc : st.schedule;
                const double scale = max_secure_wind_scale(c, t, s.at(t).y);
                double total = 0;
                for (const auto& wf : c.windfarms)
                    total += scale * wf.p_forecast[static_cast<size_t>(t)];
                mw << (which == 0 ? "uc" : "svsc-uc") << "," << t << "," << scale << "," << total
                   << "\n";
            }
        }
        write_file(out_dir, "max_wind.csv", mw.str(), manifest);
        out << "report written\n";
        return 0;
    }

    throw UsageError("CLI_CMD", "unknown command '" + cmd + "'");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"short-term voltage security constrained unit commitment toolkit"};
    app.require_subcommand(1);

    std::string case_path, out_dir, fault, definition = "equivalent";
    int period = 0;
    bool parallel = false;
    double tol = -1;
    int max_iter = -1;

    app.add_option("--case", case_path, "case file")->required();
    const char* env_out = std::getenv("SVSC_OUT_DIR");
    out_dir = env_out ? env_out : ".";
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--period", period, "period index");
    app.add_option("--fault", fault, "fault scenario id");
    app.add_flag("--parallel", parallel, "solve subproblems in parallel");
    app.add_option("--tol", tol, "decomposition tolerance override");
    app.add_option("--max-iter", max_iter, "decomposition iteration cap override");
    app.add_option("--definition", definition, "strength definition: impedance|equivalent")
        ->check(CLI::IsMember({"impedance", "equivalent"}));

    for (const char* name :
         {"validate", "powerflow", "snapshot", "mrscr", "uc", "svsc-uc", "simulate", "report"})
        app.add_subcommand(name)->fallthrough();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 64;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    const auto t0 = std::chrono::steady_clock::now();

    RunManifest manifest;
    manifest.command = cmd;
    manifest.case_path = case_path;

    int code = 0;
    try {
        std::filesystem::create_directories(out_dir);
        StudyCase c = load_case(case_path);
        if (tol > 0) c.options.gbd_tolerance = tol;
        if (max_iter > 0) c.options.gbd_max_iter = max_iter;
        if (parallel) c.options.parallel_subproblems = true;
        manifest.options_hash = options_hash(c);

        if ((cmd == "snapshot" || cmd == "simulate") && fault.empty()) {
            if (c.faults.empty()) throw UsageError("CLI_FAULT", "case has no fault scenarios");
            fault = c.faults.front().id;
        }
        if (!fault.empty()) {
            try {
                c.fault_by_id(fault);
            } catch (const Error&) {
                throw UsageError("CLI_FAULT", "unknown fault scenario '" + fault + "'");
            }
        }
        if (period < 0 || period >= c.horizon)
            throw UsageError("CLI_PERIOD", "period out of range for the case horizon");

        code = dispatch_command(cmd, c, case_path, period, fault, definition, out_dir, manifest, out);
    } catch (const UsageError& e) {
        err << e.what() << "\n";
        code = 64;
    } catch (const ParseError& e) {
        err << e.what() << "\n";
        code = 64;
    } catch (const SchemaError& e) {
        err << e.what() << "\n";
        code = 1;
    } catch (const Error& e) {
        err << e.what() << "\n";
        code = 2;
    }

    manifest.exit_status = code;
    manifest.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        write_manifest(manifest, out_dir);
    } catch (...) {
        // Manifest writing must never mask the command outcome.
    }
    return code;
}

}  // namespace svsc
