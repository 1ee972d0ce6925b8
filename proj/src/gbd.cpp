#include "svsc/gbd.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

#include "svsc/branch_and_bound.hpp"
#include "svsc/errors.hpp"

namespace svsc {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Schedule solve_master_schedule(const StudyCase& c, const std::vector<BendersCut>& cuts,
                               bool security, bool* infeasible) {
    MasterModel model = build_master(c, cuts, security);
    MilpOptions mo;
    mo.gap = c.options.milp_gap;
    Solution sol = solve_milp(model.problem, mo);
    if (sol.status == SolveStatus::kInfeasible) {
        if (infeasible) *infeasible = true;
        return Schedule{};
    }
    if (infeasible) *infeasible = false;
    return extract_schedule(model, sol, c);
}

}  // namespace

Schedule solve_plain_uc(const StudyCase& c) {
    bool infeasible = false;
    Schedule s = solve_master_schedule(c, {}, false, &infeasible);
    if (infeasible)
        throw SolverError("MASTER_INFEASIBLE", "unit commitment infeasible: reserves or balance "
                                               "cannot be met by the available units");
    return s;
}

GbdState run_gbd(const StudyCase& c) {
    {
        const auto diags = validate_case(c);
        if (!diags.empty())
            throw SchemaError("CASE_INVALID", "case validation failed: " + diags.front().entity + "." +
                                                  diags.front().field + ": " + diags.front().rule);
    }

    GbdState state;
    const int T = c.horizon;
    const double tol = c.options.gbd_tolerance;

    // Reactive setpoints and gains are chained across iterations so the load
    // conversion point tracks the schedule under evaluation.
    std::vector<PowerFlowControls> q_seed(static_cast<size_t>(T));
    std::vector<WindControls> gain_seed(static_cast<size_t>(T));
    std::vector<bool> has_seed(static_cast<size_t>(T), false);

    std::vector<std::vector<int>> prev_commitment;
    double best_po = std::numeric_limits<double>::infinity();

    for (int k = 0; k < c.options.gbd_max_iter; ++k) {
        const double t0 = now_seconds();
        bool infeasible = false;
        Schedule schedule = solve_master_schedule(c, state.cuts, true, &infeasible);
        if (infeasible) {
            state.status = GbdStatus::kMasterInfeasible;
            return state;
        }

        // Stall guard: an unchanged commitment with outstanding penalty means
        // the cuts cannot move the master; exclude the point outright.
        const bool repeated = !prev_commitment.empty() && schedule.y == prev_commitment;
        prev_commitment = schedule.y;

        auto solve_one = [&](int t) {
            const PowerFlowControls* qs = has_seed[static_cast<size_t>(t)] ? &q_seed[static_cast<size_t>(t)] : nullptr;
            const WindControls* gs = has_seed[static_cast<size_t>(t)] ? &gain_seed[static_cast<size_t>(t)] : nullptr;
            SubproblemModel model = build_subproblem(c, t, schedule, qs, gs);
            return solve_subproblem(c, model);
        };

        std::vector<SubproblemResult> results(static_cast<size_t>(T));
        if (c.options.parallel_subproblems && T > 1) {
            std::vector<std::future<SubproblemResult>> futs;
            for (int t = 0; t < T; ++t)
                futs.push_back(std::async(std::launch::async, solve_one, t));
            for (int t = 0; t < T; ++t) results[static_cast<size_t>(t)] = futs[static_cast<size_t>(t)].get();
        } else {
            for (int t = 0; t < T; ++t) results[static_cast<size_t>(t)] = solve_one(t);
        }

        GbdIterationRecord rec;
        rec.iteration = k;
        rec.master_objective = schedule.total_cost();
        rec.commitment = schedule.y;
        rec.cut_count = static_cast<int>(state.cuts.size());
        double po_sum = 0.0, po_max = 0.0;
        for (int t = 0; t < T; ++t) {
            const double po = results[static_cast<size_t>(t)].penalty;
            rec.po.push_back(po);
            po_sum += po;
            po_max = std::max(po_max, po);

            // Seed the next build of this period with the optimized controls.
            PowerFlowControls pc = PowerFlowControls::defaults(c);
            for (int g = 0; g < c.n_machines(); ++g) {
                pc.machine[static_cast<size_t>(g)] = {DeviceSetpoint::Mode::kFixedQ,
                                                      results[static_cast<size_t>(t)].q_g[static_cast<size_t>(g)]};
            }
            // One committed unit must keep holding the voltage so the power
            // flow stays determinate; keep the slack on voltage control.
            int slack = -1;
            for (int g = 0; g < c.n_machines(); ++g)
                if (schedule.y[static_cast<size_t>(t)][static_cast<size_t>(g)]) {
                    if (slack < 0 || c.machines[static_cast<size_t>(g)].p_max >
                                         c.machines[static_cast<size_t>(slack)].p_max)
                        slack = g;
                }
            if (slack >= 0) {
                pc.slack_machine = slack;
                pc.machine[static_cast<size_t>(slack)] = {DeviceSetpoint::Mode::kFixedV, 1.0};
            }
            for (int w = 0; w < c.n_windfarms(); ++w)
                pc.windfarm_q[static_cast<size_t>(w)] = results[static_cast<size_t>(t)].q_w[static_cast<size_t>(w)];
            q_seed[static_cast<size_t>(t)] = pc;
            WindControls wc;
            wc.k_p = results[static_cast<size_t>(t)].k_p;
            wc.k_q = results[static_cast<size_t>(t)].k_q;
            gain_seed[static_cast<size_t>(t)] = wc;
            has_seed[static_cast<size_t>(t)] = true;
        }
        rec.po_sum = po_sum;
        rec.wall_seconds = now_seconds() - t0;
        state.history.push_back(rec);

        const double convergence_measure = c.options.per_period_convergence ? po_max : po_sum;
        if (convergence_measure < best_po) {
            best_po = convergence_measure;
            state.schedule = schedule;
            state.controls = results;
        }

        if (convergence_measure < tol) {
            state.schedule = schedule;
            state.controls = results;
            state.status = GbdStatus::kConverged;
            break;
        }

        // Cuts for the next master.
        if (c.options.aggregate_cuts) {
            BendersCut agg;
            agg.anchor_iteration = k;
            agg.period = -1;
            agg.po = 0.0;
            for (int t = 0; t < T; ++t) {
                BendersCut one = make_benders_cut(results[static_cast<size_t>(t)], schedule, k);
                agg.po += one.po;
                agg.terms.insert(agg.terms.end(), one.terms.begin(), one.terms.end());
            }
            state.cuts.push_back(std::move(agg));
        } else {
            for (int t = 0; t < T; ++t) {
                const auto& r = results[static_cast<size_t>(t)];
                double lmax = 0.0;
                for (double v : r.lambda_y) lmax = std::max(lmax, std::abs(v));
                for (double v : r.lambda_pg) lmax = std::max(lmax, std::abs(v));
                for (double v : r.lambda_pw) lmax = std::max(lmax, std::abs(v));
                if (r.penalty <= tol && lmax <= 1e-12) continue;  // vacuous
                state.cuts.push_back(make_benders_cut(r, schedule, k));
            }
        }
        if (state.warnings.empty())
            state.warnings.push_back(
                "cuts derive from local subproblem optima; a cut may exclude commitments that a "
                "global solve would keep");

        if (repeated) {
            BendersCut ng;
            ng.anchor_iteration = k;
            ng.period = -1;
            ng.no_good = true;
            ng.po = 1.0;
            for (int t = 0; t < T; ++t)
                for (int g = 0; g < c.n_machines(); ++g) {
                    const double anchor = schedule.y[static_cast<size_t>(t)][static_cast<size_t>(g)];
                    ng.terms.push_back({BendersCut::VarKind::kCommit, t, g,
                                        anchor > 0.5 ? 1.0 : -1.0, anchor});
                }
            state.cuts.push_back(std::move(ng));
            state.warnings.push_back("stall detected at iteration " + std::to_string(k) +
                                     "; commitment excluded by a no-good cut");
        }
    }

    if (state.status != GbdStatus::kConverged && state.schedule.horizon == 0)
        state.status = GbdStatus::kIterationLimit;

    // Independent re-verification of the returned point.
    if (state.schedule.horizon > 0 && !state.controls.empty()) {
        Reverification rv;
        rv.ran = true;
        rv.passed = true;
        for (int t = 0; t < T; ++t) {
            const auto& ctrl = state.controls[static_cast<size_t>(t)];
            try {
                const DispatchPoint dp = state.schedule.at(t);
                PowerFlowControls pc = q_seed[static_cast<size_t>(t)];
                PrefaultState pre = solve_power_flow(c, t, dp, pc);
                NortonSources ns = compute_norton_sources(c, t, pre);
                WindControls wc;
                wc.k_p = ctrl.k_p;
                wc.k_q = ctrl.k_q;
                for (int f = 0; f < c.n_faults(); ++f) {
                    const auto snaps =
                        solve_snapshots(c, t, c.faults[static_cast<size_t>(f)].id, ns, dp.y, wc);
                    const SecurityReport rep = check_ride_through(snaps, c);
                    for (const auto& ws : rep.per_windfarm) {
                        const double viol = std::max({-ws.margin_flt, -ws.margin_fss, -ws.margin_clr, 0.0});
                        rv.worst_ride_through_violation =
                            std::max(rv.worst_ride_through_violation, viol);
                    }
                }
                const MrscrReport mr = evaluate_mrscr_equivalent(c, t, dp.y, pre.wind_current, pre.v);
                for (const auto& e : mr.per_windfarm)
                    if (!e.infinite)
                        rv.worst_mrscr_shortfall = std::max(rv.worst_mrscr_shortfall, -e.margin);
            } catch (const Error& e) {
                rv.passed = false;
                state.warnings.push_back("re-verification failed for period " + std::to_string(t) +
                                         ": " + e.what());
            }
        }
        const double slack_tol = 1e-4;
        if (rv.worst_ride_through_violation > slack_tol) rv.passed = false;
        // The strength margin tolerance is relative to the threshold scale.
        if (rv.worst_mrscr_shortfall > slack_tol * std::max(1.0, c.mrscr_threshold)) rv.passed = false;
        state.reverification = rv;
    }
    return state;
}

std::string gbd_history_csv(const GbdState& s) {
    std::ostringstream os;
    os.precision(10);
    os << "iteration,master_objective,po_sum,cut_count";
    size_t tmax = 0;
    for (const auto& r : s.history) tmax = std::max(tmax, r.po.size());
    for (size_t t = 0; t < tmax; ++t) os << ",po" << t;
    os << "\n";
    for (const auto& r : s.history) {
        os << r.iteration << "," << r.master_objective << "," << r.po_sum << "," << r.cut_count;
        for (double v : r.po) os << "," << v;
        os << "\n";
    }
    return os.str();
}

}  // namespace svsc
