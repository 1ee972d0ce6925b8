// Acceptance suite: end-to-end checks over the bundled desk-scale fixtures,
// one verdict line per criterion.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "fixtures.hpp"
#include "svsc/branch_and_bound.hpp"
#include "svsc/cli.hpp"
#include "svsc/gbd.hpp"
#include "svsc/interior_point.hpp"
#include "svsc/mrscr.hpp"
#include "svsc/simplex.hpp"
#include "svsc/subproblem.hpp"
#include "svsc/tdsim.hpp"

using namespace svsc;

namespace {

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void verdict(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", criterion, ": ", detail);
}

struct OracleRig {
    StudyCase c = fixtures::tdsim_fixture();
    DispatchPoint d;
    PowerFlowControls pc;
    WindControls wc;
    OracleRig() {
        d.y = {1, 1};
        d.p_g = {0.3, 0.2};
        d.p_w = {0.3, 0.25};
        pc = PowerFlowControls::defaults(c);
        pc.windfarm_q = {0.08, 0.06};
        wc.k_p = {0.25, 0.25};
        wc.k_q = {1.0, 1.0};
    }
};

}  // namespace

TEST_CASE("criterion 1: snapshot accuracy against the time-domain oracle") {
    const double t0 = now_s();
    OracleRig r;
    const double dt = 2.5e-5;
    const Trajectory traj =
        simulate_fault(r.c, 0, r.d, r.pc, r.wc, "f2", SimDeviceParams{}, dt, 0.1, 0.45, 0.6);
    const PrefaultState pre = solve_power_flow(r.c, 0, r.d, r.pc);
    const NortonSources ns = compute_norton_sources(r.c, 0, pre);
    const auto snaps = solve_snapshots(r.c, 0, "f2", ns, r.d.y, r.wc);
    const SnapshotErrorReport rep = compare_with_snapshots(traj, snaps);
    const double elapsed = now_s() - t0;

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "oracle errors fault-on %.2e (<=8e-4), steady %.2e (<=1e-4), cleared %.2e (<=1e-2), "
                  "%.1fs (<10s)",
                  rep.err_fault_on, rep.err_fault_steady, rep.err_fault_cleared, elapsed);
    verdict(1,
            rep.err_fault_on <= 8e-4 && rep.err_fault_steady <= 1e-4 &&
                rep.err_fault_cleared <= 1e-2 && elapsed < 10.0,
            buf);
}

TEST_CASE("criterion 2: closed-form agreement and trends on the two-machine-corridor grid") {
    const double t0 = now_s();
    const double x_l = 0.5, x_w = 0.1, i_n = 1.0, v_ref = 0.9;
    double worst = 0.0;
    bool trends = true;

    const int npts = 10;
    std::vector<std::vector<double>> vflt(npts, std::vector<double>(npts));
    std::vector<std::vector<double>> vclr(npts, std::vector<double>(npts));
    for (int a = 0; a < npts; ++a) {
        const double x_g = 0.05 + 0.45 * a / (npts - 1);
        StudyCase c = fixtures::two_bus_fig3(x_g, x_l, x_w, i_n, v_ref);
        c.options.fixed_point_tolerance = 1e-12;
        DispatchPoint d;
        d.y = {1};
        d.p_g = {0.0};
        d.p_w = {0.0};
        const PrefaultState pre = solve_power_flow(c, 0, d, PowerFlowControls::defaults(c));
        const NortonSources ns = compute_norton_sources(c, 0, pre);
        for (int b = 0; b < npts; ++b) {
            const double kq = 3.0 * b / (npts - 1);
            WindControls wc;
            wc.k_p = {0.0};
            wc.k_q = {kq};
            const auto snaps = solve_snapshots(c, 0, "mid", ns, d.y, wc);
            const TwoBusVoltages tb = two_bus_analytic(1.0, x_g, x_l, x_w, 1, kq, i_n, v_ref);
            vflt[static_cast<size_t>(a)][static_cast<size_t>(b)] = std::abs(snaps[1].v[2]);
            vclr[static_cast<size_t>(a)][static_cast<size_t>(b)] = std::abs(snaps[2].v[2]);
            worst = std::max(worst, std::abs(std::abs(snaps[1].v[2]) - tb.v_flt));
            worst = std::max(worst, std::abs(std::abs(snaps[2].v[2]) - tb.v_clr));
        }
    }
    for (int a = 0; a < npts; ++a)
        for (int b = 0; b + 1 < npts; ++b) {
            if (vflt[static_cast<size_t>(a)][static_cast<size_t>(b + 1)] <
                vflt[static_cast<size_t>(a)][static_cast<size_t>(b)] - 1e-9)
                trends = false;
            if (vclr[static_cast<size_t>(a)][static_cast<size_t>(b + 1)] <
                vclr[static_cast<size_t>(a)][static_cast<size_t>(b)] - 1e-9)
                trends = false;
        }
    for (int b = 0; b < npts; ++b)
        for (int a = 0; a + 1 < npts; ++a) {
            if (vflt[static_cast<size_t>(a + 1)][static_cast<size_t>(b)] >
                vflt[static_cast<size_t>(a)][static_cast<size_t>(b)] + 1e-9)
                trends = false;
            if (vclr[static_cast<size_t>(a + 1)][static_cast<size_t>(b)] <
                vclr[static_cast<size_t>(a)][static_cast<size_t>(b)] - 1e-9)
                trends = false;
        }
    const double elapsed = now_s() - t0;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "10x10 grid max |snapshot - closed form| %.2e (<=1e-6), trends %s, %.2fs (<1s)",
                  worst, trends ? "hold" : "violated", elapsed);
    verdict(2, worst <= 1e-6 && trends && elapsed < 1.0, buf);
}

TEST_CASE("criterion 3: mechanism signs at fault occurrence") {
    bool machine_sign = true, wind_prop = true;
    double worst_prop = 0.0;

    // Pure-reactive prefault fixture: the default frozen-phasor model keeps
    // the proportionality to within second order of the angle shift.
    {
        StudyCase c = fixtures::mechanism_case();
        DispatchPoint d;
        d.y = {1};
        d.p_g = {0.0};
        d.p_w = {0.0};
        PowerFlowControls pc = PowerFlowControls::defaults(c);
        pc.windfarm_q = {0.15};
        const PrefaultState pre = solve_power_flow(c, 0, d, pc);
        const NortonSources ns = compute_norton_sources(c, 0, pre);
        const Snapshot s1 = snapshot_fault_occurrence(c, 0, "f1", ns, d.y, WindControls::midpoint(c));
        if (!(std::abs(s1.v[0]) < std::abs(pre.v[0]) && s1.machine_q[0] > pre.machine_q[0]))
            machine_sign = false;
        const double dev = std::abs(s1.wind_q[0] / pre.wind_q[0] -
                                    std::abs(s1.v[2]) / std::abs(pre.v[2]));
        worst_prop = std::max(worst_prop, dev);
    }

    // Loaded fixtures under re-aligned dq freezing: proportionality is a model
    // identity; the committed machines' var must still rise with the sag.
    struct Pick {
        StudyCase c;
        DispatchPoint d;
        std::vector<double> qw;
        std::string fault;
    };
    std::vector<Pick> picks;
    {
        Pick p1{fixtures::tdsim_fixture(), {}, {0.08, 0.06}, "f2"};
        p1.d.y = {1, 1};
        p1.d.p_g = {0.3, 0.2};
        p1.d.p_w = {0.3, 0.25};
        picks.push_back(std::move(p1));
        Pick p2{fixtures::five_bus(), {}, {0.1, 0.08}, "f2"};
        p2.c.faults[0].fault_admittance = 30.0;  // keep the pocket phase-anchored
        p2.d.y = {1, 1};
        p2.d.p_g = {0.2, 0.1};
        p2.d.p_w = {0.3, 0.2};
        picks.push_back(std::move(p2));
    }
    for (auto& pick : picks) {
        pick.c.options.wind_freeze_dq = true;
        PowerFlowControls pc = PowerFlowControls::defaults(pick.c);
        pc.windfarm_q = pick.qw;
        const PrefaultState pre = solve_power_flow(pick.c, 0, pick.d, pc);
        const NortonSources ns = compute_norton_sources(pick.c, 0, pre);
        const Snapshot s1 =
            snapshot_fault_occurrence(pick.c, 0, pick.fault, ns, pick.d.y, WindControls::midpoint(pick.c));
        for (size_t g = 0; g < pick.c.machines.size(); ++g) {
            const int bus = pick.c.machines[g].bus;
            if (std::abs(s1.v[bus]) < std::abs(pre.v[bus]) - 1e-9 &&
                s1.machine_q[g] <= pre.machine_q[g])
                machine_sign = false;
        }
        for (size_t w = 0; w < pick.c.windfarms.size(); ++w) {
            const int bus = pick.c.windfarms[w].bus;
            const double dev = std::abs(s1.wind_q[w] / pre.wind_q[w] -
                                        std::abs(s1.v[bus]) / std::abs(pre.v[bus]));
            worst_prop = std::max(worst_prop, dev);
        }
    }

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "machine var rises on every sagging terminal: %s; wind var proportionality dev %.2e "
                  "(<=1e-6)",
                  machine_sign ? "yes" : "no", worst_prop);
    verdict(3, machine_sign && worst_prop <= 1e-6, buf);
}

TEST_CASE("criterion 4: embedded optimization engines against their oracles") {
    bool milp_ok = true, lp_ok = true, nlp_ok = true;
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> ar(-1.0, 1.0), br(0.5, 2.5);

    // MILP vs exhaustive enumeration (binary-only instances).
    for (int trial = 0; trial < 6 && milp_ok; ++trial) {
        const int nb = 6 + trial;  // 6..11 binaries
        ProblemIR p;
        Eigen::MatrixXd a(4, nb);
        Eigen::VectorXd b(4), c(nb);
        for (int j = 0; j < nb; ++j) {
            p.add_variable("b" + std::to_string(j), 0, 1, VarKind::kBinary);
            c[j] = ar(rng);
            p.add_objective_term(j, c[j]);
        }
        for (int i = 0; i < 4; ++i) {
            LinearConstraint lc;
            lc.sense = Sense::kLe;
            lc.rhs = br(rng);
            b[i] = lc.rhs;
            for (int j = 0; j < nb; ++j) {
                a(i, j) = ar(rng);
                lc.terms.push_back({j, a(i, j)});
            }
            p.add_linear(std::move(lc));
        }
        double best = 1e300;
        for (long mask = 0; mask < (1L << nb); ++mask) {
            Eigen::VectorXd x(nb);
            for (int j = 0; j < nb; ++j) x[j] = (mask >> j) & 1 ? 1.0 : 0.0;
            if (((a * x).array() <= b.array() + 1e-12).all()) best = std::min(best, c.dot(x));
        }
        Solution s = solve_milp(p);
        if (s.status != SolveStatus::kOptimal || std::abs(s.objective - best) > 1e-6) milp_ok = false;
    }

    // LP primal-dual gap on random boxed instances.
    double worst_gap = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const int n = 40, m = 20;
        ProblemIR p;
        Eigen::MatrixXd a(m, n);
        Eigen::VectorXd b(m), c(n);
        for (int j = 0; j < n; ++j) {
            c[j] = ar(rng);
            p.add_variable("x" + std::to_string(j), 0.0, 1.5, VarKind::kContinuous);
            p.add_objective_term(j, c[j]);
        }
        for (int i = 0; i < m; ++i) {
            LinearConstraint lc;
            lc.sense = Sense::kLe;
            lc.rhs = br(rng);
            b[i] = lc.rhs;
            for (int j = 0; j < n; ++j) {
                a(i, j) = ar(rng);
                lc.terms.push_back({j, a(i, j)});
            }
            p.add_linear(std::move(lc));
        }
        Solution s = solve_lp(p);
        if (s.status != SolveStatus::kOptimal) {
            lp_ok = false;
            break;
        }
        Eigen::VectorXd mu(m);
        for (int i = 0; i < m; ++i) mu[i] = -s.duals_linear[static_cast<size_t>(i)];
        double bound = -mu.dot(b);
        const Eigen::VectorXd red = c + a.transpose() * mu;
        for (int j = 0; j < n; ++j) bound += std::min(0.0, red[j] * 1.5);
        worst_gap = std::max(worst_gap, std::abs(s.objective - bound));
        if (mu.minCoeff() < -1e-9) lp_ok = false;
    }
    if (worst_gap > 1e-7) lp_ok = false;

    // NLP multipliers against finite differences on an equality QP.
    double worst_rel = 0.0;
    {
        const int n = 5, m = 2;
        Eigen::MatrixXd a(m, n);
        Eigen::VectorXd b(m);
        for (int i = 0; i < m; ++i) {
            b[i] = 0.4 + 0.2 * i;
            for (int j = 0; j < n; ++j) a(i, j) = ar(rng);
        }
        auto build = [&](int which, double eps) {
            ProblemIR p;
            for (int j = 0; j < n; ++j)
                p.add_variable("x" + std::to_string(j), -3.0, 3.0, VarKind::kContinuous);
            const int t = p.add_variable("t", -1e30, 1e30, VarKind::kContinuous);
            p.add_objective_term(t, 1.0);
            QuadConstraint epi;
            epi.sense = Sense::kLe;
            epi.rhs = 0.0;
            for (int j = 0; j < n; ++j) epi.quad.push_back({j, j, 1.0});
            epi.quad.push_back({0, 2, 0.3});
            epi.lin = {{t, -1.0}};
            p.add_quadratic(std::move(epi));
            for (int i = 0; i < m; ++i) {
                LinearConstraint lc;
                lc.sense = Sense::kEq;
                lc.rhs = b[i] + (i == which ? eps : 0.0);
                for (int j = 0; j < n; ++j) lc.terms.push_back({j, a(i, j)});
                p.add_linear(std::move(lc));
            }
            return p;
        };
        Solution s0 = solve_nlp(build(-1, 0.0));
        if (s0.status != SolveStatus::kOptimal) nlp_ok = false;
        const double eps = 1e-5;
        for (int i = 0; i < m && nlp_ok; ++i) {
            Solution s1 = solve_nlp(build(i, eps), s0.x);
            const double fd = (s1.objective - s0.objective) / eps;
            const double lam = s0.duals_linear[static_cast<size_t>(i)];
            worst_rel = std::max(worst_rel, std::abs(fd - lam) / std::max(1.0, std::abs(lam)));
        }
        if (worst_rel > 1e-3) nlp_ok = false;
    }

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "milp==enumeration %s; lp duality gap %.2e (<=1e-7); nlp multiplier fd dev %.2e "
                  "(<=1e-3 rel)",
                  milp_ok ? "yes" : "no", worst_gap, worst_rel);
    verdict(4, milp_ok && lp_ok && nlp_ok, buf);
}

TEST_CASE("criterion 5: strength-definition agreement and relaxation containment") {
    // Cross-definition agreement at solved operating points.
    double worst_rel = 0.0;
    {
        struct Pt {
            StudyCase c;
            DispatchPoint d;
        };
        std::vector<Pt> pts;
        Pt a{fixtures::five_bus(), {}};
        a.d.y = {1, 1};
        a.d.p_g = {0.2, 0.1};
        a.d.p_w = {0.3, 0.2};
        pts.push_back(std::move(a));
        Pt b{fixtures::tdsim_fixture(), {}};
        b.d.y = {1, 1};
        b.d.p_g = {0.3, 0.2};
        b.d.p_w = {0.3, 0.25};
        pts.push_back(std::move(b));
        for (const auto& pt : pts) {
            const PrefaultState pre = solve_power_flow(pt.c, 0, pt.d, PowerFlowControls::defaults(pt.c));
            NetworkMatrices net = build_admittance(pt.c, 0, Stage::kPrefault, "",
                                                   MachineModel::kSubtransient, pt.d.y, pre.v);
            std::vector<int> wb;
            for (const auto& wf : pt.c.windfarms) wb.push_back(wf.bus);
            const MrscrReport ri = evaluate_mrscr_impedance(impedance_rows(net, wb), pre.v, pre.wind_p, pt.c);
            const MrscrReport re = evaluate_mrscr_equivalent(pt.c, 0, pt.d.y, pre.wind_current, pre.v);
            for (size_t w = 0; w < pt.c.windfarms.size(); ++w)
                worst_rel = std::max(worst_rel,
                                     std::abs(ri.per_windfarm[w].value - re.per_windfarm[w].value) /
                                         re.per_windfarm[w].value);
        }
    }

    // 1000-sample Monte-Carlo containment on the five-bus case.
    StudyCase c = fixtures::five_bus();
    const RelaxedMrscrBlock blk = relaxed_mrscr_rows(c, 0);
    std::mt19937 rng(404);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> vmag(0.9, 1.1), vang(-0.08, 0.08);
    const std::vector<int> wind_buses = {3, 4};
    int tested = 0, violations = 0, samples = 0;
    while (tested < 1000 && samples < 8000) {
        ++samples;
        std::vector<int> y = {coin(rng), coin(rng)};
        if (!y[0] && !y[1]) continue;
        std::vector<std::vector<int>> bits(2, std::vector<int>(3));
        std::vector<double> p_del(2);
        for (int j = 0; j < 2; ++j) {
            double cur = 0.0;
            const double dp = curtail_step(c, 0, j);
            for (int n = 0; n < 3; ++n) {
                bits[static_cast<size_t>(j)][static_cast<size_t>(n)] = coin(rng);
                cur += bits[static_cast<size_t>(j)][static_cast<size_t>(n)] * std::pow(2.0, n) * dp;
            }
            p_del[static_cast<size_t>(j)] = c.windfarms[static_cast<size_t>(j)].p_forecast[0] - cur;
        }
        NetworkMatrices net =
            build_admittance(c, 0, Stage::kPrefault, "", MachineModel::kSubtransient, y);
        const auto zrows = impedance_rows(net, wind_buses);
        ComplexVector v(c.n_buses());
        for (int i = 0; i < c.n_buses(); ++i) v[i] = std::polar(vmag(rng), vang(rng));
        const MrscrReport rep = evaluate_mrscr_impedance(zrows, v, p_del, c);
        bool exact_ok = true;
        for (const auto& e : rep.per_windfarm)
            if (!e.infinite && e.value < c.mrscr_threshold) exact_ok = false;
        if (!exact_ok) continue;
        ++tested;

        std::map<std::string, double> point;
        for (int g = 0; g < 2; ++g) point[master_var_y(0, g)] = y[static_cast<size_t>(g)];
        for (int w = 0; w < 2; ++w) {
            const ComplexVector& row = zrows.at(wind_buses[static_cast<size_t>(w)]);
            for (int k = 0; k < c.n_buses(); ++k) {
                point[mrscr_var_zr(0, w, k)] = row[k].real();
                point[mrscr_var_zi(0, w, k)] = row[k].imag();
            }
            for (int g = 0; g < 2; ++g) {
                const int bg = c.machines[static_cast<size_t>(g)].bus;
                point[mrscr_var_vr(0, w, g)] = y[static_cast<size_t>(g)] * row[bg].real();
                point[mrscr_var_vi(0, w, g)] = y[static_cast<size_t>(g)] * row[bg].imag();
            }
            for (int j = 0; j < 2; ++j) {
                const int bj = wind_buses[static_cast<size_t>(j)];
                const double zeta = std::abs(row[bj].real()) + std::abs(row[bj].imag());
                point[mrscr_var_zeta(0, w, j)] = zeta;
                for (int n = 0; n < 3; ++n)
                    point[mrscr_var_prod(0, w, j, n)] =
                        zeta * bits[static_cast<size_t>(j)][static_cast<size_t>(n)];
            }
        }
        for (int j = 0; j < 2; ++j)
            for (int n = 0; n < 3; ++n)
                point[mrscr_var_bit(0, j, n)] = bits[static_cast<size_t>(j)][static_cast<size_t>(n)];

        for (const auto& row : blk.rows) {
            double lhs = 0.0;
            for (const auto& t : row.terms) lhs += point.at(t.var) * t.coef;
            const bool ok = row.sense == Sense::kLe   ? lhs <= row.rhs + 1e-7
                            : row.sense == Sense::kGe ? lhs >= row.rhs - 1e-7
                                                      : std::abs(lhs - row.rhs) <= 1e-7;
            if (!ok) ++violations;
        }
    }

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "cross-definition dev %.2f%% (<=5%%); containment %d/1000 exact-feasible samples, %d "
                  "row violations",
                  100.0 * worst_rel, tested, violations);
    verdict(5, worst_rel <= 0.05 && tested == 1000 && violations == 0, buf);
}

TEST_CASE("criterion 6: decomposition resolves the engineered trip-risk case end to end") {
    const double t0 = now_s();
    StudyCase c = fixtures::tov_fixture(2);

    // Plain commitment: the snapshot chain must flag the clearance overvoltage.
    Schedule uc = solve_plain_uc(c);
    bool uc_flagged = false;
    {
        const DispatchPoint dp = uc.at(0);
        const PrefaultState pre = solve_power_flow(c, 0, dp, PowerFlowControls::defaults(c));
        const NortonSources ns = compute_norton_sources(c, 0, pre);
        const auto snaps = solve_snapshots(c, 0, "mid", ns, dp.y, WindControls::midpoint(c));
        const SecurityReport rep = check_ride_through(snaps, c);
        for (const auto& w : rep.per_windfarm)
            if (w.margin_clr < 0) uc_flagged = true;
    }

    GbdState st = run_gbd(c);
    const double po_final = st.history.empty() ? 1e30 : st.history.back().po_sum;
    const double uplift = (st.schedule.total_cost() - uc.total_cost()) / uc.total_cost();
    const double elapsed = now_s() - t0;

    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "plain-UC overvoltage flagged %s; converged %s in %d iters (<=15), sum PO %.2e "
                  "(<1e-4); reverified %s; cost uplift %.2f%% (>0); %.1fs (<300s)",
                  uc_flagged ? "yes" : "no", st.status == GbdStatus::kConverged ? "yes" : "no",
                  st.iterations(), po_final, st.reverification.passed ? "yes" : "no", 100.0 * uplift,
                  elapsed);
    verdict(6,
            uc_flagged && st.status == GbdStatus::kConverged && st.iterations() <= 15 &&
                po_final < 1e-4 && st.reverification.passed && uplift > 0 && uplift < 0.25 &&
                elapsed < 300.0,
            buf);
}

TEST_CASE("criterion 7: overvoltage-threshold and penetration sweeps reproduce the cost trends") {
    // Threshold sweep: tightening the ceiling never lowers the cost, and a
    // loose ceiling reaches a plateau where the remaining constraints rule.
    std::vector<double> ceilings = {1.40, 1.25, 1.10, 1.06};
    std::vector<double> costs;
    bool all_converged = true;
    for (double ceiling : ceilings) {
        StudyCase c = fixtures::tov_fixture(1);
        c.windfarms[0].v_trip_high = ceiling;
        GbdState st = run_gbd(c);
        if (st.status != GbdStatus::kConverged) all_converged = false;
        costs.push_back(st.schedule.total_cost());
    }
    bool tighten_monotone = true;
    for (size_t i = 0; i + 1 < costs.size(); ++i)
        if (costs[i + 1] < costs[i] - 1e-9) tighten_monotone = false;
    const bool plateau = std::abs(costs[1] - costs[0]) <= 1e-9;
    const bool activates = costs[2] > costs[0] + 1e-9;

    // Penetration sweep: cheap wind first lowers the cost; once the strength
    // wall binds, curtailment is the only remedy and its penalty turns the
    // cost upward. Generous dispatch headroom keeps the energy balance away.
    std::vector<double> scales = {0.6, 1.0, 1.4, 1.8, 2.2};
    std::vector<double> pen_costs;
    for (double s : scales) {
        StudyCase c = fixtures::tov_fixture(1);
        c.loads[0].p = {2.4};
        c.machines[0].p_min = 0.1;
        c.machines[1].p_min = 0.05;
        c.machines[0].cost_segments = {{2.4, 10.0}};
        c.machines[1].cost_segments = {{0.95, 14.0}};
        c.machines[0].init_p = 0.1;
        c.mrscr_threshold = 5.0;
        for (auto& wf : c.windfarms)
            for (auto& f : wf.p_forecast) f *= s;
        GbdState st = run_gbd(c);
        if (st.status != GbdStatus::kConverged) all_converged = false;
        pen_costs.push_back(st.schedule.total_cost());
    }
    const bool falls = pen_costs[1] <= pen_costs[0] + 1e-9 && pen_costs[2] <= pen_costs[1] + 1e-9;
    const bool rises = pen_costs.back() > pen_costs[2] + 1e-9;

    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "ceiling sweep costs %.2f/%.2f/%.2f/%.2f (plateau %s, tightening %s); penetration "
                  "sweep %.2f/%.2f/%.2f/%.2f/%.2f (falls then rises %s)",
                  costs[0], costs[1], costs[2], costs[3], plateau ? "yes" : "no",
                  tighten_monotone ? "monotone" : "broken", pen_costs[0], pen_costs[1], pen_costs[2],
                  pen_costs[3], pen_costs[4], (falls && rises) ? "yes" : "no");
    verdict(7, all_converged && tighten_monotone && plateau && activates && falls && rises, buf);
}

TEST_CASE("criterion 8: secure wind headroom strictly grows under the security-aware commitment") {
    StudyCase c = fixtures::tov_fixture(1);
    Schedule uc = solve_plain_uc(c);
    GbdState st = run_gbd(c);
    REQUIRE(st.status == GbdStatus::kConverged);

    StudyCase probe = c;
    probe.mrscr_threshold = 2.0;  // the strength wall, not the balance wall, must bind
    const double uc_scale = max_secure_wind_scale(probe, 0, uc.at(0).y);
    const double svsc_scale = max_secure_wind_scale(probe, 0, st.schedule.at(0).y);

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "max secure wind scale %.3f (plain) vs %.3f (security-aware): strict improvement %s",
                  uc_scale, svsc_scale, svsc_scale > uc_scale + 1e-6 ? "yes" : "no");
    verdict(8, svsc_scale > uc_scale + 1e-6, buf);
}
