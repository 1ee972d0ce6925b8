#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "svsc/errors.hpp"
#include "svsc/interior_point.hpp"
#include "svsc/subproblem.hpp"

using namespace svsc;

namespace {

Schedule tov_schedule(int horizon, bool near_on) {
    Schedule s;
    s.horizon = horizon;
    for (int t = 0; t < horizon; ++t) {
        const double load = t == 0 ? 1.3 : 1.2;
        s.y.push_back(near_on ? std::vector<int>{1, 1} : std::vector<int>{1, 0});
        s.p_g.push_back(near_on ? std::vector<double>{load - 0.55 - 0.1, 0.1}
                                : std::vector<double>{load - 0.55, 0.0});
        s.p_w.push_back({0.55});
        s.p_cur.push_back({0.0});
    }
    return s;
}

// Total ride-through violation of the standalone snapshot chain at the given
// reactive gain, everything else held at the subproblem's optimum.
double sweep_violation(const StudyCase& c, const Schedule& sched, const SubproblemResult& r,
                       double kq) {
    PowerFlowControls pc = PowerFlowControls::defaults(c);
    for (int g = 0; g < c.n_machines(); ++g)
        pc.machine[static_cast<size_t>(g)] = {DeviceSetpoint::Mode::kFixedQ,
                                              r.q_g[static_cast<size_t>(g)]};
    int slack = 0;
    for (int g = 0; g < c.n_machines(); ++g)
        if (sched.y[0][static_cast<size_t>(g)]) slack = g;
    pc.slack_machine = slack;
    pc.machine[static_cast<size_t>(slack)] = {DeviceSetpoint::Mode::kFixedV,
                                              std::abs(r.prefault_v[c.machines[static_cast<size_t>(slack)].bus])};
    pc.windfarm_q = r.q_w;
    const PrefaultState pre = solve_power_flow(c, 0, sched.at(0), pc);
    const NortonSources ns = compute_norton_sources(c, 0, pre);
    WindControls wc;
    wc.k_p = r.k_p;
    wc.k_q.assign(c.windfarms.size(), kq);
    const auto snaps = solve_snapshots(c, 0, c.faults[0].id, ns, sched.at(0).y, wc);
    const SecurityReport rep = check_ride_through(snaps, c);
    double total = 0.0;
    for (const auto& w : rep.per_windfarm)
        total += std::max(0.0, -w.margin_flt) + std::max(0.0, -w.margin_fss) +
                 std::max(0.0, -w.margin_clr);
    return total;
}

}  // namespace

TEST_CASE("no faults and a slack threshold give a zero penalty with interior gains") {
    StudyCase c = fixtures::five_bus();
    c.faults.clear();
    c.mrscr_threshold = 0.5;
    Schedule s;
    s.horizon = 1;
    s.y = {{1, 1}};
    s.p_g = {{0.1, 0.1}};
    s.p_w = {{0.0}};
    s.p_w[0] = {0.0, 0.0};
    s.p_cur = {{0.0, 0.0}};
    SubproblemModel m = build_subproblem(c, 0, s);
    SubproblemResult r = solve_subproblem(c, m);
    REQUIRE(r.status == SolveStatus::kOptimal);
    CHECK(r.penalty <= 1e-6);
    for (int w = 0; w < 2; ++w) {
        CHECK(r.k_p[static_cast<size_t>(w)] > c.windfarms[static_cast<size_t>(w)].kp_min + 1e-4);
        CHECK(r.k_q[static_cast<size_t>(w)] < c.windfarms[static_cast<size_t>(w)].kq_max - 1e-4);
    }
}

TEST_CASE("coupling rows pin the schedule and carry the multipliers") {
    StudyCase c = fixtures::tov_fixture(1);
    Schedule s = tov_schedule(1, false);
    SubproblemModel m = build_subproblem(c, 0, s);
    IpmOptions opts;
    opts.tolerance = c.options.ipm_tolerance;
    opts.max_iter = c.options.ipm_max_iter;
    Solution sol = solve_nlp(m.problem, m.warm_start, opts);
    REQUIRE(sol.status == SolveStatus::kOptimal);
    for (int g = 0; g < 2; ++g) {
        CHECK(sol.x[m.problem.var_index(sub_var_y(g))] ==
              doctest::Approx(s.y[0][static_cast<size_t>(g)]).epsilon(1e-6));
        CHECK(sol.x[m.problem.var_index(sub_var_pg(g))] ==
              doctest::Approx(s.p_g[0][static_cast<size_t>(g)]).epsilon(1e-6));
    }
    CHECK(sol.x[m.problem.var_index(sub_var_pw(0))] == doctest::Approx(0.55).epsilon(1e-6));
}

TEST_CASE("the engineered conflict yields a positive penalty that commitment resolves") {
    StudyCase c = fixtures::tov_fixture(1);

    SubproblemModel weak = build_subproblem(c, 0, tov_schedule(1, false));
    SubproblemResult rw = solve_subproblem(c, weak);
    REQUIRE(rw.status == SolveStatus::kOptimal);
    CHECK(rw.penalty > 1e-3);
    CHECK(rw.xi_fss[0][0] + rw.xi_clr[0][0] + rw.xi_flt[0][0] > 1e-3);
    CHECK(rw.snapshot_crosscheck_error <= 1e-5);
    // Committing the coupling-point unit must look attractive to the cut.
    CHECK(rw.lambda_y[1] < -1e-4);

    SubproblemModel strong = build_subproblem(c, 0, tov_schedule(1, true));
    SubproblemResult rs = solve_subproblem(c, strong);
    REQUIRE(rs.status == SolveStatus::kOptimal);
    CHECK(rs.penalty <= 1e-6);
    CHECK(rs.snapshot_crosscheck_error <= 1e-5);
    // Feasible side: the clearance slack vanishes outright.
    CHECK(rs.xi_clr[0][0] <= 1e-6);
}

TEST_CASE("optimized gains match a one-dimensional sweep of the standalone solver") {
    StudyCase c = fixtures::tov_fixture(1);
    SubproblemModel m = build_subproblem(c, 0, tov_schedule(1, false));
    SubproblemResult r = solve_subproblem(c, m);
    REQUIRE(r.status == SolveStatus::kOptimal);

    double sweep_min = 1e30;
    for (double kq = 0.0; kq <= 3.0 + 1e-9; kq += 0.05)
        sweep_min = std::min(sweep_min, sweep_violation(c, tov_schedule(1, false), r, kq));
    // The optimizer tunes more degrees of freedom than the sweep, so it can
    // only do at least as well (up to grid resolution).
    CHECK(r.penalty <= sweep_min + 2e-3);
    CHECK(sweep_min > 1e-3);  // no gain alone rescues the weak commitment
}

TEST_CASE("zero-penalty results produce vacuous cuts with the anchor identity") {
    StudyCase c = fixtures::tov_fixture(1);
    Schedule s = tov_schedule(1, true);
    SubproblemModel m = build_subproblem(c, 0, s);
    SubproblemResult r = solve_subproblem(c, m);
    REQUIRE(r.status == SolveStatus::kOptimal);
    BendersCut cut = make_benders_cut(r, s, 0);
    CHECK(cut.eval(s) == doctest::Approx(r.penalty));
    CHECK(std::abs(cut.eval(s)) <= 1e-6);

    // At a different commitment the vacuous cut stays satisfied.
    Schedule other = tov_schedule(1, false);
    CHECK(cut.eval(other) <= 1e-3);
}

TEST_CASE("wind-power multiplier approximates the finite-difference penalty slope") {
    StudyCase c = fixtures::tov_fixture(1);
    Schedule base = tov_schedule(1, false);
    SubproblemModel m0 = build_subproblem(c, 0, base);
    SubproblemResult r0 = solve_subproblem(c, m0);
    REQUIRE(r0.status == SolveStatus::kOptimal);

    const double eps = 1e-4;
    Schedule bumped = base;
    bumped.p_w[0][0] += eps;
    bumped.p_g[0][0] -= eps;  // keep the balance
    SubproblemModel m1 = build_subproblem(c, 0, bumped);
    SubproblemResult r1 = solve_subproblem(c, m1);
    REQUIRE(r1.status == SolveStatus::kOptimal);

    const double fd = (r1.penalty - r0.penalty) / eps;
    const double predicted = r0.lambda_pw[0] - r0.lambda_pg[0];
    CHECK(std::abs(fd - predicted) <= 0.15 * std::max(0.1, std::abs(predicted)));
}

TEST_CASE("tightening the overvoltage ceiling never lowers the penalty") {
    StudyCase c = fixtures::tov_fixture(1);
    double prev = -1.0;
    for (double ceiling : {1.2, 1.1, 1.05}) {
        StudyCase cc = c;
        cc.windfarms[0].v_trip_high = ceiling;
        SubproblemModel m = build_subproblem(cc, 0, tov_schedule(1, false));
        SubproblemResult r = solve_subproblem(cc, m);
        REQUIRE(r.status == SolveStatus::kOptimal);
        CHECK(r.penalty >= prev - 1e-6);
        prev = r.penalty;
    }
}

TEST_CASE("an out-of-range period is rejected") {
    StudyCase c = fixtures::tov_fixture(1);
    CHECK_THROWS_AS(build_subproblem(c, 3, tov_schedule(1, false)), ConfigError);
}
