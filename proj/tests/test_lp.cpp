#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <limits>
#include <random>

#include "svsc/errors.hpp"
#include "svsc/simplex.hpp"

using namespace svsc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Brute-force oracle for tiny LPs: enumerate every candidate vertex (each
// n-subset of tight constraints), keep the feasible ones, take the best.
double vertex_enumeration_optimum(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& c, bool* found) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    double best = kInf;
    *found = false;
    std::vector<int> idx(static_cast<size_t>(n));
    std::function<void(int, int)> rec = [&](int start, int k) {
        if (k == n) {
            Eigen::MatrixXd mat(n, n);
            Eigen::VectorXd rhs(n);
            for (int i = 0; i < n; ++i) {
                mat.row(i) = a.row(idx[static_cast<size_t>(i)]);
                rhs[i] = b[idx[static_cast<size_t>(i)]];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
            if (!lu.isInvertible()) return;
            Eigen::VectorXd x = lu.solve(rhs);
            if (((a * x).array() <= b.array() + 1e-9).all()) {
                *found = true;
                best = std::min(best, c.dot(x));
            }
            return;
        }
        for (int i = start; i < m; ++i) {
            idx[static_cast<size_t>(k)] = i;
            rec(i + 1, k + 1);
        }
    };
    rec(0, 0);
    return best;
}

}  // namespace

TEST_CASE("one-dimensional maximization with a binding row and its dual") {
    ProblemIR p;
    p.obj_sense = ObjSense::kMax;
    const int x = p.add_variable("x", 0.0, kInf, VarKind::kContinuous);
    p.add_objective_term(x, 1.0);
    p.add_linear({"cap", {{x, 1.0}}, Sense::kLe, 3.0});
    Solution s = solve_lp(p);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(s.x[x] == doctest::Approx(3.0));
    CHECK(s.objective == doctest::Approx(3.0));
    CHECK(s.duals_linear[0] == doctest::Approx(1.0));
}

TEST_CASE("contradictory rows are certified infeasible") {
    ProblemIR p;
    const int x = p.add_variable("x", -kInf, kInf, VarKind::kContinuous);
    p.add_objective_term(x, 1.0);
    p.add_linear({"hi", {{x, 1.0}}, Sense::kLe, 0.0});
    p.add_linear({"lo", {{x, 1.0}}, Sense::kGe, 1.0});
    CHECK(solve_lp(p).status == SolveStatus::kInfeasible);
}

TEST_CASE("unbounded direction is reported") {
    ProblemIR p;
    const int x = p.add_variable("x", 0.0, kInf, VarKind::kContinuous);
    p.add_objective_term(x, 1.0);
    p.obj_sense = ObjSense::kMax;
    CHECK(solve_lp(p).status == SolveStatus::kUnbounded);
}

TEST_CASE("tiny random LPs match brute-force vertex enumeration") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ar(-1.0, 1.0), sr(0.2, 1.5);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 3;  // 2..4 variables
        const int m = 3 + trial % 4;
        Eigen::VectorXd x0(n), c(n);
        for (int j = 0; j < n; ++j) {
            x0[j] = ar(rng);
            c[j] = ar(rng);
        }
        // m random halfspaces through an interior point plus a surrounding box.
        Eigen::MatrixXd a(m + 2 * n, n);
        Eigen::VectorXd b(m + 2 * n);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) a(i, j) = ar(rng);
            b[i] = a.row(i).dot(x0) + sr(rng);
        }
        for (int j = 0; j < n; ++j) {
            a.row(m + 2 * j).setZero();
            a(m + 2 * j, j) = 1.0;
            b[m + 2 * j] = 3.0;
            a.row(m + 2 * j + 1).setZero();
            a(m + 2 * j + 1, j) = -1.0;
            b[m + 2 * j + 1] = 2.0;
        }

        ProblemIR p;
        for (int j = 0; j < n; ++j) {
            p.add_variable("x" + std::to_string(j), -kInf, kInf, VarKind::kContinuous);
            p.add_objective_term(j, c[j]);
        }
        for (int i = 0; i < a.rows(); ++i) {
            LinearConstraint lc;
            lc.name = "r" + std::to_string(i);
            lc.sense = Sense::kLe;
            lc.rhs = b[i];
            for (int j = 0; j < n; ++j)
                if (a(i, j) != 0.0) lc.terms.push_back({j, a(i, j)});
            p.add_linear(std::move(lc));
        }
        Solution s = solve_lp(p);
        REQUIRE(s.status == SolveStatus::kOptimal);
        bool found = false;
        const double oracle = vertex_enumeration_optimum(a, b, c, &found);
        REQUIRE(found);
        CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-7));
    }
}

TEST_CASE("medium LPs certify optimality through weak duality") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> ar(-1.0, 1.0), br(0.5, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
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
            for (int j = 0; j < n; ++j) a(i, j) = ar(rng);
            b[i] = br(rng);  // x = 0 is feasible
            LinearConstraint lc;
            lc.name = "r" + std::to_string(i);
            lc.sense = Sense::kLe;
            lc.rhs = b[i];
            for (int j = 0; j < n; ++j) lc.terms.push_back({j, a(i, j)});
            p.add_linear(std::move(lc));
        }
        Solution s = solve_lp(p);
        REQUIRE(s.status == SolveStatus::kOptimal);

        // Multipliers mu = -dual >= 0 for <= rows of a minimization; the
        // Lagrangian bound must close the gap.
        Eigen::VectorXd mu(m);
        for (int i = 0; i < m; ++i) {
            mu[i] = -s.duals_linear[static_cast<size_t>(i)];
            CHECK(mu[i] >= -1e-9);
        }
        double bound = -mu.dot(b);
        const Eigen::VectorXd red = c + a.transpose() * mu;
        for (int j = 0; j < n; ++j) bound += std::min(red[j] * 0.0, red[j] * 1.5);
        CHECK(s.objective - bound <= 1e-7 * std::max(1.0, std::abs(s.objective)));
        CHECK(s.objective - bound >= -1e-7 * std::max(1.0, std::abs(s.objective)));
    }
}

TEST_CASE("classic degenerate cycling example terminates") {
    // Beale's cycling LP; the anti-cycling rule must finish it.
    ProblemIR p;
    for (int j = 0; j < 4; ++j) p.add_variable("x" + std::to_string(j), 0.0, kInf, VarKind::kContinuous);
    p.add_objective_term(0, -0.75);
    p.add_objective_term(1, 150.0);
    p.add_objective_term(2, -0.02);
    p.add_objective_term(3, 6.0);
    p.add_linear({"r1", {{0, 0.25}, {1, -60.0}, {2, -0.04}, {3, 9.0}}, Sense::kLe, 0.0});
    p.add_linear({"r2", {{0, 0.5}, {1, -90.0}, {2, -0.02}, {3, 3.0}}, Sense::kLe, 0.0});
    p.add_linear({"r3", {{2, 1.0}}, Sense::kLe, 1.0})
        ;
    Solution s = solve_lp(p);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(-0.05));
}
