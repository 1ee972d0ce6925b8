#include "svsc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "svsc/errors.hpp"

namespace svsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivTol = 1e-9;
constexpr double kEnterTol = 1e-9;
constexpr double kFeasTol = 1e-7;

// How each original variable maps into shifted nonnegative standard-form columns.
struct VarMap {
    enum class Kind { kShift, kMirror, kSplit } kind = Kind::kShift;
    int col = -1;       // primary column
    int col_neg = -1;   // negative part for kSplit
    double offset = 0;  // lb for kShift, ub for kMirror
    double range = kInf;  // finite => an upper-bound row is appended
};

struct Tableau {
    Eigen::MatrixXd a;        // m x ncols
    Eigen::VectorXd rhs;      // m
    Eigen::VectorXd objrow;   // reduced costs, ncols
    std::vector<int> basis;   // basic column per row
    std::vector<char> banned; // columns excluded from entering (artificials in phase 2)
    int m = 0, ncols = 0;

    void pivot(int r, int c) {
        const double piv = a(r, c);
        a.row(r) /= piv;
        rhs[r] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == r) continue;
            const double f = a(i, c);
            if (f == 0.0) continue;
            a.row(i) -= f * a.row(r);
            rhs[i] -= f * rhs[r];
        }
        const double fo = objrow[c];
        if (fo != 0.0) objrow -= fo * a.row(r).transpose();
        basis[static_cast<size_t>(r)] = c;
    }
};

// Runs the simplex loop on the current objective row. Returns false on
// unboundedness. Throws on stall.
bool run_simplex(Tableau& t, long& iters_left) {
    int stall = 0;
    bool bland = false;
    const int stall_cap = 2 * (t.m + t.ncols) + 10;
    while (true) {
        if (--iters_left <= 0) throw SolverError("LP_STALL", "simplex iteration cap exceeded");
        int enter = -1;
        if (!bland) {
            double best = -kEnterTol;
            for (int j = 0; j < t.ncols; ++j)
                if (!t.banned[static_cast<size_t>(j)] && t.objrow[j] < best) {
                    best = t.objrow[j];
                    enter = j;
                }
        } else {
            for (int j = 0; j < t.ncols; ++j)
                if (!t.banned[static_cast<size_t>(j)] && t.objrow[j] < -kEnterTol) {
                    enter = j;
                    break;
                }
        }
        if (enter < 0) return true;  // optimal

        int leave = -1;
        double best_ratio = kInf;
        for (int i = 0; i < t.m; ++i) {
            const double aie = t.a(i, enter);
            if (aie > kPivTol) {
                const double ratio = t.rhs[i] / aie;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 &&
                     (leave < 0 || t.basis[static_cast<size_t>(i)] < t.basis[static_cast<size_t>(leave)]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return false;  // unbounded direction

        t.pivot(leave, enter);

        // Degenerate pivots (zero ratio) do not move the objective; a long
        // run of them triggers Bland's rule to break any cycle.
        if (best_ratio <= 1e-12) {
            if (++stall > stall_cap) bland = true;
        } else {
            stall = 0;
        }
    }
}

Solution solve_impl(const ProblemIR& p, bool relax_binaries) {
    p.validate();
    if (!p.quadratic().empty() || !p.nonlinear().empty())
        throw ConfigError("LP_NONLINEAR", "simplex accepts linear problems only");
    if (!relax_binaries && p.has_binaries())
        throw ConfigError("LP_BINARY", "simplex accepts continuous problems only");

    const int n = p.n_vars();
    std::vector<VarMap> vmap(static_cast<size_t>(n));
    int n_struct = 0;
    for (int j = 0; j < n; ++j) {
        const auto& v = p.variable(j);
        VarMap& m = vmap[static_cast<size_t>(j)];
        if (std::isfinite(v.lb)) {
            m.kind = VarMap::Kind::kShift;
            m.offset = v.lb;
            m.col = n_struct++;
            if (std::isfinite(v.ub)) m.range = v.ub - v.lb;
        } else if (std::isfinite(v.ub)) {
            m.kind = VarMap::Kind::kMirror;
            m.offset = v.ub;
            m.col = n_struct++;
        } else {
            m.kind = VarMap::Kind::kSplit;
            m.col = n_struct++;
            m.col_neg = n_struct++;
        }
    }

    // Structural coefficient of original var j in standard-form columns.
    auto add_coef = [&](Eigen::VectorXd& row, double& rhs, int j, double a) {
        const VarMap& m = vmap[static_cast<size_t>(j)];
        switch (m.kind) {
            case VarMap::Kind::kShift:
                row[m.col] += a;
                rhs -= a * m.offset;
                break;
            case VarMap::Kind::kMirror:
                row[m.col] -= a;
                rhs -= a * m.offset;
                break;
            case VarMap::Kind::kSplit:
                row[m.col] += a;
                row[m.col_neg] -= a;
                break;
        }
    };

    struct StdRow {
        Eigen::VectorXd a;
        double rhs = 0;
        Sense sense = Sense::kLe;
        int orig = -1;       // original linear row index, -1 for bound rows
        bool flipped = false;
    };
    std::vector<StdRow> rows;
    for (size_t i = 0; i < p.linear().size(); ++i) {
        const auto& c = p.linear()[i];
        StdRow r;
        r.a = Eigen::VectorXd::Zero(n_struct);
        r.rhs = c.rhs;
        r.sense = c.sense;
        r.orig = static_cast<int>(i);
        for (const auto& t : c.terms) add_coef(r.a, r.rhs, t.var, t.coef);
        rows.push_back(std::move(r));
    }
    for (int j = 0; j < n; ++j) {
        const VarMap& m = vmap[static_cast<size_t>(j)];
        if (m.kind == VarMap::Kind::kShift && std::isfinite(m.range)) {
            StdRow r;
            r.a = Eigen::VectorXd::Zero(n_struct);
            r.a[m.col] = 1.0;
            r.rhs = m.range;
            r.sense = Sense::kLe;
            rows.push_back(std::move(r));
        }
    }
    for (auto& r : rows) {
        if (r.rhs < 0) {
            r.a = -r.a;
            r.rhs = -r.rhs;
            r.flipped = true;
            if (r.sense == Sense::kLe) r.sense = Sense::kGe;
            else if (r.sense == Sense::kGe) r.sense = Sense::kLe;
        }
    }

    const int m = static_cast<int>(rows.size());
    int n_slack = 0, n_art = 0;
    for (const auto& r : rows) {
        if (r.sense != Sense::kEq) ++n_slack;
        if (r.sense != Sense::kLe) ++n_art;
    }
    const int ncols = n_struct + n_slack + n_art;

    Tableau t;
    t.m = m;
    t.ncols = ncols;
    t.a = Eigen::MatrixXd::Zero(m, ncols);
    t.rhs = Eigen::VectorXd::Zero(m);
    t.objrow = Eigen::VectorXd::Zero(ncols);
    t.basis.assign(static_cast<size_t>(m), -1);
    t.banned.assign(static_cast<size_t>(ncols), 0);

    std::vector<int> slack_col(static_cast<size_t>(m), -1), art_col(static_cast<size_t>(m), -1);
    int next_slack = n_struct, next_art = n_struct + n_slack;
    for (int i = 0; i < m; ++i) {
        t.a.row(i).head(n_struct) = rows[static_cast<size_t>(i)].a.transpose();
        t.rhs[i] = rows[static_cast<size_t>(i)].rhs;
        switch (rows[static_cast<size_t>(i)].sense) {
            case Sense::kLe:
                slack_col[static_cast<size_t>(i)] = next_slack;
                t.a(i, next_slack) = 1.0;
                t.basis[static_cast<size_t>(i)] = next_slack;
                ++next_slack;
                break;
            case Sense::kGe:
                slack_col[static_cast<size_t>(i)] = next_slack;
                t.a(i, next_slack) = -1.0;
                ++next_slack;
                art_col[static_cast<size_t>(i)] = next_art;
                t.a(i, next_art) = 1.0;
                t.basis[static_cast<size_t>(i)] = next_art;
                ++next_art;
                break;
            case Sense::kEq:
                art_col[static_cast<size_t>(i)] = next_art;
                t.a(i, next_art) = 1.0;
                t.basis[static_cast<size_t>(i)] = next_art;
                ++next_art;
                break;
        }
    }

    long iters_left = 200000;

    // Phase 1: minimize the artificial sum.
    bool need_phase1 = n_art > 0;
    if (need_phase1) {
        Eigen::VectorXd c1 = Eigen::VectorXd::Zero(ncols);
        for (int i = 0; i < m; ++i)
            if (art_col[static_cast<size_t>(i)] >= 0) c1[art_col[static_cast<size_t>(i)]] = 1.0;
        t.objrow = c1;
        for (int i = 0; i < m; ++i) {
            const int b = t.basis[static_cast<size_t>(i)];
            if (c1[b] != 0.0) t.objrow -= c1[b] * t.a.row(i).transpose();
        }
        if (!run_simplex(t, iters_left))
            throw SolverError("LP_STALL", "phase-1 simplex reported an unbounded direction");
        double art_sum = 0.0;
        for (int i = 0; i < m; ++i) {
            const int b = t.basis[static_cast<size_t>(i)];
            if (b >= n_struct + n_slack) art_sum += t.rhs[i];
        }
        if (art_sum > kFeasTol) {
            Solution s;
            s.status = SolveStatus::kInfeasible;
            return s;
        }
        // Ban artificials and try to drive any basic ones (at zero) out.
        for (int j = n_struct + n_slack; j < ncols; ++j) t.banned[static_cast<size_t>(j)] = 1;
        for (int i = 0; i < m; ++i) {
            if (t.basis[static_cast<size_t>(i)] < n_struct + n_slack) continue;
            for (int j = 0; j < n_struct + n_slack; ++j) {
                if (std::abs(t.a(i, j)) > 1e-7) {
                    t.pivot(i, j);
                    break;
                }
            }
        }
    }

    // Phase 2: original objective, minimized internally.
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(ncols);
    const double sense_mult = p.obj_sense == ObjSense::kMin ? 1.0 : -1.0;
    double obj_const = 0.0;
    for (const auto& term : p.objective()) {
        const VarMap& vm = vmap[static_cast<size_t>(term.var)];
        const double a = sense_mult * term.coef;
        switch (vm.kind) {
            case VarMap::Kind::kShift:
                c2[vm.col] += a;
                obj_const += a * vm.offset;
                break;
            case VarMap::Kind::kMirror:
                c2[vm.col] -= a;
                obj_const += a * vm.offset;
                break;
            case VarMap::Kind::kSplit:
                c2[vm.col] += a;
                c2[vm.col_neg] -= a;
                break;
        }
    }
    t.objrow = c2;
    for (int i = 0; i < m; ++i) {
        const int b = t.basis[static_cast<size_t>(i)];
        if (c2[b] != 0.0) t.objrow -= c2[b] * t.a.row(i).transpose();
    }
    const bool bounded = run_simplex(t, iters_left);

    Solution s;
    if (!bounded) {
        s.status = SolveStatus::kUnbounded;
        return s;
    }
    s.status = SolveStatus::kOptimal;

    Eigen::VectorXd xstd = Eigen::VectorXd::Zero(ncols);
    for (int i = 0; i < m; ++i) xstd[t.basis[static_cast<size_t>(i)]] = std::max(0.0, t.rhs[i]);
    s.x = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        const VarMap& vm = vmap[static_cast<size_t>(j)];
        switch (vm.kind) {
            case VarMap::Kind::kShift: s.x[j] = vm.offset + xstd[vm.col]; break;
            case VarMap::Kind::kMirror: s.x[j] = vm.offset - xstd[vm.col]; break;
            case VarMap::Kind::kSplit: s.x[j] = xstd[vm.col] - xstd[vm.col_neg]; break;
        }
    }
    s.objective = p.objective_value(s.x);

    // Duals of the original rows from the reduced costs of their slack or
    // artificial columns: reduced cost of column +/-e_i equals -/+ y_i.
    s.duals_linear.assign(p.linear().size(), 0.0);
    for (int i = 0; i < m; ++i) {
        const int orig = rows[static_cast<size_t>(i)].orig;
        if (orig < 0) continue;
        double y;
        if (rows[static_cast<size_t>(i)].sense == Sense::kLe)
            y = -t.objrow[slack_col[static_cast<size_t>(i)]];
        else if (rows[static_cast<size_t>(i)].sense == Sense::kGe)
            y = t.objrow[slack_col[static_cast<size_t>(i)]];
        else
            y = -t.objrow[art_col[static_cast<size_t>(i)]];
        if (rows[static_cast<size_t>(i)].flipped) y = -y;
        // Internal minimization sense back to the problem's own sense.
        s.duals_linear[static_cast<size_t>(orig)] = sense_mult * y;
    }
    (void)obj_const;
    return s;
}

}  // namespace

Solution solve_lp(const ProblemIR& p) { return solve_impl(p, false); }

Solution solve_lp_relaxation(const ProblemIR& p) { return solve_impl(p, true); }

}  // namespace svsc
