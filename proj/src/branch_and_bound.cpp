#include "svsc/branch_and_bound.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "svsc/errors.hpp"
#include "svsc/simplex.hpp"

namespace svsc {

namespace {

struct Node {
    long id = 0;
    double bound = 0.0;  // parent LP objective in internal (min) sense
    std::vector<std::pair<int, int>> fixings;  // (binary var, value)
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // lower bound first
        return a.id > b.id;                                // then FIFO
    }
};

}  // namespace

Solution solve_milp(const ProblemIR& p, const MilpOptions& opts) {
    p.validate();
    if (!p.quadratic().empty() || !p.nonlinear().empty())
        throw ConfigError("MILP_NONLINEAR", "branch and bound accepts linear problems only");
    for (const auto& v : p.variables())
        if (v.kind == VarKind::kBinary && (v.lb < -1e-12 || v.ub > 1.0 + 1e-12))
            throw ConfigError("MILP_BINARY", "binary variable '" + v.name + "' must live in [0,1]");

    std::vector<int> bins;
    for (int j = 0; j < p.n_vars(); ++j)
        if (p.variable(j).kind == VarKind::kBinary) bins.push_back(j);

    const double sense_mult = p.obj_sense == ObjSense::kMin ? 1.0 : -1.0;

    // Pseudo-costs: average internal-objective degradation per unit of
    // fractionality, one pair per binary.
    std::vector<double> pc_up(bins.size(), 0.0), pc_dn(bins.size(), 0.0);
    std::vector<long> pc_up_n(bins.size(), 0), pc_dn_n(bins.size(), 0);
    {
        std::vector<double> c_abs(static_cast<size_t>(p.n_vars()), 0.0);
        for (const auto& t : p.objective()) c_abs[static_cast<size_t>(t.var)] += std::abs(t.coef);
        for (size_t k = 0; k < bins.size(); ++k) {
            pc_up[k] = c_abs[static_cast<size_t>(bins[k])] + 1.0;
            pc_dn[k] = c_abs[static_cast<size_t>(bins[k])] + 1.0;
        }
    }

    auto solve_node = [&](const std::vector<std::pair<int, int>>& fixings, Solution& out) {
        ProblemIR q = p;  // bounds are the only thing nodes change
        for (auto [var, val] : fixings) q.set_bounds(var, val, val);
        out = solve_lp_relaxation(q);
        return out.status == SolveStatus::kOptimal;
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push({next_id++, -1e300, {}});

    Solution incumbent;
    bool have_incumbent = false;
    double incumbent_internal = 1e300;
    long nodes = 0;
    bool node_limit_hit = false;

    double proven_bound = -1e300;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound >= incumbent_internal - 1e-12) continue;  // pruned by bound

        // Global bound: everything unexplored is at least this good.
        proven_bound = node.bound;

        if (++nodes > opts.node_limit) {
            node_limit_hit = true;
            break;
        }

        Solution lp;
        if (!solve_node(node.fixings, lp)) continue;  // infeasible node
        if (lp.status == SolveStatus::kUnbounded)
            throw SolverError("MILP_UNBOUNDED", "LP relaxation unbounded; add finite bounds");
        const double lp_internal = sense_mult * lp.objective;
        if (lp_internal >= incumbent_internal - 1e-12) continue;

        // Pseudo-cost update against the parent bound.
        if (!node.fixings.empty() && node.bound > -1e299) {
            const double gain = std::max(0.0, lp_internal - node.bound);
            const auto [var, val] = node.fixings.back();
            for (size_t k = 0; k < bins.size(); ++k)
                if (bins[k] == var) {
                    if (val == 1) {
                        pc_up[k] = (pc_up[k] * pc_up_n[k] + gain) / (pc_up_n[k] + 1);
                        ++pc_up_n[k];
                    } else {
                        pc_dn[k] = (pc_dn[k] * pc_dn_n[k] + gain) / (pc_dn_n[k] + 1);
                        ++pc_dn_n[k];
                    }
                    break;
                }
        }

        // Integer feasible?
        int branch_var = -1;
        size_t branch_k = 0;
        double best_score = -1.0;
        for (size_t k = 0; k < bins.size(); ++k) {
            const double xv = lp.x[bins[k]];
            const double frac = xv - std::floor(xv);
            const double dist = std::min(frac, 1.0 - frac);
            if (dist <= opts.int_tol) continue;
            const double score =
                std::max(pc_dn[k] * frac, 1e-9) * std::max(pc_up[k] * (1.0 - frac), 1e-9);
            if (score > best_score + 1e-15 ||
                (std::abs(score - best_score) <= 1e-15 && branch_var >= 0 && bins[k] < branch_var)) {
                best_score = score;
                branch_var = bins[k];
                branch_k = k;
            }
        }
        (void)branch_k;

        if (branch_var < 0) {
            if (lp_internal < incumbent_internal - 1e-12) {
                incumbent = lp;
                // Snap binaries exactly.
                for (int b : bins) incumbent.x[b] = std::round(incumbent.x[b]);
                incumbent.objective = p.objective_value(incumbent.x);
                incumbent_internal = sense_mult * incumbent.objective;
                have_incumbent = true;
            }
            continue;
        }

        // Deterministic child order: down (0) then up (1).
        for (int val : {0, 1}) {
            Node child;
            child.id = next_id++;
            child.bound = lp_internal;
            child.fixings = node.fixings;
            child.fixings.emplace_back(branch_var, val);
            if (child.bound < incumbent_internal - 1e-12) open.push(std::move(child));
        }

        if (have_incumbent) {
            const double gap =
                (incumbent_internal - proven_bound) / std::max(1.0, std::abs(incumbent_internal));
            if (gap <= opts.gap) break;
        }
    }

    if (!have_incumbent && !node_limit_hit) {
        Solution s;
        s.status = SolveStatus::kInfeasible;
        s.node_count = nodes;
        return s;
    }

    if (open.empty() && !node_limit_hit) proven_bound = incumbent_internal;

    incumbent.status = node_limit_hit ? SolveStatus::kIterationLimit : SolveStatus::kOptimal;
    incumbent.node_count = nodes;
    incumbent.best_bound = sense_mult * proven_bound;
    incumbent.gap = have_incumbent ? (incumbent_internal - proven_bound) /
                                         std::max(1.0, std::abs(incumbent_internal))
                                   : 1e300;
    return incumbent;
}

}  // namespace svsc
