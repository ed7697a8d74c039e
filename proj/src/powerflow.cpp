#include "voltvar/powerflow.hpp"

#include <algorithm>
#include <cmath>

namespace voltvar {

PowerFlowSolution solve(const NetworkCase& c, const TraversalOrder& order, const Injection& inj,
                        const SweepOptions& opts) {
    const int n = c.n_bus();
    if (static_cast<int>(inj.p_mw.size()) != n || static_cast<int>(inj.q_mvar.size()) != n)
        throw std::invalid_argument("injection dimensions do not match bus count");
    if (opts.tol <= 0.0) throw std::invalid_argument("tol must be positive");

    // Net injected complex power per bus, p.u.
    std::vector<std::complex<double>> s(n);
    for (int i = 0; i < n; ++i)
        s[i] = std::complex<double>(inj.p_mw[i], inj.q_mvar[i]) / c.base_mva;

    PowerFlowSolution sol;
    sol.v.assign(n, {1.0, 0.0});
    sol.branch_current.assign(c.n_branch(), {0.0, 0.0});

    const int root = order.order.empty() ? 0 : order.order.front();
    std::vector<std::complex<double>> subtree(n); // current flowing from parent into each bus's subtree

    for (int it = 1; it <= opts.max_iter; ++it) {
        // Backward: accumulate branch currents from the leaves up. A bus
        // drawing power pulls current -conj(s/V) through its feed branch.
        for (int k = n - 1; k >= 0; --k) {
            int u = order.order[k];
            subtree[u] = -std::conj(s[u] / sol.v[u]);
        }
        for (int k = n - 1; k >= 1; --k) {
            int u = order.order[k];
            subtree[order.parent[u]] += subtree[u];
            sol.branch_current[order.parent_branch[u]] = subtree[u];
        }

        // Forward: propagate voltage drops from the slack down.
        double dv_max = 0.0;
        for (int k = 1; k < n; ++k) {
            int u = order.order[k];
            const Branch& br = c.branches[order.parent_branch[u]];
            std::complex<double> z(br.r, br.x);
            std::complex<double> v_new = sol.v[order.parent[u]] - z * sol.branch_current[order.parent_branch[u]];
            dv_max = std::max(dv_max, std::abs(v_new - sol.v[u]));
            sol.v[u] = v_new;
            double vm = std::abs(v_new);
            if (!std::isfinite(vm) || vm < opts.collapse_vm)
                throw DivergedError("power flow collapsed at bus " + std::to_string(c.buses[u].id) +
                                    " (|V|=" + std::to_string(vm) + ")");
        }
        sol.v[root] = {1.0, 0.0};

        sol.iterations = it;
        if (dv_max < opts.tol) {
            sol.converged = true;
            break;
        }
    }

    double loss_pu = 0.0;
    for (int bi = 0; bi < c.n_branch(); ++bi)
        loss_pu += c.branches[bi].r * std::norm(sol.branch_current[bi]);
    sol.total_loss_mw = loss_pu * c.base_mva;
    return sol;
}

PowerFlowSolution solve(const NetworkCase& c, const Injection& inj, const SweepOptions& opts) {
    return solve(c, radial_order(c), inj, opts);
}

double total_loss(const PowerFlowSolution& sol) {
    if (!sol.converged) throw std::logic_error("total_loss on an unconverged solution");
    return sol.total_loss_mw;
}

double violation_metric(const PowerFlowSolution& sol, const std::vector<Bus>& buses) {
    if (!sol.converged) throw std::logic_error("violation_metric on an unconverged solution");
    if (sol.v.size() != buses.size()) throw std::invalid_argument("limits do not match solution size");
    double total = 0.0;
    for (size_t i = 0; i < buses.size(); ++i) {
        double vm = std::abs(sol.v[i]);
        total += std::max(vm - buses[i].v_max, 0.0) + std::max(buses[i].v_min - vm, 0.0);
    }
    return total;
}

} // namespace voltvar
