#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "voltvar/grid_model.hpp"

namespace voltvar {

/// Per-bus net power injected into the network, generation positive and
/// loads negative, in MW / MVar. Index order follows NetworkCase::buses.
struct Injection {
    std::vector<double> p_mw;
    std::vector<double> q_mvar;

    static Injection zeros(int n_bus) { return {std::vector<double>(n_bus, 0.0), std::vector<double>(n_bus, 0.0)}; }
};

struct PowerFlowSolution {
    std::vector<std::complex<double>> v;              // per-bus voltage, p.u.
    std::vector<std::complex<double>> branch_current; // p.u., oriented parent -> child
    double total_loss_mw = 0.0;
    bool converged = false;
    int iterations = 0;
};

class DivergedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepOptions {
    double tol = 1e-8; // p.u. voltage change
    int max_iter = 100;
    double collapse_vm = 0.3; // |V| below this signals infeasible loading
};

/// Backward current sweep / forward voltage sweep on a radial feeder.
/// Throws DivergedError when the iteration collapses (|V| < collapse_vm or
/// NaN); returns converged=false when max_iter is hit without meeting tol.
PowerFlowSolution solve(const NetworkCase& c, const TraversalOrder& order, const Injection& inj,
                        const SweepOptions& opts = {});
PowerFlowSolution solve(const NetworkCase& c, const Injection& inj, const SweepOptions& opts = {});

/// Series loss accumulated by the solver, sum(r * |I|^2) * base_mva.
double total_loss(const PowerFlowSolution& sol);

/// Sum over buses of max(V - v_max, 0) + max(v_min - V, 0), in p.u.
double violation_metric(const PowerFlowSolution& sol, const std::vector<Bus>& buses);

} // namespace voltvar
