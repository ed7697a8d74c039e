#pragma once

// Independent power-flow reference for the test suite: bus admittance
// matrix + polar Newton-Raphson with a dense LU solve. Shares no code with
// the production sweep solver.

#include <complex>
#include <vector>

#include "voltvar/grid_model.hpp"
#include "voltvar/powerflow.hpp"

namespace voltvar::testing {

struct NewtonSolution {
    std::vector<std::complex<double>> v;
    double total_loss_mw = 0.0; // from the power-balance route, not r|I|^2
    bool converged = false;
    int iterations = 0;
};

NewtonSolution newton_solve(const NetworkCase& c, const Injection& inj, double tol = 1e-10,
                            int max_iter = 50);

} // namespace voltvar::testing
