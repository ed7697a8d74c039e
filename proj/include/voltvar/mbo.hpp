#pragma once

#include <cstdint>
#include <random>

#include "voltvar/cmdp_env.hpp"

namespace voltvar {

/// Reference dispatch for one profile row.
struct MboResult {
    Eigen::VectorXd q_mvar;     // per-device setting, within qg_bounds
    double loss_mw = 0.0;       // from an exact power-flow solve
    double violation_pu = 0.0;  // 0 when a feasible setting was found
    long evaluations = 0;
};

struct MboOptions {
    long budget = 1200;            // max power-flow evaluations
    double violation_weight = 1e3; // exact-penalty coefficient
    int population = 32;
    int elites = 8;
    int polish_points = 8; // per coordinate-descent line search
};

/// Derivative-free search over the box of device reactive settings:
/// cross-entropy iterations under an exact penalty on violation, then a
/// coordinate-descent polish. Best-so-far semantics, so more budget never
/// worsens the result. Deterministic given the RNG state.
MboResult mbo_solve(const Environment& env, const DayProfile& day, int t, std::mt19937_64& rng,
                    const MboOptions& opts = {});

} // namespace voltvar
