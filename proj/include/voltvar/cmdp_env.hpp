#pragma once

#include <Eigen/Core>
#include <vector>

#include "voltvar/grid_model.hpp"
#include "voltvar/powerflow.hpp"
#include "voltvar/profiles.hpp"

namespace voltvar {

/// Flat observation [P_1..P_N, Q_1..Q_N, V_1..V_N], net injections and
/// voltage magnitudes in p.u., plus the timestep index within the day.
struct GridState {
    Eigen::VectorXd obs;
    int t = 0;
};

/// Normalized device setpoints in [-1, 1]^m.
struct Action {
    Eigen::VectorXd a;
};

struct StepOutcome {
    GridState next;
    double reward = 0.0; // -total power loss, MW
    double cost = 0.0;   // voltage violation sum, p.u., >= 0
    bool done = false;
};

/// CMDP wrapper over the sweep solver: 96-step days, reward = -loss,
/// cost = voltage violation. One instance is single-threaded; independent
/// instances can run concurrently on a shared NetworkCase.
class Environment {
public:
    explicit Environment(const NetworkCase& c, SweepOptions pf_opts = {});

    // Divergence bookkeeping, see step().
    static constexpr double kLossPenaltyCapMw = 10.0;
    static constexpr double kCostCapPu = 1.0;

    int n_bus() const { return case_->n_bus(); }
    int state_dim() const { return 3 * case_->n_bus(); }
    int action_dim() const { return case_->n_device(); }

    /// Affine map from normalized setpoints to MVar, using each device's
    /// qg_bounds. Inputs are clamped to [-1, 1].
    Eigen::VectorXd scale_action(const Eigen::VectorXd& a) const;

    /// Device reactive bounds (fixed over time; IBER capability uses p_max).
    const std::vector<std::pair<double, double>>& device_bounds() const { return bounds_; }

    /// Starts an episode: solves the first profile row with all device Q at
    /// zero and returns the observation. Propagates DivergedError.
    GridState reset(const DayProfile& day);

    /// Applies the action to the current profile row, solves, then advances.
    /// reward = -loss, cost = violation of the post-action solve. On solver
    /// divergence the episode ends with reward -kLossPenaltyCapMw and cost
    /// kCostCapPu.
    StepOutcome step(const Action& a);

    bool done() const { return t_ >= kStepsPerDay; }
    int timestep() const { return t_; }
    const NetworkCase& network() const { return *case_; }

    /// Injections for row `t` of `day` given device reactive setpoints in
    /// MVar: scaled nominal loads (negative), available IB-ER active power
    /// and device Q (positive). Exposed for the reference optimizer.
    Injection row_injection(const DayProfile& day, int t, const Eigen::VectorXd& q_mvar) const;

    /// Loss and violation of one profile row under the given setpoints.
    std::pair<double, double> evaluate_row(const DayProfile& day, int t, const Eigen::VectorXd& q_mvar) const;

private:
    GridState observe(const PowerFlowSolution& sol, const Injection& inj, int t) const;

    const NetworkCase* case_;
    TraversalOrder order_;
    SweepOptions pf_opts_;
    std::vector<std::pair<double, double>> bounds_;
    std::vector<int> device_bus_idx_;
    std::vector<int> iber_of_device_; // device index -> iber column, -1 for SVC
    DayProfile day_;
    GridState state_;
    int t_ = kStepsPerDay;
    bool have_day_ = false;
};

} // namespace voltvar
