#include "voltvar/cmdp_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voltvar {

Environment::Environment(const NetworkCase& c, SweepOptions pf_opts)
    : case_(&c), order_(radial_order(c)), pf_opts_(pf_opts) {
    int iber_col = 0;
    for (const auto& d : c.devices) {
        bounds_.push_back(qg_bounds(d, d.p_max_mw));
        int bi = c.bus_index(d.bus);
        if (bi < 0) throw CaseError("device references unknown bus " + std::to_string(d.bus));
        device_bus_idx_.push_back(bi);
        iber_of_device_.push_back(d.kind == DeviceKind::Iber ? iber_col++ : -1);
    }
}

Eigen::VectorXd Environment::scale_action(const Eigen::VectorXd& a) const {
    if (a.size() != action_dim()) throw std::invalid_argument("action dimension mismatch");
    Eigen::VectorXd q(a.size());
    for (int i = 0; i < a.size(); ++i) {
        double ai = std::clamp(a[i], -1.0, 1.0);
        const auto& [lo, hi] = bounds_[i];
        q[i] = lo + (ai + 1.0) * 0.5 * (hi - lo);
    }
    return q;
}

Injection Environment::row_injection(const DayProfile& day, int t, const Eigen::VectorXd& q_mvar) const {
    const int n = case_->n_bus();
    Injection inj = Injection::zeros(n);
    for (int b = 0; b < n; ++b) {
        double m = day.load_mult(t, b);
        inj.p_mw[b] -= m * case_->buses[b].load_p_mw;
        inj.q_mvar[b] -= m * case_->buses[b].load_q_mvar;
    }
    for (int d = 0; d < case_->n_device(); ++d) {
        int b = device_bus_idx_[d];
        if (iber_of_device_[d] >= 0) inj.p_mw[b] += day.gen_p_mw(t, iber_of_device_[d]);
        inj.q_mvar[b] += q_mvar[d];
    }
    return inj;
}

std::pair<double, double> Environment::evaluate_row(const DayProfile& day, int t,
                                                    const Eigen::VectorXd& q_mvar) const {
    Injection inj = row_injection(day, t, q_mvar);
    PowerFlowSolution sol = solve(*case_, order_, inj, pf_opts_);
    if (!sol.converged) throw DivergedError("power flow failed to converge");
    return {total_loss(sol), violation_metric(sol, case_->buses)};
}

GridState Environment::observe(const PowerFlowSolution& sol, const Injection& inj, int t) const {
    const int n = case_->n_bus();
    GridState s;
    s.t = t;
    s.obs.resize(3 * n);
    for (int b = 0; b < n; ++b) {
        s.obs[b] = inj.p_mw[b] / case_->base_mva;
        s.obs[n + b] = inj.q_mvar[b] / case_->base_mva;
        s.obs[2 * n + b] = std::abs(sol.v[b]);
    }
    return s;
}

GridState Environment::reset(const DayProfile& day) {
    validate_profile(day, *case_);
    day_ = day;
    have_day_ = true;
    t_ = 0;
    Eigen::VectorXd q0 = Eigen::VectorXd::Zero(action_dim());
    Injection inj = row_injection(day_, 0, q0);
    PowerFlowSolution sol = solve(*case_, order_, inj, pf_opts_);
    if (!sol.converged) throw DivergedError("power flow failed to converge at reset");
    state_ = observe(sol, inj, 0);
    return state_;
}

StepOutcome Environment::step(const Action& a) {
    if (!have_day_) throw std::logic_error("step before reset");
    if (done()) throw std::logic_error("step on a finished episode");

    Eigen::VectorXd q = scale_action(a.a);
    StepOutcome out;
    try {
        Injection inj = row_injection(day_, t_, q);
        PowerFlowSolution sol = solve(*case_, order_, inj, pf_opts_);
        if (!sol.converged) throw DivergedError("power flow failed to converge");
        out.reward = -total_loss(sol);
        out.cost = violation_metric(sol, case_->buses);
        ++t_;
        out.next = observe(sol, inj, t_);
        out.done = done();
    } catch (const DivergedError&) {
        // Infeasible loading: bounded penalties, episode ends.
        out.reward = -kLossPenaltyCapMw;
        out.cost = kCostCapPu;
        t_ = kStepsPerDay;
        out.next = state_;
        out.next.t = t_;
        out.done = true;
    }
    state_ = out.next;
    return out;
}

} // namespace voltvar
