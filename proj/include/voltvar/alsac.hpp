#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voltvar/cmdp_env.hpp"
#include "voltvar/policy.hpp"
#include "voltvar/replay.hpp"

namespace voltvar {

/// Multipliers of the saddle-point problem. lambda_lr doubles as the
/// quadratic penalty coefficient of the augmented objective.
struct LagrangeState {
    double alpha = 0.0;
    double lambda = 0.0;
    double alpha_lr = 1e-5;
    double lambda_lr = 1e-5;
    double target_entropy = -1.0; // H_bar
    double cost_bound = 0.0;      // J_bar_c
};

struct AlgoConfig {
    double gamma = 0.995;
    double net_lr = 5e-4;
    double multiplier_lr = 1e-5;
    int batch = 256;
    double alpha_init = 0.0;
    double lambda_init = 0.0;
    // NaN means "negative action dimension".
    double target_entropy = std::numeric_limits<double>::quiet_NaN();
    double cost_bound = 0.0;
    double eta = 0.995; // target retention per soft update
    int episodes = 200;
    int steps = kStepsPerDay;
    std::size_t buffer_capacity = 100000;
    int warmup = 1000; // transitions stored before updates begin
};

/// Twin reward critics, twin cost critics, and target copies of all four.
/// Inputs are (state, action) concatenated.
struct CriticEnsemble {
    MlpParams q1, q2, qc1, qc2;
    MlpParams tq1, tq2, tqc1, tqc2;

    static CriticEnsemble make(int obs_dim, int act_dim, std::mt19937_64& rng);
};

/// Which observation entries and action components each actor owns.
/// Centralized training is the single-slot identity layout.
struct ActorLayout {
    struct Slot {
        std::vector<int> obs_idx;
        int act_begin = 0;
        int act_len = 0;
    };
    std::vector<Slot> slots;
    int obs_dim = 0;
    int act_dim = 0;

    static ActorLayout centralized(int obs_dim, int act_dim);
};

struct EpisodeMetrics {
    int episode = 0;
    double mean_loss_mw = 0.0;
    double mean_cost_pu = 0.0;
    double alpha = 0.0;
    double lambda = 0.0;
    double critic_loss = 0.0;
    double cost_critic_loss = 0.0;
    double entropy_estimate = 0.0;
    std::vector<double> agent_entropy; // per-actor, same order as layout slots
    bool truncated = false;
};

struct TrainResult {
    std::vector<EpisodeMetrics> episodes;
    int truncated_episodes = 0;
};

enum class RlAlgo { AlSac, SacPenalty };

struct TrainerOptions {
    RlAlgo algo = RlAlgo::AlSac;
    double penalty_delta = 0.0; // reward shaping R - delta * R^c (SacPenalty)
};

enum class UpdatePhase { Critics, Multipliers, Actor, TargetSync };

/// Paper objective value from batch statistics:
/// L = E[Q] + alpha (-H_bar - E[log pi]) + lambda (J_bar - E[Qc])
///     + (penalty/2) (J_bar - E[Qc])^2.
double lagrangian_from_stats(double e_q, double e_logp, double e_qc, double alpha, double lambda,
                             double target_entropy, double cost_bound, double penalty);

/// Penalty-shaped reward R - delta * R^c used by the unconstrained baselines.
inline double penalized_reward(double reward, double cost, double delta) {
    return reward - delta * cost;
}

/// Saddle-point trainer: twin critics against soft targets, multiplier
/// ascent with non-negative projection, reparameterized actor ascent on the
/// augmented objective. One instance owns its parameters; all draws come
/// from the seeded generator, so runs are bitwise reproducible.
class AlSacTrainer {
public:
    AlSacTrainer(int obs_dim, int act_dim, const AlgoConfig& cfg, std::uint64_t seed,
                 TrainerOptions opts = {}, std::optional<ActorLayout> layout = std::nullopt);

    Vec act_stochastic(const Vec& obs);
    /// Same policy map with caller-provided noise (one row, one column per
    /// action component).
    Vec act_with_noise(const Vec& obs, const Mat& xi) const;
    Vec act_greedy(const Vec& obs) const;

    /// Soft targets: y = R + gamma (min target Q - alpha log pi') (1 - done),
    /// y_c = R^c + gamma (max target Qc) (1 - done). Draws fresh next
    /// actions from the policy (or the injected sampler).
    std::pair<Vec, Vec> critic_targets(const Batch& b);

    /// One Adam descent step per critic on its MSE; returns the pre-step
    /// (reward, cost) losses averaged over the twins.
    std::pair<double, double> update_critics(const Batch& b);

    /// Evaluates the augmented objective on fresh policy samples.
    double lagrangian_value(const Batch& b);

    void update_multipliers(const Batch& b);
    void update_actor(const Batch& b);
    void soft_update_targets();

    /// Lines 9-12 of the per-step update: critics, multipliers, actor (the
    /// multiplier and actor phases share one set of fresh samples), targets.
    void update(const Batch& b);

    TrainResult train(Environment& env, const std::vector<DayProfile>& days);

    // --- state access (tests, checkpointing) ---
    const AlgoConfig& config() const { return cfg_; }
    const TrainerOptions& options() const { return opts_; }
    const ActorLayout& layout() const { return layout_; }
    LagrangeState& lagrange() { return lagrange_; }
    const LagrangeState& lagrange() const { return lagrange_; }
    CriticEnsemble& critics() { return critics_; }
    std::vector<PolicyHead>& policies() { return policies_; }
    const std::vector<PolicyHead>& policies() const { return policies_; }
    ReplayBuffer& buffer() { return buffer_; }
    std::mt19937_64& rng() { return rng_; }
    long updates_done() const { return updates_done_; }

    /// Every parameter tensor by name (policies, critics, targets). Vectors
    /// are exported as n x 1 matrices.
    std::map<std::string, Mat> export_tensors() const;
    void import_tensors(const std::map<std::string, Mat>& tensors);

    /// Replaces the next-action source used by critic_targets; the default
    /// samples this trainer's own policy. Tests use it to evaluate fixed
    /// policies.
    using NextActionSampler = std::function<std::pair<Mat, Vec>(const Mat& s_next, std::mt19937_64& rng)>;
    NextActionSampler next_action_sampler;

    /// Called at each update phase, in execution order.
    std::function<void(UpdatePhase)> phase_hook;

private:
    struct JointSample {
        Mat a;        // batch x act_dim
        Vec log_prob; // joint = sum over actors
        std::vector<PolicySample> per_actor;
    };
    struct FreshStats {
        JointSample js;
        MlpCache c_q1, c_q2, c_qc1, c_qc2;
        Vec q1, q2, qc1, qc2;
        Vec q_min, qc_max;
        Vec q_pick, qc_pick; // 0/1 per row: which twin the min/max selected
        double e_logp = 0.0, e_q = 0.0, e_qc = 0.0;
        std::vector<double> actor_logp_mean;
    };

    Mat gather_obs(const Mat& obs, const ActorLayout::Slot& slot) const;
    JointSample sample_joint(const Mat& obs, const Mat& xi) const;
    FreshStats fresh_stats(const Batch& b);
    void apply_multiplier_update(const FreshStats& st);
    void apply_actor_update(const FreshStats& st);
    Vec effective_reward(const Batch& b) const;
    void fire(UpdatePhase p) {
        if (phase_hook) phase_hook(p);
    }

    AlgoConfig cfg_;
    TrainerOptions opts_;
    ActorLayout layout_;
    CriticEnsemble critics_;
    std::vector<PolicyHead> policies_;
    std::vector<AdamState> policy_opt_;
    AdamState opt_q1_, opt_q2_, opt_qc1_, opt_qc2_;
    LagrangeState lagrange_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;
    long updates_done_ = 0;

    // rolling per-episode update statistics
    double ep_q_loss_ = 0.0, ep_qc_loss_ = 0.0, ep_entropy_ = 0.0;
    std::vector<double> ep_agent_entropy_;
    long ep_updates_ = 0;
};

} // namespace voltvar
