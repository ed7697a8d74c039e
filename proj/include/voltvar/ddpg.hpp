#pragma once

#include <cstdint>

#include "voltvar/alsac.hpp"

namespace voltvar {

/// Deterministic-policy baseline with the penalized reward R - delta R^c:
/// tanh actor with target copy, a single critic with target copy, additive
/// Gaussian exploration noise clipped into the action box.
class DdpgTrainer {
public:
    DdpgTrainer(int obs_dim, int act_dim, const AlgoConfig& cfg, std::uint64_t seed, double penalty_delta,
                double explore_sigma = 0.1);

    Vec act_stochastic(const Vec& obs);
    Vec act_greedy(const Vec& obs) const;

    /// Critic target y = R_pen + gamma * Qt(s', tanh(actor_t(s'))) (1-done).
    Vec critic_target(const Batch& b);
    double update(const Batch& b); // returns pre-step critic loss

    TrainResult train(Environment& env, const std::vector<DayProfile>& days);

    MlpParams& actor() { return actor_; }
    const MlpParams& actor() const { return actor_; }
    std::map<std::string, Mat> export_tensors() const;
    void import_tensors(const std::map<std::string, Mat>& tensors);

private:
    AlgoConfig cfg_;
    double delta_;
    double explore_sigma_;
    MlpParams actor_, actor_t_;
    MlpParams critic_, critic_t_;
    AdamState opt_actor_, opt_critic_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;
    int act_dim_ = 0;
};

} // namespace voltvar
