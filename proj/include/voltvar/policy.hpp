#pragma once

#include <random>

#include "voltvar/mlp.hpp"

namespace voltvar {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kTanhEps = 1e-6;

/// Stochastic policy: a trunk MLP emits per-action mean and log-std
/// (clamped to [kLogStdMin, kLogStdMax]); actions are tanh-squashed
/// Gaussians, a = tanh(mu + sigma .* xi).
struct PolicyHead {
    MlpParams trunk; // output width = 2 * action_dim (means, then log-stds)
    int action_dim = 0;

    static PolicyHead make(int obs_dim, int action_dim, std::mt19937_64& rng);
};

/// Sampled batch plus everything the backward pass needs.
struct PolicySample {
    Mat a;        // batch x m, strictly inside (-1, 1)
    Vec log_prob; // batch
    Mat mean, sigma, xi, gate; // gate = 1 where the log-std clamp is inactive
    MlpCache trunk_cache;
};

/// a = tanh(mu + sigma .* xi) with the tanh-corrected log-density
/// log pi = sum_i [ log N(u_i; mu_i, sigma_i) - log(1 - tanh(u_i)^2 + eps) ].
PolicySample sample_squashed(const PolicyHead& head, const Mat& s, const Mat& xi);

/// Greedy action, tanh(mu); used at evaluation time.
Mat mean_action(const PolicyHead& head, const Mat& s);

/// Backward through the sample: `da` is dL/da (batch x m), `dlogp` is
/// dL/dlogpi (batch). Accumulates trunk parameter gradients.
void policy_backward(const PolicyHead& head, const PolicySample& ps, const Mat& da, const Vec& dlogp,
                     MlpGrads* grads);

/// Fills a (batch x m) matrix of standard normal draws, row-major order, so
/// the stream is stable across agent layouts.
Mat draw_normal(std::mt19937_64& rng, int rows, int cols);

} // namespace voltvar
