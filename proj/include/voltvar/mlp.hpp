#pragma once

#include <Eigen/Core>
#include <random>
#include <vector>

namespace voltvar {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Dense MLP parameters. Hidden layers use ReLU, the output layer is
/// linear. Weights are stored (out x in); activations are batched with one
/// sample per row.
struct MlpParams {
    std::vector<Mat> w;
    std::vector<Vec> b;

    /// He-initialized network; `final_gain` scales the output layer's
    /// weights (policies start near zero-mean actions with gain << 1).
    static MlpParams make(const std::vector<int>& sizes, std::mt19937_64& rng, double final_gain = 1.0);

    int n_layer() const { return static_cast<int>(w.size()); }
    int in_dim() const { return static_cast<int>(w.front().cols()); }
    int out_dim() const { return static_cast<int>(w.back().rows()); }
    long n_param() const;
};

/// Same shapes as MlpParams; used for gradients and Adam moments.
struct MlpGrads {
    std::vector<Mat> w;
    std::vector<Vec> b;

    static MlpGrads zeros_like(const MlpParams& p);
    void setZero();
};

/// Post-activation outputs per layer, kept for the backward pass.
struct MlpCache {
    Mat input;
    std::vector<Mat> h; // h[l] = output of layer l after activation
};

/// Forward pass, one sample per row. Cache is optional (inference skips it).
Mat mlp_forward(const MlpParams& p, const Mat& x, MlpCache* cache = nullptr);

/// Reverse-mode gradients. `gy` is dLoss/dOutput (batch x out). Accumulates
/// into `grads` when given; returns dLoss/dInput (empty when
/// need_input_grad is false).
Mat mlp_backward(const MlpParams& p, const MlpCache& cache, const Mat& gy, MlpGrads* grads,
                 bool need_input_grad = true);

/// Input gradient only; skips the parameter-gradient GEMMs.
Mat mlp_input_grad(const MlpParams& p, const MlpCache& cache, const Mat& gy);

enum class StepDirection { Descent, Ascent };

/// Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8).
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    MlpGrads m, v;

    static AdamState make(const MlpParams& p, double lr);
};

void adam_step(AdamState& opt, MlpParams& p, const MlpGrads& g, StepDirection dir = StepDirection::Descent);

/// target <- eta * target + (1 - eta) * online, elementwise.
void soft_update(MlpParams& target, const MlpParams& online, double eta);

} // namespace voltvar
