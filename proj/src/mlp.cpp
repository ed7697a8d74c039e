#include "voltvar/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace voltvar {

MlpParams MlpParams::make(const std::vector<int>& sizes, std::mt19937_64& rng, double final_gain) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp needs at least one layer");
    MlpParams p;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        int in = sizes[l], out = sizes[l + 1];
        if (in <= 0 || out <= 0) throw std::invalid_argument("layer sizes must be positive");
        double scale = std::sqrt(2.0 / in);
        if (l + 2 == sizes.size()) scale *= final_gain;
        Mat w(out, in);
        for (int i = 0; i < out; ++i)
            for (int j = 0; j < in; ++j) w(i, j) = scale * normal(rng);
        p.w.push_back(std::move(w));
        p.b.push_back(Vec::Zero(out));
    }
    return p;
}

long MlpParams::n_param() const {
    long n = 0;
    for (size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
    return n;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
    MlpGrads g;
    for (size_t l = 0; l < p.w.size(); ++l) {
        g.w.push_back(Mat::Zero(p.w[l].rows(), p.w[l].cols()));
        g.b.push_back(Vec::Zero(p.b[l].size()));
    }
    return g;
}

void MlpGrads::setZero() {
    for (auto& m : w) m.setZero();
    for (auto& v : b) v.setZero();
}

Mat mlp_forward(const MlpParams& p, const Mat& x, MlpCache* cache) {
    if (x.cols() != p.in_dim()) throw std::invalid_argument("mlp_forward: input width mismatch");
    if (cache) {
        cache->input = x;
        cache->h.resize(p.n_layer());
    }
    Mat h = x;
    for (int l = 0; l < p.n_layer(); ++l) {
        Mat z = h * p.w[l].transpose();
        z.rowwise() += p.b[l].transpose();
        if (l + 1 < p.n_layer()) z = z.cwiseMax(0.0); // ReLU on hidden layers
        if (cache) cache->h[l] = z;
        h = std::move(z);
    }
    return h;
}

namespace {

// Shared backward walk; parameter grads are optional, and the layer-0 input
// gradient GEMM is skipped when nobody needs it.
Mat backward_impl(const MlpParams& p, const MlpCache& cache, const Mat& gy, MlpGrads* grads,
                  bool need_input_grad) {
    const int L = p.n_layer();
    if (static_cast<int>(cache.h.size()) != L) throw std::invalid_argument("mlp_backward: stale cache");
    if (gy.rows() != cache.input.rows() || gy.cols() != p.out_dim())
        throw std::invalid_argument("mlp_backward: upstream gradient shape mismatch");

    Mat g = gy;
    for (int l = L - 1; l >= 0; --l) {
        if (l + 1 < L) {
            // ReLU gate: cache.h[l] holds the post-activation values.
            g.array() *= (cache.h[l].array() > 0.0).cast<double>();
        }
        const Mat& h_in = (l == 0) ? cache.input : cache.h[l - 1];
        if (grads) {
            grads->w[l].noalias() += g.transpose() * h_in;
            grads->b[l].noalias() += g.colwise().sum().transpose();
        }
        if (l > 0 || need_input_grad) g = g * p.w[l];
    }
    return need_input_grad ? g : Mat();
}

} // namespace

Mat mlp_backward(const MlpParams& p, const MlpCache& cache, const Mat& gy, MlpGrads* grads,
                 bool need_input_grad) {
    return backward_impl(p, cache, gy, grads, need_input_grad);
}

Mat mlp_input_grad(const MlpParams& p, const MlpCache& cache, const Mat& gy) {
    return backward_impl(p, cache, gy, nullptr, true);
}

AdamState AdamState::make(const MlpParams& p, double lr) {
    AdamState s;
    s.lr = lr;
    s.m = MlpGrads::zeros_like(p);
    s.v = MlpGrads::zeros_like(p);
    return s;
}

void adam_step(AdamState& opt, MlpParams& p, const MlpGrads& g, StepDirection dir) {
    opt.t += 1;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
    const double sign = (dir == StepDirection::Ascent) ? -1.0 : 1.0;

    for (size_t l = 0; l < p.w.size(); ++l) {
        auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
            auto ga = (sign * grad.array()).eval();
            m.array() = opt.beta1 * m.array() + (1.0 - opt.beta1) * ga;
            v.array() = opt.beta2 * v.array() + (1.0 - opt.beta2) * ga.square();
            param.array() -= opt.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.eps);
        };
        update(p.w[l], opt.m.w[l], opt.v.w[l], g.w[l]);
        update(p.b[l], opt.m.b[l], opt.v.b[l], g.b[l]);
    }
}

void soft_update(MlpParams& target, const MlpParams& online, double eta) {
    for (size_t l = 0; l < target.w.size(); ++l) {
        target.w[l] = eta * target.w[l] + (1.0 - eta) * online.w[l];
        target.b[l] = eta * target.b[l] + (1.0 - eta) * online.b[l];
    }
}

} // namespace voltvar
