#include "voltvar/ddpg.hpp"

#include <algorithm>
#include <cmath>

namespace voltvar {

namespace {
Mat concat_sa(const Mat& s, const Mat& a) {
    Mat sa(s.rows(), s.cols() + a.cols());
    sa.leftCols(s.cols()) = s;
    sa.rightCols(a.cols()) = a;
    return sa;
}
} // namespace

DdpgTrainer::DdpgTrainer(int obs_dim, int act_dim, const AlgoConfig& cfg, std::uint64_t seed,
                         double penalty_delta, double explore_sigma)
    : cfg_(cfg),
      delta_(penalty_delta),
      explore_sigma_(explore_sigma),
      buffer_(cfg.buffer_capacity),
      rng_(seed),
      act_dim_(act_dim) {
    actor_ = MlpParams::make({obs_dim, 256, 256, act_dim}, rng_, 0.01);
    critic_ = MlpParams::make({obs_dim + act_dim, 256, 256, 1}, rng_);
    actor_t_ = actor_;
    critic_t_ = critic_;
    opt_actor_ = AdamState::make(actor_, cfg_.net_lr);
    opt_critic_ = AdamState::make(critic_, cfg_.net_lr);
}

Vec DdpgTrainer::act_greedy(const Vec& obs) const {
    Mat out = mlp_forward(actor_, obs.transpose());
    return out.row(0).transpose().array().tanh().matrix();
}

Vec DdpgTrainer::act_stochastic(const Vec& obs) {
    Vec a = act_greedy(obs);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < a.size(); ++i)
        a[i] = std::clamp(a[i] + explore_sigma_ * normal(rng_), -1.0, 1.0);
    return a;
}

Vec DdpgTrainer::critic_target(const Batch& b) {
    Mat a_next = mlp_forward(actor_t_, b.s_next).array().tanh().matrix();
    Vec qt = mlp_forward(critic_t_, concat_sa(b.s_next, a_next)).col(0);
    Vec r_pen(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) r_pen[i] = penalized_reward(b.reward[i], b.cost[i], delta_);
    return (r_pen.array() + cfg_.gamma * b.not_done.array() * qt.array()).matrix();
}

double DdpgTrainer::update(const Batch& b) {
    const double inv_b = 1.0 / static_cast<double>(b.size());

    // Critic descent on MSE.
    Vec y = critic_target(b);
    MlpCache c_cache;
    Vec q = mlp_forward(critic_, concat_sa(b.s, b.a), &c_cache).col(0);
    Vec err = q - y;
    double loss = err.squaredNorm() * inv_b;
    {
        MlpGrads g = MlpGrads::zeros_like(critic_);
        Mat gy = (2.0 * inv_b) * err;
        mlp_backward(critic_, c_cache, gy, &g, false);
        adam_step(opt_critic_, critic_, g, StepDirection::Descent);
    }

    // Actor ascent on Q(s, tanh(actor(s))).
    {
        MlpCache a_cache;
        Mat u = mlp_forward(actor_, b.s, &a_cache);
        Mat a = u.array().tanh().matrix();
        MlpCache q_cache;
        mlp_forward(critic_, concat_sa(b.s, a), &q_cache);
        Mat gy = Mat::Constant(b.size(), 1, inv_b);
        Mat dsa = mlp_input_grad(critic_, q_cache, gy);
        Mat du = (dsa.rightCols(act_dim_).array() * (1.0 - a.array().square())).matrix();
        MlpGrads g = MlpGrads::zeros_like(actor_);
        mlp_backward(actor_, a_cache, du, &g, false);
        adam_step(opt_actor_, actor_, g, StepDirection::Ascent);
    }

    soft_update(critic_t_, critic_, cfg_.eta);
    soft_update(actor_t_, actor_, cfg_.eta);
    return loss;
}

TrainResult DdpgTrainer::train(Environment& env, const std::vector<DayProfile>& days) {
    if (days.empty()) throw std::invalid_argument("train needs at least one day profile");
    const std::size_t warm = std::max<std::size_t>(cfg_.warmup, cfg_.batch);

    TrainResult result;
    for (int ep = 0; ep < cfg_.episodes; ++ep) {
        GridState s = env.reset(days[ep % days.size()]);
        double loss_sum = 0.0, cost_sum = 0.0, closs_sum = 0.0;
        int steps = 0;
        long n_updates = 0;
        bool truncated = false;
        for (int t = 0; t < cfg_.steps; ++t) {
            Vec a = act_stochastic(s.obs);
            StepOutcome out = env.step({a});
            buffer_.push({s.obs, a, out.reward, out.cost, out.next.obs, out.done});
            loss_sum += -out.reward;
            cost_sum += out.cost;
            ++steps;
            if (buffer_.size() >= warm) {
                closs_sum += update(buffer_.sample(cfg_.batch, rng_));
                ++n_updates;
            }
            s = out.next;
            if (out.done) {
                truncated = t + 1 < cfg_.steps;
                break;
            }
        }
        EpisodeMetrics m;
        m.episode = ep;
        m.mean_loss_mw = loss_sum / std::max(steps, 1);
        m.mean_cost_pu = cost_sum / std::max(steps, 1);
        m.critic_loss = n_updates ? closs_sum / n_updates : 0.0;
        m.agent_entropy.assign(1, 0.0);
        m.truncated = truncated;
        if (truncated) ++result.truncated_episodes;
        result.episodes.push_back(std::move(m));
    }
    return result;
}

std::map<std::string, Mat> DdpgTrainer::export_tensors() const {
    std::map<std::string, Mat> out;
    auto put_net = [&](const std::string& prefix, const MlpParams& p) {
        for (int l = 0; l < p.n_layer(); ++l) {
            out[prefix + ".w" + std::to_string(l)] = p.w[l];
            out[prefix + ".b" + std::to_string(l)] = p.b[l];
        }
    };
    put_net("actor0", actor_);
    put_net("critic", critic_);
    put_net("actor_t", actor_t_);
    put_net("critic_t", critic_t_);
    return out;
}

void DdpgTrainer::import_tensors(const std::map<std::string, Mat>& tensors) {
    auto load_net = [&](const std::string& prefix, MlpParams& p) {
        for (int l = 0; l < p.n_layer(); ++l) {
            auto wi = tensors.find(prefix + ".w" + std::to_string(l));
            auto bi = tensors.find(prefix + ".b" + std::to_string(l));
            if (wi == tensors.end() || bi == tensors.end())
                throw std::runtime_error("checkpoint missing tensors for " + prefix);
            if (wi->second.rows() != p.w[l].rows() || wi->second.cols() != p.w[l].cols() ||
                bi->second.rows() != p.b[l].size())
                throw std::runtime_error("checkpoint/architecture mismatch at " + prefix);
            p.w[l] = wi->second;
            p.b[l] = bi->second.col(0);
        }
    };
    load_net("actor0", actor_);
    load_net("critic", critic_);
    load_net("actor_t", actor_t_);
    load_net("critic_t", critic_t_);
}

} // namespace voltvar
