#include "voltvar/alsac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voltvar {

namespace {

Mat concat_sa(const Mat& s, const Mat& a) {
    Mat sa(s.rows(), s.cols() + a.cols());
    sa.leftCols(s.cols()) = s;
    sa.rightCols(a.cols()) = a;
    return sa;
}

Vec critic_eval(const MlpParams& net, const Mat& sa, MlpCache* cache = nullptr) {
    return mlp_forward(net, sa, cache).col(0);
}

} // namespace

CriticEnsemble CriticEnsemble::make(int obs_dim, int act_dim, std::mt19937_64& rng) {
    std::vector<int> sizes{obs_dim + act_dim, 256, 256, 1};
    CriticEnsemble c;
    c.q1 = MlpParams::make(sizes, rng);
    c.q2 = MlpParams::make(sizes, rng);
    c.qc1 = MlpParams::make(sizes, rng);
    c.qc2 = MlpParams::make(sizes, rng);
    c.tq1 = c.q1;
    c.tq2 = c.q2;
    c.tqc1 = c.qc1;
    c.tqc2 = c.qc2;
    return c;
}

ActorLayout ActorLayout::centralized(int obs_dim, int act_dim) {
    ActorLayout l;
    l.obs_dim = obs_dim;
    l.act_dim = act_dim;
    ActorLayout::Slot s;
    s.obs_idx.resize(obs_dim);
    for (int i = 0; i < obs_dim; ++i) s.obs_idx[i] = i;
    s.act_begin = 0;
    s.act_len = act_dim;
    l.slots.push_back(std::move(s));
    return l;
}

double lagrangian_from_stats(double e_q, double e_logp, double e_qc, double alpha, double lambda,
                             double target_entropy, double cost_bound, double penalty) {
    double slack = cost_bound - e_qc;
    return e_q + alpha * (-target_entropy - e_logp) + lambda * slack + 0.5 * penalty * slack * slack;
}

AlSacTrainer::AlSacTrainer(int obs_dim, int act_dim, const AlgoConfig& cfg, std::uint64_t seed,
                           TrainerOptions opts, std::optional<ActorLayout> layout)
    : cfg_(cfg),
      opts_(opts),
      layout_(layout ? std::move(*layout) : ActorLayout::centralized(obs_dim, act_dim)),
      buffer_(cfg.buffer_capacity),
      rng_(seed) {
    if (layout_.obs_dim != obs_dim || layout_.act_dim != act_dim)
        throw std::invalid_argument("actor layout does not match env dimensions");

    critics_ = CriticEnsemble::make(obs_dim, act_dim, rng_);
    for (const auto& slot : layout_.slots) {
        policies_.push_back(PolicyHead::make(static_cast<int>(slot.obs_idx.size()), slot.act_len, rng_));
        policy_opt_.push_back(AdamState::make(policies_.back().trunk, cfg_.net_lr));
    }
    opt_q1_ = AdamState::make(critics_.q1, cfg_.net_lr);
    opt_q2_ = AdamState::make(critics_.q2, cfg_.net_lr);
    opt_qc1_ = AdamState::make(critics_.qc1, cfg_.net_lr);
    opt_qc2_ = AdamState::make(critics_.qc2, cfg_.net_lr);

    lagrange_.alpha = cfg_.alpha_init;
    lagrange_.lambda = cfg_.lambda_init;
    lagrange_.alpha_lr = cfg_.multiplier_lr;
    lagrange_.lambda_lr = cfg_.multiplier_lr;
    lagrange_.cost_bound = cfg_.cost_bound;
    lagrange_.target_entropy =
        std::isnan(cfg_.target_entropy) ? -static_cast<double>(act_dim) : cfg_.target_entropy;
    if (opts_.algo == RlAlgo::SacPenalty) {
        lagrange_.lambda = 0.0;
        lagrange_.lambda_lr = 0.0;
    }

    next_action_sampler = [this](const Mat& s_next, std::mt19937_64& rng) {
        Mat xi = draw_normal(rng, static_cast<int>(s_next.rows()), layout_.act_dim);
        JointSample js = sample_joint(s_next, xi);
        return std::make_pair(std::move(js.a), std::move(js.log_prob));
    };
}

Mat AlSacTrainer::gather_obs(const Mat& obs, const ActorLayout::Slot& slot) const {
    Mat out(obs.rows(), slot.obs_idx.size());
    for (size_t j = 0; j < slot.obs_idx.size(); ++j) out.col(j) = obs.col(slot.obs_idx[j]);
    return out;
}

AlSacTrainer::JointSample AlSacTrainer::sample_joint(const Mat& obs, const Mat& xi) const {
    JointSample js;
    js.a.resize(obs.rows(), layout_.act_dim);
    js.log_prob = Vec::Zero(obs.rows());
    for (size_t k = 0; k < layout_.slots.size(); ++k) {
        const auto& slot = layout_.slots[k];
        PolicySample ps =
            sample_squashed(policies_[k], gather_obs(obs, slot), xi.middleCols(slot.act_begin, slot.act_len));
        js.a.middleCols(slot.act_begin, slot.act_len) = ps.a;
        js.log_prob += ps.log_prob;
        js.per_actor.push_back(std::move(ps));
    }
    return js;
}

Vec AlSacTrainer::act_stochastic(const Vec& obs) {
    return act_with_noise(obs, draw_normal(rng_, 1, layout_.act_dim));
}

Vec AlSacTrainer::act_with_noise(const Vec& obs, const Mat& xi) const {
    JointSample js = sample_joint(obs.transpose(), xi);
    return js.a.row(0).transpose();
}

Vec AlSacTrainer::act_greedy(const Vec& obs) const {
    Vec a(layout_.act_dim);
    for (size_t k = 0; k < layout_.slots.size(); ++k) {
        const auto& slot = layout_.slots[k];
        Mat local = gather_obs(obs.transpose(), slot);
        a.segment(slot.act_begin, slot.act_len) = mean_action(policies_[k], local).row(0).transpose();
    }
    return a;
}

Vec AlSacTrainer::effective_reward(const Batch& b) const {
    if (opts_.algo == RlAlgo::SacPenalty) {
        Vec r(b.size());
        for (Eigen::Index i = 0; i < b.size(); ++i) r[i] = penalized_reward(b.reward[i], b.cost[i], opts_.penalty_delta);
        return r;
    }
    return b.reward;
}

std::pair<Vec, Vec> AlSacTrainer::critic_targets(const Batch& b) {
    auto [a_next, logp_next] = next_action_sampler(b.s_next, rng_);
    Mat sa_next = concat_sa(b.s_next, a_next);

    Vec tq1 = critic_eval(critics_.tq1, sa_next);
    Vec tq2 = critic_eval(critics_.tq2, sa_next);
    Vec q_min = tq1.cwiseMin(tq2);
    // Soft value: entropy enters the reward target only.
    Vec y = (effective_reward(b).array() +
             cfg_.gamma * b.not_done.array() * (q_min.array() - lagrange_.alpha * logp_next.array()))
                .matrix();

    Vec y_c = Vec::Zero(b.size());
    if (opts_.algo == RlAlgo::AlSac) {
        Vec tqc1 = critic_eval(critics_.tqc1, sa_next);
        Vec tqc2 = critic_eval(critics_.tqc2, sa_next);
        // Conservative side for the safety critic.
        Vec qc_max = tqc1.cwiseMax(tqc2);
        y_c = (b.cost.array() + cfg_.gamma * b.not_done.array() * qc_max.array()).matrix();
    }
    return {std::move(y), std::move(y_c)};
}

std::pair<double, double> AlSacTrainer::update_critics(const Batch& b) {
    auto [y, y_c] = critic_targets(b);
    const double inv_b = 1.0 / static_cast<double>(b.size());
    Mat sa = concat_sa(b.s, b.a);

    auto descend = [&](MlpParams& net, AdamState& opt, const Vec& target) {
        MlpCache cache;
        Vec q = critic_eval(net, sa, &cache);
        Vec err = q - target;
        double loss = err.squaredNorm() * inv_b;
        MlpGrads g = MlpGrads::zeros_like(net);
        Mat gy = (2.0 * inv_b) * err;
        mlp_backward(net, cache, gy, &g, false);
        adam_step(opt, net, g, StepDirection::Descent);
        return loss;
    };

    double q_loss = 0.5 * (descend(critics_.q1, opt_q1_, y) + descend(critics_.q2, opt_q2_, y));
    double qc_loss = 0.0;
    if (opts_.algo == RlAlgo::AlSac)
        qc_loss = 0.5 * (descend(critics_.qc1, opt_qc1_, y_c) + descend(critics_.qc2, opt_qc2_, y_c));
    return {q_loss, qc_loss};
}

AlSacTrainer::FreshStats AlSacTrainer::fresh_stats(const Batch& b) {
    FreshStats st;
    Mat xi = draw_normal(rng_, static_cast<int>(b.size()), layout_.act_dim);
    st.js = sample_joint(b.s, xi);
    Mat sa = concat_sa(b.s, st.js.a);

    st.q1 = critic_eval(critics_.q1, sa, &st.c_q1);
    st.q2 = critic_eval(critics_.q2, sa, &st.c_q2);
    st.q_min = st.q1.cwiseMin(st.q2);
    st.q_pick = (st.q1.array() <= st.q2.array()).cast<double>().matrix();
    st.e_q = st.q_min.mean();
    if (opts_.algo == RlAlgo::AlSac) {
        st.qc1 = critic_eval(critics_.qc1, sa, &st.c_qc1);
        st.qc2 = critic_eval(critics_.qc2, sa, &st.c_qc2);
        st.qc_max = st.qc1.cwiseMax(st.qc2);
        st.qc_pick = (st.qc1.array() >= st.qc2.array()).cast<double>().matrix();
        st.e_qc = st.qc_max.mean();
    }
    st.e_logp = st.js.log_prob.mean();
    for (const auto& ps : st.js.per_actor) st.actor_logp_mean.push_back(ps.log_prob.mean());
    return st;
}

void AlSacTrainer::apply_multiplier_update(const FreshStats& st) {
    // Multipliers grow while their constraint is violated, projected to R+.
    // Entropy constraint E[-log pi] >= H_bar; cost constraint E[Qc] <= J_bar.
    lagrange_.alpha =
        std::max(0.0, lagrange_.alpha + lagrange_.alpha_lr * (lagrange_.target_entropy + st.e_logp));
    if (opts_.algo == RlAlgo::AlSac)
        lagrange_.lambda =
            std::max(0.0, lagrange_.lambda + lagrange_.lambda_lr * (st.e_qc - lagrange_.cost_bound));
}

void AlSacTrainer::apply_actor_update(const FreshStats& st) {
    const Eigen::Index batch = st.js.a.rows();
    const double inv_b = 1.0 / static_cast<double>(batch);

    // d L / d E[Qc] = -(lambda + penalty * (J_bar - E[Qc])), penalty = lambda_lr.
    double cost_weight = 0.0;
    if (opts_.algo == RlAlgo::AlSac)
        cost_weight = -(lagrange_.lambda + lagrange_.lambda_lr * (lagrange_.cost_bound - st.e_qc));

    Mat da = Mat::Zero(batch, layout_.act_dim);
    auto add_critic_path = [&](const MlpParams& net, const MlpCache& cache, const Vec& pick, double weight) {
        if (weight == 0.0) return;
        Mat gy = (weight * inv_b) * pick;
        Mat dsa = mlp_input_grad(net, cache, gy);
        da += dsa.rightCols(layout_.act_dim);
    };
    add_critic_path(critics_.q1, st.c_q1, st.q_pick, 1.0);
    add_critic_path(critics_.q2, st.c_q2, Vec::Ones(batch) - st.q_pick, 1.0);
    if (opts_.algo == RlAlgo::AlSac && cost_weight != 0.0) {
        add_critic_path(critics_.qc1, st.c_qc1, st.qc_pick, cost_weight);
        add_critic_path(critics_.qc2, st.c_qc2, Vec::Ones(batch) - st.qc_pick, cost_weight);
    }

    Vec dlogp = Vec::Constant(batch, -lagrange_.alpha * inv_b);
    for (size_t k = 0; k < layout_.slots.size(); ++k) {
        const auto& slot = layout_.slots[k];
        MlpGrads g = MlpGrads::zeros_like(policies_[k].trunk);
        policy_backward(policies_[k], st.js.per_actor[k], da.middleCols(slot.act_begin, slot.act_len),
                        dlogp, &g);
        adam_step(policy_opt_[k], policies_[k].trunk, g, StepDirection::Ascent);
    }
}

double AlSacTrainer::lagrangian_value(const Batch& b) {
    FreshStats st = fresh_stats(b);
    return lagrangian_from_stats(st.e_q, st.e_logp, st.e_qc, lagrange_.alpha, lagrange_.lambda,
                                 lagrange_.target_entropy, lagrange_.cost_bound, lagrange_.lambda_lr);
}

void AlSacTrainer::update_multipliers(const Batch& b) {
    apply_multiplier_update(fresh_stats(b));
}

void AlSacTrainer::update_actor(const Batch& b) {
    apply_actor_update(fresh_stats(b));
}

void AlSacTrainer::soft_update_targets() {
    soft_update(critics_.tq1, critics_.q1, cfg_.eta);
    soft_update(critics_.tq2, critics_.q2, cfg_.eta);
    soft_update(critics_.tqc1, critics_.qc1, cfg_.eta);
    soft_update(critics_.tqc2, critics_.qc2, cfg_.eta);
}

void AlSacTrainer::update(const Batch& b) {
    fire(UpdatePhase::Critics);
    auto [q_loss, qc_loss] = update_critics(b);

    // One set of fresh samples serves both phases; multipliers first, the
    // actor then sees the just-updated alpha and lambda.
    FreshStats st = fresh_stats(b);
    fire(UpdatePhase::Multipliers);
    apply_multiplier_update(st);
    fire(UpdatePhase::Actor);
    apply_actor_update(st);

    fire(UpdatePhase::TargetSync);
    soft_update_targets();

    ++updates_done_;
    ++ep_updates_;
    ep_q_loss_ += q_loss;
    ep_qc_loss_ += qc_loss;
    ep_entropy_ += -st.e_logp;
    if (ep_agent_entropy_.size() != st.actor_logp_mean.size())
        ep_agent_entropy_.assign(st.actor_logp_mean.size(), 0.0);
    for (size_t k = 0; k < st.actor_logp_mean.size(); ++k) ep_agent_entropy_[k] += -st.actor_logp_mean[k];
}

TrainResult AlSacTrainer::train(Environment& env, const std::vector<DayProfile>& days) {
    if (days.empty()) throw std::invalid_argument("train needs at least one day profile");
    const std::size_t warm = std::max<std::size_t>(cfg_.warmup, cfg_.batch);

    TrainResult result;
    for (int ep = 0; ep < cfg_.episodes; ++ep) {
        GridState s = env.reset(days[ep % days.size()]);
        ep_q_loss_ = ep_qc_loss_ = ep_entropy_ = 0.0;
        ep_agent_entropy_.assign(layout_.slots.size(), 0.0);
        ep_updates_ = 0;

        double loss_sum = 0.0, cost_sum = 0.0;
        int steps = 0;
        bool truncated = false;
        for (int t = 0; t < cfg_.steps; ++t) {
            Vec a = act_stochastic(s.obs);
            StepOutcome out = env.step({a});
            buffer_.push({s.obs, a, out.reward, out.cost, out.next.obs, out.done});
            loss_sum += -out.reward;
            cost_sum += out.cost;
            ++steps;
            if (buffer_.size() >= warm) update(buffer_.sample(cfg_.batch, rng_));
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
        m.alpha = lagrange_.alpha;
        m.lambda = lagrange_.lambda;
        m.critic_loss = ep_updates_ ? ep_q_loss_ / ep_updates_ : 0.0;
        m.cost_critic_loss = ep_updates_ ? ep_qc_loss_ / ep_updates_ : 0.0;
        m.entropy_estimate = ep_updates_ ? ep_entropy_ / ep_updates_ : 0.0;
        m.agent_entropy.resize(layout_.slots.size(), 0.0);
        if (ep_updates_)
            for (size_t k = 0; k < m.agent_entropy.size(); ++k)
                m.agent_entropy[k] = ep_agent_entropy_[k] / ep_updates_;
        m.truncated = truncated;
        if (truncated) ++result.truncated_episodes;
        result.episodes.push_back(std::move(m));
    }
    return result;
}

std::map<std::string, Mat> AlSacTrainer::export_tensors() const {
    std::map<std::string, Mat> out;
    auto put_net = [&](const std::string& prefix, const MlpParams& p) {
        for (int l = 0; l < p.n_layer(); ++l) {
            out[prefix + ".w" + std::to_string(l)] = p.w[l];
            out[prefix + ".b" + std::to_string(l)] = p.b[l];
        }
    };
    for (size_t k = 0; k < policies_.size(); ++k) put_net("actor" + std::to_string(k), policies_[k].trunk);
    put_net("q1", critics_.q1);
    put_net("q2", critics_.q2);
    put_net("qc1", critics_.qc1);
    put_net("qc2", critics_.qc2);
    put_net("tq1", critics_.tq1);
    put_net("tq2", critics_.tq2);
    put_net("tqc1", critics_.tqc1);
    put_net("tqc2", critics_.tqc2);
    return out;
}

void AlSacTrainer::import_tensors(const std::map<std::string, Mat>& tensors) {
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
    for (size_t k = 0; k < policies_.size(); ++k) load_net("actor" + std::to_string(k), policies_[k].trunk);
    load_net("q1", critics_.q1);
    load_net("q2", critics_.q2);
    load_net("qc1", critics_.qc1);
    load_net("qc2", critics_.qc2);
    load_net("tq1", critics_.tq1);
    load_net("tq2", critics_.tq2);
    load_net("tqc1", critics_.tqc1);
    load_net("tqc2", critics_.tqc2);
}

} // namespace voltvar
