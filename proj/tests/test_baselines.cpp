#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "voltvar/ddpg.hpp"
#include "voltvar/mbo.hpp"

using namespace voltvar;
using voltvar::testing::toy4;

namespace {

DayProfile flat_profile(const NetworkCase& c, double mult = 1.0) {
    DayProfile p;
    p.load_mult = Eigen::MatrixXd::Constant(kStepsPerDay, c.n_bus(), mult);
    p.gen_p_mw = Eigen::MatrixXd::Zero(kStepsPerDay, c.n_iber());
    return p;
}

} // namespace

TEST_CASE("ddpg: zero exploration noise acts deterministically") {
    AlgoConfig cfg;
    cfg.batch = 16;
    DdpgTrainer tr(5, 2, cfg, 3, 0.5, /*explore_sigma=*/0.0);
    Vec obs = Vec::Random(5);
    Vec a1 = tr.act_stochastic(obs);
    Vec a2 = tr.act_stochastic(obs);
    CHECK(a1 == a2);
    CHECK(a1 == tr.act_greedy(obs));
    CHECK(a1.cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("ddpg: critic target substitution") {
    AlgoConfig cfg;
    DdpgTrainer tr(3, 1, cfg, 4, 0.0);
    // rig target critic to a constant 2
    auto tensors = tr.export_tensors();
    for (auto& [name, m] : tensors)
        if (name.rfind("critic_t", 0) == 0) m.setZero();
    tensors["critic_t.b2"](0, 0) = 2.0;
    tr.import_tensors(tensors);

    Batch b;
    b.s = Mat::Random(4, 3);
    b.a = Mat::Random(4, 1);
    b.s_next = Mat::Random(4, 3);
    b.reward = Vec::Constant(4, 1.0);
    b.cost = Vec::Zero(4);
    b.not_done = Vec::Ones(4);
    Vec y = tr.critic_target(b);
    for (int i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(1.0 + 0.995 * 2.0));

    // penalty shaping enters the target
    DdpgTrainer tp(3, 1, cfg, 4, 2.0);
    auto t2 = tp.export_tensors();
    for (auto& [name, m] : t2)
        if (name.rfind("critic_t", 0) == 0) m.setZero();
    tp.import_tensors(t2);
    Batch bc = b;
    bc.cost = Vec::Constant(4, 0.25);
    Vec yp = tp.critic_target(bc);
    for (int i = 0; i < 4; ++i) CHECK(yp[i] == doctest::Approx(1.0 - 2.0 * 0.25));
}

TEST_CASE("ddpg: paired toy runs, small delta trades violation for loss" * doctest::timeout(600)) {
    NetworkCase c = toy4();
    auto days = generate_synthetic_profiles(11, 4, c);
    AlgoConfig cfg;
    cfg.batch = 64;
    cfg.warmup = 512;
    cfg.episodes = 60;
    cfg.buffer_capacity = 8192;

    auto run = [&](double delta) {
        Environment env(c);
        DdpgTrainer tr(env.state_dim(), env.action_dim(), cfg, 5, delta);
        TrainResult r = tr.train(env, days);
        // evaluate greedily on a fresh day
        auto eval_days = generate_synthetic_profiles(12, 2, c);
        Environment ev(c);
        double loss = 0.0, viol = 0.0;
        long n = 0;
        for (const auto& d : eval_days) {
            GridState s = ev.reset(d);
            while (!ev.done()) {
                StepOutcome o = ev.step({tr.act_greedy(s.obs)});
                loss += -o.reward;
                viol += o.cost;
                ++n;
                s = o.next;
            }
        }
        return std::make_pair(loss / n, viol / n);
    };

    auto [loss_small, viol_small] = run(0.5);
    auto [loss_big, viol_big] = run(40.0);
    INFO("delta=0.5: loss ", loss_small, " viol ", viol_small);
    INFO("delta=40:  loss ", loss_big, " viol ", viol_big);
    CHECK(loss_small < loss_big);  // light penalty chases loss
    CHECK(viol_small > viol_big);  // and tolerates violation
}

TEST_CASE("mbo: no devices means the uncontrolled flow is the answer") {
    NetworkCase c = toy4();
    c.devices.clear();
    Environment env(c);
    DayProfile p = flat_profile(c);
    auto [l0, v0] = env.evaluate_row(p, 0, Eigen::VectorXd(0));
    std::mt19937_64 rng(6);
    MboResult r = mbo_solve(env, p, 0, rng, {});
    CHECK(r.loss_mw == doctest::Approx(l0));
    CHECK(r.violation_pu == doctest::Approx(v0));
    CHECK(r.evaluations == 1);
}

TEST_CASE("mbo: single-SVC case matches a 2001-point grid search") {
    NetworkCase c = toy4();
    Environment env(c);
    DayProfile p = flat_profile(c);

    // exhaustive oracle over [q_min, q_max]
    auto [lo, hi] = env.device_bounds()[0];
    double best_score = 1e300, best_loss = 0.0, best_viol = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        double q = lo + (hi - lo) * k / 2000.0;
        auto [l, v] = env.evaluate_row(p, 0, Eigen::VectorXd::Constant(1, q));
        double score = l + 1e3 * v;
        if (score < best_score) {
            best_score = score;
            best_loss = l;
            best_viol = v;
        }
    }

    std::mt19937_64 rng(7);
    MboOptions opts;
    opts.budget = 1500;
    MboResult r = mbo_solve(env, p, 0, rng, opts);
    CHECK(r.violation_pu == doctest::Approx(best_viol).epsilon(1e-6));
    CHECK(std::abs(r.loss_mw - best_loss) < 1e-4);
    CHECK(r.q_mvar[0] >= lo);
    CHECK(r.q_mvar[0] <= hi);
    CHECK(best_viol == doctest::Approx(0.0)); // this instance is feasible
}

TEST_CASE("mbo: settings stay inside device bounds on the 33-bus feeder") {
    NetworkCase c = voltvar::testing::load_feeder("case33.txt", "devices33.txt");
    Environment env(c);
    auto days = generate_synthetic_profiles(8, 1, c);
    std::mt19937_64 rng(8);
    MboOptions opts;
    opts.budget = 600;
    for (int t : {0, 40, 70}) {
        MboResult r = mbo_solve(env, days[0], t, rng, opts);
        for (int i = 0; i < 4; ++i) {
            CHECK(r.q_mvar[i] >= env.device_bounds()[i].first - 1e-12);
            CHECK(r.q_mvar[i] <= env.device_bounds()[i].second + 1e-12);
        }
    }
}

TEST_CASE("mbo: more budget never hurts") {
    NetworkCase c = toy4();
    Environment env(c);
    DayProfile p = flat_profile(c);
    double prev = 1e300;
    for (long budget : {1L, 10L, 50L, 200L, 800L}) {
        std::mt19937_64 rng(9); // same stream per call
        MboOptions opts;
        opts.budget = budget;
        MboResult r = mbo_solve(env, p, 0, rng, opts);
        double score = r.loss_mw + 1e3 * r.violation_pu;
        CHECK(score <= prev + 1e-12);
        CHECK(r.evaluations <= budget);
        prev = score;
    }
}

TEST_CASE("sac-penalty toy run converges" * doctest::timeout(600)) {
    NetworkCase c = toy4();
    auto days = generate_synthetic_profiles(13, 4, c);
    // Short bootstrap horizon so the critics can settle within a short run.
    AlgoConfig cfg;
    cfg.batch = 64;
    cfg.warmup = 512;
    cfg.episodes = 60;
    cfg.buffer_capacity = 8192;
    cfg.gamma = 0.9;
    cfg.eta = 0.98;

    Environment env(c);
    TrainerOptions opts;
    opts.algo = RlAlgo::SacPenalty;
    opts.penalty_delta = 5.0;
    AlSacTrainer tr(env.state_dim(), env.action_dim(), cfg, 10, opts);
    TrainResult r = tr.train(env, days);

    double late = 0.0;
    for (int i = 0; i < 10; ++i) late += r.episodes[r.episodes.size() - 10 + i].critic_loss;
    INFO("critic loss over the last 10 episodes: ", late / 10);
    CHECK(late / 10 < 1e-3);
}
