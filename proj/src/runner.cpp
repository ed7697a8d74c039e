#include "voltvar/runner.hpp"

#include <cmath>
#include <filesystem>

#include "voltvar/io_util.hpp"
#include "voltvar/mbo.hpp"

namespace voltvar {

namespace {

// Offset keeps the test stream disjoint from training for any train_days.
constexpr std::uint64_t kTestSeedOffset = 0x5eedULL;

std::vector<DayProfile> read_profile_range(const RunConfig& cfg, const NetworkCase& net, int first, int count) {
    std::vector<DayProfile> out;
    for (int d = first; d < first + count; ++d) out.push_back(read_profile_csv(cfg.profiles_dir, d, net));
    return out;
}

} // namespace

std::vector<DayProfile> training_profiles(const RunConfig& cfg, const NetworkCase& net) {
    if (!cfg.profiles_dir.empty()) return read_profile_range(cfg, net, 0, cfg.train_days);
    return generate_synthetic_profiles(cfg.profile_seed, cfg.train_days, net, cfg.profile);
}

std::vector<DayProfile> test_profiles(const RunConfig& cfg, const NetworkCase& net) {
    if (!cfg.profiles_dir.empty()) return read_profile_range(cfg, net, cfg.train_days, cfg.test_days);
    return generate_synthetic_profiles(cfg.profile_seed + kTestSeedOffset, cfg.test_days, net, cfg.profile);
}

std::string method_label(const RunConfig& cfg) {
    if (cfg.algorithm == "sac" || cfg.algorithm == "ddpg")
        return cfg.algorithm + "(delta=" + format_double(cfg.delta) + ")";
    return cfg.algorithm;
}

SeedArtifacts train_one_seed(const RunConfig& cfg, const NetworkCase& net,
                             const std::vector<DayProfile>& days, std::uint64_t seed) {
    SeedArtifacts art;
    art.seed = seed;
    Environment env(net);

    CheckpointMeta meta;
    meta.algorithm = cfg.algorithm;
    meta.penalty_delta = (cfg.algorithm == "alsac") ? 0.0 : cfg.delta;
    meta.obs_dim = env.state_dim();
    meta.act_dim = env.action_dim();
    meta.config = cfg.algo;

    std::map<std::string, Mat> tensors;
    if (cfg.algorithm == "ddpg") {
        DdpgTrainer trainer(env.state_dim(), env.action_dim(), cfg.algo, seed, cfg.delta, cfg.explore_sigma);
        art.result = trainer.train(env, days);
        art.metrics = metrics_table(art.result.episodes, false);
        tensors = trainer.export_tensors();
    } else {
        TrainerOptions opts;
        std::optional<ActorLayout> layout;
        if (cfg.algorithm == "sac") {
            opts.algo = RlAlgo::SacPenalty;
            opts.penalty_delta = cfg.delta;
        }
        if (!cfg.agent_file.empty()) {
            meta.agents = parse_agent_map(read_text_file(cfg.agent_file));
            layout = decentralized_layout(meta.agents, net);
        }
        AlSacTrainer trainer(env.state_dim(), env.action_dim(), cfg.algo, seed, opts, layout);
        art.result = trainer.train(env, days);
        art.metrics = metrics_table(art.result.episodes, !meta.agents.empty());
        tensors = trainer.export_tensors();
        meta.lagrange = trainer.lagrange();
    }

    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    std::string base = cfg.out_dir + "/checkpoint_seed" + std::to_string(seed);
    save_checkpoint(base, tensors, meta);
    art.checkpoint_base = base;
    atomic_write_file(cfg.out_dir + "/metrics_seed" + std::to_string(seed) + ".csv",
                      csv_serialize(art.metrics));
    return art;
}

TrainOutput run_training(const RunConfig& cfg) {
    NetworkCase net = load_configured_case(cfg);
    auto days = training_profiles(cfg, net);

    TrainOutput out;
    std::vector<CsvTable> tables;
    for (auto seed : cfg.seeds) {
        out.seeds.push_back(train_one_seed(cfg, net, days, seed));
        const auto& art = out.seeds.back();
        tables.push_back(art.metrics);
        if (art.result.truncated_episodes * 2 > static_cast<int>(art.result.episodes.size()))
            out.divergence_dominated = true;
    }
    out.mean_metrics = csv_mean(tables);
    atomic_write_file(cfg.out_dir + "/metrics_mean.csv", csv_serialize(out.mean_metrics));
    return out;
}

namespace {

template <typename ActFn>
EvalRow greedy_rollout(const NetworkCase& net, const std::vector<DayProfile>& days, ActFn&& act,
                       const std::string& method) {
    Environment env(net);
    double loss_sum = 0.0, viol_sum = 0.0;
    long steps = 0;
    for (const auto& day : days) {
        GridState s = env.reset(day);
        while (!env.done()) {
            StepOutcome out = env.step({act(s.obs)});
            loss_sum += -out.reward;
            viol_sum += out.cost;
            ++steps;
            s = out.next;
        }
    }
    EvalRow row;
    row.method = method;
    row.power_loss_mw = loss_sum / std::max<long>(steps, 1);
    row.voltage_violation_pu = viol_sum / std::max<long>(steps, 1);
    return row;
}

} // namespace

EvalRow evaluate_greedy(const RunConfig&, const NetworkCase& net, AlSacTrainer& trainer,
                        const std::vector<DayProfile>& days, const std::string& method) {
    return greedy_rollout(net, days, [&](const Vec& obs) { return trainer.act_greedy(obs); }, method);
}

EvalRow evaluate_greedy(const RunConfig&, const NetworkCase& net, DdpgTrainer& trainer,
                        const std::vector<DayProfile>& days, const std::string& method) {
    return greedy_rollout(net, days, [&](const Vec& obs) { return trainer.act_greedy(obs); }, method);
}

EvalRow evaluate_checkpoint(const RunConfig& cfg, const std::string& checkpoint_base) {
    NetworkCase net = load_configured_case(cfg);
    auto days = test_profiles(cfg, net);
    CheckpointMeta meta = load_checkpoint_meta(checkpoint_base + ".json");
    auto tensors = load_tensor_file(checkpoint_base + ".bin");

    Environment env(net);
    if (meta.obs_dim != env.state_dim() || meta.act_dim != env.action_dim())
        throw std::runtime_error("checkpoint/architecture mismatch: checkpoint is " +
                                 std::to_string(meta.obs_dim) + "x" + std::to_string(meta.act_dim) +
                                 ", case needs " + std::to_string(env.state_dim()) + "x" +
                                 std::to_string(env.action_dim()));

    RunConfig eval_cfg = cfg;
    eval_cfg.algorithm = meta.algorithm;
    eval_cfg.delta = meta.penalty_delta;
    std::string method = method_label(eval_cfg);

    if (meta.algorithm == "ddpg") {
        DdpgTrainer trainer(meta.obs_dim, meta.act_dim, meta.config, 0, meta.penalty_delta);
        trainer.import_tensors(tensors);
        return evaluate_greedy(cfg, net, trainer, days, method);
    }
    TrainerOptions opts;
    if (meta.algorithm == "sac") {
        opts.algo = RlAlgo::SacPenalty;
        opts.penalty_delta = meta.penalty_delta;
    }
    std::optional<ActorLayout> layout;
    if (!meta.agents.empty()) layout = decentralized_layout(meta.agents, net);
    AlSacTrainer trainer(meta.obs_dim, meta.act_dim, meta.config, 0, opts, layout);
    trainer.import_tensors(tensors);
    return evaluate_greedy(cfg, net, trainer, days, method);
}

EvalRow evaluate_mbo(const RunConfig& cfg, const NetworkCase& net, const std::vector<DayProfile>& days,
                     CsvTable* per_step) {
    Environment env(net);
    MboOptions opts = cfg.mbo;
    double loss_sum = 0.0, viol_sum = 0.0;
    long steps = 0;

    if (per_step) {
        per_step->columns = {"step", "loss_mw", "violation_pu"};
        for (int d = 0; d < env.action_dim(); ++d) per_step->columns.push_back("q_" + std::to_string(d + 1));
        per_step->rows.clear();
    }

    for (size_t d = 0; d < days.size(); ++d) {
        for (int t = 0; t < kStepsPerDay; ++t) {
            // Per-step generator: results do not depend on evaluation order.
            std::mt19937_64 rng(cfg.profile_seed * 7919 + d * kStepsPerDay + t);
            MboResult r = mbo_solve(env, days[d], t, rng, opts);
            loss_sum += r.loss_mw;
            viol_sum += r.violation_pu;
            ++steps;
            if (per_step) {
                std::vector<double> row{static_cast<double>(steps - 1), r.loss_mw, r.violation_pu};
                for (int i = 0; i < r.q_mvar.size(); ++i) row.push_back(r.q_mvar[i]);
                per_step->rows.push_back(std::move(row));
            }
        }
    }
    EvalRow row;
    row.method = "mbo";
    row.power_loss_mw = loss_sum / std::max<long>(steps, 1);
    row.voltage_violation_pu = viol_sum / std::max<long>(steps, 1);
    return row;
}

} // namespace voltvar
