#pragma once

#include <string>
#include <vector>

#include "voltvar/checkpoint.hpp"
#include "voltvar/config.hpp"
#include "voltvar/ddpg.hpp"
#include "voltvar/metrics.hpp"

namespace voltvar {

/// Train/test day sets: synthesized from profile_seed (test days use a
/// shifted stream so the sets are disjoint), or read from profiles_dir
/// where days 0..train-1 are the training set and the next test_days are
/// the test set.
std::vector<DayProfile> training_profiles(const RunConfig& cfg, const NetworkCase& net);
std::vector<DayProfile> test_profiles(const RunConfig& cfg, const NetworkCase& net);

struct SeedArtifacts {
    std::uint64_t seed = 0;
    TrainResult result;
    CsvTable metrics;
    std::string checkpoint_base;
};

struct TrainOutput {
    std::vector<SeedArtifacts> seeds;
    CsvTable mean_metrics;
    bool divergence_dominated = false; // >50% truncated episodes for some seed
};

/// Trains one seed without touching the filesystem.
SeedArtifacts train_one_seed(const RunConfig& cfg, const NetworkCase& net,
                             const std::vector<DayProfile>& days, std::uint64_t seed);

/// Full multi-seed run: per-seed metrics CSV + checkpoint plus the
/// seed-averaged CSV, all under cfg.out_dir.
TrainOutput run_training(const RunConfig& cfg);

struct EvalRow {
    std::string method;
    double power_loss_mw = 0.0;
    double voltage_violation_pu = 0.0;
};

/// Greedy (policy-mean) rollout over the test days; per-step means.
EvalRow evaluate_greedy(const RunConfig& cfg, const NetworkCase& net, AlSacTrainer& trainer,
                        const std::vector<DayProfile>& days, const std::string& method);
EvalRow evaluate_greedy(const RunConfig& cfg, const NetworkCase& net, DdpgTrainer& trainer,
                        const std::vector<DayProfile>& days, const std::string& method);

/// Rebuilds the trainer recorded at `checkpoint_base` and evaluates it.
EvalRow evaluate_checkpoint(const RunConfig& cfg, const std::string& checkpoint_base);

/// Reference optimizer over the same test days. When `per_step` is given it
/// receives `step,loss_mw,violation_pu,q_1..q_m` rows.
EvalRow evaluate_mbo(const RunConfig& cfg, const NetworkCase& net, const std::vector<DayProfile>& days,
                     CsvTable* per_step = nullptr);

std::string method_label(const RunConfig& cfg);

} // namespace voltvar
