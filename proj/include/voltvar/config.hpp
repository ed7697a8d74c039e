#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voltvar/alsac.hpp"
#include "voltvar/mbo.hpp"
#include "voltvar/profiles.hpp"

namespace voltvar {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` run description with `#` comments. Unknown keys are
/// errors. Every algorithm hyperparameter default is baked in here and
/// overridable.
struct RunConfig {
    std::string case_file;
    std::string device_file;
    std::string agent_file;   // optional; enables the decentralized layout
    std::string profiles_dir; // optional; read CSVs instead of synthesizing
    std::string algorithm = "alsac"; // alsac | sac | ddpg | mbo
    double delta = 0.5;              // penalty coefficient for sac/ddpg
    AlgoConfig algo;
    SyntheticProfileParams profile;
    MboOptions mbo;
    std::uint64_t profile_seed = 9000;
    int train_days = 200;
    int test_days = 10;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::string out_dir = "runs/out";
    double v_min = 0.95;
    double v_max = 1.05;
    double explore_sigma = 0.1; // ddpg
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& c);

/// Loads the case + device files, applies the configured voltage limits.
NetworkCase load_configured_case(const RunConfig& c);

} // namespace voltvar
