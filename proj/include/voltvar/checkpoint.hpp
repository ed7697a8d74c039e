#pragma once

#include <map>
#include <string>
#include <vector>

#include "voltvar/alsac.hpp"
#include "voltvar/multiagent.hpp"

namespace voltvar {

/// Binary tensor dump: magic "VVCP0001", u32 tensor count, then per tensor
/// u16 name length + name, u32 rows, u32 cols, rows*cols little-endian f64
/// in row-major order. Vectors are stored as n x 1.
void save_tensor_file(const std::string& path, const std::map<std::string, Mat>& tensors);
std::map<std::string, Mat> load_tensor_file(const std::string& path);

/// Sidecar record (JSON) describing what the tensor dump parameterizes.
struct CheckpointMeta {
    std::string algorithm; // alsac | sac | ddpg
    double penalty_delta = 0.0;
    int obs_dim = 0;
    int act_dim = 0;
    std::vector<AgentSpec> agents; // empty = centralized
    AlgoConfig config;
    LagrangeState lagrange;
};

/// Writes <basename>.bin and <basename>.json atomically.
void save_checkpoint(const std::string& basename, const std::map<std::string, Mat>& tensors,
                     const CheckpointMeta& meta);
CheckpointMeta load_checkpoint_meta(const std::string& json_path);

} // namespace voltvar
