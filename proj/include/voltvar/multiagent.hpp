#pragma once

#include <memory>
#include <string>
#include <vector>

#include "voltvar/alsac.hpp"

namespace voltvar {

/// One agent per reactive device; it observes [V, P, Q] of the device's bus.
struct AgentSpec {
    int id = 0;
    int device = 0; // index into NetworkCase::devices
    int bus = 0;    // bus id (must equal the device's bus)
};

/// `agent <id> device <idx> bus <id>` per line.
std::vector<AgentSpec> parse_agent_map(const std::string& text);
std::string serialize_agent_map(const std::vector<AgentSpec>& agents);

/// Default map: agent i controls device i and observes its bus.
std::vector<AgentSpec> default_agent_map(const NetworkCase& c);

void validate_agents(const std::vector<AgentSpec>& agents, const NetworkCase& c);

/// Observation indices of one agent within the flat [P.., Q.., V..] state:
/// {V_b, P_b, Q_b}.
std::vector<int> local_obs_indices(const AgentSpec& agent, const NetworkCase& c);
Vec local_obs(const GridState& global, const AgentSpec& agent, const NetworkCase& c);

/// Layout with one slot per agent over its local observation triplet.
ActorLayout decentralized_layout(const std::vector<AgentSpec>& agents, const NetworkCase& c);

/// Per-device actors on local observations sharing centralized critics and
/// multipliers. Built on the same trainer core as the centralized setup, so
/// a single full-observation agent reproduces it exactly.
struct MultiAgentSystem {
    std::vector<AgentSpec> agents;
    std::unique_ptr<AlSacTrainer> trainer;

    static MultiAgentSystem make(const NetworkCase& c, const std::vector<AgentSpec>& agents,
                                 const AlgoConfig& cfg, std::uint64_t seed);
};

/// Joint action from per-agent policies on their local observations;
/// `xi` is one standard-normal row (length = joint action dim).
Vec decentralized_act(MultiAgentSystem& sys, const GridState& global, const Mat& xi);

/// Centralized update on global transitions (Alg. 1 lines 9-12 with
/// per-agent actor gradients isolated to their own action components).
void ctde_update(MultiAgentSystem& sys, const Batch& batch);

} // namespace voltvar
