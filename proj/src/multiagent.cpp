#include "voltvar/multiagent.hpp"

#include <sstream>
#include <stdexcept>

namespace voltvar {

std::vector<AgentSpec> parse_agent_map(const std::string& text) {
    std::vector<AgentSpec> out;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        size_t h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        std::istringstream ls(line);
        std::string kw_agent, kw_device, kw_bus;
        AgentSpec a;
        if (!(ls >> kw_agent)) continue; // blank line
        if (!(ls >> a.id >> kw_device >> a.device >> kw_bus >> a.bus) || kw_agent != "agent" ||
            kw_device != "device" || kw_bus != "bus")
            throw std::runtime_error("agent map line " + std::to_string(line_no) +
                                     ": expected 'agent <id> device <idx> bus <id>'");
        out.push_back(a);
    }
    return out;
}

std::string serialize_agent_map(const std::vector<AgentSpec>& agents) {
    std::ostringstream os;
    for (const auto& a : agents) os << "agent " << a.id << " device " << a.device << " bus " << a.bus << "\n";
    return os.str();
}

std::vector<AgentSpec> default_agent_map(const NetworkCase& c) {
    std::vector<AgentSpec> out;
    for (int d = 0; d < c.n_device(); ++d) out.push_back({d, d, c.devices[d].bus});
    return out;
}

void validate_agents(const std::vector<AgentSpec>& agents, const NetworkCase& c) {
    std::vector<char> used(c.n_device(), 0);
    for (const auto& a : agents) {
        if (a.device < 0 || a.device >= c.n_device())
            throw std::runtime_error("agent " + std::to_string(a.id) + ": no device " + std::to_string(a.device));
        if (used[a.device]) throw std::runtime_error("device " + std::to_string(a.device) + " has two agents");
        used[a.device] = 1;
        if (c.devices[a.device].bus != a.bus)
            throw std::runtime_error("agent " + std::to_string(a.id) + ": observed bus " + std::to_string(a.bus) +
                                     " is not the device bus " + std::to_string(c.devices[a.device].bus));
        if (c.bus_index(a.bus) < 0)
            throw std::runtime_error("agent " + std::to_string(a.id) + ": unknown bus " + std::to_string(a.bus));
    }
    for (int d = 0; d < c.n_device(); ++d)
        if (!used[d]) throw std::runtime_error("device " + std::to_string(d) + " has no agent");
}

std::vector<int> local_obs_indices(const AgentSpec& agent, const NetworkCase& c) {
    int b = c.bus_index(agent.bus);
    if (b < 0) throw std::runtime_error("agent bus " + std::to_string(agent.bus) + " not in case");
    int n = c.n_bus();
    return {2 * n + b, b, n + b}; // V, P, Q
}

Vec local_obs(const GridState& global, const AgentSpec& agent, const NetworkCase& c) {
    auto idx = local_obs_indices(agent, c);
    Vec out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) out[i] = global.obs[idx[i]];
    return out;
}

ActorLayout decentralized_layout(const std::vector<AgentSpec>& agents, const NetworkCase& c) {
    validate_agents(agents, c);
    ActorLayout l;
    l.obs_dim = 3 * c.n_bus();
    l.act_dim = c.n_device();
    for (const auto& a : agents) {
        ActorLayout::Slot s;
        s.obs_idx = local_obs_indices(a, c);
        s.act_begin = a.device; // device actions are scalar, ordered by device index
        s.act_len = 1;
        l.slots.push_back(std::move(s));
    }
    return l;
}

MultiAgentSystem MultiAgentSystem::make(const NetworkCase& c, const std::vector<AgentSpec>& agents,
                                        const AlgoConfig& cfg, std::uint64_t seed) {
    MultiAgentSystem sys;
    sys.agents = agents;
    sys.trainer = std::make_unique<AlSacTrainer>(3 * c.n_bus(), c.n_device(), cfg, seed, TrainerOptions{},
                                                 decentralized_layout(agents, c));
    return sys;
}

Vec decentralized_act(MultiAgentSystem& sys, const GridState& global, const Mat& xi) {
    return sys.trainer->act_with_noise(global.obs, xi);
}

void ctde_update(MultiAgentSystem& sys, const Batch& batch) {
    sys.trainer->update(batch);
}

} // namespace voltvar
