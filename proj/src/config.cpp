#include "voltvar/config.hpp"

#include <cmath>
#include <sstream>

#include "voltvar/io_util.hpp"

namespace voltvar {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_num(const std::string& v, const std::string& key) {
    size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != v.size()) throw ConfigError("config key '" + key + "': bad number '" + v + "'");
    return x;
}

long to_long(const std::string& v, const std::string& key) {
    double x = to_num(v, key);
    long i = std::lround(x);
    if (std::abs(x - i) > 1e-9) throw ConfigError("config key '" + key + "' must be an integer");
    return i;
}

} // namespace

RunConfig parse_run_config(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = raw;
        size_t h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");

        if (key == "case") c.case_file = val;
        else if (key == "devices") c.device_file = val;
        else if (key == "agents") c.agent_file = val;
        else if (key == "profiles_dir") c.profiles_dir = val;
        else if (key == "algorithm") {
            if (val != "alsac" && val != "sac" && val != "ddpg" && val != "mbo")
                throw ConfigError("algorithm must be one of alsac|sac|ddpg|mbo, got '" + val + "'");
            c.algorithm = val;
        } else if (key == "delta") c.delta = to_num(val, key);
        else if (key == "gamma") c.algo.gamma = to_num(val, key);
        else if (key == "net_lr") c.algo.net_lr = to_num(val, key);
        else if (key == "multiplier_lr") c.algo.multiplier_lr = to_num(val, key);
        else if (key == "batch") c.algo.batch = static_cast<int>(to_long(val, key));
        else if (key == "alpha_init") c.algo.alpha_init = to_num(val, key);
        else if (key == "lambda_init") c.algo.lambda_init = to_num(val, key);
        else if (key == "target_entropy") {
            if (val == "auto") c.algo.target_entropy = std::numeric_limits<double>::quiet_NaN();
            else c.algo.target_entropy = to_num(val, key);
        } else if (key == "cost_bound") c.algo.cost_bound = to_num(val, key);
        else if (key == "eta") c.algo.eta = to_num(val, key);
        else if (key == "episodes") c.algo.episodes = static_cast<int>(to_long(val, key));
        else if (key == "buffer_capacity") c.algo.buffer_capacity = static_cast<std::size_t>(to_long(val, key));
        else if (key == "warmup") c.algo.warmup = static_cast<int>(to_long(val, key));
        else if (key == "profile_seed") c.profile_seed = static_cast<std::uint64_t>(to_long(val, key));
        else if (key == "train_days") c.train_days = static_cast<int>(to_long(val, key));
        else if (key == "test_days") c.test_days = static_cast<int>(to_long(val, key));
        else if (key == "mult_min") c.profile.mult_min = to_num(val, key);
        else if (key == "mult_max") c.profile.mult_max = to_num(val, key);
        else if (key == "mbo_budget") c.mbo.budget = to_long(val, key);
        else if (key == "v_min") c.v_min = to_num(val, key);
        else if (key == "v_max") c.v_max = to_num(val, key);
        else if (key == "explore_sigma") c.explore_sigma = to_num(val, key);
        else if (key == "out") c.out_dir = val;
        else if (key == "seeds") {
            c.seeds.clear();
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = trim(tok);
                if (!tok.empty()) c.seeds.push_back(static_cast<std::uint64_t>(to_long(tok, key)));
            }
            if (c.seeds.empty()) throw ConfigError("seeds list is empty");
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }

    if (c.case_file.empty()) throw ConfigError("config missing required key 'case'");
    if (c.algo.gamma < 0.0 || c.algo.gamma > 1.0) throw ConfigError("gamma must be in [0, 1]");
    if (c.algo.net_lr <= 0.0 || c.algo.multiplier_lr <= 0.0) throw ConfigError("learning rates must be positive");
    if (c.algo.batch < 1) throw ConfigError("batch must be >= 1");
    if (c.algo.episodes < 1) throw ConfigError("episodes must be >= 1");
    if (c.train_days < 1 || c.test_days < 0) throw ConfigError("bad train/test day counts");
    if (!(c.v_min < c.v_max)) throw ConfigError("requires v_min < v_max");
    return c;
}

RunConfig load_run_config(const std::string& path) {
    try {
        return parse_run_config(read_text_file(path));
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string(e.what()));
    }
}

std::string serialize_run_config(const RunConfig& c) {
    std::ostringstream os;
    os << "case = " << c.case_file << "\n";
    if (!c.device_file.empty()) os << "devices = " << c.device_file << "\n";
    if (!c.agent_file.empty()) os << "agents = " << c.agent_file << "\n";
    if (!c.profiles_dir.empty()) os << "profiles_dir = " << c.profiles_dir << "\n";
    os << "algorithm = " << c.algorithm << "\n";
    os << "delta = " << format_double(c.delta) << "\n";
    os << "gamma = " << format_double(c.algo.gamma) << "\n";
    os << "net_lr = " << format_double(c.algo.net_lr) << "\n";
    os << "multiplier_lr = " << format_double(c.algo.multiplier_lr) << "\n";
    os << "batch = " << c.algo.batch << "\n";
    os << "alpha_init = " << format_double(c.algo.alpha_init) << "\n";
    os << "lambda_init = " << format_double(c.algo.lambda_init) << "\n";
    if (std::isnan(c.algo.target_entropy)) os << "target_entropy = auto\n";
    else os << "target_entropy = " << format_double(c.algo.target_entropy) << "\n";
    os << "cost_bound = " << format_double(c.algo.cost_bound) << "\n";
    os << "eta = " << format_double(c.algo.eta) << "\n";
    os << "episodes = " << c.algo.episodes << "\n";
    os << "buffer_capacity = " << c.algo.buffer_capacity << "\n";
    os << "warmup = " << c.algo.warmup << "\n";
    os << "profile_seed = " << c.profile_seed << "\n";
    os << "train_days = " << c.train_days << "\n";
    os << "test_days = " << c.test_days << "\n";
    os << "mult_min = " << format_double(c.profile.mult_min) << "\n";
    os << "mult_max = " << format_double(c.profile.mult_max) << "\n";
    os << "mbo_budget = " << c.mbo.budget << "\n";
    os << "v_min = " << format_double(c.v_min) << "\n";
    os << "v_max = " << format_double(c.v_max) << "\n";
    os << "explore_sigma = " << format_double(c.explore_sigma) << "\n";
    os << "seeds = ";
    for (size_t i = 0; i < c.seeds.size(); ++i) os << (i ? "," : "") << c.seeds[i];
    os << "\n";
    os << "out = " << c.out_dir << "\n";
    return os.str();
}

NetworkCase load_configured_case(const RunConfig& c) {
    NetworkCase net = load_case_file(c.case_file);
    if (!c.device_file.empty()) {
        net.devices = load_device_file(c.device_file);
    }
    for (auto& b : net.buses) {
        b.v_min = c.v_min;
        b.v_max = c.v_max;
    }
    validate_case(net);
    return net;
}

} // namespace voltvar
