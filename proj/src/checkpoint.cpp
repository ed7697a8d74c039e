#include "voltvar/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "voltvar/io_util.hpp"

static_assert(std::endian::native == std::endian::little, "tensor dump assumes a little-endian host");

namespace voltvar {

namespace {

constexpr char kMagic[8] = {'V', 'V', 'C', 'P', '0', '0', '0', '1'};

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("tensor dump truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

} // namespace

void save_tensor_file(const std::string& path, const std::map<std::string, Mat>& tensors) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, m] : tensors) {
        if (name.size() > 0xffff) throw std::runtime_error("tensor name too long");
        put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out.append(name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(out, m(i, j));
    }
    atomic_write_file(path, out);
}

std::map<std::string, Mat> load_tensor_file(const std::string& path) {
    std::string in = read_text_file(path);
    if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a tensor dump: " + path);
    size_t pos = sizeof(kMagic);
    auto count = take<std::uint32_t>(in, pos);
    std::map<std::string, Mat> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        auto name_len = take<std::uint16_t>(in, pos);
        if (pos + name_len > in.size()) throw std::runtime_error("tensor dump truncated");
        std::string name = in.substr(pos, name_len);
        pos += name_len;
        auto rows = take<std::uint32_t>(in, pos);
        auto cols = take<std::uint32_t>(in, pos);
        Mat m(rows, cols);
        for (std::uint32_t i = 0; i < rows; ++i)
            for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = take<double>(in, pos);
        out.emplace(std::move(name), std::move(m));
    }
    return out;
}

namespace {

nlohmann::json config_json(const AlgoConfig& c) {
    return {{"gamma", c.gamma},
            {"net_lr", c.net_lr},
            {"multiplier_lr", c.multiplier_lr},
            {"batch", c.batch},
            {"alpha_init", c.alpha_init},
            {"lambda_init", c.lambda_init},
            {"target_entropy", std::isnan(c.target_entropy) ? nlohmann::json() : nlohmann::json(c.target_entropy)},
            {"cost_bound", c.cost_bound},
            {"eta", c.eta},
            {"episodes", c.episodes},
            {"steps", c.steps},
            {"buffer_capacity", c.buffer_capacity},
            {"warmup", c.warmup}};
}

AlgoConfig config_from_json(const nlohmann::json& j) {
    AlgoConfig c;
    c.gamma = j.at("gamma");
    c.net_lr = j.at("net_lr");
    c.multiplier_lr = j.at("multiplier_lr");
    c.batch = j.at("batch");
    c.alpha_init = j.at("alpha_init");
    c.lambda_init = j.at("lambda_init");
    if (!j.at("target_entropy").is_null()) c.target_entropy = j.at("target_entropy");
    c.cost_bound = j.at("cost_bound");
    c.eta = j.at("eta");
    c.episodes = j.at("episodes");
    c.steps = j.at("steps");
    c.buffer_capacity = j.at("buffer_capacity");
    c.warmup = j.at("warmup");
    return c;
}

} // namespace

void save_checkpoint(const std::string& basename, const std::map<std::string, Mat>& tensors,
                     const CheckpointMeta& meta) {
    save_tensor_file(basename + ".bin", tensors);
    nlohmann::json j;
    j["algorithm"] = meta.algorithm;
    j["penalty_delta"] = meta.penalty_delta;
    j["obs_dim"] = meta.obs_dim;
    j["act_dim"] = meta.act_dim;
    j["agents"] = nlohmann::json::array();
    for (const auto& a : meta.agents)
        j["agents"].push_back({{"id", a.id}, {"device", a.device}, {"bus", a.bus}});
    j["config"] = config_json(meta.config);
    j["lagrange"] = {{"alpha", meta.lagrange.alpha},
                     {"lambda", meta.lagrange.lambda},
                     {"alpha_lr", meta.lagrange.alpha_lr},
                     {"lambda_lr", meta.lagrange.lambda_lr},
                     {"target_entropy", meta.lagrange.target_entropy},
                     {"cost_bound", meta.lagrange.cost_bound}};
    atomic_write_file(basename + ".json", j.dump(2) + "\n");
}

CheckpointMeta load_checkpoint_meta(const std::string& json_path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(json_path));
    CheckpointMeta m;
    m.algorithm = j.at("algorithm");
    m.penalty_delta = j.at("penalty_delta");
    m.obs_dim = j.at("obs_dim");
    m.act_dim = j.at("act_dim");
    for (const auto& a : j.at("agents"))
        m.agents.push_back({a.at("id"), a.at("device"), a.at("bus")});
    m.config = config_from_json(j.at("config"));
    m.lagrange.alpha = j.at("lagrange").at("alpha");
    m.lagrange.lambda = j.at("lagrange").at("lambda");
    m.lagrange.alpha_lr = j.at("lagrange").at("alpha_lr");
    m.lagrange.lambda_lr = j.at("lagrange").at("lambda_lr");
    m.lagrange.target_entropy = j.at("lagrange").at("target_entropy");
    m.lagrange.cost_bound = j.at("lagrange").at("cost_bound");
    return m;
}

} // namespace voltvar
