// voltvar: train/evaluate Volt/VAR control policies on radial feeders.
//
// Exit codes: 0 ok, 2 config or input error, 3 run-quality failure
// (more than half of an algorithm run's episodes truncated by divergence).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "voltvar/io_util.hpp"
#include "voltvar/runner.hpp"
#include "voltvar/svgplot.hpp"

using namespace voltvar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRunQuality = 3;

RunConfig load_config_or_die(const std::string& path) {
    namespace fs = std::filesystem;
    RunConfig cfg = load_run_config(path);
    if (!fs::exists(cfg.case_file)) throw ConfigError("case file not found: " + cfg.case_file);
    if (!cfg.device_file.empty() && !fs::exists(cfg.device_file))
        throw ConfigError("device file not found: " + cfg.device_file);
    if (!cfg.agent_file.empty() && !fs::exists(cfg.agent_file))
        throw ConfigError("agent file not found: " + cfg.agent_file);
    if (!cfg.profiles_dir.empty() && !fs::exists(cfg.profiles_dir))
        throw ConfigError("profiles directory not found: " + cfg.profiles_dir);
    return cfg;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
    std::ostringstream os;
    os << "method,power_loss_mw,voltage_violation_pu\n";
    for (const auto& r : rows)
        os << r.method << "," << format_double(r.power_loss_mw) << ","
           << format_double(r.voltage_violation_pu) << "\n";
    return os.str();
}

int cmd_train(const std::string& config_path, const std::string& out_override, long seed_override) {
    RunConfig cfg = load_config_or_die(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
    if (cfg.algorithm == "mbo") throw ConfigError("'train' does not apply to mbo; use the mbo command");

    TrainOutput out = run_training(cfg);
    for (const auto& art : out.seeds) {
        const auto& last = art.result.episodes.back();
        std::printf("seed %llu: %zu episodes, final mean loss %.4f MW, mean cost %.5f p.u.%s\n",
                    static_cast<unsigned long long>(art.seed), art.result.episodes.size(),
                    last.mean_loss_mw, last.mean_cost_pu,
                    art.result.truncated_episodes ? " (has truncated episodes)" : "");
    }
    std::printf("wrote %zu seed metrics + metrics_mean.csv + checkpoints under %s\n", out.seeds.size(),
                cfg.out_dir.c_str());
    if (out.divergence_dominated) {
        std::fprintf(stderr, "error: more than half of the episodes diverged\n");
        return kExitRunQuality;
    }
    return kExitOk;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint, const std::string& out_override) {
    RunConfig cfg = load_config_or_die(config_path);
    // Checkpoints default to the training run's directory; --out only moves
    // where eval.csv lands.
    std::string default_base = cfg.out_dir + "/checkpoint_seed" + std::to_string(cfg.seeds.front());
    if (!out_override.empty()) cfg.out_dir = out_override;

    std::vector<EvalRow> rows;
    if (cfg.algorithm == "mbo") {
        NetworkCase net = load_configured_case(cfg);
        rows.push_back(evaluate_mbo(cfg, net, test_profiles(cfg, net)));
    } else {
        std::string base = checkpoint.empty() ? default_base : checkpoint;
        if (base.size() > 4 && base.substr(base.size() - 4) == ".bin") base = base.substr(0, base.size() - 4);
        rows.push_back(evaluate_checkpoint(cfg, base));
    }
    std::string csv = eval_csv(rows);
    atomic_write_file(cfg.out_dir + "/eval.csv", csv);
    std::fputs(csv.c_str(), stdout);
    return kExitOk;
}

int cmd_pf(const std::string& case_path, const std::string& device_path, const std::string& inj_path) {
    std::vector<std::string> warnings;
    NetworkCase net = load_case_file(case_path, &warnings);
    if (!device_path.empty()) {
        net.devices = load_device_file(device_path);
        validate_case(net);
    }
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    // Default: nominal loads drawn, no generation.
    Injection inj = Injection::zeros(net.n_bus());
    for (int b = 0; b < net.n_bus(); ++b) {
        inj.p_mw[b] = -net.buses[b].load_p_mw;
        inj.q_mvar[b] = -net.buses[b].load_q_mvar;
    }
    if (!inj_path.empty()) {
        // Lines `bus p_mw q_mvar` replace that bus's net injection.
        std::istringstream is(read_text_file(inj_path));
        std::string line;
        while (std::getline(is, line)) {
            size_t h = line.find('#');
            if (h != std::string::npos) line = line.substr(0, h);
            std::istringstream ls(line);
            int id;
            double p, q;
            if (!(ls >> id >> p >> q)) continue;
            int bi = net.bus_index(id);
            if (bi < 0) throw CaseError("injection file references unknown bus " + std::to_string(id));
            inj.p_mw[bi] = p;
            inj.q_mvar[bi] = q;
        }
    }

    PowerFlowSolution sol = solve(net, inj);
    if (!sol.converged) throw DivergedError("power flow did not converge");
    std::printf("bus voltages (p.u.):\n");
    for (int b = 0; b < net.n_bus(); ++b)
        std::printf("  %4d  %.6f  angle %.4f deg\n", net.buses[b].id, std::abs(sol.v[b]),
                    std::arg(sol.v[b]) * 180.0 / M_PI);
    std::printf("iterations: %d\n", sol.iterations);
    std::printf("total loss: %.6f MW\n", total_loss(sol));
    std::printf("voltage violation: %.6f p.u.\n", violation_metric(sol, net.buses));
    return kExitOk;
}

int cmd_mbo(const std::string& config_path, const std::string& out_override) {
    RunConfig cfg = load_config_or_die(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    NetworkCase net = load_configured_case(cfg);
    CsvTable per_step;
    EvalRow row = evaluate_mbo(cfg, net, test_profiles(cfg, net), &per_step);
    atomic_write_file(cfg.out_dir + "/mbo.csv", csv_serialize(per_step));
    std::string csv = eval_csv({row});
    atomic_write_file(cfg.out_dir + "/eval_mbo.csv", csv);
    std::fputs(csv.c_str(), stdout);
    return kExitOk;
}

int cmd_plot(const std::string& metrics_path, const std::string& columns_arg, const std::string& out_path) {
    CsvTable table = csv_parse(read_text_file(metrics_path));
    std::vector<std::string> columns;
    std::stringstream ss(columns_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) columns.push_back(tok);
    }
    std::string svg = render_line_chart(table, columns);
    atomic_write_file(out_path, svg);
    std::printf("wrote %s (%zu series, %zu points each)\n", out_path.c_str(), columns.size(),
                table.rows.size());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volt/VAR control benchmark on radial distribution feeders"};
    app.require_subcommand(1);

    std::string config_path, out_dir, checkpoint, case_path, device_path, inj_path;
    std::string metrics_path, columns = "mean_loss_mw", plot_out = "plot.svg";
    long seed_override = -1;

    auto* train = app.add_subcommand("train", "train policies per seed and write metrics/checkpoints");
    train->add_option("--config", config_path, "run config file")->required();
    train->add_option("--out", out_dir, "override output directory");
    train->add_option("--seed", seed_override, "run a single seed instead of the configured list");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test days");
    eval->add_option("--config", config_path, "run config file")->required();
    eval->add_option("--checkpoint", checkpoint, "checkpoint basename or .bin path");
    eval->add_option("--out", out_dir, "override output directory");

    auto* pf = app.add_subcommand("pf", "solve one power flow and print the solution");
    pf->add_option("--case", case_path, "case file")->required();
    pf->add_option("--devices", device_path, "device file (validation only)");
    pf->add_option("--injections", inj_path, "per-bus net injection overrides");

    auto* mbo = app.add_subcommand("mbo", "reference optimizer over the test days");
    mbo->add_option("--config", config_path, "run config file")->required();
    mbo->add_option("--out", out_dir, "override output directory");

    auto* plot = app.add_subcommand("plot", "render metrics columns to an SVG line chart");
    plot->add_option("--metrics", metrics_path, "metrics CSV")->required();
    plot->add_option("--columns", columns, "comma-separated column names");
    plot->add_option("--out", plot_out, "output SVG path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(config_path, out_dir, seed_override);
        if (eval->parsed()) return cmd_eval(config_path, checkpoint, out_dir);
        if (pf->parsed()) return cmd_pf(case_path, device_path, inj_path);
        if (mbo->parsed()) return cmd_mbo(config_path, out_dir);
        if (plot->parsed()) return cmd_plot(metrics_path, columns, plot_out);
    } catch (const DivergedError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRunQuality;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
