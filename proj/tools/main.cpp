// Command-line runner for Split-BOLFI experiment sweeps, the marginal
// rejection-ABC baseline, proxy grid dumps and one-off simulator calls.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "splitbolfi/harness.hpp"

namespace {

using namespace splitbolfi;

std::vector<int> full_scale_dims(const std::string& model) {
    if (model == "gaussian") return {5, 10, 50, 100};
    if (model == "gvar") return {6, 21, 101};
    return {8};  // daycare strain count
}

ExperimentConfig load_config(const std::string& path, const std::string& out_override,
                             bool full_scale) {
    auto cfg = load_experiment_config(path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (full_scale) cfg.dims = full_scale_dims(cfg.model);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split-BOLFI likelihood-free inference experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed_offset = 0;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool full_scale = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory (overrides config)");
        cmd->add_option("--seed-offset", seed_offset, "offset added to every seed");
        cmd->add_option("--workers", workers, "parallel cells");
        cmd->add_flag("--full-scale", full_scale,
                      "paper-scale dimension grids (documented long runtime)");
    };

    auto* run_cmd = app.add_subcommand("run", "Split-BOLFI sweep over the config grid");
    add_common(run_cmd);

    auto* abc_cmd = app.add_subcommand("abc", "marginal rejection-ABC sweep");
    add_common(abc_cmd);
    bool dump_pools = false;
    abc_cmd->add_flag("--dump-pools", dump_pools, "write the full pool CSV per cell");

    auto* dump_cmd = app.add_subcommand("dump-proxy", "proxy/discrepancy grid for one parameter");
    std::string fit_file, parameter, dump_out = "proxy.csv";
    double dump_w = 1.0;
    int dump_grid = 512;
    dump_cmd->add_option("--fit", fit_file, "serialized fit JSON")->required()
        ->check(CLI::ExistingFile);
    dump_cmd->add_option("--parameter", parameter, "parameter name")->required();
    dump_cmd->add_option("--out", dump_out, "output CSV path");
    dump_cmd->add_option("--w", dump_w, "tempering weight");
    dump_cmd->add_option("--grid-points", dump_grid, "grid resolution");

    auto* sim_cmd = app.add_subcommand("simulate", "run one simulator and write its summaries");
    std::string sim_model = "gaussian", sim_out = "summaries.csv", snapshots_out;
    int sim_dim = 5;
    std::uint64_t sim_seed = 1;
    std::vector<double> sim_theta;
    sim_cmd->add_option("--model", sim_model, "gaussian | gvar | daycare")
        ->check(CLI::IsMember({"gaussian", "gvar", "daycare"}));
    sim_cmd->add_option("--dim", sim_dim, "dimension entry (strain count for daycare)");
    sim_cmd->add_option("--seed", sim_seed, "simulation seed");
    sim_cmd->add_option("--theta", sim_theta, "parameter vector (defaults to generating values)");
    sim_cmd->add_option("--out", sim_out, "summary CSV path");
    sim_cmd->add_option("--snapshots-out", snapshots_out,
                        "daycare only: write the snapshot CSV as well");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto cfg = load_config(config_path, out_dir, full_scale);
            const auto outcome = run_experiment(cfg, workers, seed_offset);
            std::printf("completed %d/%d cells -> %s\n", outcome.completed_cells,
                        outcome.total_cells, cfg.output_dir.c_str());
            return outcome.exit_code();
        }
        if (abc_cmd->parsed()) {
            const auto cfg = load_config(config_path, out_dir, full_scale);
            const auto outcome = run_abc_experiment(cfg, workers, seed_offset, dump_pools);
            std::printf("completed %d/%d cells -> %s\n", outcome.completed_cells,
                        outcome.total_cells, cfg.output_dir.c_str());
            return outcome.exit_code();
        }
        if (dump_cmd->parsed()) {
            dump_proxy(fit_file, parameter, dump_out, dump_w, dump_grid);
            std::printf("wrote %s\n", dump_out.c_str());
            return 0;
        }
        if (sim_cmd->parsed()) {
            ExperimentConfig cfg;
            cfg.model = sim_model;
            cfg.dims = {sim_dim};
            cfg.n_acq = {10};
            cfg.seeds = {sim_seed};
            const auto sim = make_simulator(cfg, sim_dim, sim_seed);
            std::vector<double> theta = sim_theta;
            if (theta.empty()) {
                const auto* gen = generating_values_of(*sim);
                if (!gen) throw std::runtime_error("no generating values; pass --theta");
                theta = *gen;
            }
            const auto summaries = sim->simulate_summaries(theta, sim_seed);
            write_summary_csv(sim_out, sim->summary_names(), summaries);
            std::printf("wrote %s\n", sim_out.c_str());
            if (!snapshots_out.empty()) {
                const auto* daycare = dynamic_cast<const DaycareSimulator*>(sim.get());
                if (!daycare) throw std::runtime_error("--snapshots-out requires --model daycare");
                write_snapshots_csv(snapshots_out, daycare->simulate_snapshots(theta, sim_seed),
                                    daycare->config().n_children, daycare->config().n_strains);
                std::printf("wrote %s\n", snapshots_out.c_str());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
