#ifndef SPLITBOLFI_HARNESS_HPP
#define SPLITBOLFI_HARNESS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitbolfi/abc.hpp"
#include "splitbolfi/engine.hpp"
#include "splitbolfi/io.hpp"
#include "splitbolfi/parallel.hpp"
#include "splitbolfi/posterior.hpp"
#include "splitbolfi/simulators/daycare.hpp"
#include "splitbolfi/simulators/gaussian.hpp"
#include "splitbolfi/simulators/gvar.hpp"

namespace splitbolfi {

inline constexpr const char* kToolVersion = "0.1.0";

struct AbcGrid {
    std::vector<double> q;
    std::vector<int> n_samples;
};

struct DaycareSettings {
    int n_children = 47;
    int n_observations = 11;
    double true_beta = 5.5;
    double true_lambda = 5.5;
    double true_competition = 2.0;  // competition of the first strain pair; others zero
};

// Configuration-driven experiment grid. `dims` is the parameter-space
// dimension for the Gaussian model, the variable count plus one for GVAR,
// and the strain count for the daycare model.
struct ExperimentConfig {
    std::string model;
    std::vector<int> dims;
    std::vector<int> n_acq;
    std::vector<double> w_values{1.0};
    std::vector<std::uint64_t> seeds;
    std::optional<AbcGrid> abc;
    std::string output_dir = "out";
    std::optional<std::string> data_file;

    double beta = 2.0;
    int n_init = 10;
    double jitter_fraction = 0.05;
    int grid_points = 256;
    int refine_iters = 40;
    int refit_every = 5;
    int proxy_grid_points = 512;
    std::string discrepancy_norm = "absolute";  // or "squared"
    int gaussian_n_obs = 100;
    double gaussian_lower = -2.0;
    double gaussian_upper = 2.0;
    int gvar_T = 500;
    double gvar_sigma2 = 0.1;
    DaycareSettings daycare;

    [[nodiscard]] DiscrepancyNorm norm() const {
        if (discrepancy_norm == "absolute") return DiscrepancyNorm::absolute;
        if (discrepancy_norm == "squared") return DiscrepancyNorm::squared;
        throw std::invalid_argument("config: discrepancy_norm must be absolute or squared");
    }

    void validate() const {
        if (model != "gaussian" && model != "gvar" && model != "daycare") {
            throw std::invalid_argument("config: model must be gaussian, gvar or daycare");
        }
        if (dims.empty() || n_acq.empty() || w_values.empty() || seeds.empty()) {
            throw std::invalid_argument("config: dims, n_acq, w_values and seeds must be non-empty");
        }
        std::set<std::uint64_t> unique_seeds(seeds.begin(), seeds.end());
        if (unique_seeds.size() != seeds.size()) {
            throw std::invalid_argument("config: seeds must be distinct");
        }
        if (abc) {
            if (abc->q.empty() || abc->n_samples.empty()) {
                throw std::invalid_argument("config: abc grids must be non-empty");
            }
            for (double q : abc->q) {
                if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("config: abc q outside (0,1)");
            }
        }
        if (output_dir.empty()) throw std::invalid_argument("config: output_dir empty");
        (void)norm();
    }
};

[[nodiscard]] inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    static const std::set<std::string> known{
        "model",      "dims",          "n_acq",          "w_values",       "seeds",
        "abc",        "output_dir",    "data_file",      "beta",           "n_init",
        "jitter_fraction", "grid_points", "refine_iters", "refit_every",
        "proxy_grid_points", "discrepancy_norm", "gaussian_n_obs", "gaussian_lower",
        "gaussian_upper", "gvar_T",     "gvar_sigma2",   "daycare"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument("config: unknown key \"" + key + "\"");
        }
    }
    ExperimentConfig cfg;
    cfg.model = j.at("model").get<std::string>();
    cfg.dims = j.at("dims").get<std::vector<int>>();
    cfg.n_acq = j.at("n_acq").get<std::vector<int>>();
    if (j.contains("w_values")) cfg.w_values = j.at("w_values").get<std::vector<double>>();
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("abc")) {
        static const std::set<std::string> abc_known{"q", "n_samples"};
        for (const auto& [key, value] : j.at("abc").items()) {
            if (!abc_known.count(key)) {
                throw std::invalid_argument("config: unknown abc key \"" + key + "\"");
            }
        }
        AbcGrid grid;
        grid.q = j.at("abc").at("q").get<std::vector<double>>();
        grid.n_samples = j.at("abc").at("n_samples").get<std::vector<int>>();
        cfg.abc = grid;
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("data_file")) cfg.data_file = j.at("data_file").get<std::string>();
    if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
    if (j.contains("n_init")) cfg.n_init = j.at("n_init").get<int>();
    if (j.contains("jitter_fraction")) cfg.jitter_fraction = j.at("jitter_fraction").get<double>();
    if (j.contains("grid_points")) cfg.grid_points = j.at("grid_points").get<int>();
    if (j.contains("refine_iters")) cfg.refine_iters = j.at("refine_iters").get<int>();
    if (j.contains("refit_every")) cfg.refit_every = j.at("refit_every").get<int>();
    if (j.contains("proxy_grid_points")) {
        cfg.proxy_grid_points = j.at("proxy_grid_points").get<int>();
    }
    if (j.contains("discrepancy_norm")) {
        cfg.discrepancy_norm = j.at("discrepancy_norm").get<std::string>();
    }
    if (j.contains("gaussian_n_obs")) cfg.gaussian_n_obs = j.at("gaussian_n_obs").get<int>();
    if (j.contains("gaussian_lower")) cfg.gaussian_lower = j.at("gaussian_lower").get<double>();
    if (j.contains("gaussian_upper")) cfg.gaussian_upper = j.at("gaussian_upper").get<double>();
    if (j.contains("gvar_T")) cfg.gvar_T = j.at("gvar_T").get<int>();
    if (j.contains("gvar_sigma2")) cfg.gvar_sigma2 = j.at("gvar_sigma2").get<double>();
    if (j.contains("daycare")) {
        static const std::set<std::string> dc_known{"n_children", "n_observations", "true_beta",
                                                    "true_lambda", "true_competition"};
        const auto& dc = j.at("daycare");
        for (const auto& [key, value] : dc.items()) {
            if (!dc_known.count(key)) {
                throw std::invalid_argument("config: unknown daycare key \"" + key + "\"");
            }
        }
        if (dc.contains("n_children")) cfg.daycare.n_children = dc.at("n_children").get<int>();
        if (dc.contains("n_observations")) {
            cfg.daycare.n_observations = dc.at("n_observations").get<int>();
        }
        if (dc.contains("true_beta")) cfg.daycare.true_beta = dc.at("true_beta").get<double>();
        if (dc.contains("true_lambda")) cfg.daycare.true_lambda = dc.at("true_lambda").get<double>();
        if (dc.contains("true_competition")) {
            cfg.daycare.true_competition = dc.at("true_competition").get<double>();
        }
    }
    cfg.validate();
    return cfg;
}

[[nodiscard]] inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(nlohmann::json::parse(read_text_file(path)));
}

[[nodiscard]] inline KernelConfig kernel_config_for(const ExperimentConfig& cfg) {
    KernelConfig kcfg;
    if (cfg.model == "daycare") kcfg.lengthscale_fixed = 8.0;
    return kcfg;
}

[[nodiscard]] inline AcquisitionConfig acquisition_config_for(const ExperimentConfig& cfg) {
    AcquisitionConfig acfg;
    acfg.beta = cfg.beta;
    acfg.n_init = cfg.n_init;
    acfg.jitter_fraction = cfg.jitter_fraction;
    acfg.grid_points = cfg.grid_points;
    acfg.refine_iters = cfg.refine_iters;
    return acfg;
}

[[nodiscard]] inline std::vector<double> daycare_true_theta(int n_strains,
                                                            const DaycareSettings& s) {
    const int n_pairs = n_strains * (n_strains - 1) / 2;
    std::vector<double> theta(2 + n_pairs, 0.0);
    theta[0] = s.true_beta;
    theta[1] = s.true_lambda;
    theta[2] = s.true_competition;  // pair (0, 1)
    return theta;
}

// `dim` is one entry of cfg.dims; observed data is regenerated per seed.
[[nodiscard]] inline std::unique_ptr<Simulator> make_simulator(const ExperimentConfig& cfg,
                                                               int dim, std::uint64_t seed) {
    const std::uint64_t data_seed =
        stream_seed(seed, StreamRole::observed_data, fnv1a64(cfg.model), dim);
    if (cfg.model == "gaussian") {
        GaussianMeanSimulator::Config gc;
        gc.dims = dim;
        gc.n_obs = cfg.gaussian_n_obs;
        gc.lower = cfg.gaussian_lower;
        gc.upper = cfg.gaussian_upper;
        gc.norm = cfg.norm();
        if (cfg.data_file) {
            auto observed = load_summary_csv(*cfg.data_file, {});
            return std::make_unique<GaussianMeanSimulator>(gc, std::move(observed),
                                                           std::vector<double>{});
        }
        return std::make_unique<GaussianMeanSimulator>(gc, data_seed);
    }
    if (cfg.model == "gvar") {
        GvarSimulator::Config gc;
        gc.n_vars = dim - 1;
        if (gc.n_vars < 2) throw std::invalid_argument("gvar: dims entries must be >= 3");
        gc.T = cfg.gvar_T;
        gc.sigma2_true = cfg.gvar_sigma2;
        gc.norm = cfg.norm();
        return std::make_unique<GvarSimulator>(gc, data_seed);
    }
    DaycareSimulator::Config dc;
    dc.n_strains = dim;
    dc.n_children = cfg.daycare.n_children;
    dc.n_observations = cfg.daycare.n_observations;
    dc.norm = cfg.norm();
    if (cfg.data_file) {
        auto snapshots = load_snapshots_csv(*cfg.data_file, dc.n_children, dc.n_strains);
        return std::make_unique<DaycareSimulator>(dc, std::move(snapshots));
    }
    return std::make_unique<DaycareSimulator>(dc, daycare_true_theta(dim, cfg.daycare),
                                              data_seed);
}

[[nodiscard]] inline const std::vector<double>* generating_values_of(const Simulator& sim) {
    if (const auto* g = dynamic_cast<const GaussianMeanSimulator*>(&sim)) {
        return g->generating_values().empty() ? nullptr : &g->generating_values();
    }
    if (const auto* g = dynamic_cast<const GvarSimulator*>(&sim)) {
        return &g->generating_values();
    }
    if (const auto* g = dynamic_cast<const DaycareSimulator*>(&sim)) {
        return g->generating_values().empty() ? nullptr : &g->generating_values();
    }
    return nullptr;
}

// Metrics for one (dim, seed, n_acq, w) run, mirroring the summary table
// columns. Quantities without a reference value are NaN and print blank.
struct RunMetrics {
    int dim = 0;
    std::uint64_t seed = 0;
    int n_acq = 0;
    double w = 1.0;
    int sims = 0;
    double rmse_gen_mean = std::numeric_limits<double>::quiet_NaN();
    double rmse_gen_mode = std::numeric_limits<double>::quiet_NaN();
    double rmse_post_mean = std::numeric_limits<double>::quiet_NaN();
    double rmse_post_mode = std::numeric_limits<double>::quiet_NaN();
    double proxy_sd = std::numeric_limits<double>::quiet_NaN();
    double skl = std::numeric_limits<double>::quiet_NaN();
};

inline void to_json(nlohmann::json& j, const RunMetrics& m) {
    j = {{"dim", m.dim},
         {"seed", m.seed},
         {"n_acq", m.n_acq},
         {"w", m.w},
         {"sims", m.sims},
         {"rmse_gen_mean", m.rmse_gen_mean},
         {"rmse_gen_mode", m.rmse_gen_mode},
         {"rmse_post_mean", m.rmse_post_mean},
         {"rmse_post_mode", m.rmse_post_mode},
         {"proxy_sd", m.proxy_sd},
         {"skl", m.skl}};
}

inline void from_json(const nlohmann::json& j, RunMetrics& m) {
    j.at("dim").get_to(m.dim);
    j.at("seed").get_to(m.seed);
    j.at("n_acq").get_to(m.n_acq);
    j.at("w").get_to(m.w);
    j.at("sims").get_to(m.sims);
    j.at("rmse_gen_mean").get_to(m.rmse_gen_mean);
    j.at("rmse_gen_mode").get_to(m.rmse_gen_mode);
    j.at("rmse_post_mean").get_to(m.rmse_post_mean);
    j.at("rmse_post_mode").get_to(m.rmse_post_mode);
    j.at("proxy_sd").get_to(m.proxy_sd);
    j.at("skl").get_to(m.skl);
}

[[nodiscard]] inline std::vector<MarginalProxy> build_proxies(const FitResult& fr, double w,
                                                              int grid_points) {
    std::vector<MarginalProxy> proxies;
    proxies.reserve(fr.space.size());
    for (std::size_t j = 0; j < fr.space.size(); ++j) {
        const auto t = tempering_scale(fr.d_min[j], fr.d_obs_min[j]);
        proxies.push_back(build_proxy(fr.surrogates[j], fr.space.lower(j), fr.space.upper(j), w,
                                      t.value, grid_points));
    }
    return proxies;
}

// Truncated Gaussian reference density on a proxy grid, normalized by the
// trapezoid rule: the flat-prior analytic posterior for the Gaussian model.
[[nodiscard]] inline std::vector<double> truncated_gaussian_on_grid(
    const std::vector<double>& grid, double mean, double sd) {
    std::vector<double> d(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double z = (grid[i] - mean) / sd;
        d[i] = std::exp(-0.5 * z * z);
    }
    const double h = grid[1] - grid[0];
    const double z = trapezoid(d, h);
    for (double& v : d) v /= z;
    return d;
}

namespace detail {

[[nodiscard]] inline std::string w_tag(double w) {
    std::string s = format_double(w);
    for (char& c : s) {
        if (c == '.') c = 'p';
        if (c == '-') c = 'm';
    }
    return s;
}

[[nodiscard]] inline RunMetrics evaluate_fit(const ExperimentConfig& cfg, const Simulator& sim,
                                             const FitResult& fr, int dim, std::uint64_t seed,
                                             int n_acq, double w) {
    RunMetrics m;
    m.dim = dim;
    m.seed = seed;
    m.n_acq = n_acq;
    m.w = w;
    m.sims = n_acq;
    const auto proxies = build_proxies(fr, w, cfg.proxy_grid_points);
    const std::size_t p = fr.space.size();
    std::vector<double> means(p), modes(p), sds(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto mom = proxy_moments(proxies[j]);
        means[j] = mom.mean;
        modes[j] = mom.mode;
        sds[j] = mom.sd;
    }
    m.proxy_sd = mean_of(sds);
    if (const auto* gen = generating_values_of(sim)) {
        m.rmse_gen_mean = rmse(means, *gen);
        m.rmse_gen_mode = rmse(modes, *gen);
    }
    if (const auto* gauss = dynamic_cast<const GaussianMeanSimulator*>(&sim)) {
        const auto& post_means = gauss->analytic_posterior_means();
        m.rmse_post_mean = rmse(means, post_means);
        m.rmse_post_mode = rmse(modes, post_means);
        const double post_sd = gauss->analytic_posterior_sd();
        double skl_sum = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const auto reference =
                truncated_gaussian_on_grid(proxies[j].grid, post_means[j], post_sd);
            skl_sum += symmetrized_kl(proxies[j].density, reference, proxies[j].spacing());
        }
        m.skl = skl_sum / static_cast<double>(p);
    }
    return m;
}

inline void write_fit_outputs(const ExperimentConfig& cfg, const std::filesystem::path& out,
                              const Simulator& sim, const FitResult& fr, int dim,
                              std::uint64_t seed, int n_acq) {
    const std::string base =
        cfg.model + "_dim" + std::to_string(dim) + "_seed" + std::to_string(seed);
    write_text_file(out / "fits" / ("fit_" + base + "_n" + std::to_string(n_acq) + ".json"),
                    fit_result_to_json(fr).dump());
    for (double w : cfg.w_values) {
        const auto proxies = build_proxies(fr, w, cfg.proxy_grid_points);
        std::string proxy_content = csv_row({"parameter", "theta", "mu", "density"});
        std::string moments_content =
            csv_row({"parameter", "mean", "mode", "sd", "d_min", "d_obs_min", "delta", "w"});
        for (std::size_t j = 0; j < fr.space.size(); ++j) {
            proxy_content += proxy_csv(fr.space.name(j), proxies[j]);
            const auto mom = proxy_moments(proxies[j]);
            const auto t = tempering_scale(fr.d_min[j], fr.d_obs_min[j]);
            moments_content += csv_row({fr.space.name(j), format_double(mom.mean),
                                        format_double(mom.mode), format_double(mom.sd),
                                        format_double(fr.d_min[j]),
                                        format_double(fr.d_obs_min[j]), format_double(t.value),
                                        format_double(w)});
        }
        const std::string suffix = "_n" + std::to_string(n_acq) + "_w" + w_tag(w);
        write_text_file(out / "proxies" / ("proxy_" + base + suffix + ".csv"), proxy_content);
        write_text_file(out / "moments" / ("moments_" + base + suffix + ".csv"),
                        moments_content);
    }
    (void)sim;
}

[[nodiscard]] inline std::string metrics_field(double v) {
    return std::isfinite(v) ? format_double(v) : std::string{};
}

}  // namespace detail

struct SweepOutcome {
    int total_cells = 0;
    int completed_cells = 0;
    [[nodiscard]] bool complete() const { return completed_cells == total_cells; }
    [[nodiscard]] int exit_code() const { return complete() ? 0 : 2; }
};

// Runs the Split-BOLFI sweep over (dim, seed) cells with checkpointed
// budgets, flushing one JSON per cell so interrupted sweeps resume without
// recomputing or double-counting, then aggregates the summary table.
[[nodiscard]] inline SweepOutcome run_experiment(const ExperimentConfig& cfg, int workers = 1,
                                                 std::uint64_t seed_offset = 0) {
    cfg.validate();
    const std::filesystem::path out(cfg.output_dir);
    std::filesystem::create_directories(out / "cells");
    const auto t_start = std::chrono::steady_clock::now();

    std::vector<int> checkpoints = cfg.n_acq;
    std::sort(checkpoints.begin(), checkpoints.end());

    struct Cell {
        int dim;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int dim : cfg.dims) {
        for (std::uint64_t seed : cfg.seeds) cells.push_back({dim, seed + seed_offset});
    }

    std::vector<std::vector<RunMetrics>> cell_metrics(cells.size());
    std::vector<char> cell_ok(cells.size(), 0);
    parallel_for(cells.size(), workers, [&](std::size_t c) {
        const auto [dim, seed] = cells[c];
        const auto cell_path = out / "cells" /
                               ("cell_" + cfg.model + "_dim" + std::to_string(dim) + "_seed" +
                                std::to_string(seed) + ".json");
        if (std::filesystem::exists(cell_path)) {
            try {
                const auto j = nlohmann::json::parse(read_text_file(cell_path));
                cell_metrics[c] = j.at("metrics").get<std::vector<RunMetrics>>();
                cell_ok[c] = 1;
                return;
            } catch (const std::exception&) {
                // fall through and recompute
            }
        }
        try {
            const auto sim = make_simulator(cfg, dim, seed);
            KernelConfig kcfg = kernel_config_for(cfg);
            AcquisitionConfig acfg = acquisition_config_for(cfg);
            EngineConfig ecfg;
            ecfg.refit_every = cfg.refit_every;
            const auto fits =
                run_split_bolfi_checkpointed(*sim, checkpoints, kcfg, acfg, seed, ecfg);
            for (std::size_t k = 0; k < fits.size(); ++k) {
                detail::write_fit_outputs(cfg, out, *sim, fits[k], dim, seed, checkpoints[k]);
                for (double w : cfg.w_values) {
                    cell_metrics[c].push_back(detail::evaluate_fit(cfg, *sim, fits[k], dim, seed,
                                                                   checkpoints[k], w));
                }
            }
            nlohmann::json j;
            j["metrics"] = cell_metrics[c];
            write_text_file(cell_path, j.dump());
            cell_ok[c] = 1;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "cell dim=%d seed=%llu failed: %s\n", dim,
                         static_cast<unsigned long long>(seed), e.what());
        }
    });

    // Aggregate: per-dim rows and an all-dims row per (n_acq, w).
    std::vector<RunMetrics> all;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (const auto& m : cell_metrics[c]) all.push_back(m);
    }
    std::string summary =
        csv_row({"model", "dims", "n_acq", "w", "n_seeds", "sims_per_run", "rmse_gen_mean",
                 "rmse_gen_mode", "rmse_post_mean", "rmse_post_mode", "proxy_sd", "skl"});
    auto emit_rows = [&](int n_acq, double w) {
        auto aggregate = [&](auto&& pred, const std::string& dim_label) {
            std::vector<double> gen_mean, gen_mode, post_mean, post_mode, sd, skl;
            int count = 0;
            for (const auto& m : all) {
                if (m.n_acq != n_acq || m.w != w || !pred(m)) continue;
                ++count;
                if (std::isfinite(m.rmse_gen_mean)) gen_mean.push_back(m.rmse_gen_mean);
                if (std::isfinite(m.rmse_gen_mode)) gen_mode.push_back(m.rmse_gen_mode);
                if (std::isfinite(m.rmse_post_mean)) post_mean.push_back(m.rmse_post_mean);
                if (std::isfinite(m.rmse_post_mode)) post_mode.push_back(m.rmse_post_mode);
                if (std::isfinite(m.proxy_sd)) sd.push_back(m.proxy_sd);
                if (std::isfinite(m.skl)) skl.push_back(m.skl);
            }
            if (count == 0) return;
            auto field = [](const std::vector<double>& v) {
                return v.empty() ? std::string{} : format_double(mean_of(v));
            };
            summary += csv_row({cfg.model, dim_label, std::to_string(n_acq), format_double(w),
                                std::to_string(count), std::to_string(n_acq), field(gen_mean),
                                field(gen_mode), field(post_mean), field(post_mode), field(sd),
                                field(skl)});
        };
        for (int dim : cfg.dims) {
            aggregate([dim](const RunMetrics& m) { return m.dim == dim; }, std::to_string(dim));
        }
        if (cfg.dims.size() > 1) {
            aggregate([](const RunMetrics&) { return true; }, "all");
        }
    };
    for (int n : checkpoints) {
        for (double w : cfg.w_values) emit_rows(n, w);
    }
    write_text_file(out / "summary.csv", summary);

    SweepOutcome outcome;
    outcome.total_cells = static_cast<int>(cells.size());
    for (char ok : cell_ok) outcome.completed_cells += ok;

    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start);
    nlohmann::json manifest;
    manifest["command"] = "run";
    manifest["model"] = cfg.model;
    manifest["dims"] = cfg.dims;
    manifest["n_acq"] = cfg.n_acq;
    manifest["w_values"] = cfg.w_values;
    manifest["seeds"] = cfg.seeds;
    manifest["seed_offset"] = seed_offset;
    manifest["tool_version"] = kToolVersion;
    manifest["wall_clock_seconds"] = elapsed.count();
    manifest["completed_cells"] = outcome.completed_cells;
    manifest["total_cells"] = outcome.total_cells;
    write_text_file(out / "manifest.json", manifest.dump(2));
    return outcome;
}

struct AbcCellMetrics {
    int dim = 0;
    std::uint64_t seed = 0;
    double q = 0.1;
    int n_samples = 1;
    std::uint64_t budget = 0;
    double rmse_gen = std::numeric_limits<double>::quiet_NaN();
    double sd_mean = std::numeric_limits<double>::quiet_NaN();  // NaN when n_samples < 2
};

inline void to_json(nlohmann::json& j, const AbcCellMetrics& m) {
    j = {{"dim", m.dim},     {"seed", m.seed},           {"q", m.q},
         {"n_samples", m.n_samples}, {"budget", m.budget}, {"rmse_gen", m.rmse_gen},
         {"sd_mean", m.sd_mean}};
}

inline void from_json(const nlohmann::json& j, AbcCellMetrics& m) {
    j.at("dim").get_to(m.dim);
    j.at("seed").get_to(m.seed);
    j.at("q").get_to(m.q);
    j.at("n_samples").get_to(m.n_samples);
    j.at("budget").get_to(m.budget);
    j.at("rmse_gen").get_to(m.rmse_gen);
    j.at("sd_mean").get_to(m.sd_mean);
}

// AbcRun CSV: pool index, theta, per-parameter discrepancies and accepted flags.
[[nodiscard]] inline std::string abc_run_csv(const AbcRun& run, const ParameterSpace& space) {
    std::vector<std::string> header{"pool_index"};
    for (const auto& n : space.names()) header.push_back("theta_" + n);
    for (const auto& n : space.names()) header.push_back("d_" + n);
    for (const auto& n : space.names()) header.push_back("accepted_" + n);
    std::string content = csv_row(header);
    std::vector<std::vector<char>> accepted(space.size(),
                                            std::vector<char>(run.pool_size(), 0));
    for (std::size_t j = 0; j < run.accepted.size(); ++j) {
        for (std::size_t idx : run.accepted[j]) accepted[j][idx] = 1;
    }
    for (std::size_t i = 0; i < run.pool_size(); ++i) {
        std::vector<std::string> fields{std::to_string(i)};
        for (double v : run.pool_params[i]) fields.push_back(format_double(v));
        for (double v : run.pool_discrepancies[i]) fields.push_back(format_double(v));
        for (std::size_t j = 0; j < space.size(); ++j) {
            fields.push_back(accepted[j][i] ? "1" : "0");
        }
        content += csv_row(fields);
    }
    return content;
}

// Marginal rejection-ABC sweep over (dim, q, n_samples, seed) cells from
// shared per-(dim, seed) observed data, with per-cell resume and a summary
// carrying the simulation budget N = ceil(n_samples / q).
[[nodiscard]] inline SweepOutcome run_abc_experiment(const ExperimentConfig& cfg, int workers = 1,
                                                     std::uint64_t seed_offset = 0,
                                                     bool dump_pools = false) {
    cfg.validate();
    if (!cfg.abc) throw std::invalid_argument("config: abc section required for the abc command");
    const std::filesystem::path out(cfg.output_dir);
    std::filesystem::create_directories(out / "cells");
    const auto t_start = std::chrono::steady_clock::now();

    struct Cell {
        int dim;
        double q;
        int n_samples;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int dim : cfg.dims) {
        for (double q : cfg.abc->q) {
            for (int n : cfg.abc->n_samples) {
                for (std::uint64_t seed : cfg.seeds) cells.push_back({dim, q, n, seed + seed_offset});
            }
        }
    }

    std::vector<AbcCellMetrics> metrics(cells.size());
    std::vector<char> cell_ok(cells.size(), 0);
    parallel_for(cells.size(), workers, [&](std::size_t c) {
        const auto cell = cells[c];
        std::string tag = cfg.model + "_dim" + std::to_string(cell.dim) + "_q" +
                          detail::w_tag(cell.q) + "_ns" + std::to_string(cell.n_samples) +
                          "_seed" + std::to_string(cell.seed);
        const auto cell_path = out / "cells" / ("abc_" + tag + ".json");
        if (std::filesystem::exists(cell_path)) {
            try {
                metrics[c] = nlohmann::json::parse(read_text_file(cell_path))
                                 .get<AbcCellMetrics>();
                cell_ok[c] = 1;
                return;
            } catch (const std::exception&) {
            }
        }
        try {
            const auto sim = make_simulator(cfg, cell.dim, cell.seed);
            const auto run = run_abc(*sim, cell.q, cell.n_samples,
                                     stream_seed(cell.seed, StreamRole::abc_prior,
                                                 fnv1a64(cfg.model), cell.dim));
            const auto est = abc_estimates(run);
            AbcCellMetrics m;
            m.dim = cell.dim;
            m.seed = cell.seed;
            m.q = cell.q;
            m.n_samples = cell.n_samples;
            m.budget = run.pool_size();
            if (const auto* gen = generating_values_of(*sim)) {
                std::vector<double> means(est.size());
                for (std::size_t j = 0; j < est.size(); ++j) means[j] = est[j].mean;
                m.rmse_gen = rmse(means, *gen);
            }
            if (cell.n_samples >= 2) {
                double sd_sum = 0.0;
                for (const auto& e : est) sd_sum += *e.sd;
                m.sd_mean = sd_sum / static_cast<double>(est.size());
            }
            if (dump_pools) {
                write_text_file(out / "pools" / ("pool_" + tag + ".csv"),
                                abc_run_csv(run, sim->space()));
            }
            metrics[c] = m;
            write_text_file(cell_path, nlohmann::json(m).dump());
            cell_ok[c] = 1;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "abc cell failed: %s\n", e.what());
        }
    });

    std::string summary = csv_row({"model", "dims", "q", "n_samples", "budget", "n_seeds",
                                   "rmse_gen", "sd_mean"});
    auto emit = [&](double q, int n, auto&& pred, const std::string& dim_label) {
        std::vector<double> rmse_values, sd_values;
        std::uint64_t budget = 0;
        int count = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!cell_ok[c]) continue;
            const auto& m = metrics[c];
            if (m.q != q || m.n_samples != n || !pred(m)) continue;
            ++count;
            budget = std::max(budget, m.budget);
            if (std::isfinite(m.rmse_gen)) rmse_values.push_back(m.rmse_gen);
            if (std::isfinite(m.sd_mean)) sd_values.push_back(m.sd_mean);
        }
        if (count == 0) return;
        auto field = [](const std::vector<double>& v) {
            return v.empty() ? std::string{} : format_double(mean_of(v));
        };
        summary += csv_row({cfg.model, dim_label, format_double(q), std::to_string(n),
                            std::to_string(budget), std::to_string(count), field(rmse_values),
                            field(sd_values)});
    };
    for (double q : cfg.abc->q) {
        for (int n : cfg.abc->n_samples) {
            for (int dim : cfg.dims) {
                emit(q, n, [dim](const AbcCellMetrics& m) { return m.dim == dim; },
                     std::to_string(dim));
            }
            if (cfg.dims.size() > 1) {
                emit(q, n, [](const AbcCellMetrics&) { return true; }, "all");
            }
        }
    }
    write_text_file(out / "summary_abc.csv", summary);

    SweepOutcome outcome;
    outcome.total_cells = static_cast<int>(cells.size());
    for (char ok : cell_ok) outcome.completed_cells += ok;
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start);
    nlohmann::json manifest;
    manifest["command"] = "abc";
    manifest["model"] = cfg.model;
    manifest["dims"] = cfg.dims;
    manifest["q"] = cfg.abc->q;
    manifest["n_samples"] = cfg.abc->n_samples;
    manifest["seeds"] = cfg.seeds;
    manifest["seed_offset"] = seed_offset;
    manifest["tool_version"] = kToolVersion;
    manifest["wall_clock_seconds"] = elapsed.count();
    manifest["completed_cells"] = outcome.completed_cells;
    manifest["total_cells"] = outcome.total_cells;
    write_text_file(out / "manifest_abc.json", manifest.dump(2));
    return outcome;
}

// Proxy/discrepancy grid dump for one parameter of a serialized fit:
// theta, gp_mean, gp_sd, proxy_density columns plus the acquired points.
inline void dump_proxy(const std::filesystem::path& fit_file, const std::string& parameter,
                       const std::filesystem::path& out_path, double w = 1.0,
                       int grid_points = 512) {
    const auto fr = fit_result_from_json(nlohmann::json::parse(read_text_file(fit_file)));
    const std::size_t j = fr.space.index_of(parameter);  // throws for unknown names
    const auto t = tempering_scale(fr.d_min[j], fr.d_obs_min[j]);
    const auto proxy = build_proxy(fr.surrogates[j], fr.space.lower(j), fr.space.upper(j), w,
                                   t.value, grid_points);
    std::vector<double> means, variances;
    fr.surrogates[j].predict_batch(proxy.grid, means, variances);
    const auto acquired = fr.log.input_column(j);

    std::string content =
        csv_row({"theta", "gp_mean", "gp_sd", "proxy_density", "acquisition_points"});
    const std::size_t rows = std::max(proxy.grid.size(), acquired.size());
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<std::string> fields(5);
        if (i < proxy.grid.size()) {
            fields[0] = format_double(proxy.grid[i]);
            fields[1] = format_double(means[i]);
            fields[2] = format_double(std::sqrt(variances[i]));
            fields[3] = format_double(proxy.density[i]);
        }
        if (i < acquired.size()) fields[4] = format_double(acquired[i]);
        content += csv_row(fields);
    }
    write_text_file(out_path, content);
}

}  // namespace splitbolfi

#endif  // SPLITBOLFI_HARNESS_HPP
