#include "splitbolfi/harness.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

using namespace splitbolfi;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("splitbolfi_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig tiny_gaussian_config(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.model = "gaussian";
    cfg.dims = {2};
    cfg.n_acq = {12};
    cfg.w_values = {1.0};
    cfg.seeds = {1, 2};
    cfg.output_dir = out.string();
    cfg.grid_points = 64;
    cfg.refine_iters = 12;
    cfg.proxy_grid_points = 128;
    return cfg;
}

}  // namespace

TEST_CASE("Config parsing rejects unknown keys by name", "[harness][config]") {
    nlohmann::json j = {{"model", "gaussian"}, {"dims", {5}},   {"n_acq", {50}},
                        {"seeds", {1, 2}},     {"output_dir", "x"}, {"bogus_key", 1}};
    try {
        (void)parse_experiment_config(j);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        REQUIRE(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
    j.erase("bogus_key");
    REQUIRE_NOTHROW(parse_experiment_config(j));

    j["abc"] = {{"q", {0.1}}, {"n_samples", {5}}, {"oops", 1}};
    REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);
}

TEST_CASE("Config validation enforces the invariants", "[harness][config]") {
    nlohmann::json j = {{"model", "gaussian"}, {"dims", nlohmann::json::array()},
                        {"n_acq", {50}},       {"seeds", {1}},
                        {"output_dir", "x"}};
    REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);
    j["dims"] = {5};
    j["seeds"] = {1, 1};
    REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);
    j["seeds"] = {1, 2};
    j["model"] = "unknown";
    REQUIRE_THROWS_AS(parse_experiment_config(j), std::invalid_argument);
}

TEST_CASE("Sweeps are deterministic and resumable", "[harness][integration]") {
    TempDir dir_a("run_a"), dir_b("run_b");
    auto cfg_a = tiny_gaussian_config(dir_a.path);
    auto cfg_b = tiny_gaussian_config(dir_b.path);

    const auto outcome_a = run_experiment(cfg_a, 2);
    REQUIRE(outcome_a.complete());
    REQUIRE(outcome_a.exit_code() == 0);
    const auto outcome_b = run_experiment(cfg_b, 1);
    REQUIRE(outcome_b.complete());

    const auto summary_a = read_text_file(dir_a.path / "summary.csv");
    const auto summary_b = read_text_file(dir_b.path / "summary.csv");
    REQUIRE(summary_a == summary_b);
    REQUIRE(summary_a.rfind("model,dims,n_acq,w,n_seeds,sims_per_run", 0) == 0);

    // Resume: dropping the summary but keeping cells reproduces it from disk.
    fs::remove(dir_a.path / "summary.csv");
    const auto resumed = run_experiment(cfg_a, 1);
    REQUIRE(resumed.complete());
    REQUIRE(read_text_file(dir_a.path / "summary.csv") == summary_a);

    // Budget accounting: the sims column equals n_acq.
    REQUIRE(summary_a.find(",12,1,2,12,") != std::string::npos);
}

TEST_CASE("Proxy dumps integrate to one and carry the acquisitions", "[harness][integration]") {
    TempDir dir("dump");
    auto cfg = tiny_gaussian_config(dir.path);
    REQUIRE(run_experiment(cfg, 2).complete());

    const auto fit_file = dir.path / "fits" / "fit_gaussian_dim2_seed1_n12.json";
    REQUIRE(fs::exists(fit_file));
    const auto out_csv = dir.path / "proxy_dump.csv";
    dump_proxy(fit_file, "mu_0", out_csv, 1.0, 256);

    std::istringstream in(read_text_file(out_csv));
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "theta,gp_mean,gp_sd,proxy_density,acquisition_points");
    std::vector<double> theta, density;
    int acq_count = 0;
    while (std::getline(in, line)) {
        const auto fields = split_csv_line(line);
        if (!fields[0].empty()) {
            theta.push_back(std::stod(fields[0]));
            density.push_back(std::stod(fields[3]));
        }
        if (fields.size() >= 5 && !fields[4].empty()) ++acq_count;
    }
    REQUIRE(acq_count == 12);
    REQUIRE_THAT(trapezoid(density, theta[1] - theta[0]), WithinAbs(1.0, 1e-6));
    REQUIRE_THROWS_AS(dump_proxy(fit_file, "nonexistent", out_csv), std::out_of_range);
}

TEST_CASE("ABC sweep writes budgets and blanks the degenerate sd", "[harness][integration]") {
    TempDir dir("abc");
    auto cfg = tiny_gaussian_config(dir.path);
    cfg.abc = AbcGrid{{0.1}, {1, 5}};
    const auto outcome = run_abc_experiment(cfg, 2);
    REQUIRE(outcome.complete());
    const auto summary = read_text_file(dir.path / "summary_abc.csv");
    REQUIRE(summary.rfind("model,dims,q,n_samples,budget,n_seeds,rmse_gen,sd_mean", 0) == 0);
    // n_samples=1 -> budget 10, sd blank; n_samples=5 -> budget 50.
    REQUIRE(summary.find("gaussian,2,0.1,1,10,2,") != std::string::npos);
    REQUIRE(summary.find("gaussian,2,0.1,5,50,2,") != std::string::npos);
    std::istringstream in(summary);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto fields = split_csv_line(line);
        if (fields[3] == "1") REQUIRE(fields.size() == 7);  // trailing sd field empty
    }
}

TEST_CASE("Summary and snapshot files round-trip", "[harness][io]") {
    TempDir dir("io");
    const std::vector<std::string> names{"a", "b", "c"};
    const std::vector<double> values{1.0, -0.25, 3.14159};
    const auto path = dir.path / "summaries.csv";
    write_summary_csv(path, names, values);
    const auto loaded = load_summary_csv(path, names);
    for (std::size_t i = 0; i < values.size(); ++i) {
        REQUIRE_THAT(loaded[i], WithinAbs(values[i], 1e-12));
    }

    DaycareSimulator::Config dc;
    dc.n_strains = 3;
    dc.n_children = 5;
    dc.burn_in = 2.0;
    dc.n_observations = 2;
    DaycareSimulator sim(dc, std::vector<double>{2.0, 1.0, 0.0, 0.0, 0.0}, 3);
    const auto snapshots = sim.simulate_snapshots({2.0, 1.0, 0.5, 0.0, 0.0}, 7);
    const auto snap_path = dir.path / "snapshots.csv";
    write_snapshots_csv(snap_path, snapshots, dc.n_children, dc.n_strains);
    const auto back = load_snapshots_csv(snap_path, dc.n_children, dc.n_strains);
    REQUIRE(back == snapshots);
    // A simulator built from loaded snapshots sees the same observed summaries.
    DaycareSimulator from_file(dc, back);
    REQUIRE(from_file.observed_summaries() == sim.summaries_from_snapshots(snapshots));
}

TEST_CASE("Daycare dims map to strain counts", "[harness]") {
    ExperimentConfig cfg;
    cfg.model = "daycare";
    cfg.dims = {4};
    cfg.n_acq = {10};
    cfg.seeds = {1};
    cfg.daycare.n_children = 10;
    cfg.daycare.n_observations = 3;
    const auto sim = make_simulator(cfg, 4, 1);
    REQUIRE(sim->space().size() == 8);
    const auto* gen = generating_values_of(*sim);
    REQUIRE(gen != nullptr);
    REQUIRE_THAT((*gen)[0], WithinAbs(cfg.daycare.true_beta, 1e-15));
    REQUIRE_THAT((*gen)[2], WithinAbs(cfg.daycare.true_competition, 1e-15));
}
