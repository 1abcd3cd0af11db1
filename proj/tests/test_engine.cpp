#include "splitbolfi/engine.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <atomic>

#include "splitbolfi/simulators/gaussian.hpp"

using namespace splitbolfi;
using Catch::Matchers::WithinAbs;

namespace {

// Instruments a simulator with a call counter and optional scripted failures.
class CountingSimulator : public Simulator {
public:
    explicit CountingSimulator(const Simulator& inner, int fail_first_calls = 0)
        : inner_(inner), fail_first_(fail_first_calls) {}

    [[nodiscard]] const ParameterSpace& space() const override { return inner_.space(); }
    [[nodiscard]] std::vector<std::string> summary_names() const override {
        return inner_.summary_names();
    }
    [[nodiscard]] std::vector<double> simulate_summaries(const std::vector<double>& theta,
                                                         std::uint64_t seed) const override {
        const int call = calls_.fetch_add(1);
        if (call < fail_first_) throw SimulationFailure("scripted failure");
        return inner_.simulate_summaries(theta, seed);
    }
    [[nodiscard]] const std::vector<double>& observed_summaries() const override {
        return inner_.observed_summaries();
    }
    [[nodiscard]] std::vector<double> discrepancies(
        const std::vector<double>& sim, const std::vector<double>& obs) const override {
        return inner_.discrepancies(sim, obs);
    }
    [[nodiscard]] int calls() const { return calls_.load(); }

private:
    const Simulator& inner_;
    int fail_first_;
    mutable std::atomic<int> calls_{0};
};

AcquisitionConfig fast_acq() {
    AcquisitionConfig acfg;
    acfg.grid_points = 64;
    acfg.refine_iters = 16;
    return acfg;
}

EngineConfig fast_engine() {
    EngineConfig ecfg;
    ecfg.fit.max_evals_per_start = 40;
    return ecfg;
}

}  // namespace

TEST_CASE("Simulation budget is exact", "[engine]") {
    GaussianMeanSimulator gauss({.dims = 2}, 5);
    CountingSimulator sim(gauss);
    const auto fr = run_split_bolfi(sim, 20, KernelConfig{}, fast_acq(), 7, fast_engine());
    REQUIRE(sim.calls() == 20);
    REQUIRE(fr.log.size() == 20);
    REQUIRE(fr.n_retried == 0);
    REQUIRE(fr.n_skipped == 0);
}

TEST_CASE("A failed simulation is retried once and then skipped", "[engine]") {
    GaussianMeanSimulator gauss({.dims = 2}, 5);
    SECTION("one failure: retry succeeds") {
        CountingSimulator sim(gauss, 1);
        const auto fr = run_split_bolfi(sim, 15, KernelConfig{}, fast_acq(), 7, fast_engine());
        REQUIRE(fr.n_retried == 1);
        REQUIRE(fr.n_skipped == 0);
        REQUIRE(fr.log.size() == 15);
        REQUIRE(sim.calls() == 16);  // n_acq rounds plus the recorded retry
    }
    SECTION("two failures: the round is skipped") {
        CountingSimulator sim(gauss, 2);
        const auto fr = run_split_bolfi(sim, 15, KernelConfig{}, fast_acq(), 7, fast_engine());
        REQUIRE(fr.n_retried == 1);
        REQUIRE(fr.n_skipped == 1);
        REQUIRE(fr.log.size() == 14);
        REQUIRE(sim.calls() == 16);
    }
}

TEST_CASE("n_acq equal to n_init leaves only prior draws in the log", "[engine]") {
    GaussianMeanSimulator sim({.dims = 2}, 5);
    auto acfg = fast_acq();
    const auto fr = run_split_bolfi(sim, acfg.n_init, KernelConfig{}, acfg, 3, fast_engine());
    REQUIRE(fr.log.size() == static_cast<std::size_t>(acfg.n_init));
    for (const auto& row : fr.log.params) REQUIRE(sim.space().contains(row));
    REQUIRE(fr.surrogates.size() == 2);
    REQUIRE_FALSE(fr.surrogates[0].is_prior_fallback());
}

TEST_CASE("Runs are bit-identical given the seed", "[engine][property]") {
    GaussianMeanSimulator sim({.dims = 5}, 5);
    const auto a = run_split_bolfi(sim, 18, KernelConfig{}, fast_acq(), 99, fast_engine());
    const auto b = run_split_bolfi(sim, 18, KernelConfig{}, fast_acq(), 99, fast_engine());
    REQUIRE(a.log.params == b.log.params);
    REQUIRE(a.log.discrepancies == b.log.discrepancies);
    REQUIRE(a.log.seeds == b.log.seeds);
    REQUIRE(a.d_min == b.d_min);
}

TEST_CASE("Checkpointed runs match plain runs exactly", "[engine][property]") {
    GaussianMeanSimulator sim({.dims = 2}, 5);
    const auto both =
        run_split_bolfi_checkpointed(sim, {12, 20}, KernelConfig{}, fast_acq(), 31, fast_engine());
    const auto a = run_split_bolfi(sim, 12, KernelConfig{}, fast_acq(), 31, fast_engine());
    const auto b = run_split_bolfi(sim, 20, KernelConfig{}, fast_acq(), 31, fast_engine());
    REQUIRE(both[0].log.params == a.log.params);
    REQUIRE(both[0].d_min == a.d_min);
    REQUIRE(both[0].surrogates[0].hyperparams().lengthscale ==
            a.surrogates[0].hyperparams().lengthscale);
    REQUIRE(both[1].log.params == b.log.params);
    REQUIRE(both[1].d_min == b.d_min);
}

TEST_CASE("Observed discrepancy minima are non-increasing over rounds", "[engine][property]") {
    GaussianMeanSimulator sim({.dims = 3}, 21);
    const auto fr = run_split_bolfi(sim, 25, KernelConfig{}, fast_acq(), 4, fast_engine());
    for (std::size_t j = 0; j < 3; ++j) {
        double running = std::numeric_limits<double>::infinity();
        for (const auto& row : fr.log.discrepancies) {
            running = std::min(running, row[j]);
            REQUIRE(row[j] >= 0.0);
        }
        REQUIRE(running == fr.d_obs_min[j]);
    }
}

TEST_CASE("Surrogates trained on the shared log equal single-parameter retrains",
          "[engine][property]") {
    GaussianMeanSimulator sim({.dims = 2}, 8);
    const auto fr = run_split_bolfi(sim, 15, KernelConfig{}, fast_acq(), 12, fast_engine());
    for (std::size_t j = 0; j < 2; ++j) {
        const auto inputs = fr.log.input_column(j);
        const auto targets = fr.log.discrepancy_column(j);
        const auto lone = GpSurrogate::condition(inputs, targets,
                                                 fr.surrogates[j].hyperparams(), KernelConfig{});
        for (double q : {-1.5, 0.0, 0.8}) {
            REQUIRE_THAT(lone.predict(q).mean, WithinAbs(fr.surrogates[j].predict(q).mean, 1e-12));
        }
    }
}

TEST_CASE("Acquisitions concentrate near the observed mean", "[engine][integration]") {
    GaussianMeanSimulator sim({.dims = 1}, 42);
    AcquisitionConfig acfg;
    const auto fr = run_split_bolfi(sim, 50, KernelConfig{}, acfg, 17, EngineConfig{});
    const double target = sim.analytic_posterior_means()[0];
    int close = 0, total = 0;
    for (std::size_t t = acfg.n_init; t < fr.log.size(); ++t) {
        ++total;
        if (std::abs(fr.log.params[t][0] - target) < 3.0 * sim.analytic_posterior_sd()) ++close;
    }
    REQUIRE(total > 0);
    REQUIRE(static_cast<double>(close) / total >= 0.6);
}

TEST_CASE("Posterior-mean minimization matches a dense oracle", "[engine][oracle]") {
    std::vector<double> x, y;
    for (int i = 0; i <= 60; ++i) {
        x.push_back(-1.0 + 2.0 * i / 60.0);
        y.push_back(x.back() * x.back());
    }
    const auto gp = GpSurrogate::condition(x, y, GpHyperparams{1.0, 0.4, 1e-8}, KernelConfig{});
    const auto m = minimize_posterior_mean(gp, -1.0, 1.0);
    REQUIRE(std::abs(m.x) < 0.05);
    REQUIRE(std::abs(m.value) < 1e-3);

    // Dense-grid oracle.
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 20000; ++i) {
        best = std::min(best, gp.predict(-1.0 + 2.0 * i / 20000.0).mean);
    }
    REQUIRE_THAT(m.value, WithinAbs(best, 1e-4));
}

TEST_CASE("Constant targets give a constant posterior-mean minimum", "[engine]") {
    std::vector<double> x{0.0, 0.3, 0.7, 1.0};
    std::vector<double> y(4, 2.5);
    const auto gp = GpSurrogate::condition(x, y, GpHyperparams{1.0, 0.5, 0.01}, KernelConfig{});
    const auto m = minimize_posterior_mean(gp, 0.0, 1.0);
    REQUIRE_THAT(m.value, WithinAbs(2.5, 1e-6));
}

TEST_CASE("A posterior mean dipping below zero is returned as-is", "[engine]") {
    std::vector<double> x{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> y{1.0, 0.2, -0.4, 0.2, 1.0};
    const auto gp = GpSurrogate::condition(x, y, GpHyperparams{1.0, 0.3, 1e-6}, KernelConfig{});
    const auto m = minimize_posterior_mean(gp, 0.0, 1.0);
    REQUIRE(m.value < 0.0);
}

TEST_CASE("FitResult JSON round trip preserves the run", "[engine][io]") {
    GaussianMeanSimulator sim({.dims = 2}, 5);
    const auto fr = run_split_bolfi(sim, 14, KernelConfig{}, fast_acq(), 77, fast_engine());
    const auto j = fit_result_to_json(fr);
    const auto back = fit_result_from_json(j);
    REQUIRE(back.log.params == fr.log.params);
    REQUIRE(back.d_min == fr.d_min);
    REQUIRE(back.d_obs_min == fr.d_obs_min);
    REQUIRE(back.space.names() == fr.space.names());
    for (double q : {-1.0, 0.0, 1.0}) {
        REQUIRE_THAT(back.surrogates[0].predict(q).mean,
                     WithinAbs(fr.surrogates[0].predict(q).mean, 1e-12));
        REQUIRE_THAT(back.surrogates[1].predict(q).variance,
                     WithinAbs(fr.surrogates[1].predict(q).variance, 1e-12));
    }
}

TEST_CASE("Budget below n_init is rejected", "[engine][errors]") {
    GaussianMeanSimulator sim({.dims = 2}, 5);
    REQUIRE_THROWS_AS(run_split_bolfi(sim, 5, KernelConfig{}, AcquisitionConfig{}, 1),
                      std::invalid_argument);
}
