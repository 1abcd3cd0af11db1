#ifndef SPLITBOLFI_ABC_HPP
#define SPLITBOLFI_ABC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "splitbolfi/math.hpp"
#include "splitbolfi/parallel.hpp"
#include "splitbolfi/rng.hpp"
#include "splitbolfi/simulator.hpp"

namespace splitbolfi {

// Marginal rejection ABC from one shared prior pool: for each parameter the
// n_samples draws with the smallest per-parameter discrepancy are accepted.
struct AbcRun {
    std::vector<std::vector<double>> pool_params;         // N x p
    std::vector<std::vector<double>> pool_discrepancies;  // N x p
    double q = 0.1;
    int n_samples = 1;
    std::vector<std::vector<std::size_t>> accepted;  // per parameter, n_samples pool indices

    [[nodiscard]] std::size_t pool_size() const { return pool_params.size(); }
};

[[nodiscard]] inline std::size_t abc_pool_size(int n_samples, double q) {
    if (!(q > 0.0 && q < 1.0) || n_samples < 1) {
        throw std::invalid_argument("run_abc: need 0 < q < 1 and n_samples >= 1");
    }
    // Rounded up; the epsilon keeps exact-ratio grids (10 / 0.01 = 1000) stable.
    return static_cast<std::size_t>(std::ceil(n_samples / q - 1e-9));
}

[[nodiscard]] inline AbcRun run_abc(const Simulator& sim, double q, int n_samples,
                                    std::uint64_t seed, int workers = 1) {
    const std::size_t N = abc_pool_size(n_samples, q);
    const std::size_t p = sim.space().size();
    AbcRun run;
    run.q = q;
    run.n_samples = n_samples;
    run.pool_params.resize(N);
    run.pool_discrepancies.resize(N);
    parallel_for(N, workers, [&](std::size_t i) {
        Rng rng(stream_seed(seed, StreamRole::abc_prior, i));
        std::vector<double> theta(p);
        for (std::size_t j = 0; j < p; ++j) {
            theta[j] = rng.uniform(sim.space().lower(j), sim.space().upper(j));
        }
        const auto sim_seed = stream_seed(seed, StreamRole::abc_simulate, i);
        run.pool_discrepancies[i] = sim.discrepancies_at(theta, sim_seed);
        run.pool_params[i] = std::move(theta);
    });

    run.accepted.resize(p);
    std::vector<std::size_t> order(N);
    for (std::size_t j = 0; j < p; ++j) {
        std::iota(order.begin(), order.end(), 0);
        const std::size_t keep = std::min<std::size_t>(n_samples, N);
        std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                          [&](std::size_t a, std::size_t b) {
                              const double da = run.pool_discrepancies[a][j];
                              const double db = run.pool_discrepancies[b][j];
                              return da != db ? da < db : a < b;  // ties by pool index
                          });
        run.accepted[j].assign(order.begin(), order.begin() + keep);
    }
    return run;
}

struct AbcEstimate {
    double mean = 0.0;
    std::optional<double> sd;  // missing when n_samples < 2
};

[[nodiscard]] inline std::vector<AbcEstimate> abc_estimates(const AbcRun& run) {
    std::vector<AbcEstimate> est(run.accepted.size());
    for (std::size_t j = 0; j < run.accepted.size(); ++j) {
        std::vector<double> values;
        values.reserve(run.accepted[j].size());
        for (std::size_t idx : run.accepted[j]) values.push_back(run.pool_params[idx][j]);
        est[j].mean = mean_of(values);
        if (values.size() >= 2) est[j].sd = sample_sd(values);
    }
    return est;
}

}  // namespace splitbolfi

#endif  // SPLITBOLFI_ABC_HPP
