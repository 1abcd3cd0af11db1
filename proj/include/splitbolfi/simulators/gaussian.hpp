#ifndef SPLITBOLFI_SIMULATORS_GAUSSIAN_HPP
#define SPLITBOLFI_SIMULATORS_GAUSSIAN_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "splitbolfi/rng.hpp"
#include "splitbolfi/simulator.hpp"

namespace splitbolfi {

// Mean inference for a p-dimensional Gaussian with identity covariance.
// Summaries are the per-dimension sample means; each parameter's
// discrepancy depends only on its own dimension's summary.
class GaussianMeanSimulator : public Simulator {
public:
    struct Config {
        int dims = 5;
        int n_obs = 100;        // observations per simulated data set
        double lower = -2.0;
        double upper = 2.0;
        DiscrepancyNorm norm = DiscrepancyNorm::absolute;
    };

    // Observed data generated at a vector drawn uniformly from the central
    // 75% of the prior box, keyed by data_seed.
    GaussianMeanSimulator(const Config& cfg, std::uint64_t data_seed) : cfg_(cfg) {
        std::vector<std::string> names(cfg.dims);
        std::vector<double> lo(cfg.dims, cfg.lower), hi(cfg.dims, cfg.upper);
        for (int j = 0; j < cfg.dims; ++j) names[j] = "mu_" + std::to_string(j);
        space_ = ParameterSpace(std::move(names), std::move(lo), std::move(hi));

        Rng gen(stream_seed(data_seed, StreamRole::observed_data, 0));
        generating_.resize(cfg.dims);
        const double shrink = 0.75;
        const double mid = 0.5 * (cfg.lower + cfg.upper);
        const double half = 0.5 * (cfg.upper - cfg.lower) * shrink;
        for (int j = 0; j < cfg.dims; ++j) generating_[j] = gen.uniform(mid - half, mid + half);
        observed_ = simulate_summaries(generating_,
                                       stream_seed(data_seed, StreamRole::observed_data, 1));
    }

    // Observed summaries supplied directly (e.g. loaded from file).
    GaussianMeanSimulator(const Config& cfg, std::vector<double> observed,
                          std::vector<double> generating)
        : cfg_(cfg), observed_(std::move(observed)), generating_(std::move(generating)) {
        std::vector<std::string> names(cfg.dims);
        std::vector<double> lo(cfg.dims, cfg.lower), hi(cfg.dims, cfg.upper);
        for (int j = 0; j < cfg.dims; ++j) names[j] = "mu_" + std::to_string(j);
        space_ = ParameterSpace(std::move(names), std::move(lo), std::move(hi));
        if (observed_.size() != static_cast<std::size_t>(cfg.dims)) {
            throw std::invalid_argument("GaussianMeanSimulator: observed summary size mismatch");
        }
    }

    [[nodiscard]] const ParameterSpace& space() const override { return space_; }

    [[nodiscard]] std::vector<std::string> summary_names() const override {
        std::vector<std::string> names(cfg_.dims);
        for (int j = 0; j < cfg_.dims; ++j) names[j] = "mean_" + std::to_string(j);
        return names;
    }

    [[nodiscard]] std::vector<double> simulate_summaries(const std::vector<double>& theta,
                                                         std::uint64_t seed) const override {
        if (theta.size() != static_cast<std::size_t>(cfg_.dims)) {
            throw std::invalid_argument("GaussianMeanSimulator: theta size mismatch");
        }
        Rng rng(seed);
        std::vector<double> means(cfg_.dims);
        for (int j = 0; j < cfg_.dims; ++j) {
            double sum = 0.0;
            for (int i = 0; i < cfg_.n_obs; ++i) sum += theta[j] + rng.normal();
            means[j] = sum / cfg_.n_obs;
        }
        return means;
    }

    [[nodiscard]] const std::vector<double>& observed_summaries() const override {
        return observed_;
    }

    [[nodiscard]] std::vector<double> discrepancies(
        const std::vector<double>& sim, const std::vector<double>& obs) const override {
        std::vector<double> d(cfg_.dims);
        for (int j = 0; j < cfg_.dims; ++j) d[j] = discrepancy_of(sim[j], obs[j], cfg_.norm);
        return d;
    }

    [[nodiscard]] const std::vector<double>& generating_values() const { return generating_; }

    // Flat-prior analytic posterior for each mean: N(sample mean, 1/n).
    [[nodiscard]] double analytic_posterior_sd() const {
        return 1.0 / std::sqrt(static_cast<double>(cfg_.n_obs));
    }
    [[nodiscard]] const std::vector<double>& analytic_posterior_means() const {
        return observed_;
    }

    [[nodiscard]] const Config& config() const { return cfg_; }

private:
    Config cfg_;
    ParameterSpace space_;
    std::vector<double> observed_;
    std::vector<double> generating_;
};

}  // namespace splitbolfi

#endif  // SPLITBOLFI_SIMULATORS_GAUSSIAN_HPP
