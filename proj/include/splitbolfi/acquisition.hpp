#ifndef SPLITBOLFI_ACQUISITION_HPP
#define SPLITBOLFI_ACQUISITION_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "splitbolfi/gp.hpp"
#include "splitbolfi/math.hpp"
#include "splitbolfi/parameter_space.hpp"
#include "splitbolfi/rng.hpp"

namespace splitbolfi {

struct AcquisitionConfig {
    double beta = 2.0;            // exploration weight of the lower confidence bound
    int n_init = 10;              // random prior draws before optimization starts
    double jitter_fraction = 0.05;  // relative half-width of the argmin perturbation
    int grid_points = 256;
    int refine_iters = 40;

    void validate() const {
        if (!(beta >= 0.0)) throw std::invalid_argument("AcquisitionConfig: beta < 0");
        if (n_init < 1) throw std::invalid_argument("AcquisitionConfig: n_init < 1");
        if (!(jitter_fraction >= 0.0 && jitter_fraction < 0.5)) {
            throw std::invalid_argument("AcquisitionConfig: jitter_fraction outside [0, 0.5)");
        }
        if (grid_points < 16) throw std::invalid_argument("AcquisitionConfig: grid_points < 16");
        if (refine_iters < 0) throw std::invalid_argument("AcquisitionConfig: refine_iters < 0");
    }
};

// Minimizes mu - beta * sigma over the support on a coarse grid with
// golden-section refinement, then perturbs the argmin by uniform jitter
// clamped back into the support. Grid ties break toward the lowest
// coordinate.
[[nodiscard]] inline double acquire_marginal(const GpSurrogate& gp, double lo, double hi,
                                             const AcquisitionConfig& cfg, Rng& rng) {
    cfg.validate();
    if (!(lo < hi)) throw std::invalid_argument("acquire_marginal: empty support");

    // Batched scan over the grid, then golden refinement with pointwise
    // predictions around the best cell.
    std::vector<double> grid(cfg.grid_points);
    const double h = (hi - lo) / (cfg.grid_points - 1);
    for (int i = 0; i < cfg.grid_points; ++i) {
        grid[i] = (i == cfg.grid_points - 1) ? hi : lo + h * i;
    }
    std::vector<double> mu, var;
    gp.predict_batch(grid, mu, var);
    double best_x = grid[0];
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.grid_points; ++i) {
        const double v = mu[i] - cfg.beta * std::sqrt(var[i]);
        if (v < best_v) {
            best_v = v;
            best_x = grid[i];
        }
    }
    auto lcb = [&](double x) {
        const auto p = gp.predict(x);
        return p.mean - cfg.beta * std::sqrt(p.variance);
    };
    const double a = std::max(lo, best_x - h);
    const double b = std::min(hi, best_x + h);
    auto refined = minimize_grid_golden(lcb, a, b, 2, cfg.refine_iters);
    double x = refined.value < best_v ? refined.x : best_x;

    if (cfg.jitter_fraction > 0.0) {
        const double half = cfg.jitter_fraction * (hi - lo);
        x += rng.uniform(-half, half);
    }
    return std::min(hi, std::max(lo, x));
}

// One acquisition round: prior draws for the first n_init rounds, then the
// per-parameter LCB argmins. Coordinates use substreams keyed by parameter
// name so that permuting the parameters permutes the output identically.
[[nodiscard]] inline std::vector<double> acquire_round(std::span<const GpSurrogate> gps,
                                                       const ParameterSpace& space,
                                                       const AcquisitionConfig& cfg,
                                                       std::uint64_t master_seed,
                                                       std::uint64_t round) {
    cfg.validate();
    const std::size_t p = space.size();
    std::vector<double> theta(p);
    if (round < static_cast<std::uint64_t>(cfg.n_init)) {
        for (std::size_t j = 0; j < p; ++j) {
            Rng rng(stream_seed(master_seed, StreamRole::prior_draw, round,
                                fnv1a64(space.name(j))));
            theta[j] = rng.uniform(space.lower(j), space.upper(j));
        }
        return theta;
    }
    if (gps.size() != p) {
        throw std::invalid_argument("acquire_round: one surrogate per parameter required");
    }
    for (std::size_t j = 0; j < p; ++j) {
        Rng rng(stream_seed(master_seed, StreamRole::acquisition, round,
                            fnv1a64(space.name(j))));
        theta[j] = acquire_marginal(gps[j], space.lower(j), space.upper(j), cfg, rng);
    }
    return theta;
}

}  // namespace splitbolfi

#endif  // SPLITBOLFI_ACQUISITION_HPP
