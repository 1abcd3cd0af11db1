#ifndef SPLITBOLFI_POSTERIOR_HPP
#define SPLITBOLFI_POSTERIOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "splitbolfi/gp.hpp"
#include "splitbolfi/math.hpp"

namespace splitbolfi {

inline constexpr double kTemperingFloor = 1e-8;

struct TemperingScale {
    double value = kTemperingFloor;
    bool at_floor = false;  // both inputs at or below the floor: near-perfectly-specified model
};

// Per-parameter tempering scale: max(d_min, d_obs_min) when the surrogate
// mean minimum is positive, the minimum observed discrepancy otherwise
// (the posterior mean can dip below zero). Floored at a small epsilon.
[[nodiscard]] inline TemperingScale tempering_scale(double d_min, double d_obs_min,
                                                    double eps = kTemperingFloor) {
    if (!std::isfinite(d_obs_min)) {
        throw std::invalid_argument("tempering_scale: non-finite d_obs_min");
    }
    const double raw = d_min > 0.0 ? std::max(d_min, d_obs_min) : d_obs_min;
    if (raw <= eps) return {eps, true};
    return {raw, false};
}

// Gridded marginal posterior proxy for one parameter, density proportional
// to exp(-(w/delta) * mu) with the uniform prior absorbed into the support.
struct MarginalProxy {
    std::vector<double> grid;
    std::vector<double> mu;
    double delta = 1.0;
    double w = 1.0;
    std::vector<double> density;

    [[nodiscard]] double spacing() const {
        return grid.size() > 1 ? grid[1] - grid[0] : 0.0;
    }
};

// Core construction from mean values on a grid. The exponent is shifted by
// min(mu) before exponentiation; the shift cancels in the normalization
// exactly, it only prevents overflow. An optional prior weight multiplies
// pointwise before normalization.
[[nodiscard]] inline MarginalProxy build_proxy_from_mu(std::vector<double> grid,
                                                       std::vector<double> mu, double w,
                                                       double delta,
                                                       std::span<const double> prior = {}) {
    if (grid.size() != mu.size() || grid.size() < 2) {
        throw std::invalid_argument("build_proxy_from_mu: bad grid");
    }
    if (!(delta > 0.0) || !(w > 0.0)) {
        throw std::invalid_argument("build_proxy_from_mu: w and delta must be positive");
    }
    if (!prior.empty() && prior.size() != grid.size()) {
        throw std::invalid_argument("build_proxy_from_mu: prior size mismatch");
    }
    MarginalProxy proxy;
    proxy.grid = std::move(grid);
    proxy.mu = std::move(mu);
    proxy.delta = delta;
    proxy.w = w;
    const double mu_min = *std::min_element(proxy.mu.begin(), proxy.mu.end());
    const double scale = w / delta;
    proxy.density.resize(proxy.grid.size());
    for (std::size_t i = 0; i < proxy.grid.size(); ++i) {
        proxy.density[i] = std::exp(-scale * (proxy.mu[i] - mu_min));
        if (!prior.empty()) proxy.density[i] *= prior[i];
    }
    const double h = proxy.grid[1] - proxy.grid[0];
    const double z = trapezoid(proxy.density, h);
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw std::runtime_error("build_proxy_from_mu: degenerate normalization");
    }
    for (double& d : proxy.density) d /= z;
    return proxy;
}

[[nodiscard]] inline MarginalProxy build_proxy(const GpSurrogate& gp, double lo, double hi,
                                               double w, double delta, int grid_points = 512) {
    if (grid_points < 2) throw std::invalid_argument("build_proxy: grid too small");
    std::vector<double> grid(grid_points);
    const double h = (hi - lo) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
        grid[i] = (i == grid_points - 1) ? hi : lo + h * i;
    }
    std::vector<double> mu, var;
    gp.predict_batch(grid, mu, var);
    return build_proxy_from_mu(std::move(grid), std::move(mu), w, delta);
}

struct ProxyMoments {
    double mean = 0.0;
    double mode = 0.0;
    double sd = 0.0;
};

// Mean and sd by trapezoid quadrature; mode at grid resolution with ties
// broken toward the lowest coordinate.
[[nodiscard]] inline ProxyMoments proxy_moments(const MarginalProxy& proxy) {
    const std::size_t n = proxy.grid.size();
    if (n < 2 || proxy.density.size() != n) {
        throw std::invalid_argument("proxy_moments: unnormalized or empty proxy");
    }
    const double h = proxy.spacing();
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = proxy.grid[i] * proxy.density[i];
    const double mean = trapezoid(tmp, h);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = (proxy.grid[i] - mean) * (proxy.grid[i] - mean) * proxy.density[i];
    }
    const double var = std::max(trapezoid(tmp, h), 0.0);
    std::size_t mode_idx = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (proxy.density[i] > proxy.density[mode_idx]) mode_idx = i;
    }
    return {mean, proxy.grid[mode_idx], std::sqrt(var)};
}

// KL(p||q) + KL(q||p) by trapezoid quadrature; densities floored for
// robustness against zeros so disjoint supports give a large finite value.
[[nodiscard]] inline double symmetrized_kl(std::span<const double> p, std::span<const double> q,
                                           double h) {
    if (p.size() != q.size() || p.size() < 2) {
        throw std::invalid_argument("symmetrized_kl: grid mismatch");
    }
    constexpr double kFloor = 1e-300;
    std::vector<double> integrand(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = std::max(p[i], kFloor);
        const double qi = std::max(q[i], kFloor);
        integrand[i] = (pi - qi) * (std::log(pi) - std::log(qi));
    }
    return std::max(trapezoid(integrand, h), 0.0);
}

}  // namespace splitbolfi

#endif  // SPLITBOLFI_POSTERIOR_HPP
