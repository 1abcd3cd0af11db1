#include "splitbolfi/posterior.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "splitbolfi/math.hpp"

using namespace splitbolfi;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = (i == n - 1) ? hi : lo + (hi - lo) * i / (n - 1);
    return g;
}

std::vector<double> gaussian_density(const std::vector<double>& grid, double mean, double sd) {
    std::vector<double> d(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double z = (grid[i] - mean) / sd;
        d[i] = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
    }
    return d;
}

}  // namespace

TEST_CASE("Tempering scale follows the max rule", "[posterior]") {
    REQUIRE_THAT(tempering_scale(0.5, 0.7).value, WithinAbs(0.7, 1e-15));
    REQUIRE_THAT(tempering_scale(0.9, 0.7).value, WithinAbs(0.9, 1e-15));
}

TEST_CASE("Negative surrogate minimum falls back to observed minimum", "[posterior]") {
    const auto t = tempering_scale(-0.2, 0.3);
    REQUIRE_THAT(t.value, WithinAbs(0.3, 1e-15));
    REQUIRE_FALSE(t.at_floor);
}

TEST_CASE("Both minima at zero floors the scale and flags it", "[posterior]") {
    const auto t = tempering_scale(0.0, 0.0);
    REQUIRE(t.value == kTemperingFloor);
    REQUIRE(t.at_floor);
    REQUIRE_THROWS_AS(tempering_scale(0.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("Constant mean gives the uniform proxy", "[posterior]") {
    const auto grid = linspace(-2.0, 3.0, 512);
    std::vector<double> mu(grid.size(), 4.2);
    const auto proxy = build_proxy_from_mu(grid, mu, 1.0, 0.7);
    for (double d : proxy.density) REQUIRE_THAT(d, WithinAbs(1.0 / 5.0, 1e-10));
}

TEST_CASE("Proxy density is invariant to a joint rescaling of mu and delta", "[posterior]") {
    const auto grid = linspace(-1.0, 1.0, 512);
    std::vector<double> mu(grid.size()), mu3(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mu[i] = 1.0 + grid[i] * grid[i];
        mu3[i] = 3.0 * mu[i];
    }
    const auto a = build_proxy_from_mu(grid, mu, 1.0, 1.0);
    const auto b = build_proxy_from_mu(grid, mu3, 1.0, 3.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE_THAT(a.density[i], WithinAbs(b.density[i], 1e-12));
    }
}

TEST_CASE("End-to-end scale invariance through the tempering rule", "[posterior][property]") {
    const auto grid = linspace(0.0, 1.0, 512);
    std::vector<double> mu(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mu[i] = 0.3 + 2.0 * (grid[i] - 0.4) * (grid[i] - 0.4);
    }
    const double d_min = 0.3, d_obs_min = 0.25;
    const auto base =
        build_proxy_from_mu(grid, mu, 1.0, tempering_scale(d_min, d_obs_min).value);
    for (double c : {0.5, 3.0, 100.0}) {
        std::vector<double> scaled(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) scaled[i] = c * mu[i];
        const auto t = tempering_scale(c * d_min, c * d_obs_min);
        REQUIRE_THAT(t.value, WithinAbs(c * tempering_scale(d_min, d_obs_min).value, 1e-12));
        const auto p = build_proxy_from_mu(grid, scaled, 1.0, t.value);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            REQUIRE_THAT(p.density[i], WithinAbs(base.density[i], 1e-9));
        }
    }
}

TEST_CASE("Quadratic exponent matches the truncated-Gaussian oracle", "[posterior][oracle]") {
    const int n = 2001;
    const auto grid = linspace(0.0, 1.0, n);
    std::vector<double> mu(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mu[i] = 50.0 * (grid[i] - 0.2) * (grid[i] - 0.2);
    }
    const auto proxy = build_proxy_from_mu(grid, mu, 1.0, 1.0);
    const auto m = proxy_moments(proxy);

    // Closed-form moments of N(0.2, 0.1^2) truncated to [0, 1].
    const double mean0 = 0.2, sd0 = 0.1;
    const double a = (0.0 - mean0) / sd0, b = (1.0 - mean0) / sd0;
    auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); };
    const double z = normal_cdf(b) - normal_cdf(a);
    const double mean_t = mean0 + sd0 * (phi(a) - phi(b)) / z;
    const double var_t =
        sd0 * sd0 *
        (1.0 + (a * phi(a) - b * phi(b)) / z - std::pow((phi(a) - phi(b)) / z, 2));
    REQUIRE_THAT(m.mean, WithinAbs(mean_t, 1e-4));
    REQUIRE_THAT(m.sd, WithinAbs(std::sqrt(var_t), 1e-4));
    REQUIRE_THAT(m.mean, WithinAbs(0.2, 1e-2));
    REQUIRE_THAT(m.sd, WithinAbs(0.1, 1e-2));
}

TEST_CASE("Density integrates to one", "[posterior][property]") {
    const auto grid = linspace(-3.0, 2.0, 512);
    std::vector<double> mu(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) mu[i] = std::sin(3.0 * grid[i]) + grid[i];
    const auto proxy = build_proxy_from_mu(grid, mu, 2.0, 0.5);
    REQUIRE_THAT(trapezoid(proxy.density, proxy.spacing()), WithinAbs(1.0, 1e-8));
}

TEST_CASE("Uniform proxy moments", "[posterior]") {
    const auto grid = linspace(0.0, 1.0, 512);
    const auto proxy = build_proxy_from_mu(grid, std::vector<double>(grid.size(), 1.0), 1.0, 1.0);
    const auto m = proxy_moments(proxy);
    REQUIRE_THAT(m.mean, WithinAbs(0.5, 1e-9));
    REQUIRE_THAT(m.sd, WithinAbs(0.2886751345948129, 1e-4));
}

TEST_CASE("Symmetric proxies have mean and mode within one grid cell", "[posterior]") {
    const auto grid = linspace(0.0, 1.0, 512);
    std::vector<double> mu(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mu[i] = 4.0 * (grid[i] - 0.5) * (grid[i] - 0.5);
    }
    const auto proxy = build_proxy_from_mu(grid, mu, 1.0, 0.2);
    const auto m = proxy_moments(proxy);
    REQUIRE(std::abs(m.mean - m.mode) < proxy.spacing());
}

TEST_CASE("Symmetrized KL of identical densities is zero", "[posterior]") {
    const auto grid = linspace(-5.0, 5.0, 1001);
    const auto p = gaussian_density(grid, 0.0, 1.0);
    REQUIRE_THAT(symmetrized_kl(p, p, grid[1] - grid[0]), WithinAbs(0.0, 1e-10));
}

TEST_CASE("Symmetrized KL of shifted unit Gaussians equals the squared shift",
          "[posterior][oracle]") {
    for (double delta : {0.5, 1.0, 2.0}) {
        const auto grid = linspace(-9.0, 9.0 + delta, 4001);
        const auto p = gaussian_density(grid, 0.0, 1.0);
        const auto q = gaussian_density(grid, delta, 1.0);
        const double skl = symmetrized_kl(p, q, grid[1] - grid[0]);
        REQUIRE_THAT(skl, WithinAbs(delta * delta, 0.02 * delta * delta));
    }
}

TEST_CASE("Disjoint floor-clipped densities give a large finite value", "[posterior]") {
    const int n = 1001;
    std::vector<double> p(n, 0.0), q(n, 0.0);
    for (int i = 0; i < 100; ++i) p[i] = 1.0;
    for (int i = n - 100; i < n; ++i) q[i] = 1.0;
    const double h = 0.01;
    const double skl = symmetrized_kl(p, q, h);
    REQUIRE(std::isfinite(skl));
    REQUIRE(skl > 100.0);
    REQUIRE_THROWS_AS(symmetrized_kl(p, std::vector<double>(n - 1, 1.0), h),
                      std::invalid_argument);
}

TEST_CASE("Factorized joint integrates to one with exact marginals", "[posterior][property]") {
    const auto grid_x = linspace(0.0, 1.0, 201);
    const auto grid_y = linspace(-1.0, 2.0, 301);
    std::vector<double> mu_x(grid_x.size()), mu_y(grid_y.size());
    for (std::size_t i = 0; i < grid_x.size(); ++i) mu_x[i] = 3.0 * grid_x[i];
    for (std::size_t i = 0; i < grid_y.size(); ++i) mu_y[i] = grid_y[i] * grid_y[i];
    const auto px = build_proxy_from_mu(grid_x, mu_x, 1.0, 0.5);
    const auto py = build_proxy_from_mu(grid_y, mu_y, 1.0, 0.5);

    const double hx = px.spacing(), hy = py.spacing();
    // 2-D trapezoid of the product density.
    std::vector<double> row_integrals(grid_x.size());
    for (std::size_t i = 0; i < grid_x.size(); ++i) {
        std::vector<double> row(grid_y.size());
        for (std::size_t j = 0; j < grid_y.size(); ++j) row[j] = px.density[i] * py.density[j];
        row_integrals[i] = trapezoid(row, hy);
    }
    REQUIRE_THAT(trapezoid(row_integrals, hx), WithinAbs(1.0, 1e-8));
    // Marginalizing the joint over y recovers the x proxy exactly.
    for (std::size_t i = 0; i < grid_x.size(); ++i) {
        REQUIRE_THAT(row_integrals[i], WithinAbs(px.density[i], 1e-8));
    }
}

TEST_CASE("A constant offset in mu widens the proxy through the tempering rule",
          "[posterior][property]") {
    const auto grid = linspace(0.0, 1.0, 512);
    double prev_sd = 0.0;
    for (double d0 : {0.0, 1.0, 3.0}) {
        std::vector<double> mu(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            mu[i] = d0 + 0.05 + 20.0 * (grid[i] - 0.5) * (grid[i] - 0.5);
        }
        const double d_min = d0 + 0.05;
        const auto t = tempering_scale(d_min, d_min);
        const auto proxy = build_proxy_from_mu(grid, mu, 1.0, t.value);
        const double sd = proxy_moments(proxy).sd;
        REQUIRE(sd > prev_sd);
        prev_sd = sd;
    }
}

TEST_CASE("Proxy sd is non-increasing in the tempering weight", "[posterior][property]") {
    const auto grid = linspace(0.0, 1.0, 512);
    std::vector<double> mu(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mu[i] = 10.0 * (grid[i] - 0.4) * (grid[i] - 0.4);
    }
    double prev_sd = std::numeric_limits<double>::infinity();
    for (double w : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double sd = proxy_moments(build_proxy_from_mu(grid, mu, w, 0.5)).sd;
        REQUIRE(sd <= prev_sd + 1e-12);
        prev_sd = sd;
    }
}

TEST_CASE("Non-uniform prior weights multiply in before normalization", "[posterior]") {
    const auto grid = linspace(0.0, 1.0, 401);
    std::vector<double> mu(grid.size(), 1.0);
    std::vector<double> prior(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) prior[i] = grid[i];  // triangular
    const auto proxy = build_proxy_from_mu(grid, mu, 1.0, 1.0, prior);
    REQUIRE_THAT(trapezoid(proxy.density, proxy.spacing()), WithinAbs(1.0, 1e-8));
    REQUIRE_THAT(proxy.density.back(), WithinAbs(2.0, 1e-6));
}
