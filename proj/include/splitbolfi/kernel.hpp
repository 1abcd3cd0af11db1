#ifndef SPLITBOLFI_KERNEL_HPP
#define SPLITBOLFI_KERNEL_HPP

#include <cmath>
#include <optional>
#include <stdexcept>

namespace splitbolfi {

enum class MaternOrder {
    nu_half,
    nu_three_halves,
    nu_five_halves,
};

struct KernelConfig {
    double variance_prior_rate = 1.0;    // rate of the exp hyperprior on signal variance
    double lengthscale_prior_shape = 2.0;
    double lengthscale_prior_rate = 2.0;
    std::optional<double> lengthscale_fixed;  // overrides lengthscale inference
    double noise_prior_rate = 1.0;       // rate of the exp hyperprior on noise variance
    double noise_floor = 1e-6;           // jitter added to the Gram diagonal, relative to signal variance
    MaternOrder order = MaternOrder::nu_five_halves;

    void validate() const {
        if (!(variance_prior_rate > 0.0) || !(lengthscale_prior_shape > 0.0) ||
            !(lengthscale_prior_rate > 0.0) || !(noise_prior_rate > 0.0) ||
            !(noise_floor > 0.0)) {
            throw std::invalid_argument("KernelConfig: rates, shapes and floor must be positive");
        }
        if (lengthscale_fixed && !(*lengthscale_fixed > 0.0)) {
            throw std::invalid_argument("KernelConfig: fixed lengthscale must be positive");
        }
    }
};

// Matern covariance as a function of distance r >= 0.
[[nodiscard]] inline double kernel_eval(double r, double sigma_f2, double lengthscale,
                                        MaternOrder order = MaternOrder::nu_five_halves) {
    if (!(r >= 0.0) || !std::isfinite(r) || !std::isfinite(sigma_f2) ||
        !std::isfinite(lengthscale) || !(sigma_f2 > 0.0) || !(lengthscale > 0.0)) {
        throw std::invalid_argument("kernel_eval: non-finite or non-positive input");
    }
    const double s = r / lengthscale;
    switch (order) {
        case MaternOrder::nu_half:
            return sigma_f2 * std::exp(-s);
        case MaternOrder::nu_three_halves: {
            const double a = std::sqrt(3.0) * s;
            return sigma_f2 * (1.0 + a) * std::exp(-a);
        }
        case MaternOrder::nu_five_halves: {
            const double a = std::sqrt(5.0) * s;
            return sigma_f2 * (1.0 + a + 5.0 * s * s / 3.0) * std::exp(-a);
        }
    }
    throw std::logic_error("kernel_eval: unknown order");
}

}  // namespace splitbolfi

#endif  // SPLITBOLFI_KERNEL_HPP
