#ifndef SPLITBOLFI_GP_HPP
#define SPLITBOLFI_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "splitbolfi/kernel.hpp"
#include "splitbolfi/math.hpp"
#include "splitbolfi/rng.hpp"

namespace splitbolfi {

struct GpHyperparams {
    double signal_variance = 1.0;
    double lengthscale = 1.0;
    double noise_variance = 0.1;
};

struct GpFitOptions {
    int n_starts = 5;
    int max_evals_per_start = 80;
    double tol = 1e-6;
};

struct GpPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

// One-dimensional GP regression on (theta_j, d_j) pairs. The prior mean is
// constant, equal to the running mean of the targets. Immutable once built.
class GpSurrogate {
public:
    GpSurrogate() = default;

    // Conditions on the data with the given hyperparameters (no fitting).
    [[nodiscard]] static GpSurrogate condition(std::span<const double> inputs,
                                               std::span<const double> targets,
                                               const GpHyperparams& hp,
                                               const KernelConfig& cfg) {
        cfg.validate();
        check_data(inputs, targets);
        GpSurrogate gp;
        gp.cfg_ = cfg;
        gp.hp_ = hp;
        gp.inputs_.assign(inputs.begin(), inputs.end());
        gp.targets_.assign(targets.begin(), targets.end());
        gp.prior_mean_ = mean_of(targets);
        if (inputs.size() < 2) {
            gp.degenerate_ = true;
            return gp;
        }
        gp.factorize();
        return gp;
    }

    // MAP fit of (signal variance, lengthscale, noise variance) under the
    // configured hyperpriors, multi-start Nelder-Mead in log space. With
    // fewer than two points the surrogate falls back to the prior-mean
    // predictor so the acquisition loop is defined from the first round.
    [[nodiscard]] static GpSurrogate fit(std::span<const double> inputs,
                                         std::span<const double> targets,
                                         const KernelConfig& cfg, std::uint64_t fit_seed,
                                         const GpFitOptions& opt = {},
                                         std::optional<GpHyperparams> warm_start = {}) {
        cfg.validate();
        check_data(inputs, targets);
        const std::size_t n = inputs.size();
        if (n < 2) {
            GpHyperparams hp;
            hp.signal_variance = 1.0 / cfg.variance_prior_rate;
            hp.lengthscale = cfg.lengthscale_fixed
                                 ? *cfg.lengthscale_fixed
                                 : cfg.lengthscale_prior_shape / cfg.lengthscale_prior_rate;
            hp.noise_variance = 1.0 / cfg.noise_prior_rate;
            return condition(inputs, targets, hp, cfg);
        }

        const bool fit_ell = !cfg.lengthscale_fixed.has_value();
        const int dim = fit_ell ? 3 : 2;
        const double prior_mean = mean_of(targets);

        Eigen::MatrixXd dist(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double r = std::abs(inputs[i] - inputs[j]);
                dist(i, j) = r;
                dist(j, i) = r;
            }
        }
        Eigen::VectorXd yc(n);
        for (std::size_t i = 0; i < n; ++i) yc(i) = targets[i] - prior_mean;

        auto unpack = [&](const std::vector<double>& z) {
            GpHyperparams hp;
            hp.signal_variance = std::exp(z[0]);
            hp.lengthscale = fit_ell ? std::exp(z[1]) : *cfg.lengthscale_fixed;
            hp.noise_variance = std::exp(z[fit_ell ? 2 : 1]);
            return hp;
        };
        auto objective = [&](const std::vector<double>& z) {
            const GpHyperparams hp = unpack(z);
            return neg_log_posterior(dist, yc, hp, cfg, fit_ell);
        };

        // Start 0 is moment-based; the rest are hyperprior draws, with the
        // warm start (when given) replacing the first draw.
        double tvar = 0.0;
        for (std::size_t i = 0; i < n; ++i) tvar += yc(i) * yc(i);
        tvar = std::max(tvar / static_cast<double>(n), 1e-10);
        double range = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) range = std::max(range, dist(i, j));
        }
        range = std::max(range, 1e-6);

        Rng rng(fit_seed);
        const int shape = std::max(1, static_cast<int>(std::lround(cfg.lengthscale_prior_shape)));
        std::vector<std::vector<double>> starts;
        {
            std::vector<double> z0{std::log(tvar)};
            if (fit_ell) z0.push_back(std::log(range / 4.0));
            z0.push_back(std::log(0.25 * tvar));
            starts.push_back(std::move(z0));
        }
        for (int s = 1; s < opt.n_starts; ++s) {
            std::vector<double> z;
            if (s == 1 && warm_start) {
                z.push_back(std::log(std::max(warm_start->signal_variance, 1e-12)));
                if (fit_ell) z.push_back(std::log(std::max(warm_start->lengthscale, 1e-12)));
                z.push_back(std::log(std::max(warm_start->noise_variance, 1e-12)));
            } else {
                z.push_back(std::log(rng.exponential(cfg.variance_prior_rate)));
                if (fit_ell) {
                    z.push_back(std::log(rng.gamma_int_shape(shape, cfg.lengthscale_prior_rate)));
                }
                z.push_back(std::log(rng.exponential(cfg.noise_prior_rate)));
            }
            starts.push_back(std::move(z));
        }

        NelderMeadOptions nm;
        nm.max_evals = opt.max_evals_per_start;
        nm.tol = opt.tol;
        nm.initial_step = 0.7;
        std::vector<double> best_z;
        double best_val = std::numeric_limits<double>::infinity();
        for (auto& z0 : starts) {
            (void)dim;
            auto z = nelder_mead(objective, z0, nm);
            const double v = objective(z);
            if (v < best_val) {
                best_val = v;
                best_z = z;
            }
        }
        if (!std::isfinite(best_val)) {
            throw std::runtime_error("GpSurrogate::fit: no admissible hyperparameters found");
        }
        return condition(inputs, targets, unpack(best_z), cfg);
    }

    [[nodiscard]] GpPrediction predict(double query) const {
        if (!std::isfinite(query)) throw std::invalid_argument("predict: non-finite query");
        if (degenerate_) return {prior_mean_, hp_.signal_variance};
        const std::size_t n = inputs_.size();
        Eigen::VectorXd k(n);
        for (std::size_t i = 0; i < n; ++i) {
            k(i) = kernel_eval(std::abs(query - inputs_[i]), hp_.signal_variance,
                               hp_.lengthscale, cfg_.order);
        }
        const double mean = prior_mean_ + k.dot(alpha_);
        const Eigen::VectorXd v = chol_.matrixL().solve(k);
        const double var = hp_.signal_variance - v.squaredNorm();
        return {mean, std::max(var, 0.0)};
    }

    // Batched prediction over many queries; one triangular solve for all.
    void predict_batch(std::span<const double> queries, std::vector<double>& means,
                       std::vector<double>& variances) const {
        const std::size_t m = queries.size();
        means.resize(m);
        variances.resize(m);
        if (degenerate_) {
            std::fill(means.begin(), means.end(), prior_mean_);
            std::fill(variances.begin(), variances.end(), hp_.signal_variance);
            return;
        }
        const std::size_t n = inputs_.size();
        Eigen::MatrixXd K(n, m);
        for (std::size_t q = 0; q < m; ++q) {
            if (!std::isfinite(queries[q])) {
                throw std::invalid_argument("predict_batch: non-finite query");
            }
            for (std::size_t i = 0; i < n; ++i) {
                K(i, q) = kernel_eval(std::abs(queries[q] - inputs_[i]), hp_.signal_variance,
                                      hp_.lengthscale, cfg_.order);
            }
        }
        const Eigen::VectorXd mu = K.transpose() * alpha_;
        const Eigen::MatrixXd V = chol_.matrixL().solve(K);
        for (std::size_t q = 0; q < m; ++q) {
            means[q] = prior_mean_ + mu(q);
            variances[q] = std::max(hp_.signal_variance - V.col(q).squaredNorm(), 0.0);
        }
    }

    [[nodiscard]] double predict_mean(double query) const { return predict(query).mean; }

    [[nodiscard]] const GpHyperparams& hyperparams() const { return hp_; }
    [[nodiscard]] double prior_mean() const { return prior_mean_; }
    [[nodiscard]] const std::vector<double>& inputs() const { return inputs_; }
    [[nodiscard]] const std::vector<double>& targets() const { return targets_; }
    [[nodiscard]] std::size_t size() const { return inputs_.size(); }
    [[nodiscard]] bool is_prior_fallback() const { return degenerate_; }
    [[nodiscard]] const KernelConfig& kernel_config() const { return cfg_; }

private:
    static void check_data(std::span<const double> inputs, std::span<const double> targets) {
        if (inputs.size() != targets.size()) {
            throw std::invalid_argument("GpSurrogate: inputs/targets size mismatch");
        }
        for (double x : inputs) {
            if (!std::isfinite(x)) throw std::invalid_argument("GpSurrogate: non-finite input");
        }
        for (double y : targets) {
            if (!std::isfinite(y)) throw std::invalid_argument("GpSurrogate: non-finite target");
        }
    }

    void factorize() {
        const std::size_t n = inputs_.size();
        Eigen::MatrixXd K(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = kernel_eval(std::abs(inputs_[i] - inputs_[j]),
                                             hp_.signal_variance, hp_.lengthscale, cfg_.order);
                K(i, j) = v;
                K(j, i) = v;
            }
        }
        double jitter = cfg_.noise_floor * hp_.signal_variance;
        for (int attempt = 0; attempt < 5; ++attempt) {
            Eigen::MatrixXd A = K;
            A.diagonal().array() += hp_.noise_variance + jitter;
            chol_.compute(A);
            if (chol_.info() == Eigen::Success) {
                Eigen::VectorXd yc(n);
                for (std::size_t i = 0; i < n; ++i) yc(i) = targets_[i] - prior_mean_;
                alpha_ = chol_.solve(yc);
                if (alpha_.allFinite()) return;
            }
            jitter *= 100.0;
        }
        throw std::runtime_error("GpSurrogate: Gram factorization failed (degenerate data)");
    }

    [[nodiscard]] static double neg_log_posterior(const Eigen::MatrixXd& dist,
                                                  const Eigen::VectorXd& yc,
                                                  const GpHyperparams& hp,
                                                  const KernelConfig& cfg, bool fit_ell) {
        constexpr double kBad = 1e100;
        if (!std::isfinite(hp.signal_variance) || !std::isfinite(hp.lengthscale) ||
            !std::isfinite(hp.noise_variance)) {
            return kBad;
        }
        if (hp.signal_variance > 1e12 || hp.signal_variance < 1e-12 || hp.lengthscale > 1e9 ||
            hp.lengthscale < 1e-9 || hp.noise_variance > 1e12 || hp.noise_variance < 1e-15) {
            return kBad;
        }
        const auto n = dist.rows();
        Eigen::MatrixXd K(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double v = kernel_eval(dist(i, j), hp.signal_variance, hp.lengthscale,
                                             cfg.order);
                K(i, j) = v;
                K(j, i) = v;
            }
        }
        K.diagonal().array() += hp.noise_variance + cfg.noise_floor * hp.signal_variance;
        const Eigen::LLT<Eigen::MatrixXd> llt(K);
        if (llt.info() != Eigen::Success) return kBad;
        const Eigen::VectorXd alpha = llt.solve(yc);
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt.matrixL()(i, i));
        const double log_ml = -0.5 * yc.dot(alpha) - log_det -
                              0.5 * static_cast<double>(n) * std::log(2.0 * kPi);

        double log_prior = -cfg.variance_prior_rate * hp.signal_variance -
                           cfg.noise_prior_rate * hp.noise_variance;
        if (fit_ell) {
            log_prior += (cfg.lengthscale_prior_shape - 1.0) * std::log(hp.lengthscale) -
                         cfg.lengthscale_prior_rate * hp.lengthscale;
        }
        const double value = -(log_ml + log_prior);
        return std::isfinite(value) ? value : kBad;
    }

    KernelConfig cfg_;
    GpHyperparams hp_;
    std::vector<double> inputs_;
    std::vector<double> targets_;
    double prior_mean_ = 0.0;
    bool degenerate_ = false;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
};

}  // namespace splitbolfi

#endif  // SPLITBOLFI_GP_HPP
