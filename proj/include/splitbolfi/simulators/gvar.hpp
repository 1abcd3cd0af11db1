#ifndef SPLITBOLFI_SIMULATORS_GVAR_HPP
#define SPLITBOLFI_SIMULATORS_GVAR_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "splitbolfi/rng.hpp"
#include "splitbolfi/simulator.hpp"

namespace splitbolfi {

// Sparse first-order vector autoregression X_{t+1} = Pi X_t + eps with
// negative unity diagonal and exactly one off-diagonal coupling per row
// (row i couples to variable i+1, cyclically). Parameters are the coupling
// values and the noise variance.
struct GvarModel {
    int n_vars = 5;
    std::vector<int> coupling_partner;  // one off-diagonal column index per row
    std::vector<double> pi_offdiag;     // per-row coupling in (-1, 1)
    double sigma2 = 0.1;
    int T = 500;

    [[nodiscard]] static std::vector<int> ring_partners(int n_vars) {
        std::vector<int> partner(n_vars);
        for (int i = 0; i < n_vars; ++i) partner[i] = (i + 1) % n_vars;
        return partner;
    }

    void validate() const {
        if (n_vars < 2 || T < 2) throw std::invalid_argument("GvarModel: need n_vars >= 2, T >= 2");
        if (coupling_partner.size() != static_cast<std::size_t>(n_vars) ||
            pi_offdiag.size() != static_cast<std::size_t>(n_vars)) {
            throw std::invalid_argument("GvarModel: size mismatch");
        }
        for (int i = 0; i < n_vars; ++i) {
            if (coupling_partner[i] == i || coupling_partner[i] < 0 ||
                coupling_partner[i] >= n_vars) {
                throw std::invalid_argument("GvarModel: partner must be a distinct column");
            }
        }
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("GvarModel: sigma2 < 0");
    }
};

class GvarSimulator : public Simulator {
public:
    struct Config {
        int n_vars = 5;
        int T = 500;
        double sigma2_true = 0.1;
        bool stabilized = false;  // rescale Pi to spectral radius 0.95
        DiscrepancyNorm norm = DiscrepancyNorm::absolute;
    };

    GvarSimulator(const Config& cfg, std::uint64_t data_seed) : cfg_(cfg) {
        partners_ = GvarModel::ring_partners(cfg.n_vars);
        build_space();
        // The -1 diagonal leaves the dynamics spectrally marginal; a rare
        // coupling draw explodes past the overflow guard, in which case the
        // generating values are redrawn.
        for (int attempt = 0; attempt < 10; ++attempt) {
            Rng gen(stream_seed(data_seed, StreamRole::observed_data, 0, attempt));
            generating_.resize(space_.size());
            for (int i = 0; i < cfg.n_vars; ++i) generating_[i] = gen.uniform(-1.0, 1.0);
            generating_[cfg.n_vars] = cfg.sigma2_true;
            try {
                observed_ = simulate_summaries(
                    generating_, stream_seed(data_seed, StreamRole::observed_data, 1, attempt));
                return;
            } catch (const SimulationFailure&) {
            }
        }
        throw SimulationFailure("GvarSimulator: observed data generation kept overflowing");
    }

    [[nodiscard]] const ParameterSpace& space() const override { return space_; }

    [[nodiscard]] std::vector<std::string> summary_names() const override {
        std::vector<std::string> names;
        names.reserve(space_.size());
        for (int i = 0; i < cfg_.n_vars; ++i) {
            names.push_back("lag1_corr_" + std::to_string(i) + "_" +
                            std::to_string(partners_[i]));
        }
        names.push_back("lag1_autocov_mean");
        return names;
    }

    // Simulates T steps from X_0 = 0 and returns the lag-1 summaries: the
    // sample correlation of (X_i(t+1), X_partner(t)) for each coupling, and
    // an asinh-compressed average lag-1 autocovariance for the noise
    // parameter (correlations are exactly scale-free in sigma2, so an
    // uncompressed scale-carrying statistic is required there).
    // Full trajectory, one column per time point, X_0 = 0 in column zero.
    [[nodiscard]] Eigen::MatrixXd simulate_trajectory(const std::vector<double>& theta,
                                                      std::uint64_t seed) const {
        if (theta.size() != space_.size()) {
            throw std::invalid_argument("GvarSimulator: theta size mismatch");
        }
        const int n = cfg_.n_vars;
        const int T = cfg_.T;
        const double sigma = std::sqrt(std::max(theta[n], 0.0));

        Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            pi(i, i) = -1.0;
            pi(i, partners_[i]) = theta[i];
        }
        if (cfg_.stabilized) {
            const double rho = spectral_radius(pi);
            if (rho > 0.95) pi *= 0.95 / rho;
        }

        Rng rng(seed);
        Eigen::MatrixXd traj(n, T + 1);
        traj.col(0).setZero();
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        constexpr double kOverflowGuard = 1e140;
        for (int t = 0; t < T; ++t) {
            Eigen::VectorXd next = pi * x;
            for (int i = 0; i < n; ++i) next(i) += sigma * rng.normal();
            if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kOverflowGuard) {
                throw SimulationFailure("GvarSimulator: trajectory overflow");
            }
            x = next;
            traj.col(t + 1) = x;
        }
        return traj;
    }

    [[nodiscard]] std::vector<double> simulate_summaries(const std::vector<double>& theta,
                                                         std::uint64_t seed) const override {
        const Eigen::MatrixXd traj = simulate_trajectory(theta, seed);
        const int n = cfg_.n_vars;
        std::vector<double> summaries(space_.size());
        for (int i = 0; i < n; ++i) {
            summaries[i] = lag1_correlation(traj, i, partners_[i]);
        }
        double cov_sum = 0.0;
        for (int i = 0; i < n; ++i) cov_sum += lag1_covariance(traj, i, i);
        summaries[n] = std::asinh(cov_sum / n);
        return summaries;
    }

    [[nodiscard]] const std::vector<double>& observed_summaries() const override {
        return observed_;
    }

    [[nodiscard]] std::vector<double> discrepancies(
        const std::vector<double>& sim, const std::vector<double>& obs) const override {
        std::vector<double> d(space_.size());
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = discrepancy_of(sim[j], obs[j], cfg_.norm);
        return d;
    }

    [[nodiscard]] const std::vector<double>& generating_values() const { return generating_; }
    [[nodiscard]] const Config& config() const { return cfg_; }
    [[nodiscard]] const std::vector<int>& partners() const { return partners_; }

private:
    void build_space() {
        std::vector<std::string> names;
        std::vector<double> lo, hi;
        for (int i = 0; i < cfg_.n_vars; ++i) {
            names.push_back("pi_" + std::to_string(i));
            lo.push_back(-1.0);
            hi.push_back(1.0);
        }
        names.emplace_back("sigma2");
        lo.push_back(0.0);
        hi.push_back(1.0);
        space_ = ParameterSpace(std::move(names), std::move(lo), std::move(hi));
    }

    [[nodiscard]] static double spectral_radius(const Eigen::MatrixXd& m) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }

    // Pearson correlation of (X_a(t+1), X_b(t)); zero-variance series give 0
    // by convention (the all-zero trajectory at sigma2 = 0).
    [[nodiscard]] double lag1_correlation(const Eigen::MatrixXd& traj, int a, int b) const {
        const int T = cfg_.T;
        const auto xa = traj.row(a).segment(1, T);
        const auto xb = traj.row(b).segment(0, T);
        const double ma = xa.mean();
        const double mb = xb.mean();
        const double cov = ((xa.array() - ma) * (xb.array() - mb)).sum();
        const double va = (xa.array() - ma).square().sum();
        const double vb = (xb.array() - mb).square().sum();
        const double denom = std::sqrt(va * vb);
        if (!(denom > 0.0) || !std::isfinite(denom)) return 0.0;
        const double r = cov / denom;
        if (!std::isfinite(r)) throw SimulationFailure("GvarSimulator: non-finite correlation");
        return r;
    }

    [[nodiscard]] double lag1_covariance(const Eigen::MatrixXd& traj, int a, int b) const {
        const int T = cfg_.T;
        const auto xa = traj.row(a).segment(1, T);
        const auto xb = traj.row(b).segment(0, T);
        const double cov =
            ((xa.array() - xa.mean()) * (xb.array() - xb.mean())).sum() / (T - 1);
        if (!std::isfinite(cov)) throw SimulationFailure("GvarSimulator: non-finite covariance");
        return cov;
    }

    Config cfg_;
    std::vector<int> partners_;
    ParameterSpace space_;
    std::vector<double> generating_;
    std::vector<double> observed_;
};

}  // namespace splitbolfi

#endif  // SPLITBOLFI_SIMULATORS_GVAR_HPP
