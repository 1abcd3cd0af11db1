#ifndef SPLITBOLFI_SIMULATORS_DAYCARE_HPP
#define SPLITBOLFI_SIMULATORS_DAYCARE_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "splitbolfi/math.hpp"
#include "splitbolfi/rng.hpp"
#include "splitbolfi/simulator.hpp"

namespace splitbolfi {

// Bacterial colonization and competition in a daycare centre. Children
// acquire strains from colonized peers (rate beta) and from the outside
// population (rate lambda * background prevalence), clear them at rate one,
// and already-colonized children acquire additional strains at a rate
// suppressed by the factor 2*Phi(-sum of competition parameters against the
// strains they carry). Snapshots are independent equilibrium states.
class DaycareSimulator : public Simulator {
public:
    struct Config {
        int n_strains = 4;
        int n_children = 47;
        double dt = 0.1;
        double burn_in = 50.0;
        int n_observations = 11;
        double clearance_rate = 1.0;
        std::vector<double> background_prevalence;  // default: uniform 1/n_strains
        double rate_upper = 11.0;   // prior box for beta and lambda
        double theta_upper = 3.0;   // prior box for each competition parameter
        bool gillespie = false;     // exact event-driven reference dynamics
        DiscrepancyNorm norm = DiscrepancyNorm::absolute;
    };

    // One snapshot: row-major child x strain colonization indicators.
    using Snapshot = std::vector<std::uint8_t>;

    DaycareSimulator(const Config& cfg, const std::vector<double>& true_theta,
                     std::uint64_t data_seed)
        : cfg_(prepare(cfg)) {
        build_space();
        if (true_theta.size() != space_.size()) {
            throw std::invalid_argument("DaycareSimulator: true theta size mismatch");
        }
        generating_ = true_theta;
        observed_ = simulate_summaries(true_theta,
                                       stream_seed(data_seed, StreamRole::observed_data, 0));
    }

    DaycareSimulator(const Config& cfg, std::vector<Snapshot> observed_snapshots)
        : cfg_(prepare(cfg)) {
        build_space();
        observed_ = summaries_from_snapshots(observed_snapshots);
    }

    [[nodiscard]] const ParameterSpace& space() const override { return space_; }

    [[nodiscard]] std::vector<std::string> summary_names() const override {
        std::vector<std::string> names{"shannon_index", "n_strains_observed"};
        for (int s = 0; s < cfg_.n_strains; ++s) names.push_back("prevalence_" + std::to_string(s));
        names.emplace_back("multi_colonization_prevalence");
        for (int a = 0; a < cfg_.n_strains; ++a) {
            for (int b = a + 1; b < cfg_.n_strains; ++b) {
                names.push_back("co_prevalence_" + std::to_string(a) + "_" + std::to_string(b));
            }
        }
        return names;
    }

    [[nodiscard]] std::vector<double> simulate_summaries(const std::vector<double>& theta,
                                                         std::uint64_t seed) const override {
        return summaries_from_snapshots(simulate_snapshots(theta, seed));
    }

    [[nodiscard]] std::vector<Snapshot> simulate_snapshots(const std::vector<double>& theta,
                                                           std::uint64_t seed) const {
        if (theta.size() != space_.size()) {
            throw std::invalid_argument("DaycareSimulator: theta size mismatch");
        }
        std::vector<Snapshot> snapshots(cfg_.n_observations);
        for (int k = 0; k < cfg_.n_observations; ++k) {
            Rng rng(mix64(seed ^ mix64(static_cast<std::uint64_t>(k) + 0x9e37UL)));
            snapshots[k] = cfg_.gillespie ? run_chain_gillespie(theta, rng)
                                          : run_chain_tau_leap(theta, rng);
        }
        return snapshots;
    }

    // Shannon index (natural log) of the observed strain distribution, the
    // number of strains observed, per-strain prevalences, the prevalence of
    // multiple colonization, and the smoothed prevalence-normalized
    // co-prevalence of each strain pair.
    [[nodiscard]] std::vector<double> summaries_from_snapshots(
        const std::vector<Snapshot>& snapshots) const {
        const int S = cfg_.n_strains;
        const int N = cfg_.n_children;
        const double n_snap = static_cast<double>(snapshots.size());
        std::vector<double> strain_count(S, 0.0);
        std::vector<double> pair_count(S * S, 0.0);
        double multi = 0.0;
        for (const auto& snap : snapshots) {
            if (snap.size() != static_cast<std::size_t>(N * S)) {
                throw std::invalid_argument("DaycareSimulator: snapshot size mismatch");
            }
            for (int i = 0; i < N; ++i) {
                int carried = 0;
                for (int s = 0; s < S; ++s) {
                    if (snap[i * S + s]) {
                        ++carried;
                        strain_count[s] += 1.0;
                        for (int b = s + 1; b < S; ++b) {
                            if (snap[i * S + b]) pair_count[s * S + b] += 1.0;
                        }
                    }
                }
                if (carried >= 2) multi += 1.0;
            }
        }
        double total = 0.0;
        for (double c : strain_count) total += c;
        double shannon = 0.0;
        int observed_strains = 0;
        for (double c : strain_count) {
            if (c > 0.0) {
                ++observed_strains;
                const double p = c / total;
                shannon -= p * std::log(p);
            }
        }
        const double denom = n_snap * static_cast<double>(N);
        std::vector<double> summaries{shannon, static_cast<double>(observed_strains)};
        for (int s = 0; s < S; ++s) summaries.push_back(strain_count[s] / denom);
        summaries.push_back(multi / denom);
        for (int a = 0; a < S; ++a) {
            for (int b = a + 1; b < S; ++b) {
                const double phi =
                    (0.01 + pair_count[a * S + b]) /
                    std::sqrt(n_snap * (0.01 + strain_count[a]) * (0.01 + strain_count[b]));
                summaries.push_back(phi);
            }
        }
        return summaries;
    }

    [[nodiscard]] const std::vector<double>& observed_summaries() const override {
        return observed_;
    }

    // Competition parameters compare co-prevalences; beta and lambda compare
    // the sum of all non-co-prevalence summaries.
    [[nodiscard]] std::vector<double> discrepancies(
        const std::vector<double>& sim, const std::vector<double>& obs) const override {
        const int S = cfg_.n_strains;
        const std::size_t n_scalar = 3 + static_cast<std::size_t>(S);  // shannon..multi
        double sim_sum = 0.0, obs_sum = 0.0;
        for (std::size_t i = 0; i < n_scalar; ++i) {
            sim_sum += sim[i];
            obs_sum += obs[i];
        }
        std::vector<double> d(space_.size());
        d[0] = discrepancy_of(sim_sum, obs_sum, cfg_.norm);
        d[1] = d[0];
        const std::size_t n_pairs = space_.size() - 2;
        for (std::size_t pair = 0; pair < n_pairs; ++pair) {
            d[2 + pair] = discrepancy_of(sim[n_scalar + pair], obs[n_scalar + pair], cfg_.norm);
        }
        return d;
    }

    [[nodiscard]] const std::vector<double>& generating_values() const { return generating_; }
    [[nodiscard]] const Config& config() const { return cfg_; }
    [[nodiscard]] std::uint64_t clamped_event_count() const { return clamp_events_.load(); }

    [[nodiscard]] std::size_t pair_index(int a, int b) const {
        if (a > b) std::swap(a, b);
        if (a == b || a < 0 || b >= cfg_.n_strains) {
            throw std::invalid_argument("DaycareSimulator: bad strain pair");
        }
        // offset of (a, b) in the a < b lexicographic enumeration
        std::size_t idx = 0;
        for (int r = 0; r < a; ++r) idx += static_cast<std::size_t>(cfg_.n_strains - 1 - r);
        return 2 + idx + static_cast<std::size_t>(b - a - 1);
    }

private:
    [[nodiscard]] static Config prepare(Config cfg) {
        if (cfg.n_strains < 2 || cfg.n_children < 2 || cfg.n_observations < 1 ||
            !(cfg.dt > 0.0) || !(cfg.burn_in > 0.0)) {
            throw std::invalid_argument("DaycareSimulator: bad config");
        }
        if (cfg.background_prevalence.empty()) {
            cfg.background_prevalence.assign(cfg.n_strains, 1.0 / cfg.n_strains);
        }
        if (cfg.background_prevalence.size() != static_cast<std::size_t>(cfg.n_strains)) {
            throw std::invalid_argument("DaycareSimulator: background prevalence size mismatch");
        }
        return cfg;
    }

    void build_space() {
        std::vector<std::string> names{"beta", "lambda"};
        std::vector<double> lo{0.0, 0.0}, hi{cfg_.rate_upper, cfg_.rate_upper};
        for (int a = 0; a < cfg_.n_strains; ++a) {
            for (int b = a + 1; b < cfg_.n_strains; ++b) {
                names.push_back("theta_" + std::to_string(a) + "_" + std::to_string(b));
                lo.push_back(0.0);
                hi.push_back(cfg_.theta_upper);
            }
        }
        space_ = ParameterSpace(std::move(names), std::move(lo), std::move(hi));
    }

    [[nodiscard]] double competition_theta(const std::vector<double>& theta, int a,
                                           int b) const {
        if (a == b) return 0.0;
        return theta[pair_index(a, b)];
    }

public:
    // Acquisition rate of strain s for child i given the current state.
    [[nodiscard]] double acquisition_rate(const std::vector<double>& theta,
                                          const Snapshot& state,
                                          const std::vector<int>& strain_count, int i,
                                          int s) const {
        const int S = cfg_.n_strains;
        const int N = cfg_.n_children;
        const double beta = theta[0];
        const double lambda = theta[1];
        const double carriers =
            static_cast<double>(strain_count[s] - state[i * S + s]) / (N - 1);
        double rate = beta * carriers + lambda * cfg_.background_prevalence[s];
        double competition = 0.0;
        bool carries_any = false;
        for (int j = 0; j < S; ++j) {
            if (state[i * S + j]) {
                carries_any = true;
                competition += competition_theta(theta, s, j);
            }
        }
        if (carries_any) rate *= 2.0 * normal_cdf(-competition);
        return rate;
    }

private:
    [[nodiscard]] Snapshot run_chain_tau_leap(const std::vector<double>& theta,
                                              Rng& rng) const {
        const int S = cfg_.n_strains;
        const int N = cfg_.n_children;
        Snapshot state(N * S, 0);
        Snapshot next(N * S, 0);
        std::vector<int> strain_count(S, 0);
        const int steps = static_cast<int>(std::ceil(cfg_.burn_in / cfg_.dt));
        const double p_clear = std::min(cfg_.clearance_rate * cfg_.dt, 1.0);
        for (int step = 0; step < steps; ++step) {
            for (int s = 0; s < S; ++s) strain_count[s] = 0;
            for (int i = 0; i < N; ++i) {
                for (int s = 0; s < S; ++s) strain_count[s] += state[i * S + s];
            }
            for (int i = 0; i < N; ++i) {
                for (int s = 0; s < S; ++s) {
                    if (state[i * S + s]) {
                        next[i * S + s] = rng.bernoulli(p_clear) ? 0 : 1;
                    } else {
                        const double rate = acquisition_rate(theta, state, strain_count, i, s);
                        double p = rate * cfg_.dt;
                        if (p > 1.0) {
                            p = 1.0;
                            clamp_events_.fetch_add(1, std::memory_order_relaxed);
                        }
                        next[i * S + s] = rng.bernoulli(p) ? 1 : 0;
                    }
                }
            }
            std::swap(state, next);
        }
        return state;
    }

    // Exact event-driven dynamics; slow reference used for validating the
    // tau-leap approximation.
    [[nodiscard]] Snapshot run_chain_gillespie(const std::vector<double>& theta,
                                               Rng& rng) const {
        const int S = cfg_.n_strains;
        const int N = cfg_.n_children;
        Snapshot state(N * S, 0);
        std::vector<int> strain_count(S, 0);
        std::vector<double> rates(N * S, 0.0);
        double t = 0.0;
        while (true) {
            for (int s = 0; s < S; ++s) strain_count[s] = 0;
            for (int i = 0; i < N; ++i) {
                for (int s = 0; s < S; ++s) strain_count[s] += state[i * S + s];
            }
            double total = 0.0;
            for (int i = 0; i < N; ++i) {
                for (int s = 0; s < S; ++s) {
                    const double r = state[i * S + s]
                                         ? cfg_.clearance_rate
                                         : acquisition_rate(theta, state, strain_count, i, s);
                    rates[i * S + s] = r;
                    total += r;
                }
            }
            if (!(total > 0.0)) break;  // absorbed (e.g. beta = lambda = 0, nothing colonized)
            t += rng.exponential(total);
            if (t >= cfg_.burn_in) break;
            double u = rng.uniform() * total;
            std::size_t idx = 0;
            for (; idx + 1 < rates.size(); ++idx) {
                u -= rates[idx];
                if (u <= 0.0) break;
            }
            state[idx] ^= 1;
        }
        return state;
    }

    Config cfg_;
    ParameterSpace space_;
    std::vector<double> observed_;
    std::vector<double> generating_;
    mutable std::atomic<std::uint64_t> clamp_events_{0};
};

}  // namespace splitbolfi

#endif  // SPLITBOLFI_SIMULATORS_DAYCARE_HPP
