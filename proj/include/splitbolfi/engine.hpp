#ifndef SPLITBOLFI_ENGINE_HPP
#define SPLITBOLFI_ENGINE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "splitbolfi/acquisition.hpp"
#include "splitbolfi/gp.hpp"
#include "splitbolfi/parallel.hpp"
#include "splitbolfi/parameter_space.hpp"
#include "splitbolfi/simulator.hpp"

namespace splitbolfi {

// Acquired parameter vectors with per-parameter discrepancies; one row per
// simulation, shared across every parameter's surrogate.
struct EvaluationLog {
    std::vector<std::vector<double>> params;
    std::vector<std::vector<double>> discrepancies;
    std::vector<std::uint64_t> seeds;

    [[nodiscard]] std::size_t size() const { return params.size(); }

    [[nodiscard]] std::vector<double> input_column(std::size_t j) const {
        std::vector<double> col(params.size());
        for (std::size_t t = 0; t < params.size(); ++t) col[t] = params[t][j];
        return col;
    }
    [[nodiscard]] std::vector<double> discrepancy_column(std::size_t j) const {
        std::vector<double> col(discrepancies.size());
        for (std::size_t t = 0; t < discrepancies.size(); ++t) col[t] = discrepancies[t][j];
        return col;
    }
};

struct EngineConfig {
    int refit_every = 5;   // full MAP refit cadence, plus once at the end
    int max_retries = 1;   // failed simulation: one retry, then skip the round
    int workers = 1;       // per-parameter refits run concurrently
    GpFitOptions fit;
};

struct FitResult {
    ParameterSpace space;
    KernelConfig kernel_config;
    AcquisitionConfig acquisition_config;
    std::vector<GpSurrogate> surrogates;
    std::vector<double> d_min;       // minimum of the posterior mean over the support
    std::vector<double> d_min_arg;
    std::vector<double> d_obs_min;   // minimum observed discrepancy
    EvaluationLog log;
    int n_retried = 0;
    int n_skipped = 0;
};

// Grid-plus-golden-section minimum of the GP predictive mean; the same
// search the acquisition uses, without the exploration term.
[[nodiscard]] inline MinimizeResult minimize_posterior_mean(const GpSurrogate& gp, double lo,
                                                            double hi, int grid_points = 256,
                                                            int refine_iters = 40) {
    std::vector<double> grid(grid_points);
    const double h = (hi - lo) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
        grid[i] = (i == grid_points - 1) ? hi : lo + h * i;
    }
    std::vector<double> mu, var;
    gp.predict_batch(grid, mu, var);
    MinimizeResult best;
    for (int i = 0; i < grid_points; ++i) {
        if (mu[i] < best.value) best = {grid[i], mu[i]};
    }
    auto mean_at = [&](double x) { return gp.predict(x).mean; };
    const double a = std::max(lo, best.x - h);
    const double b = std::min(hi, best.x + h);
    auto refined = minimize_grid_golden(mean_at, a, b, 2, refine_iters);
    return refined.value < best.value ? refined : best;
}

namespace detail {

class SplitBolfiRun {
public:
    SplitBolfiRun(const Simulator& sim, const KernelConfig& kcfg, const AcquisitionConfig& acfg,
                  const EngineConfig& ecfg, std::uint64_t seed)
        : sim_(sim),
          space_(sim.space()),
          kcfg_(kcfg),
          acfg_(acfg),
          ecfg_(ecfg),
          seed_(seed),
          gps_(space_.size()),
          warm_(space_.size()),
          have_hp_(false) {
        kcfg_.validate();
        acfg_.validate();
        if (ecfg_.refit_every < 1) throw std::invalid_argument("EngineConfig: refit_every < 1");
    }

    // Advances the loop through rounds [current, until).
    void advance_to(int until) {
        for (; round_ < until; ++round_) {
            if (round_ >= acfg_.n_init) recondition();
            const auto theta = acquire_round(gps_, space_, acfg_, seed_,
                                             static_cast<std::uint64_t>(round_));
            std::optional<std::vector<double>> d;
            std::uint64_t used_seed = 0;
            for (int attempt = 0; attempt <= ecfg_.max_retries; ++attempt) {
                const std::uint64_t s = stream_seed(seed_, StreamRole::simulate,
                                                    static_cast<std::uint64_t>(round_),
                                                    static_cast<std::uint64_t>(attempt));
                try {
                    auto summaries = sim_.simulate_summaries(theta, s);
                    auto disc = sim_.discrepancies(summaries, sim_.observed_summaries());
                    validate_discrepancies(disc);
                    d = std::move(disc);
                    used_seed = s;
                    break;
                } catch (const SimulationFailure&) {
                    if (attempt < ecfg_.max_retries) ++n_retried_;
                }
            }
            if (!d) {
                ++n_skipped_;
                continue;
            }
            log_.params.push_back(theta);
            log_.discrepancies.push_back(*d);
            log_.seeds.push_back(used_seed);

            const int done = round_ + 1;
            const bool cadence_refit = done % ecfg_.refit_every == 0;
            const bool need_hp = done >= acfg_.n_init && !have_hp_;
            if (cadence_refit || need_hp) refit_all(done);
        }
    }

    // Full refit plus posterior-mean minima at the current round count. Must
    // not disturb the loop state: a snapshot at round c leaves later rounds
    // identical to a run that never snapshotted.
    [[nodiscard]] FitResult snapshot() const {
        std::vector<GpSurrogate> surrogates(space_.size());
        if (last_refit_round_ == round_) {
            surrogates = gps_;
        } else {
            parallel_for(surrogates.size(), ecfg_.workers, [&](std::size_t j) {
                const auto fit_seed = stream_seed(seed_, StreamRole::refit,
                                                  static_cast<std::uint64_t>(round_),
                                                  fnv1a64(space_.name(j)));
                surrogates[j] = GpSurrogate::fit(log_.input_column(j),
                                                 log_.discrepancy_column(j), kcfg_, fit_seed,
                                                 ecfg_.fit, warm_[j]);
            });
        }
        FitResult result;
        result.space = space_;
        result.kernel_config = kcfg_;
        result.acquisition_config = acfg_;
        result.surrogates = std::move(surrogates);
        result.log = log_;
        result.n_retried = n_retried_;
        result.n_skipped = n_skipped_;
        const std::size_t p = space_.size();
        result.d_min.resize(p);
        result.d_min_arg.resize(p);
        result.d_obs_min.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
            const auto m = minimize_posterior_mean(result.surrogates[j], space_.lower(j),
                                                   space_.upper(j), acfg_.grid_points,
                                                   acfg_.refine_iters);
            result.d_min[j] = m.value;
            result.d_min_arg[j] = m.x;
            double obs_min = std::numeric_limits<double>::infinity();
            for (const auto& row : log_.discrepancies) obs_min = std::min(obs_min, row[j]);
            result.d_obs_min[j] = obs_min;
        }
        return result;
    }

    [[nodiscard]] int round() const { return round_; }

private:
    static void validate_discrepancies(const std::vector<double>& d) {
        for (double v : d) {
            if (!std::isfinite(v)) throw SimulationFailure("non-finite discrepancy");
            if (v < 0.0) throw std::invalid_argument("negative discrepancy from simulator");
        }
    }

    void refit_all(int round_count) {
        last_refit_round_ = round_count;
        if (log_.size() == 0) {
            for (std::size_t j = 0; j < gps_.size(); ++j) {
                gps_[j] = GpSurrogate::fit({}, {}, kcfg_,
                                           stream_seed(seed_, StreamRole::refit,
                                                       static_cast<std::uint64_t>(round_count),
                                                       fnv1a64(space_.name(j))),
                                           ecfg_.fit);
            }
            return;
        }
        parallel_for(gps_.size(), ecfg_.workers, [&](std::size_t j) {
            const auto inputs = log_.input_column(j);
            const auto targets = log_.discrepancy_column(j);
            const auto fit_seed = stream_seed(seed_, StreamRole::refit,
                                              static_cast<std::uint64_t>(round_count),
                                              fnv1a64(space_.name(j)));
            gps_[j] = GpSurrogate::fit(inputs, targets, kcfg_, fit_seed, ecfg_.fit, warm_[j]);
            warm_[j] = gps_[j].hyperparams();
        });
        have_hp_ = true;
        // Recondition is folded into fit; between refits the surrogates keep
        // their hyperparameters but must still see the newest rows.
    }

public:
    // Conditions the current surrogates on all rows with unchanged
    // hyperparameters; called before each acquisition between refits.
    void recondition() {
        if (!have_hp_ || log_.size() == 0) return;
        for (std::size_t j = 0; j < gps_.size(); ++j) {
            if (gps_[j].size() == log_.size()) continue;
            gps_[j] = GpSurrogate::condition(log_.input_column(j), log_.discrepancy_column(j),
                                             gps_[j].hyperparams(), kcfg_);
        }
    }

private:
    const Simulator& sim_;
    ParameterSpace space_;
    KernelConfig kcfg_;
    AcquisitionConfig acfg_;
    EngineConfig ecfg_;
    std::uint64_t seed_;
    EvaluationLog log_;
    std::vector<GpSurrogate> gps_;
    std::vector<std::optional<GpHyperparams>> warm_;
    bool have_hp_;
    int round_ = 0;
    int last_refit_round_ = -1;
    int n_retried_ = 0;
    int n_skipped_ = 0;
};

}  // namespace detail

// The Split-BOLFI loop with snapshots at each requested budget: one
// discrepancy log and one GP per parameter, alternating acquisition,
// simulation, per-parameter discrepancy evaluation and cadence refits.
// Snapshots at budget c are bit-identical to a plain run with n_acq = c
// because every random draw is keyed by (seed, absolute round, role).
[[nodiscard]] inline std::vector<FitResult> run_split_bolfi_checkpointed(
    const Simulator& sim, std::vector<int> checkpoints, const KernelConfig& kcfg,
    const AcquisitionConfig& acfg, std::uint64_t seed, const EngineConfig& ecfg = {}) {
    if (checkpoints.empty()) throw std::invalid_argument("run_split_bolfi: no checkpoints");
    std::sort(checkpoints.begin(), checkpoints.end());
    if (checkpoints.front() < acfg.n_init) {
        throw std::invalid_argument("run_split_bolfi: n_acq below n_init");
    }
    detail::SplitBolfiRun run(sim, kcfg, acfg, ecfg, seed);
    std::vector<FitResult> results;
    results.reserve(checkpoints.size());
    for (int c : checkpoints) {
        run.advance_to(c);
        results.push_back(run.snapshot());
    }
    return results;
}

[[nodiscard]] inline FitResult run_split_bolfi(const Simulator& sim, int n_acq,
                                               const KernelConfig& kcfg,
                                               const AcquisitionConfig& acfg,
                                               std::uint64_t seed,
                                               const EngineConfig& ecfg = {}) {
    return run_split_bolfi_checkpointed(sim, {n_acq}, kcfg, acfg, seed, ecfg).front();
}

// --- JSON serialization -----------------------------------------------

[[nodiscard]] inline nlohmann::json fit_result_to_json(const FitResult& fr) {
    nlohmann::json j;
    j["space"] = {{"names", fr.space.names()}, {"lower", nlohmann::json::array()},
                  {"upper", nlohmann::json::array()}};
    for (std::size_t k = 0; k < fr.space.size(); ++k) {
        j["space"]["lower"].push_back(fr.space.lower(k));
        j["space"]["upper"].push_back(fr.space.upper(k));
    }
    const auto& kc = fr.kernel_config;
    j["kernel_config"] = {{"variance_prior_rate", kc.variance_prior_rate},
                          {"lengthscale_prior_shape", kc.lengthscale_prior_shape},
                          {"lengthscale_prior_rate", kc.lengthscale_prior_rate},
                          {"noise_prior_rate", kc.noise_prior_rate},
                          {"noise_floor", kc.noise_floor},
                          {"matern_order", static_cast<int>(kc.order)}};
    if (kc.lengthscale_fixed) j["kernel_config"]["lengthscale_fixed"] = *kc.lengthscale_fixed;
    const auto& ac = fr.acquisition_config;
    j["acquisition_config"] = {{"beta", ac.beta},
                               {"n_init", ac.n_init},
                               {"jitter_fraction", ac.jitter_fraction},
                               {"grid_points", ac.grid_points},
                               {"refine_iters", ac.refine_iters}};
    j["log"] = {{"params", fr.log.params},
                {"discrepancies", fr.log.discrepancies},
                {"seeds", fr.log.seeds}};
    j["surrogates"] = nlohmann::json::array();
    for (const auto& gp : fr.surrogates) {
        j["surrogates"].push_back({{"signal_variance", gp.hyperparams().signal_variance},
                                   {"lengthscale", gp.hyperparams().lengthscale},
                                   {"noise_variance", gp.hyperparams().noise_variance},
                                   {"prior_mean", gp.prior_mean()}});
    }
    j["d_min"] = fr.d_min;
    j["d_min_arg"] = fr.d_min_arg;
    j["d_obs_min"] = fr.d_obs_min;
    j["n_retried"] = fr.n_retried;
    j["n_skipped"] = fr.n_skipped;
    return j;
}

[[nodiscard]] inline FitResult fit_result_from_json(const nlohmann::json& j) {
    FitResult fr;
    fr.space = ParameterSpace(j.at("space").at("names").get<std::vector<std::string>>(),
                              j.at("space").at("lower").get<std::vector<double>>(),
                              j.at("space").at("upper").get<std::vector<double>>());
    const auto& kc = j.at("kernel_config");
    fr.kernel_config.variance_prior_rate = kc.at("variance_prior_rate").get<double>();
    fr.kernel_config.lengthscale_prior_shape = kc.at("lengthscale_prior_shape").get<double>();
    fr.kernel_config.lengthscale_prior_rate = kc.at("lengthscale_prior_rate").get<double>();
    fr.kernel_config.noise_prior_rate = kc.at("noise_prior_rate").get<double>();
    fr.kernel_config.noise_floor = kc.at("noise_floor").get<double>();
    fr.kernel_config.order = static_cast<MaternOrder>(kc.at("matern_order").get<int>());
    if (kc.contains("lengthscale_fixed")) {
        fr.kernel_config.lengthscale_fixed = kc.at("lengthscale_fixed").get<double>();
    }
    const auto& ac = j.at("acquisition_config");
    fr.acquisition_config.beta = ac.at("beta").get<double>();
    fr.acquisition_config.n_init = ac.at("n_init").get<int>();
    fr.acquisition_config.jitter_fraction = ac.at("jitter_fraction").get<double>();
    fr.acquisition_config.grid_points = ac.at("grid_points").get<int>();
    fr.acquisition_config.refine_iters = ac.at("refine_iters").get<int>();
    fr.log.params = j.at("log").at("params").get<std::vector<std::vector<double>>>();
    fr.log.discrepancies =
        j.at("log").at("discrepancies").get<std::vector<std::vector<double>>>();
    fr.log.seeds = j.at("log").at("seeds").get<std::vector<std::uint64_t>>();
    fr.d_min = j.at("d_min").get<std::vector<double>>();
    fr.d_min_arg = j.at("d_min_arg").get<std::vector<double>>();
    fr.d_obs_min = j.at("d_obs_min").get<std::vector<double>>();
    fr.n_retried = j.at("n_retried").get<int>();
    fr.n_skipped = j.at("n_skipped").get<int>();
    for (std::size_t k = 0; k < fr.space.size(); ++k) {
        const auto& s = j.at("surrogates").at(k);
        GpHyperparams hp{s.at("signal_variance").get<double>(),
                         s.at("lengthscale").get<double>(),
                         s.at("noise_variance").get<double>()};
        fr.surrogates.push_back(GpSurrogate::condition(
            fr.log.input_column(k), fr.log.discrepancy_column(k), hp, fr.kernel_config));
    }
    return fr;
}

}  // namespace splitbolfi

#endif  // SPLITBOLFI_ENGINE_HPP
