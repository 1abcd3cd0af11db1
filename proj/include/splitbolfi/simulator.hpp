#ifndef SPLITBOLFI_SIMULATOR_HPP
#define SPLITBOLFI_SIMULATOR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitbolfi/parameter_space.hpp"

namespace splitbolfi {

class SimulationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DiscrepancyNorm {
    squared,
    absolute,
};

[[nodiscard]] inline double discrepancy_of(double sim, double obs, DiscrepancyNorm norm) {
    const double diff = sim - obs;
    return norm == DiscrepancyNorm::squared ? diff * diff : std::abs(diff);
}

// Forward model + named summary statistics + per-parameter discrepancy
// mapping. Implementations must be pure functions of (theta, seed) and safe
// to call concurrently.
class Simulator {
public:
    virtual ~Simulator() = default;

    [[nodiscard]] virtual const ParameterSpace& space() const = 0;
    [[nodiscard]] virtual std::vector<std::string> summary_names() const = 0;
    [[nodiscard]] virtual std::vector<double> simulate_summaries(
        const std::vector<double>& theta, std::uint64_t seed) const = 0;
    [[nodiscard]] virtual const std::vector<double>& observed_summaries() const = 0;

    // Combines simulated and observed summaries into one discrepancy per
    // parameter; zero whenever the summaries feeding a parameter coincide.
    [[nodiscard]] virtual std::vector<double> discrepancies(
        const std::vector<double>& sim_summaries,
        const std::vector<double>& obs_summaries) const = 0;

    [[nodiscard]] std::vector<double> discrepancies_at(const std::vector<double>& theta,
                                                       std::uint64_t seed) const {
        return discrepancies(simulate_summaries(theta, seed), observed_summaries());
    }
};

}  // namespace splitbolfi

#endif  // SPLITBOLFI_SIMULATOR_HPP
