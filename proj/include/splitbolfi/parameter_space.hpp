#ifndef SPLITBOLFI_PARAMETER_SPACE_HPP
#define SPLITBOLFI_PARAMETER_SPACE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace splitbolfi {

// Named parameters with bounded uniform priors; the theta domain.
class ParameterSpace {
public:
    ParameterSpace() = default;

    ParameterSpace(std::vector<std::string> names, std::vector<double> lower,
                   std::vector<double> upper)
        : names_(std::move(names)), lower_(std::move(lower)), upper_(std::move(upper)) {
        if (names_.size() != lower_.size() || names_.size() != upper_.size()) {
            throw std::invalid_argument("ParameterSpace: size mismatch");
        }
        std::unordered_set<std::string> seen;
        for (std::size_t j = 0; j < names_.size(); ++j) {
            if (!seen.insert(names_[j]).second) {
                throw std::invalid_argument("ParameterSpace: duplicate name " + names_[j]);
            }
            if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]) ||
                !(lower_[j] < upper_[j])) {
                throw std::invalid_argument("ParameterSpace: bad bounds for " + names_[j]);
            }
        }
    }

    [[nodiscard]] std::size_t size() const { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] const std::string& name(std::size_t j) const { return names_.at(j); }
    [[nodiscard]] double lower(std::size_t j) const { return lower_.at(j); }
    [[nodiscard]] double upper(std::size_t j) const { return upper_.at(j); }
    [[nodiscard]] double width(std::size_t j) const { return upper_.at(j) - lower_.at(j); }

    [[nodiscard]] std::size_t index_of(const std::string& name) const {
        for (std::size_t j = 0; j < names_.size(); ++j) {
            if (names_[j] == name) return j;
        }
        throw std::out_of_range("ParameterSpace: unknown parameter " + name);
    }

    [[nodiscard]] bool contains(const std::vector<double>& theta) const {
        if (theta.size() != size()) return false;
        for (std::size_t j = 0; j < size(); ++j) {
            if (theta[j] < lower_[j] || theta[j] > upper_[j]) return false;
        }
        return true;
    }

    [[nodiscard]] double clamp(std::size_t j, double x) const {
        return std::min(upper_.at(j), std::max(lower_.at(j), x));
    }

private:
    std::vector<std::string> names_;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

}  // namespace splitbolfi

#endif  // SPLITBOLFI_PARAMETER_SPACE_HPP
