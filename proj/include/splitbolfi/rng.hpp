#ifndef SPLITBOLFI_RNG_HPP
#define SPLITBOLFI_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace splitbolfi {

// splitmix64 finalizer; also used to key substreams.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

enum class StreamRole : std::uint64_t {
    prior_draw = 1,
    acquisition = 2,
    simulate = 3,
    refit = 4,
    abc_prior = 5,
    abc_simulate = 6,
    observed_data = 7,
};

// Derives a substream seed from (master, role, a, b). Streams keyed by
// distinct tuples are independent for all practical purposes.
[[nodiscard]] constexpr std::uint64_t stream_seed(std::uint64_t master, StreamRole role,
                                                  std::uint64_t a = 0,
                                                  std::uint64_t b = 0) noexcept {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ static_cast<std::uint64_t>(role));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return h;
}

// xoshiro256** with splitmix64 seeding. Self-contained so that streams are
// bit-reproducible across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = mix64(s);
            word = s;
        }
        has_cached_normal_ = false;
        cached_normal_ = 0.0;
    }

    [[nodiscard]] std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    [[nodiscard]] double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller, second draw cached.
    [[nodiscard]] double normal() noexcept {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(a);
        has_cached_normal_ = true;
        return r * std::cos(a);
    }

    [[nodiscard]] double exponential(double rate) noexcept {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -std::log(u) / rate;
    }

    // Gamma with integer shape as a sum of exponentials; fractional shapes are
    // not needed here.
    [[nodiscard]] double gamma_int_shape(int shape, double rate) noexcept {
        double sum = 0.0;
        for (int i = 0; i < shape; ++i) sum += exponential(rate);
        return sum;
    }

    [[nodiscard]] bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    [[nodiscard]] static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double cached_normal_;
    bool has_cached_normal_;
};

}  // namespace splitbolfi

#endif  // SPLITBOLFI_RNG_HPP
