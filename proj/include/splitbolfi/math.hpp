#ifndef SPLITBOLFI_MATH_HPP
#define SPLITBOLFI_MATH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace splitbolfi {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

[[nodiscard]] inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Trapezoid rule on a uniformly spaced grid with spacing h.
[[nodiscard]] inline double trapezoid(std::span<const double> values, double h) {
    if (values.size() < 2) return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * h;
}

struct MinimizeResult {
    double x = 0.0;
    double value = std::numeric_limits<double>::infinity();
};

// Coarse uniform grid scan followed by golden-section refinement around the
// best cell. Ties on the grid break toward the lowest coordinate.
template <typename F>
[[nodiscard]] MinimizeResult minimize_grid_golden(F&& f, double lo, double hi,
                                                  int grid_points, int refine_iters) {
    if (!(lo < hi)) throw std::invalid_argument("minimize_grid_golden: empty interval");
    if (grid_points < 2) throw std::invalid_argument("minimize_grid_golden: grid too small");

    const double h = (hi - lo) / (grid_points - 1);
    MinimizeResult best;
    int best_idx = 0;
    for (int i = 0; i < grid_points; ++i) {
        const double x = (i == grid_points - 1) ? hi : lo + h * i;
        const double v = f(x);
        if (v < best.value) {
            best = {x, v};
            best_idx = i;
        }
    }

    double a = std::max(lo, best.x - h);
    double b = std::min(hi, best.x + h);
    (void)best_idx;
    constexpr double inv_phi = 0.6180339887498948482045868343656;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < refine_iters; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    for (double x : {x1, x2}) {
        const double v = (x == x1) ? f1 : f2;
        if (v < best.value || (v == best.value && x < best.x)) best = {x, v};
    }
    return best;
}

struct NelderMeadOptions {
    int max_evals = 200;
    double tol = 1e-7;
    double initial_step = 0.5;
};

// Minimizes f over R^d with a standard Nelder-Mead simplex. Deterministic
// given the start point.
template <typename F>
[[nodiscard]] std::vector<double> nelder_mead(F&& f, std::vector<double> x0,
                                              const NelderMeadOptions& opt = {}) {
    const std::size_t d = x0.size();
    struct Vertex {
        std::vector<double> x;
        double value;
    };
    std::vector<Vertex> simplex;
    simplex.reserve(d + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };
    simplex.push_back({x0, eval(x0)});
    for (std::size_t i = 0; i < d; ++i) {
        auto x = x0;
        x[i] += opt.initial_step;
        simplex.push_back({x, eval(x)});
    }
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.value < b.value; };
    std::sort(simplex.begin(), simplex.end(), by_value);

    while (evals < opt.max_evals) {
        const Vertex& best = simplex.front();
        const Vertex& worst = simplex.back();
        if (std::abs(worst.value - best.value) <=
            opt.tol * (std::abs(best.value) + std::abs(worst.value) + 1e-12)) {
            break;
        }
        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t v = 0; v + 1 < simplex.size(); ++v) centroid[i] += simplex[v].x[i];
            centroid[i] /= static_cast<double>(d);
        }
        auto affine = [&](double t) {
            std::vector<double> x(d);
            for (std::size_t i = 0; i < d; ++i) x[i] = centroid[i] + t * (worst.x[i] - centroid[i]);
            return x;
        };
        auto reflected = affine(-1.0);
        const double fr = eval(reflected);
        if (fr < best.value) {
            auto expanded = affine(-2.0);
            const double fe = eval(expanded);
            simplex.back() = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
        } else if (fr < simplex[simplex.size() - 2].value) {
            simplex.back() = {reflected, fr};
        } else {
            auto contracted = affine(fr < worst.value ? -0.5 : 0.5);
            const double fc = eval(contracted);
            if (fc < std::min(fr, worst.value)) {
                simplex.back() = {contracted, fc};
            } else {
                for (std::size_t v = 1; v < simplex.size(); ++v) {
                    for (std::size_t i = 0; i < d; ++i) {
                        simplex[v].x[i] = 0.5 * (simplex[v].x[i] + simplex[0].x[i]);
                    }
                    simplex[v].value = eval(simplex[v].x);
                }
            }
        }
        std::sort(simplex.begin(), simplex.end(), by_value);
    }
    return simplex.front().x;
}

[[nodiscard]] inline double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Unbiased (n-1 denominator) standard deviation.
[[nodiscard]] inline double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

[[nodiscard]] inline double rmse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("rmse: size mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace splitbolfi

#endif  // SPLITBOLFI_MATH_HPP
