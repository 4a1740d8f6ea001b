#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "vvfx/errors.hpp"

namespace vvfx::num {

[[nodiscard]] inline double norm_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

[[nodiscard]] inline double norm_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

[[nodiscard]] inline double norm_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_inv: probability outside (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

/// Bracketed root of f on [lo, hi] (TOMS 748). Throws NoSolutionError if f(lo), f(hi)
/// do not bracket a sign change.
template <class F>
[[nodiscard]] double find_root(F&& f, double lo, double hi, double x_rel_tol = 1e-15,
                               std::uintmax_t max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi) || !std::isfinite(flo) || !std::isfinite(fhi)) {
        throw NoSolutionError("find_root: no sign change on bracket");
    }
    auto tol = [x_rel_tol](double a, double b) {
        return std::abs(a - b) <= x_rel_tol * std::max(std::abs(a), std::abs(b));
    };
    std::uintmax_t iters = max_iter;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (r.first + r.second);
}

/// Location of the maximum of f on [lo, hi] (Brent).
template <class F>
[[nodiscard]] double argmax(F&& f, double lo, double hi) {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, lo, hi,
                                                   std::numeric_limits<double>::digits / 2, iters);
    return r.first;
}

}  // namespace vvfx::num
