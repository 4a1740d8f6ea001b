#pragma once

#include <array>
#include <cmath>

#include "vvfx/black_scholes.hpp"
#include "vvfx/errors.hpp"

namespace vvfx {

/// Weights of three vanillas struck at k1 < k2 < k3 that replicate the vega, vanna and
/// volga of a vanilla struck at `strike`, all evaluated at the flat vol `sigma_atm`.
/// Exact interpolation: w_i(k_i) = 1 and w_i(k_j) = 0 for i != j.
[[nodiscard]] inline std::array<double, 3> closed_form_weights(double strike, const std::array<double, 3>& k,
                                                               const MarketSnapshot& m, double tau,
                                                               double sigma_atm) {
    if (!(k[0] > 0.0 && k[0] < k[1] && k[1] < k[2])) {
        throw DomainError("closed_form_weights: pillars must satisfy 0 < K1 < K2 < K3");
    }
    detail::require(strike > 0.0, "closed_form_weights: strike must be > 0");
    // at a pillar the log ratios are exactly zero/one; short-circuit to keep the identity exact
    for (std::size_t i = 0; i < 3; ++i) {
        if (strike == k[i]) {
            std::array<double, 3> e{0.0, 0.0, 0.0};
            e[i] = 1.0;
            return e;
        }
    }
    const double v = vanilla_vega(m, strike, sigma_atm, tau);
    const double v1 = vanilla_vega(m, k[0], sigma_atm, tau);
    const double v2 = vanilla_vega(m, k[1], sigma_atm, tau);
    const double v3 = vanilla_vega(m, k[2], sigma_atm, tau);
    const double l21 = std::log(k[1] / k[0]);
    const double l31 = std::log(k[2] / k[0]);
    const double l32 = std::log(k[2] / k[1]);
    const double lk1 = std::log(strike / k[0]);
    const double lk2 = std::log(strike / k[1]);
    const double lk3 = std::log(strike / k[2]);
    return {
        v / v1 * (lk2 * lk3) / (l21 * l31),
        v / v2 * (lk1 * -lk3) / (l21 * l32),
        v / v3 * (lk1 * lk2) / (l31 * l32),
    };
}

struct AtmRrBfWeights {
    double atm;
    double rr;
    double bf;
};

/// Maps pillar weights (put wing, ATM, call wing) onto the ATM straddle / risk reversal /
/// butterfly basis.
[[nodiscard]] constexpr AtmRrBfWeights weights_atm_rr_bf(const std::array<double, 3>& w) noexcept {
    return {w[0] + w[1] + w[2], 0.5 * (w[2] - w[0]), w[0] + w[2]};
}

}  // namespace vvfx
