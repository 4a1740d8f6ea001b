#pragma once

#include <algorithm>
#include <cmath>

#include "vvfx/errors.hpp"
#include "vvfx/market_conventions.hpp"
#include "vvfx/numerics.hpp"

namespace vvfx {

/// Below this total standard deviation prices collapse to the deterministic forward path.
inline constexpr double kDegenerateStdDev = 1e-8;

/// Vol sensitivities of a price: dV/dsigma, d2V/dS dsigma, d2V/dsigma2.
struct GreeksTriple {
    double vega = 0.0;
    double vanna = 0.0;
    double volga = 0.0;

    GreeksTriple& operator+=(const GreeksTriple& o) noexcept {
        vega += o.vega;
        vanna += o.vanna;
        volga += o.volga;
        return *this;
    }
    friend GreeksTriple operator+(GreeksTriple a, const GreeksTriple& b) noexcept { return a += b; }
    friend GreeksTriple operator*(double s, const GreeksTriple& g) noexcept {
        return {s * g.vega, s * g.vanna, s * g.volga};
    }
    friend GreeksTriple operator-(const GreeksTriple& a, const GreeksTriple& b) noexcept {
        return a + (-1.0) * b;
    }
};

[[nodiscard]] inline double vanilla_price(OptionSide side, const MarketSnapshot& m, double strike,
                                          double sigma, double tau) {
    detail::require(strike > 0.0 && m.spot > 0.0, "vanilla_price: spot and strike must be > 0");
    detail::require(sigma >= 0.0 && tau >= 0.0, "vanilla_price: negative sigma or tau");
    const double w = side_sign(side);
    const double fwd = forward_price(m, tau);
    const double dfd = m.df_d(tau);
    if (sigma * std::sqrt(tau) < kDegenerateStdDev) {
        return dfd * std::max(w * (fwd - strike), 0.0);
    }
    const auto [d1, d2] = detail::d12(fwd, strike, sigma, tau);
    return w * dfd * (fwd * num::norm_cdf(w * d1) - strike * num::norm_cdf(w * d2));
}

/// Analytic vega, vanna and volga. Identical for calls and puts.
[[nodiscard]] inline GreeksTriple vanilla_greeks(const MarketSnapshot& m, double strike, double sigma,
                                                 double tau) {
    detail::require(sigma > 0.0 && tau > 0.0, "vanilla_greeks: sigma and tau must be > 0");
    const double fwd = forward_price(m, tau);
    const auto [d1, d2] = detail::d12(fwd, strike, sigma, tau);
    const double nd1 = num::norm_pdf(d1);
    const double vega = m.spot * m.df_f(tau) * std::sqrt(tau) * nd1;
    return {vega, -m.df_f(tau) * nd1 * d2 / sigma, vega * d1 * d2 / sigma};
}

[[nodiscard]] inline double vanilla_vega(const MarketSnapshot& m, double strike, double sigma, double tau) {
    return vanilla_greeks(m, strike, sigma, tau).vega;
}

/// Black-Scholes implied volatility by safeguarded Newton iteration on [0, 5].
///
/// Throws NumericalError when the price lies outside the no-arbitrage bounds or above the
/// price attainable at 500% vol.
[[nodiscard]] inline double implied_vol(OptionSide side, double price, const MarketSnapshot& m,
                                        double strike, double tau) {
    detail::require(tau > 0.0 && strike > 0.0, "implied_vol: tau and strike must be > 0");
    constexpr double kMaxVol = 5.0;
    const double w = side_sign(side);
    const double fwd = forward_price(m, tau);
    const double dfd = m.df_d(tau);
    const double lower = dfd * std::max(w * (fwd - strike), 0.0);
    const double upper = side == OptionSide::Call ? dfd * fwd : dfd * strike;
    const double tol = 1e-14 * m.spot;
    if (!(price >= lower - tol && price < upper)) {
        throw NumericalError("implied_vol: price outside no-arbitrage bounds");
    }
    if (price <= lower + tol) return 0.0;
    if (price > vanilla_price(side, m, strike, kMaxVol, tau)) {
        throw NumericalError("implied_vol: price requires vol above 500%");
    }

    double lo = 0.0;
    double hi = kMaxVol;
    // Start at the inflection point of the price in sigma, where Newton is globally convergent.
    double s = std::sqrt(2.0 * std::abs(std::log(fwd / strike)) / tau);
    s = std::clamp(s, 0.05, kMaxVol);
    for (int it = 0; it < 200; ++it) {
        const double diff = vanilla_price(side, m, strike, s, tau) - price;
        if (std::abs(diff) <= tol) return s;
        if (diff > 0.0) hi = s; else lo = s;
        const double vega = vanilla_vega(m, strike, s, tau);
        double next = vega > 0.0 ? s - diff / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-16 * s) return next;
        s = next;
    }
    return s;
}

}  // namespace vvfx
