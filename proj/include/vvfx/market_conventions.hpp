#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "vvfx/errors.hpp"
#include "vvfx/numerics.hpp"

namespace vvfx {

enum class OptionSide { Call, Put };

[[nodiscard]] constexpr double side_sign(OptionSide s) noexcept {
    return s == OptionSide::Call ? 1.0 : -1.0;
}

enum class DeltaStyle { Spot, Forward };
enum class PremiumStyle { Excluded, Included };
enum class AtmStyle { DeltaNeutralExcluded, DeltaNeutralIncluded };

/// Quote conventions for one currency pair. The ATM style must match the premium style:
/// a delta-neutral straddle is only neutral under the delta it is measured with.
struct Conventions {
    DeltaStyle delta_style = DeltaStyle::Spot;
    PremiumStyle premium_style = PremiumStyle::Excluded;
    AtmStyle atm_style = AtmStyle::DeltaNeutralExcluded;

    [[nodiscard]] static Conventions make(DeltaStyle d, PremiumStyle p) noexcept {
        return {d, p,
                p == PremiumStyle::Excluded ? AtmStyle::DeltaNeutralExcluded
                                            : AtmStyle::DeltaNeutralIncluded};
    }

    [[nodiscard]] bool consistent() const noexcept {
        return (premium_style == PremiumStyle::Excluded) ==
               (atm_style == AtmStyle::DeltaNeutralExcluded);
    }

    friend bool operator==(const Conventions&, const Conventions&) = default;
};

/// Spot, flat continuously-compounded rates and valuation date for one pair.
/// Spot is quoted as Ccy2 per unit of Ccy1; r_d is the Ccy2 rate, r_f the Ccy1 rate.
struct MarketSnapshot {
    std::chrono::year_month_day valuation_date{};
    double spot = 1.0;
    double r_d = 0.0;
    double r_f = 0.0;

    [[nodiscard]] double df_d(double tau) const {
        detail::require(tau >= 0.0, "discount factor: negative tau");
        return std::exp(-r_d * tau);
    }
    [[nodiscard]] double df_f(double tau) const {
        detail::require(tau >= 0.0, "discount factor: negative tau");
        return std::exp(-r_f * tau);
    }

    [[nodiscard]] MarketSnapshot with_spot(double s) const {
        MarketSnapshot m = *this;
        m.spot = s;
        return m;
    }

    void validate() const {
        if (!(spot > 0.0) || !std::isfinite(spot)) throw ValidationError("snapshot: spot must be > 0");
        if (!std::isfinite(r_d) || !std::isfinite(r_f)) throw ValidationError("snapshot: non-finite rate");
    }
};

/// ACT/365 year fraction between two dates.
[[nodiscard]] inline double year_fraction(std::chrono::year_month_day from,
                                          std::chrono::year_month_day to) {
    const auto days = (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
    return static_cast<double>(days) / 365.0;
}

/// Parses an ISO "YYYY-MM-DD" date.
[[nodiscard]] inline std::chrono::year_month_day parse_date(std::string_view s) {
    int y = 0;
    unsigned m = 0, d = 0;
    std::string buf(s);
    char tail = 0;
    if (std::sscanf(buf.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
        throw ValidationError("invalid date '" + buf + "', expected YYYY-MM-DD");
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw ValidationError("invalid calendar date '" + buf + "'");
    return ymd;
}

[[nodiscard]] inline std::string format_date(std::chrono::year_month_day d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

[[nodiscard]] inline double forward_price(const MarketSnapshot& m, double tau) {
    detail::require(tau >= 0.0, "forward_price: negative tau");
    return m.spot * std::exp((m.r_d - m.r_f) * tau);
}

namespace detail {

struct D12 {
    double d1;
    double d2;
};

[[nodiscard]] inline D12 d12(double fwd, double strike, double sigma, double tau) noexcept {
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (std::log(fwd / strike) + 0.5 * sd * sd) / sd;
    return {d1, d1 - sd};
}

}  // namespace detail

/// Convention-dependent quoted delta, in units of Ccy1.
///
/// Premium-excluded deltas are the Black-Scholes spot derivative (spot style) or the
/// forward-hedge nominal N(±d1) (forward style). Premium-included deltas subtract the
/// premium expressed in Ccy1, so that spot * (delta_excl - delta_incl) = premium for spot
/// style; the forward flavours divide both by DF_f.
[[nodiscard]] inline double delta(OptionSide side, const MarketSnapshot& m, double strike, double sigma,
                                  double tau, const Conventions& conv) {
    detail::require(sigma > 0.0, "delta: sigma must be > 0");
    detail::require(tau > 0.0, "delta: tau must be > 0");
    detail::require(strike > 0.0, "delta: strike must be > 0");
    const double w = side_sign(side);
    const double fwd = forward_price(m, tau);
    const auto [d1, d2] = detail::d12(fwd, strike, sigma, tau);
    const double scale = conv.delta_style == DeltaStyle::Spot ? m.df_f(tau) : 1.0;
    if (conv.premium_style == PremiumStyle::Excluded) {
        return w * scale * num::norm_cdf(w * d1);
    }
    // K/S * DF_d == K/F * DF_f
    return w * scale * (strike / fwd) * num::norm_cdf(w * d2);
}

/// Delta-neutral straddle strike: F e^{+s^2 t/2} for premium-excluded, F e^{-s^2 t/2} for
/// premium-included deltas. Identical for spot and forward styles.
[[nodiscard]] inline double atm_strike(double fwd, double sigma_atm, double tau, const Conventions& conv) {
    detail::require(sigma_atm >= 0.0, "atm_strike: negative sigma");
    detail::require(tau >= 0.0, "atm_strike: negative tau");
    detail::require(fwd > 0.0, "atm_strike: forward must be > 0");
    const double half_var = 0.5 * sigma_atm * sigma_atm * tau;
    return conv.atm_style == AtmStyle::DeltaNeutralExcluded ? fwd * std::exp(half_var)
                                                            : fwd * std::exp(-half_var);
}

/// Strike whose convention delta equals `target_delta`.
///
/// Solved by bracketed root search on [F e^{-8 s sqrt(t)}, F e^{+8 s sqrt(t)}]. The
/// premium-included call delta is hump-shaped in strike; the bracket is then restricted to
/// the decreasing branch right of the hump, i.e. the out-of-the-money root.
[[nodiscard]] inline double strike_from_delta(double target_delta, OptionSide side, double sigma,
                                              const MarketSnapshot& m, double tau,
                                              const Conventions& conv) {
    detail::require(sigma > 0.0 && tau > 0.0, "strike_from_delta: sigma and tau must be > 0");
    const double w = side_sign(side);
    const double bound = conv.delta_style == DeltaStyle::Spot ? m.df_f(tau) : 1.0;
    if (!(w * target_delta > 0.0 && w * target_delta < bound)) {
        throw NoSolutionError("strike_from_delta: target delta outside the attainable range");
    }
    const double fwd = forward_price(m, tau);
    const double sd = sigma * std::sqrt(tau);
    double lo = fwd * std::exp(-8.0 * sd);
    double hi = fwd * std::exp(8.0 * sd);
    auto f = [&](double k) { return delta(side, m, k, sigma, tau, conv) - target_delta; };

    if (side == OptionSide::Call && conv.premium_style == PremiumStyle::Included) {
        const double k_peak = num::argmax([&](double k) { return delta(side, m, k, sigma, tau, conv); },
                                          lo, hi);
        if (f(k_peak) < 0.0) {
            throw NoSolutionError("strike_from_delta: premium-included call delta never reaches target");
        }
        lo = k_peak;
    }
    try {
        return num::find_root(f, lo, hi);
    } catch (const NoSolutionError&) {
        throw NoSolutionError("strike_from_delta: no strike attains the target delta within 8 stdevs");
    }
}

}  // namespace vvfx
